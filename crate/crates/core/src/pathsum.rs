//! Evolution as a sum over paths.
//!
//! [`path_sum_evolve`] enumerates every sequence of intermediate
//! configurations and adds up the products of one-step matrix elements,
//! reproducing `U^s psi` without ever forming a matrix power.
//! [`short_time_kernel`] is the grid version for continuous space: one slice
//! of the free-particle propagator times a left-point potential phase, with
//! `dx` standing in for the path-space volume element of every intermediate
//! point.
//!
//! Sums follow lexicographic path order and are combined by a fixed pairwise
//! tree, so results are bit-for-bit reproducible regardless of how the
//! endpoints are distributed over threads.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::evolution::UnitaryStep;
use crate::state::{GridSpec, PhysicsParams, Space, WaveFunction};
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
/// Pre-normalization norms below this abort a sliced propagation.
pub const NORM_COLLAPSE: f64 = 1e-6;
/// Pre-normalization norms above this abort a sliced propagation.
pub const NORM_BLOWUP: f64 = 1e6;

/// Configuration indices `q_t, q_{t+1}, ..., q_{t+s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    points: Vec<usize>,
    start_time: f64,
    dt: f64,
}

impl Path {
    pub fn new(points: Vec<usize>, start_time: f64, dt: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a path needs at least two points".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { points, start_time, dt })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> usize {
        self.points[0]
    }

    pub fn endpoint(&self) -> usize {
        *self.points.last().expect("nonempty path")
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.steps() as f64 * self.dt
    }
}

pub(crate) fn check_cap(requested: u128, cap: u64) -> Result<()> {
    if requested > cap as u128 {
        Err(Error::EnumerationCapExceeded { requested, cap })
    } else {
        Ok(())
    }
}

pub(crate) fn path_count(space_size: usize, exponent: usize) -> u128 {
    (0..exponent).fold(1u128, |acc, _| acc.saturating_mul(space_size as u128))
}

/// All `space_size^steps` paths ending at `endpoint`, in lexicographic order.
pub fn enumerate_paths(space_size: usize, steps: usize, endpoint: usize) -> Result<Vec<Path>> {
    enumerate_paths_with_cap(space_size, steps, endpoint, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_paths_with_cap(space_size: usize, steps: usize, endpoint: usize, cap: u64) -> Result<Vec<Path>> {
    if space_size == 0 || steps == 0 {
        return Err(Error::InvalidArgument("space_size and steps must be positive".into()));
    }
    if endpoint >= space_size {
        return Err(Error::InvalidArgument(format!("endpoint {endpoint} outside space of size {space_size}")));
    }
    check_cap(path_count(space_size, steps), cap)?;
    let mut out = Vec::with_capacity(path_count(space_size, steps) as usize);
    let mut digits = vec![0usize; steps];
    loop {
        let mut points = digits.clone();
        points.push(endpoint);
        out.push(Path { points, start_time: 0.0, dt: 1.0 });
        if !increment(&mut digits, space_size) {
            break;
        }
    }
    Ok(out)
}

/// Odometer step; returns the leftmost changed position or `None` on wrap-around.
fn increment_from(digits: &mut [usize], base: usize) -> Option<usize> {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < base {
            return Some(k);
        }
        digits[k] = 0;
    }
    None
}

fn increment(digits: &mut [usize], base: usize) -> bool {
    increment_from(digits, base).is_some()
}

/// `U(q_s, q_{s-1}) ... U(q_1, q_0) psi(q_0)`.
pub fn path_amplitude(path: &Path, u: &UnitaryStep, psi: &WaveFunction) -> Result<Complex64> {
    if psi.space() != u.space() {
        return Err(Error::SpaceMismatch);
    }
    let n = u.dim();
    if path.points.iter().any(|&q| q >= n) {
        return Err(Error::SpaceMismatch);
    }
    let mut acc = psi.amplitudes()[path.points[0]];
    for w in path.points.windows(2) {
        acc = u.entry(w[1], w[0]) * acc;
    }
    Ok(acc)
}

/// Streaming pairwise summation.
///
/// Equivalent to a balanced binary tree over blocks of size `2^k`: an item
/// enters at level 0 and equal-level partial sums merge immediately. The
/// tree shape depends only on the number of items.
#[derive(Debug, Default)]
pub(crate) struct PairwiseSum {
    stack: Vec<(u32, Complex64)>,
}

impl PairwiseSum {
    pub(crate) fn push(&mut self, value: Complex64) {
        let mut item = (0u32, value);
        while let Some(&(level, top)) = self.stack.last() {
            if level != item.0 {
                break;
            }
            self.stack.pop();
            item = (level + 1, top + item.1);
        }
        self.stack.push(item);
    }

    pub(crate) fn total(self) -> Complex64 {
        self.stack.into_iter().rev().fold(Complex64::new(0.0, 0.0), |acc, (_, v)| v + acc)
    }
}

/// Visits every path q_0..q_{s-1} -> `endpoint` in lexicographic order with
/// its amplitude, reusing prefix products between neighbours.
pub(crate) fn for_each_amplitude(
    u: &UnitaryStep,
    psi: &WaveFunction,
    steps: usize,
    endpoint: usize,
    mut visit: impl FnMut(&[usize], Complex64),
) {
    let n = u.dim();
    let amps = psi.amplitudes();
    let mut digits = vec![0usize; steps];
    // prefix[k] = amplitude of q_0..q_k
    let mut prefix = vec![Complex64::new(0.0, 0.0); steps];
    let mut from = 0usize;
    loop {
        for k in from..steps {
            prefix[k] = if k == 0 { amps[digits[0]] } else { u.entry(digits[k], digits[k - 1]) * prefix[k - 1] };
        }
        let amp = u.entry(endpoint, digits[steps - 1]) * prefix[steps - 1];
        visit(&digits, amp);
        match increment_from(&mut digits, n) {
            Some(k) => from = k,
            None => break,
        }
    }
}

/// `psi_{t+s}(r) = sum over paths ending at r of their amplitudes`.
pub fn path_sum_evolve(u: &UnitaryStep, psi: &WaveFunction, steps: usize) -> Result<WaveFunction> {
    path_sum_evolve_with_cap(u, psi, steps, DEFAULT_ENUMERATION_CAP)
}

pub fn path_sum_evolve_with_cap(u: &UnitaryStep, psi: &WaveFunction, steps: usize, cap: u64) -> Result<WaveFunction> {
    if psi.space() != u.space() {
        return Err(Error::SpaceMismatch);
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let n = u.dim();
    check_cap(path_count(n, steps + 1), cap)?;
    let out: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut sum = PairwiseSum::default();
            for_each_amplitude(u, psi, steps, r, |_, a| sum.push(a));
            sum.total()
        })
        .collect();
    WaveFunction::new(psi.space().clone(), DVector::from_vec(out), psi.time() + steps as f64 * u.dt())
}

/// One time slice `K(x', x)` of the grid path integral.
#[derive(Debug, Clone)]
pub struct ShortTimeKernel {
    matrix: DMatrix<Complex64>,
    dt: f64,
    params: PhysicsParams,
    grid: GridSpec,
}

impl ShortTimeKernel {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> PhysicsParams {
        self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
}

/// `m L dx / (2 pi hbar)`.
///
/// For slices shorter than this the sampled chirp `exp(i m d^2 / 2 hbar dt)`
/// oscillates faster than the grid can represent and the kernel aliases.
/// On a periodic grid at exactly this step the sampled free kernel is
/// unitary and reproduces the continuum dispersion `hbar k^2 / 2m` on every
/// grid wavenumber.
pub fn matched_dt(grid: &GridSpec, params: PhysicsParams) -> f64 {
    params.mass() * grid.length() * grid.dx() / (2.0 * PI * params.hbar())
}

/// `K(x', x) = sqrt(m / (2 pi i hbar dt)) exp(i m (x' - x)^2 / (2 hbar dt)) exp(-i V(x) dt / hbar) dx`.
///
/// `sqrt(1/i)` is taken as `exp(-i pi/4)`. On periodic grids `x' - x` is the
/// minimum-image displacement.
pub fn short_time_kernel(
    grid: GridSpec,
    potential: &[f64],
    params: PhysicsParams,
    dt: f64,
) -> Result<ShortTimeKernel> {
    let n = grid.n_points();
    if potential.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: potential.len() });
    }
    if let Some(index) = potential.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let (m, hbar) = (params.mass(), params.hbar());
    let dx = grid.dx();
    let length = grid.length();
    let prefactor = Complex64::from_polar((m / (2.0 * PI * hbar * dt)).sqrt() * dx, -PI / 4.0);
    let xs = grid.points();
    let potential_phase: Vec<Complex64> = potential.iter().map(|v| Complex64::from_polar(1.0, -v * dt / hbar)).collect();
    let displacement = |to: usize, from: usize| {
        let d = xs[to] - xs[from];
        if grid.is_periodic() {
            d - length * (d / length).round()
        } else {
            d
        }
    };
    let matrix = DMatrix::from_fn(n, n, |r, q| {
        let d = displacement(r, q);
        prefactor * Complex64::from_polar(1.0, m * d * d / (2.0 * hbar * dt)) * potential_phase[q]
    });
    Ok(ShortTimeKernel { matrix, dt, params, grid })
}

#[derive(Debug, Clone)]
pub struct SlicedPropagation {
    /// Final state, renormalized.
    pub psi: WaveFunction,
    /// Norm just before the final renormalization.
    pub raw_norm: f64,
    /// `raw_norm - initial norm`.
    pub norm_drift: f64,
}

/// Applies `K` `slices` times, then renormalizes.
pub fn time_sliced_propagate(k: &ShortTimeKernel, psi: &WaveFunction, slices: usize) -> Result<SlicedPropagation> {
    if psi.space() != &Space::Grid(k.grid) {
        return Err(Error::SpaceMismatch);
    }
    if slices == 0 {
        return Err(Error::InvalidArgument("slices must be at least 1".into()));
    }
    let initial = psi.norm();
    let mut amps = psi.amplitudes().clone();
    for _ in 0..slices {
        amps = &k.matrix * amps;
    }
    let out = psi.with_amplitudes(amps, psi.time() + slices as f64 * k.dt);
    let raw_norm = out.norm();
    if !(raw_norm >= NORM_COLLAPSE) {
        return Err(Error::NormCollapse { norm: raw_norm });
    }
    if raw_norm > NORM_BLOWUP {
        return Err(Error::NormBlowup { norm: raw_norm });
    }
    let scale = initial / raw_norm;
    let psi = out.with_amplitudes(out.amplitudes().map(|a| a * scale), out.time());
    Ok(SlicedPropagation { psi, raw_norm, norm_drift: raw_norm - initial })
}
