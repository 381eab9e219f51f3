//! Guidance-equation trajectories on one-dimensional grids.
//!
//! The velocity of a particle at `x` is `(hbar/m) Im(psi* d psi) / |psi|^2`.
//! `d psi` uses central differences with the grid's boundary rule (zero
//! beyond a Dirichlet edge). Off-grid values interpolate the complex
//! amplitudes and derivatives linearly in space, and a [`Timeline`] of
//! exact snapshots supplies the linear-in-time interpolation used by the
//! RK4 substeps.
//!
//! Where `|psi|^2` falls below [`NODE_EPSILON`] times the largest cell
//! density the velocity is set to zero and the event is counted.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::evolution::{evolve_trajectory, unitary_step, Hamiltonian};
use crate::state::{
    born_distribution, ks_statistic, sample_grid_positions, GridSpec, PhysicsParams, Space, WaveFunction, NORMALIZED_TOLERANCE,
};
use crate::{Error, Result};

/// Relative density below which a point counts as a node.
pub const NODE_EPSILON: f64 = 1e-12;
/// Fraction of masked velocity evaluations above which a trajectory is flagged.
pub const NODE_TRAP_FRACTION: f64 = 0.01;
/// Default local error target per `ode_dt` interval.
pub const DEFAULT_STEP_TOLERANCE: f64 = 1e-9;
/// Ordering slack used by [`crossing_violations`].
pub const CROSSING_TOLERANCE: f64 = 1e-6;

fn grid_of(psi: &WaveFunction) -> Result<GridSpec> {
    psi.space().grid().copied().ok_or(Error::NotGridSpace)
}

fn check_normalized(psi: &WaveFunction) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZED_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

fn central_difference(grid: &GridSpec, psi: &[Complex64]) -> Vec<Complex64> {
    let n = psi.len();
    let inv = 1.0 / (2.0 * grid.dx());
    let zero = Complex64::new(0.0, 0.0);
    (0..n)
        .map(|j| {
            let (left, right) = if grid.is_periodic() {
                (psi[(j + n - 1) % n], psi[(j + 1) % n])
            } else {
                (if j == 0 { zero } else { psi[j - 1] }, if j + 1 == n { zero } else { psi[j + 1] })
            };
            (right - left) * inv
        })
        .collect()
}

fn max_density(psi: &[Complex64]) -> f64 {
    psi.iter().fold(0.0_f64, |m, a| m.max(a.norm_sqr()))
}

/// Cell `[x_j, x_{j+1}]` containing `x` and the fractional offset inside it.
fn locate(grid: &GridSpec, x: f64) -> Result<(usize, usize, f64)> {
    let n = grid.n_points();
    let dx = grid.dx();
    if grid.is_periodic() {
        let u = (grid.wrap(x) - grid.x_min()) / dx;
        let j = (u.floor() as usize).min(n - 1);
        Ok((j, (j + 1) % n, (u - j as f64).clamp(0.0, 1.0)))
    } else {
        if !(x >= grid.x_min() && x <= grid.x_max()) {
            return Err(Error::OutOfDomain { x, x_min: grid.x_min(), x_max: grid.x_max() });
        }
        let u = (x - grid.x_min()) / dx;
        let j = (u.floor() as usize).min(n - 2);
        Ok((j, j + 1, (u - j as f64).clamp(0.0, 1.0)))
    }
}

fn guidance(params: PhysicsParams, psi: Complex64, dpsi: Complex64, threshold: f64) -> (f64, bool) {
    let density = psi.norm_sqr();
    if !(density >= threshold) || density == 0.0 {
        return (0.0, true);
    }
    (params.hbar() / params.mass() * (psi.conj() * dpsi).im / density, false)
}

/// Guidance velocity sampled on every grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityField {
    values: Vec<f64>,
    time: f64,
    regularization_mask: Vec<bool>,
}

impl VelocityField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `true` where the node regularization zeroed the velocity.
    pub fn regularization_mask(&self) -> &[bool] {
        &self.regularization_mask
    }

    pub fn masked_count(&self) -> usize {
        self.regularization_mask.iter().filter(|&&m| m).count()
    }
}

pub fn velocity_field(psi: &WaveFunction, params: PhysicsParams) -> Result<VelocityField> {
    let grid = grid_of(psi)?;
    check_normalized(psi)?;
    let a = psi.amplitudes().as_slice();
    let d = central_difference(&grid, a);
    let threshold = NODE_EPSILON * max_density(a);
    let (values, regularization_mask) = a.iter().zip(&d).map(|(&p, &dp)| guidance(params, p, dp, threshold)).unzip();
    Ok(VelocityField { values, time: psi.time(), regularization_mask })
}

/// Guidance velocity at an arbitrary position.
pub fn velocity_at(psi: &WaveFunction, params: PhysicsParams, x: f64) -> Result<f64> {
    let grid = grid_of(psi)?;
    check_normalized(psi)?;
    let a = psi.amplitudes().as_slice();
    let d = central_difference(&grid, a);
    let (j, k, w) = locate(&grid, x)?;
    let p = a[j] * (1.0 - w) + a[k] * w;
    let dp = d[j] * (1.0 - w) + d[k] * w;
    Ok(guidance(params, p, dp, NODE_EPSILON * max_density(a)).0)
}

#[derive(Debug, Clone)]
struct Snapshot {
    psi: Vec<Complex64>,
    dpsi: Vec<Complex64>,
    max_density: f64,
}

/// Wave-function snapshots every `ode_dt`, shared read-only by all trajectories.
#[derive(Debug, Clone)]
pub struct Timeline {
    grid: GridSpec,
    params: PhysicsParams,
    t0: f64,
    ode_dt: f64,
    tolerance: Option<f64>,
    snapshots: Vec<Snapshot>,
}

impl Timeline {
    /// Evolves `psi0` under `h` with the exact step `exp(-i ode_dt H / hbar)`.
    pub fn new(h: &Hamiltonian, psi0: &WaveFunction, t_span: f64, ode_dt: f64) -> Result<Self> {
        let grid = grid_of(psi0)?;
        check_normalized(psi0)?;
        let steps = step_count(t_span, ode_dt)?;
        let u = unitary_step(h, ode_dt)?;
        let states = evolve_trajectory(&u, psi0, steps)?;
        let snapshots = states
            .iter()
            .map(|s| {
                let psi = s.amplitudes().as_slice().to_vec();
                let dpsi = central_difference(&grid, &psi);
                let max_density = max_density(&psi);
                Snapshot { psi, dpsi, max_density }
            })
            .collect();
        Ok(Self { grid, params: h.params(), t0: psi0.time(), ode_dt, tolerance: Some(DEFAULT_STEP_TOLERANCE), snapshots })
    }

    /// Local error target of the step-doubling refinement; `None` takes a
    /// single RK4 step per `ode_dt`.
    pub fn with_step_tolerance(mut self, tolerance: Option<f64>) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn step_tolerance(&self) -> Option<f64> {
        self.tolerance
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> PhysicsParams {
        self.params
    }

    pub fn ode_dt(&self) -> f64 {
        self.ode_dt
    }

    pub fn steps(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.ode_dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps()).map(|k| self.time(k)).collect()
    }

    /// Snapshot `k` as a wave function.
    pub fn state(&self, k: usize) -> WaveFunction {
        let s = &self.snapshots[k];
        WaveFunction::new(Space::Grid(self.grid), DVector::from_vec(s.psi.clone()), self.time(k)).expect("finite snapshot")
    }

    /// Velocity at `(t, x)` and whether the node mask was hit.
    pub fn velocity(&self, t: f64, x: f64) -> Result<(f64, bool)> {
        let (j, k, w) = locate(&self.grid, x)?;
        let s = ((t - self.t0) / self.ode_dt).max(0.0);
        let i = (s.floor() as usize).min(self.steps() - 1);
        let a = (s - i as f64).clamp(0.0, 1.0);
        let (lo, hi) = (&self.snapshots[i], &self.snapshots[i + 1]);
        let space = |v: &[Complex64]| v[j] * (1.0 - w) + v[k] * w;
        let psi = space(&lo.psi) * (1.0 - a) + space(&hi.psi) * a;
        let dpsi = space(&lo.dpsi) * (1.0 - a) + space(&hi.dpsi) * a;
        let threshold = NODE_EPSILON * (lo.max_density * (1.0 - a) + hi.max_density * a);
        Ok(guidance(self.params, psi, dpsi, threshold))
    }
}

fn step_count(t_span: f64, ode_dt: f64) -> Result<usize> {
    if !(t_span.is_finite() && t_span > 0.0) {
        return Err(Error::InvalidArgument(format!("t_span must be positive, got {t_span}")));
    }
    if !(ode_dt.is_finite() && ode_dt > 0.0) {
        return Err(Error::InvalidArgument(format!("ode_dt must be positive, got {ode_dt}")));
    }
    let ratio = t_span / ode_dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidArgument(format!("ode_dt {ode_dt} does not divide t_span {t_span}")));
    }
    Ok(steps as usize)
}

/// One integrated particle path, sampled every `ode_dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    positions: Vec<f64>,
    unwrapped: Vec<f64>,
    initial_seed_index: usize,
    mask_hits: usize,
    evaluations: usize,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Positions inside the domain (wrapped on periodic grids).
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Positions on the covering line; equal to [`positions`](Self::positions) on Dirichlet grids.
    pub fn unwrapped(&self) -> &[f64] {
        &self.unwrapped
    }

    pub fn initial_seed_index(&self) -> usize {
        self.initial_seed_index
    }

    pub fn initial(&self) -> f64 {
        self.positions[0]
    }

    pub fn final_position(&self) -> f64 {
        *self.positions.last().expect("nonempty trajectory")
    }

    pub fn mask_hits(&self) -> usize {
        self.mask_hits
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// More than [`NODE_TRAP_FRACTION`] of velocity evaluations hit the node mask.
    pub fn node_trap(&self) -> bool {
        self.mask_hits as f64 > NODE_TRAP_FRACTION * self.evaluations as f64
    }
}

type Recorded = (Vec<f64>, Counters);

#[derive(Default)]
struct Counters {
    hits: usize,
    evaluations: usize,
}

/// Classical RK4 on the unwrapped coordinate; `record(k, x)` sees every output step.
///
/// Each `ode_dt` interval is refined by step doubling until one step and two
/// half steps agree to the timeline's tolerance. Near nodes the field is
/// steep and a single step would let neighbours overtake each other.
fn rk4(timeline: &Timeline, x0: f64, mut record: impl FnMut(usize, f64)) -> Result<Counters> {
    timeline.velocity(timeline.t0, x0)?;
    let mut c = Counters::default();
    {
        let mut eval = |t: f64, x: f64| -> Result<f64> {
            let (v, masked) = timeline.velocity(t, x)?;
            c.evaluations += 1;
            c.hits += masked as usize;
            Ok(v)
        };
        let mut x = x0;
        record(0, x);
        for k in 0..timeline.steps() {
            x = advance(&mut eval, timeline.time(k), x, timeline.ode_dt, timeline.tolerance, 0)?;
            if !timeline.grid.contains(x) {
                return Err(Error::OutOfDomain { x, x_min: timeline.grid.x_min(), x_max: timeline.grid.x_max() });
            }
            record(k + 1, x);
        }
    }
    Ok(c)
}

const MAX_REFINEMENT: u32 = 12;

fn rk4_step(eval: &mut impl FnMut(f64, f64) -> Result<f64>, t: f64, x: f64, k1: f64, h: f64) -> Result<f64> {
    let k2 = eval(t + 0.5 * h, x + 0.5 * h * k1)?;
    let k3 = eval(t + 0.5 * h, x + 0.5 * h * k2)?;
    let k4 = eval(t + h, x + h * k3)?;
    Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

fn advance(eval: &mut impl FnMut(f64, f64) -> Result<f64>, t: f64, x: f64, h: f64, tol: Option<f64>, depth: u32) -> Result<f64> {
    let k1 = eval(t, x)?;
    let full = rk4_step(eval, t, x, k1, h)?;
    let Some(tol) = tol else {
        return Ok(full);
    };
    let half = 0.5 * h;
    let mid = rk4_step(eval, t, x, k1, half)?;
    let k1_mid = eval(t + half, mid)?;
    let two = rk4_step(eval, t + half, mid, k1_mid, half)?;
    if (two - full).abs() <= tol || depth >= MAX_REFINEMENT {
        return Ok(two);
    }
    let left = advance(eval, t, x, half, Some(tol), depth + 1)?;
    advance(eval, t + half, left, half, Some(tol), depth + 1)
}

/// Integrates one trajectory against an existing timeline.
pub fn integrate_on(timeline: &Timeline, x0: f64, initial_seed_index: usize) -> Result<Trajectory> {
    let n = timeline.steps() + 1;
    let mut unwrapped = Vec::with_capacity(n);
    let c = rk4(timeline, x0, |_, x| unwrapped.push(x))?;
    Ok(Trajectory {
        times: timeline.times(),
        positions: unwrapped.iter().map(|&x| timeline.grid.wrap(x)).collect(),
        unwrapped,
        initial_seed_index,
        mask_hits: c.hits,
        evaluations: c.evaluations,
    })
}

pub fn integrate_trajectory(x0: f64, h: &Hamiltonian, psi0: &WaveFunction, t_span: f64, ode_dt: f64) -> Result<Trajectory> {
    let timeline = Timeline::new(h, psi0, t_span, ode_dt)?;
    integrate_on(&timeline, x0, 0)
}

/// Integrates every initial position in parallel; results keep the input order.
pub fn integrate_ensemble(timeline: &Timeline, initial: &[f64]) -> Vec<Result<Trajectory>> {
    initial.par_iter().enumerate().map(|(i, &x0)| integrate_on(timeline, x0, i)).collect()
}

/// `count` initial positions drawn from `|psi0|^2`.
pub fn sample_initial_positions(psi0: &WaveFunction, count: usize, seed: u64) -> Result<Vec<f64>> {
    sample_grid_positions(&born_distribution(psi0)?, count, seed)
}

/// Number of adjacent pairs, over all output times, whose order flipped by more than `tol`.
///
/// Ordering is taken from the initial positions and compared on the
/// unwrapped coordinate.
pub fn crossing_violations(trajectories: &[Trajectory], tol: f64) -> usize {
    let mut order: Vec<&Trajectory> = trajectories.iter().collect();
    order.sort_by(|a, b| a.unwrapped[0].total_cmp(&b.unwrapped[0]));
    let steps = order.iter().map(|t| t.unwrapped.len()).min().unwrap_or(0);
    let mut violations = 0;
    for k in 0..steps {
        for pair in order.windows(2) {
            if pair[1].unwrapped[k] < pair[0].unwrapped[k] - tol {
                violations += 1;
            }
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub step: usize,
    pub time: f64,
    pub ks: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryFailure {
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub count: usize,
    pub seed: u64,
    pub initial_ks: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub failures: Vec<TrajectoryFailure>,
    pub mask_hits: usize,
    pub evaluations: usize,
    pub node_trapped: usize,
}

impl EquivarianceReport {
    pub fn max_ks(&self) -> f64 {
        self.checkpoints.iter().fold(self.initial_ks, |m, c| m.max(c.ks))
    }

    pub fn final_ks(&self) -> f64 {
        self.checkpoints.last().map_or(self.initial_ks, |c| c.ks)
    }
}

/// Samples `count` particles from `|psi0|^2`, moves them to `t_span`, and
/// compares them with `|psi_t|^2` at three evenly spaced checkpoints.
pub fn ensemble_equivariance(
    h: &Hamiltonian,
    psi0: &WaveFunction,
    count: usize,
    t_span: f64,
    ode_dt: f64,
    seed: u64,
) -> Result<EquivarianceReport> {
    let timeline = Timeline::new(h, psi0, t_span, ode_dt)?;
    let n = timeline.steps();
    let mut steps: Vec<usize> = (1..=3).map(|i| (i * n).div_ceil(3)).collect();
    steps.dedup();
    ensemble_equivariance_on(&timeline, count, seed, &steps)
}

/// As [`ensemble_equivariance`] with explicit checkpoint steps.
pub fn ensemble_equivariance_on(timeline: &Timeline, count: usize, seed: u64, checkpoint_steps: &[usize]) -> Result<EquivarianceReport> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    if let Some(&bad) = checkpoint_steps.iter().find(|&&k| k > timeline.steps()) {
        return Err(Error::InvalidArgument(format!("checkpoint step {bad} beyond {}", timeline.steps())));
    }
    let psi0 = timeline.state(0);
    let born0 = born_distribution(&psi0)?;
    let initial = sample_grid_positions(&born0, count, seed)?;
    let initial_ks = ks_statistic(&initial, &born0)?;

    let runs: Vec<(usize, Result<Recorded>)> = initial
        .par_iter()
        .enumerate()
        .map(|(i, &x0)| {
            let mut recorded = vec![f64::NAN; checkpoint_steps.len()];
            let out = rk4(timeline, x0, |k, x| {
                for (slot, &want) in recorded.iter_mut().zip(checkpoint_steps) {
                    if want == k {
                        *slot = x;
                    }
                }
            });
            (i, out.map(|c| (recorded, c)))
        })
        .collect();

    let mut per_checkpoint = vec![Vec::with_capacity(count); checkpoint_steps.len()];
    let mut failures = Vec::new();
    let (mut mask_hits, mut evaluations, mut node_trapped) = (0, 0, 0);
    for (index, run) in runs {
        match run {
            Ok((recorded, c)) => {
                for (bucket, x) in per_checkpoint.iter_mut().zip(recorded) {
                    bucket.push(x);
                }
                mask_hits += c.hits;
                evaluations += c.evaluations;
                node_trapped += (c.hits as f64 > NODE_TRAP_FRACTION * c.evaluations as f64) as usize;
            }
            Err(e) => failures.push(TrajectoryFailure { index, error: e.to_string() }),
        }
    }

    let checkpoints = checkpoint_steps
        .iter()
        .zip(&per_checkpoint)
        .map(|(&step, xs)| {
            let ks = if xs.is_empty() { 1.0 } else { ks_statistic(xs, &born_distribution(&timeline.state(step))?)? };
            Ok(Checkpoint { step, time: timeline.time(step), ks, samples: xs.len() })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EquivarianceReport { count, seed, initial_ks, checkpoints, failures, mask_hits, evaluations, node_trapped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{build_hamiltonian, harmonic_potential, propagate_exact};
    use crate::state::normalize;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn natural() -> PhysicsParams {
        PhysicsParams::natural()
    }

    fn free(grid: GridSpec) -> Hamiltonian {
        build_hamiltonian(grid, &vec![0.0; grid.n_points()], natural()).unwrap()
    }

    /// Closed-form free Gaussian with hbar = m = 1.
    fn free_gaussian(grid: GridSpec, c: f64, sigma: f64, k0: f64, t: f64) -> WaveFunction {
        let tau = t / (2.0 * sigma * sigma);
        let z = Complex64::new(1.0, tau);
        let psi = WaveFunction::from_grid_fn(grid, |x| {
            let y = x - c - k0 * t;
            (-(y * y) / (4.0 * sigma * sigma * z) + Complex64::new(0.0, k0 * (x - c) - 0.5 * k0 * k0 * t)).exp() / z.sqrt()
        })
        .unwrap();
        normalize(&psi).unwrap()
    }

    fn analytic_velocity(c: f64, sigma: f64, k0: f64, t: f64, x: f64) -> f64 {
        let tau = t / (2.0 * sigma * sigma);
        k0 + (x - c - k0 * t) * tau / (2.0 * sigma * sigma * (1.0 + tau * tau))
    }

    #[test]
    fn real_state_has_zero_velocity() {
        let grid = GridSpec::periodic(-10.0, 10.0, 128).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.5, 1.0, 0.0).unwrap();
        let v = velocity_field(&psi, natural()).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.0));
        assert_eq!(v.regularization_mask().len(), 128);
    }

    #[test]
    fn plane_wave_velocity_uses_discrete_wavenumber() {
        let grid = GridSpec::periodic(0.0, 10.0, 100).unwrap();
        let k = 2.0 * PI * 3.0 / 10.0;
        let psi = normalize(&WaveFunction::from_grid_fn(grid, |x| Complex64::from_polar(1.0, k * x)).unwrap()).unwrap();
        let params = PhysicsParams::new(1.0, 2.0).unwrap();
        let expected = (k * grid.dx()).sin() / grid.dx() / 2.0;
        let v = velocity_field(&psi, params).unwrap();
        for &x in v.values() {
            assert_abs_diff_eq!(x, expected, epsilon = 1e-12);
        }
        for x in [0.0, 0.123, 3.3333, 9.99] {
            assert_abs_diff_eq!(velocity_at(&psi, params, x).unwrap(), expected, epsilon = 1e-12);
        }
        assert_eq!(v.masked_count(), 0);
    }

    #[test]
    fn spreading_gaussian_velocity_is_linear() {
        let grid = GridSpec::periodic(-20.0, 20.0, 800).unwrap();
        let (c, sigma, k0, t) = (-1.0, 1.0, 0.5, 1.5);
        let h = free(grid);
        let psi = propagate_exact(&h, &free_gaussian(grid, c, sigma, k0, 0.0), t).unwrap();
        let v = velocity_field(&psi, natural()).unwrap();
        let width = sigma * (1.0 + (t / 2.0).powi(2)).sqrt();
        let center = c + k0 * t;
        let mut checked = 0;
        for (j, x) in grid.points().into_iter().enumerate() {
            if (x - center).abs() < 2.0 * width {
                let want = analytic_velocity(c, sigma, k0, t, x);
                assert!((v.values()[j] - want).abs() <= 0.01 * want.abs().max(0.1), "x = {x}");
                checked += 1;
            }
        }
        assert!(checked > 80);
    }

    #[test]
    fn interpolation_hits_grid_values_and_matches_refinement() {
        let coarse = GridSpec::periodic(-20.0, 20.0, 1600).unwrap();
        let fine = GridSpec::periodic(-20.0, 20.0, 3200).unwrap();
        let (c, sigma, k0, t) = (0.0, 1.0, 2.0, 1.0);
        let pc = free_gaussian(coarse, c, sigma, k0, t);
        let pf = free_gaussian(fine, c, sigma, k0, t);
        let vc = velocity_field(&pc, natural()).unwrap();
        let vf = velocity_field(&pf, natural()).unwrap();
        for j in (780..980).step_by(7) {
            assert_abs_diff_eq!(velocity_at(&pc, natural(), coarse.point(j)).unwrap(), vc.values()[j], epsilon = 1e-12);
            let mid = 0.5 * (coarse.point(j) + coarse.point(j + 1));
            let v = velocity_at(&pc, natural(), mid).unwrap();
            let (a, b) = (vc.values()[j], vc.values()[j + 1]);
            assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
            let r = vf.values()[2 * j + 1];
            assert!((v - r).abs() <= 1e-3 * r.abs(), "j = {j}: {v} vs {r}");
        }
    }

    #[test]
    fn dirichlet_positions_outside_are_rejected() {
        let grid = GridSpec::dirichlet(-5.0, 5.0, 64).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(velocity_at(&psi, natural(), 5.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(integrate_trajectory(-6.0, &free(grid), &psi, 0.1, 0.05), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn ground_state_particles_rest() {
        let grid = GridSpec::periodic(-8.0, 8.0, 128).unwrap();
        let h = build_hamiltonian(grid, &harmonic_potential(&grid, 1.0, 1.0, 0.0), natural()).unwrap();
        let ground = h.eigen().unwrap().vectors().column(0).into_owned();
        let psi = normalize(&WaveFunction::new(Space::Grid(grid), ground, 0.0).unwrap()).unwrap();
        let timeline = Timeline::new(&h, &psi, 2.0, 0.02).unwrap();
        for x0 in [-2.0, -0.7, 0.0, 0.31, 1.9] {
            let tr = integrate_on(&timeline, x0, 0).unwrap();
            for &x in tr.positions() {
                assert!((x - x0).abs() <= 1e-9, "{x0} drifted to {x}");
            }
        }
    }

    #[test]
    fn plane_wave_particles_move_uniformly() {
        let grid = GridSpec::periodic(0.0, 10.0, 100).unwrap();
        let k = 2.0 * PI * 2.0 / 10.0;
        let psi = normalize(&WaveFunction::from_grid_fn(grid, |x| Complex64::from_polar(1.0, k * x)).unwrap()).unwrap();
        let keff = (k * grid.dx()).sin() / grid.dx();
        let tr = integrate_trajectory(3.0, &free(grid), &psi, 20.0, 0.05).unwrap();
        for (&t, &x) in tr.times().iter().zip(tr.unwrapped()) {
            let want = 3.0 + keff * t;
            assert!((x - want).abs() <= 1e-6 * want.abs());
        }
        // the particle wrapped around the period several times
        assert!(tr.final_position() < 10.0 && tr.unwrapped().last().unwrap() > &20.0);
    }

    #[test]
    fn gaussian_trajectory_self_converges_and_tracks_scaling() {
        let grid = GridSpec::periodic(-20.0, 20.0, 512).unwrap();
        let h = free(grid);
        let psi = free_gaussian(grid, 0.0, 1.0, 0.3, 0.0);
        let (t, dt) = (2.0, 0.02);
        let coarse = Timeline::new(&h, &psi, t, dt).unwrap();
        let fine = Timeline::new(&h, &psi, t, dt / 2.0).unwrap();
        for x0 in [-1.5, -0.4, 0.2, 1.1] {
            let a = integrate_on(&coarse, x0, 0).unwrap().final_position();
            let b = integrate_on(&fine, x0, 0).unwrap().final_position();
            assert!((a - b).abs() <= 1e-4, "{x0}: {a} vs {b}");
            let exact = 0.3 * t + x0 * (1.0 + (t / 2.0).powi(2)).sqrt();
            assert!((b - exact).abs() <= 1e-2 * exact.abs().max(1.0));
        }
    }

    fn two_packets(grid: GridSpec, offset: f64, k0: f64) -> WaveFunction {
        let a = free_gaussian(grid, -offset, 1.0, k0, 0.0);
        let b = free_gaussian(grid, offset, 1.0, -k0, 0.0);
        let sum = a.amplitudes() + b.amplitudes();
        normalize(&WaveFunction::new(Space::Grid(grid), sum, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn mirrored_starts_stay_mirrored() {
        let grid = GridSpec::dirichlet(-12.0, 12.0, 256).unwrap();
        let psi = two_packets(grid, 5.0, 2.0);
        let timeline = Timeline::new(&free(grid), &psi, 2.5, 0.01).unwrap();
        for x0 in [0.3, 2.0, 4.2, 5.7] {
            let up = integrate_on(&timeline, x0, 0).unwrap();
            let down = integrate_on(&timeline, -x0, 1).unwrap();
            for (a, b) in up.positions().iter().zip(down.positions()) {
                assert!((a + b).abs() <= 1e-6);
                assert!(*a > 0.0);
            }
        }
    }

    #[test]
    fn ensemble_order_is_preserved() {
        let grid = GridSpec::dirichlet(-12.0, 12.0, 256).unwrap();
        let psi = two_packets(grid, 5.0, 2.0);
        let timeline = Timeline::new(&free(grid), &psi, 2.5, 0.0025).unwrap();
        let x0 = sample_initial_positions(&psi, 300, 5).unwrap();
        let trajs: Vec<Trajectory> = integrate_ensemble(&timeline, &x0).into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(crossing_violations(&trajs, CROSSING_TOLERANCE), 0);
        assert!(trajs.iter().enumerate().all(|(i, t)| t.initial_seed_index() == i));
    }

    #[test]
    fn crossing_detector_counts_swaps() {
        let mk = |xs: Vec<f64>| Trajectory {
            times: vec![0.0, 1.0],
            positions: xs.clone(),
            unwrapped: xs,
            initial_seed_index: 0,
            mask_hits: 0,
            evaluations: 0,
        };
        let trajs = vec![mk(vec![0.0, 1.0]), mk(vec![0.5, 0.2])];
        assert_eq!(crossing_violations(&trajs, 1e-6), 1);
        let close = vec![mk(vec![0.0, 0.3]), mk(vec![0.5, 0.3 - 1e-7])];
        assert_eq!(crossing_violations(&close, 1e-6), 0);
    }

    #[test]
    fn tail_particles_are_flagged_as_trapped() {
        let grid = GridSpec::periodic(-20.0, 20.0, 256).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.0, 0.5, 1.0).unwrap();
        let tr = integrate_trajectory(15.0, &free(grid), &psi, 0.2, 0.05).unwrap();
        assert!(tr.node_trap());
        assert_eq!(tr.mask_hits(), tr.evaluations());
        assert!(tr.positions().iter().all(|&x| x == 15.0));
        let bulk = integrate_trajectory(0.1, &free(grid), &psi, 0.2, 0.05).unwrap();
        assert!(!bulk.node_trap());
    }

    #[test]
    fn stationary_ensemble_keeps_its_distribution() {
        let grid = GridSpec::periodic(-8.0, 8.0, 128).unwrap();
        let h = build_hamiltonian(grid, &harmonic_potential(&grid, 1.0, 1.0, 0.0), natural()).unwrap();
        let ground = h.eigen().unwrap().vectors().column(0).into_owned();
        let psi = normalize(&WaveFunction::new(Space::Grid(grid), ground, 0.0).unwrap()).unwrap();
        let report = ensemble_equivariance(&h, &psi, 20_000, 1.0, 0.05, 3).unwrap();
        assert!(report.failures.is_empty());
        assert_eq!(report.checkpoints.len(), 3);
        for c in &report.checkpoints {
            assert_abs_diff_eq!(c.ks, report.initial_ks, epsilon = 1e-9);
        }
        assert!(report.initial_ks < 0.015);
    }

    #[test]
    fn spreading_ensemble_is_equivariant() {
        let grid = GridSpec::periodic(-20.0, 20.0, 400).unwrap();
        let psi = free_gaussian(grid, 0.0, 1.0, 0.5, 0.0);
        let report = ensemble_equivariance(&free(grid), &psi, 20_000, 2.0, 0.02, 11).unwrap();
        assert!(report.failures.is_empty());
        assert!(report.max_ks() < 0.02, "{report:?}");
    }

    #[test]
    fn ode_step_must_divide_span() {
        let grid = GridSpec::periodic(-5.0, 5.0, 32).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(Timeline::new(&free(grid), &psi, 1.0, 0.3), Err(Error::InvalidArgument(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn real_states_never_move(seed in 0u64..10_000, x0 in -3.0f64..3.0) {
            let grid = GridSpec::dirichlet(-6.0, 6.0, 64).unwrap();
            let mut r = crate::testutil::rng(seed);
            let pot: Vec<f64> = (0..64).map(|_| rand::Rng::random_range(&mut r, 0.0..5.0)).collect();
            let h = build_hamiltonian(grid, &pot, natural()).unwrap();
            let ev = h.eigen().unwrap().vectors().column(0).into_owned();
            let psi = normalize(&WaveFunction::new(Space::Grid(grid), ev, 0.0).unwrap()).unwrap();
            let tr = integrate_trajectory(x0, &h, &psi, 0.5, 0.05).unwrap();
            for &x in tr.positions() {
                prop_assert!((x - x0).abs() <= 1e-9);
            }
        }

        #[test]
        fn ensembles_never_cross(seed in 0u64..10_000, k0 in -2.0f64..2.0, c in -3.0f64..3.0) {
            let grid = GridSpec::periodic(-10.0, 10.0, 128).unwrap();
            let psi = free_gaussian(grid, c, 1.0, k0, 0.0);
            let timeline = Timeline::new(&free(grid), &psi, 1.0, 0.02).unwrap();
            let x0 = sample_initial_positions(&psi, 60, seed).unwrap();
            let trajs: Vec<Trajectory> = integrate_ensemble(&timeline, &x0).into_iter().map(|r| r.unwrap()).collect();
            prop_assert_eq!(crossing_violations(&trajs, CROSSING_TOLERANCE), 0);
        }
    }
}
