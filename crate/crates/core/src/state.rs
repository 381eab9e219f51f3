//! Configuration spaces, wave functions and probability distributions.
//!
//! A [`Distribution`] on a grid stores per-cell probabilities `|psi|^2 dx`
//! rather than densities, so finite spaces and grids share one type. For
//! continuous statistics (the KS statistic, jittered sampling) cell `j` is
//! the interval `[x_j - dx/2, x_j + dx/2)` and the probability is spread
//! uniformly over it.
//!
//! Sampling is inverse-CDF driven by ChaCha8 (`rand_chacha::ChaCha8Rng`)
//! seeded through `SeedableRng::seed_from_u64`. The algorithm is part of the
//! reproducibility contract: the same seed yields bit-identical samples.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for "sums to one" checks on distributions.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;
/// Maximum deviation of a norm from 1 accepted where a normalized state is required.
pub const NORMALIZED_TOLERANCE: f64 = 1e-6;
/// Norms at or below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// Uniform one-dimensional grid.
///
/// Points are `x_j = x_min + j dx`. Periodic grids have `dx = (x_max - x_min) / n`
/// and identify `x_max` with `x_min`; Dirichlet grids include both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    boundary: Boundary,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, boundary: Boundary) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!("x_max ({x_max}) must exceed x_min ({x_min})")));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid("n_points must be at least 2".into()));
        }
        Ok(Self { x_min, x_max, n_points, boundary })
    }

    pub fn periodic(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        Self::new(x_min, x_max, n_points, Boundary::Periodic)
    }

    pub fn dirichlet(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        Self::new(x_min, x_max, n_points, Boundary::Dirichlet)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.length() / self.n_points as f64,
            Boundary::Dirichlet => self.length() / (self.n_points - 1) as f64,
        }
    }

    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Index of the mirror image of point `j` under `x -> x_min + x_max - x`
    /// (Dirichlet) or `x -> 2 x_min - x` modulo the period (periodic).
    pub fn mirror_index(&self, j: usize) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.n_points - 1 - j,
            Boundary::Periodic => (self.n_points - j) % self.n_points,
        }
    }

    /// Wraps a position into `[x_min, x_max)` on periodic grids; identity otherwise.
    pub fn wrap(&self, x: f64) -> f64 {
        if self.is_periodic() {
            let l = self.length();
            let w = (x - self.x_min).rem_euclid(l) + self.x_min;
            if w >= self.x_max {
                self.x_min
            } else {
                w
            }
        } else {
            x
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.is_periodic() || (x >= self.x_min && x <= self.x_max)
    }
}

/// A finite abstract configuration space, optionally labelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    size: usize,
    labels: Option<Vec<String>>,
}

impl FiniteSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSpace);
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace);
        }
        Ok(Self { size: labels.len(), labels: Some(labels) })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Space {
    Grid(GridSpec),
    Finite(FiniteSpace),
}

impl Space {
    pub fn finite(size: usize) -> Result<Self> {
        FiniteSpace::new(size).map(Space::Finite)
    }

    pub fn size(&self) -> usize {
        match self {
            Space::Grid(g) => g.n_points(),
            Space::Finite(f) => f.size(),
        }
    }

    /// Measure of one configuration: `dx` on grids, 1 on finite spaces.
    pub fn cell_measure(&self) -> f64 {
        match self {
            Space::Grid(g) => g.dx(),
            Space::Finite(_) => 1.0,
        }
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        match self {
            Space::Grid(g) => Some(g),
            Space::Finite(_) => None,
        }
    }
}

impl From<GridSpec> for Space {
    fn from(g: GridSpec) -> Self {
        Space::Grid(g)
    }
}

impl From<FiniteSpace> for Space {
    fn from(f: FiniteSpace) -> Self {
        Space::Finite(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    hbar: f64,
    mass: f64,
}

impl PhysicsParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParams(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParams(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// `hbar = m = 1`.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Complex amplitudes over a configuration space, stamped with a time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amplitudes: DVector<Complex64>,
    time: f64,
    space: Space,
}

impl WaveFunction {
    pub fn new(space: Space, amplitudes: DVector<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != space.size() {
            return Err(Error::LengthMismatch { expected: space.size(), actual: amplitudes.len() });
        }
        if let Some(index) = amplitudes.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { amplitudes, time, space })
    }

    pub fn from_vec(space: Space, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(space, DVector::from_vec(amplitudes), 0.0)
    }

    /// Samples `f(x_j)` on every grid point.
    pub fn from_grid_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = DVector::from_iterator(grid.n_points(), grid.points().into_iter().map(f));
        Self::new(Space::Grid(grid), amps, 0.0)
    }

    /// Normalized Gaussian `exp(-(x - center)^2 / (4 width^2) + i k x)`.
    ///
    /// `width` is the standard deviation of `|psi|^2`; `wavenumber` is `p / hbar`.
    pub fn gaussian(grid: GridSpec, center: f64, width: f64, wavenumber: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidArgument(format!("gaussian width must be positive, got {width}")));
        }
        let psi = Self::from_grid_fn(grid, |x| gaussian_amplitude(x, center, width, wavenumber))?;
        normalize(&psi)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: DVector<Complex64>, time: f64) -> Self {
        debug_assert_eq!(amplitudes.len(), self.amplitudes.len());
        Self { amplitudes, time, space: self.space.clone() }
    }

    /// L2 norm, weighted by `dx` on grids.
    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.space.cell_measure()).sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Multiplies every amplitude by `exp(i theta)`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        self.with_amplitudes(self.amplitudes.map(|a| a * phase), self.time)
    }
}

pub(crate) fn gaussian_amplitude(x: f64, center: f64, width: f64, wavenumber: f64) -> Complex64 {
    let d = x - center;
    Complex64::from_polar((-d * d / (4.0 * width * width)).exp(), wavenumber * x)
}

pub fn normalize(psi: &WaveFunction) -> Result<WaveFunction> {
    let norm = psi.norm();
    if !(norm > ZERO_NORM) {
        return Err(Error::ZeroNorm);
    }
    let scale = 1.0 / norm;
    Ok(psi.with_amplitudes(psi.amplitudes.map(|a| a * scale), psi.time))
}

/// Nonnegative weights over a space that sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
    space: Space,
}

impl Distribution {
    pub fn new(space: Space, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(Error::LengthMismatch { expected: space.size(), actual: weights.len() });
        }
        if let Some(j) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("weight {j} is {}", weights[j])));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights, space })
    }

    /// Normalizes arbitrary nonnegative masses.
    pub fn from_masses(space: Space, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > ZERO_NORM && total.is_finite()) {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Self::new(space, masses.into_iter().map(|m| m / total).collect())
    }

    pub fn point_mass(space: Space, index: usize) -> Result<Self> {
        let mut w = vec![0.0; space.size()];
        *w.get_mut(index).ok_or_else(|| Error::InvalidArgument(format!("index {index} out of range")))? = 1.0;
        Self::new(space, w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// Cell-uniform CDF at position `x` (grid spaces only).
    pub fn grid_cdf(&self, x: f64) -> Result<f64> {
        let grid = self.space.grid().ok_or(Error::NotGridSpace)?;
        let cum = self.cumulative();
        Ok(cell_cdf(grid, &self.weights, &cum, x))
    }
}

fn cell_origin(grid: &GridSpec) -> f64 {
    grid.x_min() - 0.5 * grid.dx()
}

fn cell_cdf(grid: &GridSpec, weights: &[f64], cum: &[f64], x: f64) -> f64 {
    let dx = grid.dx();
    let lo = cell_origin(grid);
    let x = if grid.is_periodic() { (x - lo).rem_euclid(grid.length()) + lo } else { x };
    let u = (x - lo) / dx;
    if u <= 0.0 {
        return 0.0;
    }
    let c = u.floor() as usize;
    if c >= weights.len() {
        return 1.0;
    }
    let below = if c == 0 { 0.0 } else { cum[c - 1] };
    below + weights[c] * (u - c as f64)
}

/// `|psi|^2` per configuration (times `dx` on grids).
pub fn born_distribution(psi: &WaveFunction) -> Result<Distribution> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZED_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let cell = psi.space.cell_measure();
    let masses: Vec<f64> = psi.amplitudes.iter().map(|a| a.norm_sqr() * cell).collect();
    let total: f64 = masses.iter().sum();
    Distribution::new(psi.space.clone(), masses.into_iter().map(|m| m / total).collect())
}

fn draw_index(cum: &[f64], u: f64) -> usize {
    let total = *cum.last().expect("nonempty distribution");
    let target = u * total;
    let j = cum.partition_point(|&c| c <= target);
    if j < cum.len() {
        j
    } else {
        // u * total rounded onto the last cumulative value: take the last cell with mass.
        cum.iter().rposition(|&c| c < total).map_or(0, |k| k + 1).min(cum.len() - 1)
    }
}

/// Draws `count` configuration indices from `d` by inverse CDF.
pub fn sample_positions(d: &Distribution, count: usize, seed: u64) -> Vec<usize> {
    let cum = d.cumulative();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| draw_index(&cum, rng.random::<f64>())).collect()
}

/// Draws continuous positions: a cell by inverse CDF, then a uniform offset
/// inside `[x_j - dx/2, x_j + dx/2)`. Positions on periodic grids are wrapped.
pub fn sample_grid_positions(d: &Distribution, count: usize, seed: u64) -> Result<Vec<f64>> {
    let grid = *d.space.grid().ok_or(Error::NotGridSpace)?;
    let cum = d.cumulative();
    let dx = grid.dx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let j = draw_index(&cum, rng.random::<f64>());
            let offset = rng.random::<f64>() - 0.5;
            let x = grid.point(j) + offset * dx;
            if grid.is_periodic() {
                grid.wrap(x)
            } else {
                x.clamp(grid.x_min(), grid.x_max())
            }
        })
        .collect())
}

/// `1/2 sum |p - q|`.
pub fn total_variation(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.space != q.space {
        return Err(Error::SpaceMismatch);
    }
    let tv = 0.5 * p.weights.iter().zip(&q.weights).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(tv.min(1.0))
}

/// Kolmogorov-Smirnov statistic between sampled positions and the cell-uniform CDF of `d`.
pub fn ks_statistic(samples: &[f64], d: &Distribution) -> Result<f64> {
    let grid = d.space.grid().ok_or(Error::NotGridSpace)?;
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let cum = d.cumulative();
    let lo = cell_origin(grid);
    let mut xs: Vec<f64> = samples
        .iter()
        .map(|&x| if grid.is_periodic() { (x - lo).rem_euclid(grid.length()) + lo } else { x })
        .collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let stat = xs.iter().enumerate().fold(0.0_f64, |acc, (i, &x)| {
        let f = cell_cdf(grid, &d.weights, &cum, x);
        acc.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    Ok(stat.clamp(0.0, 1.0))
}
