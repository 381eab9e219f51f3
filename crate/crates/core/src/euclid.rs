//! Imaginary-time kernels `exp(-dtau H)` and Feynman-Kac iteration.
//!
//! Imaginary-time runs take `hbar = 1`: `dtau` carries inverse-energy units
//! and the Hamiltonian's own `hbar` only enters through its matrix entries.
//!
//! For a grid Hamiltonian `-H` has nonnegative off-diagonal entries, so the
//! kernel is entrywise nonnegative and each step is a sub-stochastic
//! transition over grid points.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::evolution::Hamiltonian;
use crate::linalg::HermitianEigen;
use crate::state::Space;
use crate::{Error, Result};

/// Ratio of successive masses below which the iteration is declared dead.
pub const MASS_COLLAPSE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// `W exp(-dtau Lambda) W^T` from the shared eigendecomposition.
    #[default]
    Eigen,
    /// Symmetric split `D^(1/2) exp(-dtau T) D^(1/2)` with `D` the on-site
    /// decay `exp(-dtau diag H)` and `T` the off-diagonal hopping.
    Trotter,
}

#[derive(Debug, Clone)]
pub struct EuclideanKernel {
    matrix: DMatrix<f64>,
    dtau: f64,
    space: Space,
    method: KernelMethod,
}

impl EuclideanKernel {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Most negative entry (zero if all are nonnegative).
    pub fn min_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, &x| m.min(x))
    }

    /// `max_ij |K_ij - K_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn apply(&self, rho: &[f64]) -> Result<Vec<f64>> {
        if rho.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), actual: rho.len() });
        }
        let v = nalgebra::DVector::from_column_slice(rho);
        Ok((&self.matrix * v).as_slice().to_vec())
    }
}

fn check_dtau(dtau: f64) -> Result<()> {
    if dtau.is_finite() && dtau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("dtau must be positive, got {dtau}")))
    }
}

pub fn euclidean_kernel(h: &Hamiltonian, dtau: f64) -> Result<EuclideanKernel> {
    euclidean_kernel_with(h, dtau, KernelMethod::Eigen)
}

pub fn euclidean_kernel_with(h: &Hamiltonian, dtau: f64, method: KernelMethod) -> Result<EuclideanKernel> {
    check_dtau(dtau)?;
    let matrix = match method {
        KernelMethod::Eigen => h.eigen()?.apply_real_fn(|l| (-dtau * l).exp())?,
        KernelMethod::Trotter => trotter(h, dtau)?,
    };
    Ok(EuclideanKernel { matrix, dtau, space: h.space().clone(), method })
}

fn trotter(h: &Hamiltonian, dtau: f64) -> Result<DMatrix<f64>> {
    let m = h.matrix();
    if let Some(z) = m.iter().find(|z| z.im != 0.0) {
        return Err(Error::ComplexHamiltonian { imag: z.im.abs() });
    }
    let n = m.nrows();
    let hop = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { m[(i, j)].re });
    let half: Vec<f64> = (0..n).map(|i| (-0.5 * dtau * m[(i, i)].re).exp()).collect();
    let t = HermitianEigen::new(&hop.map(|x| num_complex::Complex64::new(x, 0.0)))?.apply_real_fn(|l| (-dtau * l).exp())?;
    Ok(DMatrix::from_fn(n, n, |i, j| half[i] * t[(i, j)] * half[j]))
}

/// Output of [`feynman_kac_evolve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeynmanKac {
    /// Final vector, rescaled to the L1 mass of the input.
    pub rho: Vec<f64>,
    /// Pre-normalization mass ratio of every step.
    pub ratios: Vec<f64>,
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Applies `K` `steps` times, restoring the input's L1 mass after each step.
pub fn feynman_kac_evolve(k: &EuclideanKernel, rho0: &[f64], steps: usize) -> Result<FeynmanKac> {
    if rho0.len() != k.dim() {
        return Err(Error::LengthMismatch { expected: k.dim(), actual: rho0.len() });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if let Some(index) = rho0.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if rho0.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument("initial vector must be entrywise nonnegative".into()));
    }
    let mass = l1(rho0);
    if mass == 0.0 {
        return Err(Error::InvalidArgument("initial vector is identically zero".into()));
    }
    let mut rho = rho0.to_vec();
    let mut ratios = Vec::with_capacity(steps);
    for step in 0..steps {
        let next = k.apply(&rho)?;
        let ratio = l1(&next) / mass;
        if !(ratio >= MASS_COLLAPSE) {
            return Err(Error::MassCollapse { step, ratio });
        }
        ratios.push(ratio);
        rho = next.into_iter().map(|x| x / ratio).collect();
    }
    Ok(FeynmanKac { rho, ratios })
}

/// `-ln(r_j) / dtau` for every step.
pub fn energy_estimates(h: &Hamiltonian, rho0: &[f64], dtau: f64, steps: usize) -> Result<Vec<f64>> {
    let k = euclidean_kernel(h, dtau)?;
    let run = feynman_kac_evolve(&k, rho0, steps)?;
    Ok(run.ratios.iter().map(|r| -r.ln() / dtau).collect())
}

/// Late-time estimate of the lowest eigenvalue of `h`.
///
/// Fails with [`Error::NotConverged`] when the last two estimates differ by
/// more than `tol`.
pub fn ground_energy_estimate(h: &Hamiltonian, rho0: &[f64], dtau: f64, steps: usize, tol: f64) -> Result<f64> {
    if steps < 2 {
        return Err(Error::InvalidArgument("at least two steps are needed to judge convergence".into()));
    }
    let e = energy_estimates(h, rho0, dtau, steps)?;
    let (prev, last) = (e[steps - 2], e[steps - 1]);
    let delta = (last - prev).abs();
    if !(delta <= tol) {
        return Err(Error::NotConverged { delta });
    }
    Ok(last)
}
