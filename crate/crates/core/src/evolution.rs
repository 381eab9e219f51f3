//! Hamiltonians, the one-step unitary and repeated application.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{hermiticity_defect, unitarity_defect, HermitianEigen};
use crate::state::{Boundary, GridSpec, PhysicsParams, Space, WaveFunction};
use crate::{Error, Result};

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// A Hermitian matrix over a configuration space.
///
/// The eigendecomposition is computed once on first use and shared by
/// every spectral function (real-time and imaginary-time alike).
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    matrix: DMatrix<Complex64>,
    space: Space,
    params: PhysicsParams,
    eigen: OnceLock<HermitianEigen>,
}

impl Hamiltonian {
    /// Symmetrizes `(H + H^dagger) / 2` after checking the input is Hermitian to 1e-12.
    pub fn from_matrix(space: Space, matrix: DMatrix<Complex64>, params: PhysicsParams) -> Result<Self> {
        let n = space.size();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LengthMismatch { expected: n, actual: matrix.nrows() });
        }
        if let Some(index) = matrix.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        let deviation = hermiticity_defect(&matrix);
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        Ok(Self { matrix, space, params, eigen: OnceLock::new() })
    }

    pub fn from_real_diagonal(space: Space, diagonal: &[f64], params: PhysicsParams) -> Result<Self> {
        let n = space.size();
        if diagonal.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: diagonal.len() });
        }
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diagonal[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        Self::from_matrix(space, m, params)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn params(&self) -> PhysicsParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> Result<&HermitianEigen> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = HermitianEigen::new(&self.matrix)?;
        Ok(self.eigen.get_or_init(|| e))
    }

    /// `<psi|H|psi>`, with the `dx` weight on grids.
    pub fn expectation(&self, psi: &WaveFunction) -> Result<f64> {
        if psi.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let h_psi = &self.matrix * psi.amplitudes();
        Ok(psi.amplitudes().dotc(&h_psi).re * self.space.cell_measure())
    }
}

/// `H = -(hbar^2 / 2m) L + diag(V)` with the central-difference Laplacian.
pub fn build_hamiltonian(grid: GridSpec, potential: &[f64], params: PhysicsParams) -> Result<Hamiltonian> {
    let n = grid.n_points();
    if potential.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: potential.len() });
    }
    if let Some(index) = potential.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let dx = grid.dx();
    let hop = -params.hbar() * params.hbar() / (2.0 * params.mass() * dx * dx);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] += Complex64::new(-2.0 * hop + potential[j], 0.0);
        let neighbors = match grid.boundary() {
            Boundary::Periodic => [Some((j + n - 1) % n), Some((j + 1) % n)],
            Boundary::Dirichlet => [j.checked_sub(1), (j + 1 < n).then_some(j + 1)],
        };
        for k in neighbors.into_iter().flatten() {
            m[(j, k)] += Complex64::new(hop, 0.0);
        }
    }
    Hamiltonian::from_matrix(Space::Grid(grid), m, params)
}

/// `V(x) = m omega^2 (x - center)^2 / 2` on every grid point.
pub fn harmonic_potential(grid: &GridSpec, mass: f64, omega: f64, center: f64) -> Vec<f64> {
    grid.points().into_iter().map(|x| 0.5 * mass * omega * omega * (x - center).powi(2)).collect()
}

/// One discrete time step `U(r, q)`.
#[derive(Debug, Clone)]
pub struct UnitaryStep {
    matrix: DMatrix<Complex64>,
    dt: f64,
    space: Space,
}

impl UnitaryStep {
    /// Wraps an arbitrary matrix, rejecting it unless `||U^dagger U - I||_max <= 1e-10`.
    pub fn from_matrix(space: Space, matrix: DMatrix<Complex64>, dt: f64) -> Result<Self> {
        let n = space.size();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LengthMismatch { expected: n, actual: matrix.nrows() });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let deviation = unitarity_defect(&matrix);
        if !(deviation <= UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix, dt, space })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, r: usize, q: usize) -> Complex64 {
        self.matrix[(r, q)]
    }
}

/// `U = W exp(-i dt Lambda / hbar) W^dagger`.
pub fn unitary_step(h: &Hamiltonian, dt: f64) -> Result<UnitaryStep> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let hbar = h.params.hbar();
    let u = h.eigen()?.apply_fn(|e| Complex64::from_polar(1.0, -dt * e / hbar));
    UnitaryStep::from_matrix(h.space.clone(), u, dt)
}

/// `psi'(r) = sum_q U(r, q) psi(q)`, time advanced by `dt`.
pub fn apply_step(u: &UnitaryStep, psi: &WaveFunction) -> Result<WaveFunction> {
    if psi.space() != &u.space {
        return Err(Error::SpaceMismatch);
    }
    let next: DVector<Complex64> = &u.matrix * psi.amplitudes();
    Ok(psi.with_amplitudes(next, psi.time() + u.dt))
}

/// `s` applications of [`apply_step`].
pub fn evolve(u: &UnitaryStep, psi: &WaveFunction, steps: usize) -> Result<WaveFunction> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let mut cur = apply_step(u, psi)?;
    for _ in 1..steps {
        cur = apply_step(u, &cur)?;
    }
    Ok(cur)
}

/// Every intermediate state `psi_0, psi_1, ..., psi_steps`.
pub fn evolve_trajectory(u: &UnitaryStep, psi: &WaveFunction, steps: usize) -> Result<Vec<WaveFunction>> {
    if psi.space() != &u.space {
        return Err(Error::SpaceMismatch);
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(psi.clone());
    for k in 0..steps {
        let next = apply_step(u, &out[k])?;
        out.push(next);
    }
    Ok(out)
}

/// Reference solver: `exp(-i t H / hbar) psi` in one spectral application.
pub fn propagate_exact(h: &Hamiltonian, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
    if psi.space() != &h.space {
        return Err(Error::SpaceMismatch);
    }
    let eig = h.eigen()?;
    let w = eig.vectors();
    let hbar = h.params.hbar();
    let mut coeffs = w.adjoint() * psi.amplitudes();
    for (c, &e) in coeffs.iter_mut().zip(eig.values().iter()) {
        *c *= Complex64::from_polar(1.0, -t * e / hbar);
    }
    Ok(psi.with_amplitudes(w * coeffs, psi.time() + t))
}
