//! Dense Hermitian eigendecomposition and spectral matrix functions.
//!
//! Real symmetric input (every grid Hamiltonian) takes a real eigensolve and
//! real GEMMs; general Hermitian input falls back to the complex solver.
//! Eigenpairs are sorted by ascending eigenvalue.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

const EIGEN_EPS: f64 = f64::EPSILON;
const EIGEN_MAX_ITER: usize = 0; // 0 = no limit in nalgebra

#[derive(Debug, Clone)]
enum Vectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// `H = W diag(values) W^dagger` with `W` unitary.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: DVector<f64>,
    vectors: Vectors,
}

impl HermitianEigen {
    pub fn new(h: &DMatrix<Complex64>) -> Result<Self> {
        let n = h.nrows();
        if n != h.ncols() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let is_real = h.iter().all(|z| z.im == 0.0);
        if is_real {
            let re = h.map(|z| z.re);
            let eig = SymmetricEigen::try_new(re, EIGEN_EPS, EIGEN_MAX_ITER)
                .ok_or(Error::EigendecompositionFailure)?;
            let order = ascending(&eig.eigenvalues);
            let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
            let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
            Ok(Self { values, vectors: Vectors::Real(vectors) })
        } else {
            let eig = SymmetricEigen::try_new(h.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
                .ok_or(Error::EigendecompositionFailure)?;
            let order = ascending(&eig.eigenvalues);
            let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
            let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
            Ok(Self { values, vectors: Vectors::Complex(vectors) })
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, Vectors::Real(_))
    }

    /// Eigenvectors as columns, ordered like [`values`](Self::values).
    pub fn vectors(&self) -> DMatrix<Complex64> {
        match &self.vectors {
            Vectors::Real(w) => w.map(|x| Complex64::new(x, 0.0)),
            Vectors::Complex(w) => w.clone(),
        }
    }

    /// `W diag(f(lambda)) W^dagger`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        match &self.vectors {
            Vectors::Real(w) => {
                let n = self.dim();
                let mut wr = w.clone();
                let mut wi = w.clone();
                for (j, z) in fv.iter().enumerate() {
                    wr.column_mut(j).scale_mut(z.re);
                    wi.column_mut(j).scale_mut(z.im);
                }
                let re = &wr * w.transpose();
                let im = &wi * w.transpose();
                DMatrix::from_fn(n, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
            }
            Vectors::Complex(w) => {
                let mut scaled = w.clone();
                for (j, z) in fv.iter().enumerate() {
                    scaled.column_mut(j).iter_mut().for_each(|x| *x *= z);
                }
                scaled * w.adjoint()
            }
        }
    }

    /// `W diag(f(lambda)) W^T` for real eigenvectors.
    pub fn apply_real_fn(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        match &self.vectors {
            Vectors::Real(w) => {
                let mut scaled = w.clone();
                for (j, &l) in self.values.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(f(l));
                }
                Ok(scaled * w.transpose())
            }
            Vectors::Complex(w) => {
                let imag = w.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
                Err(Error::ComplexHamiltonian { imag })
            }
        }
    }
}

fn ascending(values: &DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// `max_ij |A_ij - A_ji^*|`.
pub fn hermiticity_defect(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max_ij |(U^dagger U - I)_ij|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}
