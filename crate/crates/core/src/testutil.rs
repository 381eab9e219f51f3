//! Random matrices and states for unit tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::state::{Space, WaveFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = r.random::<f64>().max(1e-300);
    let v: f64 = r.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_complex(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(r), gauss(r))
}

pub fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| random_complex(r));
    (&a + a.adjoint()).map(|z| z * 0.5)
}

/// Gram-Schmidt on a random complex matrix.
pub fn random_unitary(r: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = DVector::from_fn(n, |_, _| random_complex(r));
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

/// Unnormalized random amplitudes.
pub fn random_state(r: &mut ChaCha8Rng, space: Space) -> WaveFunction {
    let n = space.size();
    let v = (0..n).map(|_| random_complex(r)).collect();
    WaveFunction::from_vec(space, v).unwrap()
}
