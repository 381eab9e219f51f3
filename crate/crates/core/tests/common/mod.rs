//! Reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: matrices are plain
//! `Vec<Vec<_>>`, eigenvalues come from a cyclic Jacobi sweep and free
//! packets from the closed-form continuum solution.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMatrix = Vec<Vec<Complex64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_pair(r: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random();
    let rad = (-2.0 * u1.ln()).sqrt();
    Complex64::new(rad * (2.0 * PI * u2).cos(), rad * (2.0 * PI * u2).sin())
}

/// Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| gaussian_pair(r)).collect();
        for c in &cols {
            let proj: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian_pair(r)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn matvec(u: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    u.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn naive_evolve(u: &CMatrix, psi: &[Complex64], steps: usize) -> Vec<Complex64> {
    (0..steps).fold(psi.to_vec(), |v, _| matvec(u, &v))
}

/// Explicit odometer over every path `q_0 .. q_s` with the product of matrix elements.
pub fn brute_path_sum(u: &CMatrix, psi: &[Complex64], steps: usize) -> Vec<Complex64> {
    let n = psi.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut path = vec![0usize; steps + 1];
    loop {
        let mut amp = psi[path[0]];
        for w in path.windows(2) {
            amp *= u[w[1]][w[0]];
        }
        out[path[steps]] += amp;
        let mut k = 0;
        while k <= steps {
            path[k] += 1;
            if path[k] < n {
                break;
            }
            path[k] = 0;
            k += 1;
        }
        if k > steps {
            return out;
        }
    }
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1.0);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Three-point finite-difference Hamiltonian with `hbar = m = 1`.
pub fn fd_hamiltonian(dx: f64, potential: &[f64], periodic: bool) -> Vec<Vec<f64>> {
    let n = potential.len();
    let hop = -1.0 / (2.0 * dx * dx);
    let mut h = vec![vec![0.0; n]; n];
    for j in 0..n {
        h[j][j] = -2.0 * hop + potential[j];
        if j > 0 {
            h[j][j - 1] += hop;
        }
        if j + 1 < n {
            h[j][j + 1] += hop;
        }
    }
    if periodic {
        h[0][n - 1] += hop;
        h[n - 1][0] += hop;
    }
    h
}

/// Continuum free evolution (`hbar = m = 1`) of
/// `exp(-(x - c)^2 / (4 sigma^2) + i k x)`, unnormalized.
pub fn free_packet(x: f64, c: f64, sigma: f64, k: f64, t: f64) -> Complex64 {
    let z = Complex64::new(1.0, t / (2.0 * sigma * sigma));
    let y = x - c - k * t;
    (-(y * y) / (4.0 * sigma * sigma * z) + Complex64::new(0.0, k * x - 0.5 * k * k * t)).exp() / z.sqrt()
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)], vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]]
}

/// Endpoint TV distance of the nonnegative path measure built from
/// `weight` over the four two-step Hadamard paths.
pub fn hadamard_tv(psi: [Complex64; 2], weight: impl Fn(Complex64) -> f64) -> Option<f64> {
    let u = hadamard();
    let mut marginal = [0.0; 2];
    for q0 in 0..2 {
        for q1 in 0..2 {
            for r in 0..2 {
                marginal[r] += weight(u[r][q1] * u[q1][q0] * psi[q0]);
            }
        }
    }
    let z = marginal[0] + marginal[1];
    if z <= 0.0 {
        return None;
    }
    let born = naive_evolve(&u, &psi, 2);
    Some(0.5 * (0..2).map(|r| (marginal[r] / z - born[r].norm_sqr()).abs()).sum::<f64>())
}
