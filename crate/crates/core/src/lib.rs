//! Numerical laboratory for discrete and continuum quantum evolution.
//!
//! The modules build on one another:
//!
//! * [`state`]: configuration spaces, wave functions, Born distributions,
//!   seeded sampling and distribution distances.
//! * [`evolution`]: finite-difference Hamiltonians and the exact one-step
//!   unitary `exp(-i dt H / hbar)`.
//! * [`pathsum`]: the same evolution written as an exhaustive sum over
//!   discrete paths, plus the time-sliced short-time kernel on a grid.
//! * [`measures`]: nonnegative measures derived from complex path amplitudes
//!   and their disagreement with the Born rule.
//! * [`bohm`]: the guidance velocity field, RK4 trajectories and ensemble
//!   equivariance checks.
//! * [`euclid`]: imaginary-time kernels `exp(-dtau H)` and ground-state
//!   energy extraction.
//!
//! [`scenario`] wires everything into config-driven runs used by the
//! `feynbohm` binary.

// `!(x >= y)` is used on purpose so that NaN takes the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bohm;
pub mod error;
pub mod euclid;
pub mod evolution;
pub mod linalg;
pub mod measures;
pub mod pathsum;
pub mod scenario;
pub mod state;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use num_complex::Complex64;
