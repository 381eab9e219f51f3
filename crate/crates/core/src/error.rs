use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the numerical modules can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid finite space: size must be at least 1")]
    InvalidSpace,
    #[error("invalid physics parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("wave function has zero norm")]
    ZeroNorm,
    #[error("wave function is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("operands live on different configuration spaces")]
    SpaceMismatch,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("operation requires a grid space")]
    NotGridSpace,
    #[error("empty sample")]
    EmptySample,
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("Hermitian eigendecomposition failed to converge")]
    EigendecompositionFailure,
    #[error("path enumeration of {requested} paths exceeds cap {cap}")]
    EnumerationCapExceeded { requested: u128, cap: u64 },
    #[error("time-sliced norm collapsed to {norm:e}")]
    NormCollapse { norm: f64 },
    #[error("time-sliced norm blew up to {norm:e}")]
    NormBlowup { norm: f64 },
    #[error("measure variant {variant} is degenerate (total mass {mass:e})")]
    DegenerateMeasure { variant: &'static str, mass: f64 },
    #[error("position {x} lies outside the domain [{x_min}, {x_max}]")]
    OutOfDomain { x: f64, x_min: f64, x_max: f64 },
    #[error("Feynman-Kac mass collapsed at step {step} (ratio {ratio:e})")]
    MassCollapse { step: usize, ratio: f64 },
    #[error("energy estimate did not converge: last two estimates differ by {delta:e}")]
    NotConverged { delta: f64 },
    #[error("kernel requires a real Hamiltonian (max imaginary part {imag:e})")]
    ComplexHamiltonian { imag: f64 },
}
