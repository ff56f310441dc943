use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the evaluation, sampling and verification routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at non-positive integer {0}")]
    GammaPole(f64),

    #[error("binomial series diverges for Re(z) = {0} <= -1")]
    DivergentSeries(f64),

    #[error("tail index for Re(z) = {re}, eps = {eps:e} exceeds the cap of {cap} terms")]
    TailIndexTooLarge { re: f64, eps: f64, cap: usize },

    #[error("pointwise evaluation unsupported for degree {0} (Re(z) in (-1, 0]); sample through the Fourier symbol instead")]
    PointwiseUnsupported(Complex64),

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonconvergence { estimate: f64, tolerance: f64 },

    #[error("direction column {0} is the zero vector")]
    ZeroColumn(usize),

    #[error("direction set has rank {rank}, expected {d}")]
    RankDeficient { rank: usize, d: usize },

    #[error("direction column {0} violates the positive-first-component convention")]
    SignConvention(usize),

    #[error("direction matrix is {d}x{columns}, not square")]
    NotSquare { d: usize, columns: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frequency is orthogonal to direction column {0}; the symbol has a pole there")]
    OrthogonalFrequency(usize),

    #[error("spectrum factorization undefined where the base factor vanishes")]
    UndefinedFactorization,

    #[error("estimated neglected tail energy {estimate:e} exceeds the budget {budget:e}")]
    TailBudgetExceeded { estimate: f64, budget: f64 },

    #[error("operation requires a diagonal direction matrix")]
    NonDiagonal,

    #[error("refinement masks require integer direction columns")]
    NonIntegerColumns,

    #[error("mask enumeration needs {points} lattice points, above the cap of {cap}")]
    MaskTooLarge { points: f64, cap: usize },

    #[error("spectrum carries a fraction {fraction:e} of its energy inside the window's inner region")]
    WindowViolation { fraction: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
