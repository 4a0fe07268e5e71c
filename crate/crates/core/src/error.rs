use thiserror::Error;

/// Errors raised anywhere in the realization library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("operator norm {norm:.6} exceeds one")]
    NormExceedsOne { norm: f64 },

    #[error("non-finite entry in {what}")]
    NonFinite { what: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point lies outside the admissible ball (squared norm {norm_sq:.6})")]
    PointOutsideBall { norm_sq: f64 },

    #[error("resolvent I - Z(lambda)A is numerically singular")]
    SingularResolvent,

    #[error("kernel denominator 1 - <lambda, zeta> vanishes")]
    SingularDenominator,

    #[error("colligation is not contractive (norm {norm:.6})")]
    NotContractive { norm: f64 },

    #[error("output pair is not contractive (minimum defect eigenvalue {min_eig:.3e})")]
    NotContractivePair { min_eig: f64 },

    #[error("sample contains duplicate points ({first} and {second})")]
    DuplicatePoints { first: usize, second: usize },

    #[error("Taylor rank {taylor} disagrees with sampled rank {sampled}")]
    RankInstability { taylor: usize, sampled: usize },

    #[error(
        "generator equations are inconsistent (fit residual {fit_residual:.3e}, isometry residual {isometry_residual:.3e})"
    )]
    LeastSquaresInconsistent {
        fit_residual: f64,
        isometry_residual: f64,
    },

    #[error("completion necessary conditions fail: {0}")]
    NecessaryConditionsFail(String),

    #[error("completion parameter has shape {got:?}, expected {expected:?}")]
    ParameterShapeMismatch {
        got: (usize, usize),
        expected: (usize, usize),
    },

    #[error("completion parameter is not a contraction (norm {norm:.6})")]
    ParameterNotContractive { norm: f64 },

    #[error("input dimension {given} is below the minimal admissible {required}")]
    DimUTooSmall { given: usize, required: usize },

    #[error("kernels K_S and K_(C,A) differ on the sample (max difference {max_diff:.3e})")]
    KernelMismatch { max_diff: f64 },

    #[error("Gram matrix is degenerate: {0}")]
    DegenerateGram(String),

    #[error("invalid tolerance or configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
