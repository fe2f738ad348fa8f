use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("matrix is not symplectic (deviation {0:.3e})")]
    NotSymplectic(f64),

    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("S + I is singular; the Cayley transform is undefined")]
    SingularCayley,

    #[error("real part of the quadratic form is not positive definite")]
    NotPositiveDefinite,

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("imaginary residue {residue:.3e} exceeds {bound:.3e}")]
    ImaginaryResidueExceeded { residue: f64, bound: f64 },

    #[error("degenerate overlap: |det| = {0:.3e}")]
    DegenerateOverlap(f64),

    #[error("superposition has vanishing norm ({0:.3e})")]
    ZeroNorm(f64),

    #[error("reduced Planck constants differ: {0} vs {1}")]
    HbarMismatch(f64, f64),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("negative thermal occupation {0}")]
    NegativeOccupation(f64),

    #[error("{0} and {1} are not coprime")]
    NotCoprime(u32, u32),

    #[error("Fock truncation N = {dim} insufficient (tail {tail:.3e})")]
    TruncationInsufficient { dim: usize, tail: f64 },

    #[error("grid check failed: {0}")]
    Grid(String),

    #[error("Nyquist violation: {0}")]
    Nyquist(String),

    #[error("deconvolution ill-posed: state is not wider than a coherent state in q")]
    DeconvolutionIllPosed,

    #[error("branch width collapsed")]
    WidthCollapse,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
