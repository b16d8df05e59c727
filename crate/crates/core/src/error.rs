use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver failed to converge")]
    EigNoConvergence,

    #[error("Kronecker product dimension overflow: {0} x {1}")]
    KronOverflow(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hamiltonian is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),

    #[error("requested symmetry sector (charge {0}) is empty")]
    EmptySector(i64),

    #[error("superoperator does not preserve the sector (cross-block norm {norm:.3e})")]
    SectorNotPreserved { norm: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("need at least {need} distinct levels, got {got}")]
    TooFewLevels { got: usize, need: usize },

    #[error("non-finite value in input data")]
    NonFiniteData,

    #[error("degenerate sampling box (zero area)")]
    DegenerateBox,

    #[error("no stripe with at least 3 members")]
    NoUsableStripe,

    #[error("empty spectrum list")]
    EmptySpectra,

    #[error("empty width grid")]
    EmptyGrid,

    #[error("decomposition is not biorthonormal")]
    NotBiorthonormal,

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("stripe spectral weight below cutoff; renormalized dynamics undefined")]
    VanishingWeight,

    #[error("ODE integrator failed: {0}")]
    OdeFailure(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
