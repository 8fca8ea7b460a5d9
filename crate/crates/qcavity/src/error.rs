//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max |M - M\u{2020}| = {deviation:.3e} exceeds {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error(
        "matrix is numerically full rank: smallest singular value {sigma_min:.3e} \
         exceeds threshold {threshold:.3e}"
    )]
    FullRank { sigma_min: f64, threshold: f64 },

    #[error("null space is degenerate: {found} null directions found")]
    DegenerateNullSpace { found: usize },

    #[error("null-vector residual {residual:.3e} exceeds bound {bound:.3e}")]
    NullResidual { residual: f64, bound: f64 },

    #[error("steady-state residual {residual:.3e} exceeds bound {bound:.1e}")]
    SteadyResidual { residual: f64, bound: f64 },

    #[error("line fit requires at least two distinct x values")]
    DegenerateFit,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Fock index {n} outside cavity truncation {n_cavity}")]
    FockOutOfRange { n: usize, n_cavity: usize },

    #[error("trace drift {drift:.3e} exceeds {bound:.1e}; reduce the integration step")]
    TraceDrift { drift: f64, bound: f64 },

    #[error("density matrix invariant violated: {0}")]
    InvalidDensity(String),

    #[error("expectation value has imaginary part {imag:.3e} above tolerance")]
    ComplexExpectation { imag: f64 },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("no maximally entangled peak found on the scan grid")]
    NoMesFound,

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration errors, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 3,
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Backend(e.to_string())
    }
}
