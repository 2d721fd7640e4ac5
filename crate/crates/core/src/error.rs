use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The lattice or run configuration is not physically valid.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("integration error: relative norm drift {drift:.3e} over one period exceeds {tolerance:.1e} at {steps} steps per period")]
    Integration {
        drift: f64,
        tolerance: f64,
        steps: usize,
    },

    #[error("singular propagator: eigenvalue modulus {modulus:.3e} (total absorption)")]
    SingularPropagator { modulus: f64 },

    #[error("logarithm branch: eigenvalue phase {phase:.4} rad exceeds the 0.9π guard")]
    Branch { phase: f64 },

    #[error("conditioning error: {what} (condition number {condition:.3e}, round-trip residual {residual:.3e})")]
    Conditioning {
        what: String,
        condition: f64,
        residual: f64,
    },

    #[error("Lyapunov window error: boundary amplitude ratio {ratio:.3e} at period {period} exceeds {tolerance:.1e}; use a larger lattice")]
    Window {
        ratio: f64,
        period: usize,
        tolerance: f64,
    },

    #[error("GBZ is not circular: residual {residual:.4} vs radius {radius:.4}")]
    NonCircularGbz { residual: f64, radius: f64 },

    #[error("GBZ failure: {skipped} of {total} energies had no modulus-matched root pair")]
    GbzFailure { skipped: usize, total: usize },

    #[error("scale error: N·|g| = {0:.2} exceeds the overflow guard")]
    Scale(f64),

    #[error("operator construction error: {0}")]
    Construction(String),

    #[error("numerical stability error after period {period}: {detail}")]
    NumericalStability { period: usize, detail: String },

    #[error("positivity error: entry {value:.3e} at ({row}, {col})")]
    Positivity { row: usize, col: usize, value: f64 },

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by invalid user input rather than numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Configuration(_) | Error::Parse(_) | Error::Domain(_)
        )
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Eigen(e.to_string())
    }
}
