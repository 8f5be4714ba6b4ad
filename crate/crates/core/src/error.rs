use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {evaluations} evaluations")]
    QuadratureNonConvergence {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("oscillatory sum did not converge after {lobes} lobes: last partial sum {last_partial:e}, last extrapolation change {last_change:e}")]
    AccelerationNonConvergence {
        lobes: usize,
        last_partial: f64,
        last_change: f64,
    },

    #[error("density evaluated to {value:e} at rho = {rho}, below the negativity tolerance")]
    NegativeDensity { rho: f64, value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("not sigma-stable at order {sigma}: {detail}")]
    NotStable { sigma: f64, detail: String },

    #[error("ball B({center}, {radius}) has zero measure at pair ({x}, {y})")]
    ZeroMeasureBall {
        x: usize,
        y: usize,
        center: usize,
        radius: f64,
    },

    #[error("grid padding insufficient: edge tail correction {correction:e} exceeds tolerance {tol:e}; pad to at least {required_padding} from the support")]
    InsufficientPadding {
        correction: f64,
        tol: f64,
        required_padding: f64,
    },

    #[error("precondition refused: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}
