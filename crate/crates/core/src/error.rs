use thiserror::Error;

/// Errors raised by evaluation, fitting and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("singular point at x = {x}: {reason}")]
    SingularPoint { x: f64, reason: &'static str },
    #[error("{0}")]
    Domain(String),
    #[error("observation {index} (x = {x}) lies outside the model support")]
    DataSupport { index: usize, x: f64 },
    #[error("mgf diverges at t = {t}")]
    Divergence { t: f64 },
    #[error("envelope construction failed: {0}")]
    Envelope(String),
    #[error("sampler efficiency too low: acceptance rate {rate:.2e} after {proposals} proposals")]
    Efficiency { rate: f64, proposals: u64 },
    #[error("optimization failed on all {} starts: {}", .0.len(), .0.join("; "))]
    OptimizationFailure(Vec<String>),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("mixture fit failed: {0}")]
    MixtureCollapse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParameter {
            name: name.to_string(),
            value,
            reason: "must be finite and > 0",
        });
    }
    Ok(())
}

pub(crate) fn check_finite(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name: name.to_string(),
            value,
            reason: "must be finite",
        });
    }
    Ok(())
}
