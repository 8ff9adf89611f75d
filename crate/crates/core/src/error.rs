use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("cost constraint infeasible: gamma = {gamma} but the cheapest input costs {min_cost}")]
    Infeasible { gamma: f64, min_cost: f64 },

    #[error("channel is not degraded; use the upper bound instead")]
    NotDegraded,

    #[error("enumeration budget exceeded: {what} = {size} > {budget}")]
    Budget {
        what: String,
        size: u128,
        budget: u128,
    },

    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(Error::Domain {
            name,
            value,
            domain,
        });
    }
    Ok(())
}
