use thiserror::Error;

/// Errors raised by the simulation, reduction, and estimation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a domain constraint (negative rate, zero horizon, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive ODE integrator could not advance past `last_t`.
    #[error("integration failed at t = {last_t}: {reason}")]
    IntegrationFailure { last_t: f64, reason: String },

    /// Averaged intensities for the activation reactions are not available in
    /// closed form; only their balance is checkable.
    #[error("no averaged intensity for reaction {0}: activation intensities have no closed form")]
    UnsupportedReaction(&'static str),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
