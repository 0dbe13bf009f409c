use thiserror::Error;

/// Failure modes shared by the model, optimizer, and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the closed forms are defined.
    #[error("parameter `{name}` = {value} out of domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The requested operating point (or search) admits no feasible solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The energy model evaluates to zero consumption, so EE is undefined.
    #[error("degenerate model: {0}")]
    Degenerate(String),

    /// Simulation settings that cannot be honoured (window too small, budget).
    #[error("simulation setup: {0}")]
    Simulation(String),

    /// A run configuration that cannot be parsed or resolved.
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    /// True for errors that mean "the model has no solution here" rather than
    /// "the caller passed garbage".
    pub fn is_infeasibility(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
