use thiserror::Error;

/// Errors raised by the library. Each variant corresponds to one failure class the
/// CLI maps onto an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dual state: {0}")]
    State(String),

    #[error("no crossing: {curve} curve has no sign change on [0, {k_max}]")]
    NoCrossing { curve: &'static str, k_max: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("unbounded multiplier: lambda and mu are both zero")]
    UnboundedMultiplier,

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
