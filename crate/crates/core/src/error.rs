use thiserror::Error;

/// Errors raised by the bound calculus, the discretized model spaces and the CLI plumbing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("measure regime mismatch: {0}")]
    Regime(String),
    #[error("{what} did not converge (achieved {achieved:e}, requested {requested:e})")]
    NoConvergence {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },
    #[error("infeasible input: {0}")]
    Infeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T: crate::Real>(what: &'static str, value: T, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value: value.as_f64(),
        domain,
    }
}
