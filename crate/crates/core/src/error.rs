use thiserror::Error;

/// Errors raised by the bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The linear program has no feasible point; the observations are
    /// inconsistent with the source model.
    #[error("infeasible linear program: {0}")]
    Infeasible(String),

    /// A bound could not be certified (e.g. dual residual above tolerance).
    #[error("uncertified bound: {0}")]
    Uncertified(String),

    /// A numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("{name} = {x} is outside [0, 1]"));
    }
    Ok(())
}
