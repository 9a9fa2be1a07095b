use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OcpError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The tilt `s` lies outside the stability domain of the tilted potential.
    #[error("stability error: s = {s} is outside the stability domain for p = {p} ({domain})")]
    Stability { p: f64, s: f64, domain: String },

    /// An iterative method failed to converge or a self-check disagreed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A requested derivative does not exist because of a phase transition at s = 0.
    #[error(
        "singularity error: cumulant of order {order} does not exist at s = 0 for p = {p} \
         (transition of order {transition})"
    )]
    Singularity { p: f64, order: u32, transition: u32 },

    /// Two particles share a position, so the pair energy is infinite.
    #[error("singularity error: particles {i} and {j} coincide")]
    Coincident { i: usize, j: usize },
}

pub type Result<T> = std::result::Result<T, OcpError>;

pub(crate) fn domain(msg: impl Into<String>) -> OcpError {
    OcpError::Domain(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> OcpError {
    OcpError::Numerical(msg.into())
}
