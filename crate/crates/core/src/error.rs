use thiserror::Error;

/// Failures raised by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive enumeration would exceed the configured work limit.
    #[error("instance too large for exact enumeration: {required} evaluations exceed the limit of {limit}")]
    Capacity { required: u128, limit: u128 },

    /// An outcome has zero probability but a nonzero derivative in the fidelity,
    /// so the Fisher information is unbounded.
    #[error("singular Fisher information: outcome {outcome} has zero probability and nonzero derivative")]
    SingularInformation { outcome: usize },

    /// The observed outcome has zero likelihood under every mixture component.
    #[error("outcome is impossible under the model")]
    ImpossibleOutcome,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
