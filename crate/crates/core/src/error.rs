use alloc::string::String;

/// Errors shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("forms are not pairwise independent")]
    NotPairwiseIndependent,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("interpolation inconsistency: {0}")]
    Interpolation(String),
    #[error("empty set: {0}")]
    Empty(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("contract breach: {0}")]
    Contract(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a failed check.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Numerical(_) | Error::Contract(_) | Error::Interpolation(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
