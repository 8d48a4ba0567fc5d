use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error ({context}): {message}")]
    Parse { context: String, message: String },

    #[error("unsupported format version: expected {expected:?}, found {found:?}")]
    FormatVersion { expected: String, found: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("basis matrix is numerically singular")]
    SingularBasis,

    #[error("infeasible input: {0}")]
    InfeasibleInput(String),

    #[error("numerical failure in stage `{stage}`")]
    Numerical { stage: String },

    #[error("tensor `{name}`: {message}")]
    Tensor { name: String, message: String },

    #[error("no initial incumbent: {0}")]
    NoIncumbent(String),

    #[error("dataset record {record}: {message}")]
    Dataset { record: usize, message: String },

    #[error("external solver adapter unavailable: {0}")]
    AdapterUnavailable(String),

    #[error("external solver failed: {0}")]
    AdapterFailed(String),

    #[error("benchmark: {0}")]
    Bench(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }
}
