use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bracket syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("tree has an empty yield after preprocessing")]
    VacuousTree,

    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("label `{0}` contains the reserved binarization separator")]
    ReservedSymbol(String),

    #[error("inconsistent move {index} ({mv}) with stack [{stack}]")]
    BadDerivation {
        index: usize,
        mv: String,
        stack: String,
    },

    #[error("incomplete derivation: {0}")]
    IncompleteDerivation(String),

    #[error("unseen word `{0}`")]
    UnseenWord(String),

    #[error("unseen conditioning context: {0}")]
    UnseenContext(String),

    #[error("enumeration exceeds limit of {0} items")]
    LimitExceeded(usize),

    #[error("grammar admits unboundedly many parses (unary cycle through `{0}`)")]
    Unbounded(String),

    #[error("terminal yields differ in sentence {index}")]
    YieldMismatch { index: usize },

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("unsupported model file version {0}")]
    ModelVersion(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
