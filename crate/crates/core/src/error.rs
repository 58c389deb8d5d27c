use thiserror::Error;

/// Errors produced while building codes, counting, decoding or simulating.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("prefix length {len} outside 1..={n}")]
    PrefixLength { len: usize, n: usize },

    #[error("code symbols must be -1 or +1, found {0}")]
    InvalidSymbol(i64),

    #[error("gram target rejected: {0}")]
    InvalidTarget(String),

    #[error(
        "code too large: tree {tree} has {pool} candidates but {requested} codewords are requested"
    )]
    CodeTooLarge {
        tree: usize,
        pool: u64,
        requested: u64,
    },

    #[error("degenerate rate: {per_tree} codewords per tree (need at least 2)")]
    DegenerateRate { per_tree: u64 },

    #[error("index {index} out of range for a code with {size} codewords")]
    IndexOutOfRange { index: u64, size: u64 },

    #[error("not a codeword")]
    NotACodeword,

    #[error("count overflows 64 bits")]
    CountOverflow,

    #[error("singular gram matrix")]
    SingularGram,

    #[error("stack overflow after {expansions} expansions (capacity {capacity})")]
    StackOverflow { expansions: u64, capacity: usize },

    #[error("received vector has {got} samples, expected {expected}")]
    ReceivedLength { got: usize, expected: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
