use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("degenerate track geometry: zero-perimeter track box")]
    DegenerateTrackBox,

    #[error("embedding norm {0:e} is too small to normalize")]
    ZeroNorm(f64),

    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feature accumulation produced the zero vector")]
    UndefinedUpdate,

    #[error("frame index must strictly increase: previous {previous}, got {got}")]
    NonIncreasingFrame { previous: u32, got: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("embedding file: {0}")]
    Embedding(String),

    #[error("missing embedding for frame {frame}, detection {index}")]
    MissingEmbedding { frame: u32, index: u32 },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
