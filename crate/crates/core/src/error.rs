use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate channel: h = 0 carries no information")]
    DegenerateChannel,

    #[error("noise variance must be positive, got {0}")]
    InvalidNoiseVariance(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("soft bit {0} is outside [-1, 1]")]
    SoftBitOutOfRange(f64),

    #[error("alist parse error at line {line}: {message}")]
    AlistParse { line: usize, message: String },

    #[error("code construction error: {0}")]
    CodeConstruction(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("model load error: {0}")]
    ModelLoad(String),

    #[error("quantizer fit error: {0}")]
    Fit(String),

    #[error("file format error at line {line}: {message}")]
    Format { line: usize, message: String },
}
