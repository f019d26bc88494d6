use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },
    #[error("IRF channel {channel} sums to zero")]
    ZeroIrfChannel { channel: usize },
    #[error("negative IRF sample {value} at bin {bin}, channel {channel}")]
    NegativeIrfSample { channel: usize, bin: usize, value: f64 },
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("primitive {index} falls outside the {rows}x{cols} grid")]
    PrimitiveOutOfBounds { index: usize, rows: usize, cols: usize },
    #[error("class index {class} exceeds library class count {classes}")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("signal-to-background ratio undefined: background is zero with non-zero signal")]
    UndefinedSbr,
    #[error("pixel {0} has no data")]
    NoData(usize),
    #[error("quadrature underflow for class {class}: hyperparameters are degenerate")]
    QuadratureUnderflow { class: usize },
    #[error("field has no available values")]
    EmptyField,
    #[error("all pixels are excluded from sampling; scan complete")]
    ScanComplete,
    #[error("probability map has {available} pixels with mass but {requested} were requested")]
    InsufficientSupport { available: usize, requested: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn malformed(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Malformed { what, detail: detail.into() }
    }

    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter { name, detail: detail.into() }
    }
}
