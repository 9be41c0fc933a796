use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("resolution error: {reason}{}", suggestion_text(.suggested_extent))]
    Resolution {
        reason: String,
        suggested_extent: Option<f64>,
    },

    #[error("exponent error: {0}")]
    Exponent(String),

    #[error("non-uniform time grid: {0}")]
    NonUniformGrid(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("divergence: measured contraction ratio {ratio:.4}; {hint}")]
    Divergence { ratio: f64, hint: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

fn suggestion_text(extent: &Option<f64>) -> String {
    match extent {
        Some(l) => format!(" (suggested extent L >= {l:.1})"),
        None => String::new(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
