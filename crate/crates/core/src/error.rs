use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or ids that do not fit the owning algebra.
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown sector `{0}`")]
    UnknownSector(String),

    /// Element evaluated outside the seminorm domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Quotient product depends on the choice of R(A) representatives.
    #[error("quotient product depends on representatives (residual {residual:.3e})")]
    IllDefinedProduct { residual: f64 },

    /// The spanning relation defining an induced operator is inconsistent.
    #[error("induced action of `{element}` is not well defined (residual {residual:.3e})")]
    IllDefinedAction { element: String, residual: f64 },

    #[error("truncation tower has {found} levels, at least {required} required")]
    TooFewLevels { found: usize, required: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("instance file: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl Error {
    /// Variant name, used in reports and fixture expectations.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed(_) => "Malformed",
            Error::UnknownSector(_) => "UnknownSector",
            Error::Domain(_) => "Domain",
            Error::Unsupported(_) => "Unsupported",
            Error::Precondition(_) => "Precondition",
            Error::IllDefinedProduct { .. } => "IllDefinedProduct",
            Error::IllDefinedAction { .. } => "IllDefinedAction",
            Error::TooFewLevels { .. } => "TooFewLevels",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Format(_) => "Format",
        }
    }
}
