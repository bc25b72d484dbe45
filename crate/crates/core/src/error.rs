use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("noise regularity condition diverges: exponent 2(s + 1/rho - beta) = {exponent:.6} must exceed 1")]
    Divergent { exponent: f64 },

    #[error("rational scheme is not I-stable: max |R(iy)| = {max_modulus:.17e}")]
    Unstable { max_modulus: f64 },

    #[error("insufficient data for a rate fit: {usable} usable levels, at least 3 required")]
    InsufficientData { usable: usize },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
