use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{what} needs {requested}, exceeding the cap of {cap}")]
    Resource {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{sites} sites do not split into blocks of {block}")]
    Alignment { sites: usize, block: usize },

    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },
}
