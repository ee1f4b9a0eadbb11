use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource guard exceeded: {what} (cap {cap})")]
    GuardExceeded { what: String, cap: u64 },

    #[error("language dies at m = {m}: every length-{m} word is closed")]
    LanguageDies { m: usize },

    #[error("internal consistency fault: {0}")]
    Internal(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_r})")]
    NoConvergence {
        iterations: usize,
        last_r: f64,
        last_x: Vec<f64>,
    },

    #[error("quotient matrix is reducible ({components} strongly connected components, sizes {sizes:?})")]
    Reducible { components: usize, sizes: Vec<usize> },

    #[error("no exponential certificate at these parameters: {0}")]
    NoCertificate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage ordering error: {0}")]
    StageOrder(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
