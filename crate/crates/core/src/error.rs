use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trap parameters: {0}")]
    InvalidTrap(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("quadratic form is not positive: {0}")]
    Indefinite(String),

    #[error("frequencies disagree: closed form ({closed_mu1}, {closed_mu2}) vs eigensolver ({numeric_mu1}, {numeric_mu2})")]
    FrequencyMismatch {
        closed_mu1: f64,
        closed_mu2: f64,
        numeric_mu1: f64,
        numeric_mu2: f64,
    },

    #[error("grid: {0}")]
    Grid(String),

    #[error("under-resolved field: {0}")]
    Resolution(String),

    #[error("Fock degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("input must be normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("window too small: {0}")]
    Window(String),

    #[error("need at least {needed} zeros, found {found}")]
    InsufficientZeros { found: usize, needed: usize },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
