use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate grid: duplicate abscissa near index {0}")]
    DegenerateGrid(usize),

    #[error("x = {x} outside interpolation domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("{n} nodes cannot support derivative order {order}")]
    InsufficientNodes { n: usize, order: usize },

    #[error("pricer failed at bump point {x}: {source}")]
    PricerAt { x: f64, source: Box<Error> },

    #[error("no analytic oracle for this payoff")]
    UnsupportedOracle,

    #[error("explanation errors are undefined for grids of fewer than 2 points")]
    GridTooSmall,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps a pricer failure with the spot it occurred at.
    pub fn at_bump(self, x: f64) -> Self {
        Error::PricerAt {
            x,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
