use crate::coalition::Coalition;

/// Errors surfaced by the solver library.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Malformed input: ground-set mismatches, bad parameters, unparsable
    /// rationals.
    #[error("invalid input: {0}")]
    Input(String),

    /// A size guard was hit (exhaustive engines refuse rather than degrade).
    #[error("{what} supports at most {limit}, got {got}")]
    Size {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// The operation requires a convex game and the input is provably not one.
    #[error("game is not convex: marginal violation for players {i}, {j} at {base}")]
    NotConvex {
        i: usize,
        j: usize,
        base: Coalition,
    },

    /// The operation is undefined for this game (e.g. least core of a
    /// one-player game).
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
