use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// Even the top of the SINR bracket needs more than `m_star` channel uses.
    #[error("SINR bracket too narrow: blocklength {m_at_hi} needed at gamma_hi = {gamma_hi}, target {m_star}")]
    Bracket {
        m_star: f64,
        gamma_hi: f64,
        m_at_hi: f64,
    },

    #[error("bisection did not converge within {iterations} iterations")]
    NoConvergence { iterations: u32 },

    #[error("invalid user spec: {0}")]
    InvalidSpec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}
