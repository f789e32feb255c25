use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability triple ({win}, {draw}, {loss}): {reason}")]
    InvalidProbability {
        win: f64,
        draw: f64,
        loss: f64,
        reason: &'static str,
    },

    #[error("defensive style must draw at least as often as the offensive one (q_d = {defense_draw} < p_d = {offense_draw})")]
    NotDefensive {
        offense_draw: f64,
        defense_draw: f64,
    },

    #[error("horizon must be at least 1, got {0}")]
    InvalidHorizon(usize),

    #[error("horizon {requested} exceeds the configured budget of {limit} stages")]
    HorizonTooLarge { requested: usize, limit: usize },

    #[error("brute-force oracle supports horizons up to {limit}, got {requested}")]
    OracleHorizonTooLarge { requested: usize, limit: usize },

    #[error("regime not covered: {0}")]
    RegimeNotCovered(&'static str),

    #[error("sample count must be at least 1")]
    InvalidSampleCount,

    #[error("cannot represent {0:?} as a decimal with at most 6 fractional digits")]
    NotDecimal(String),
}

impl Error {
    /// True for errors caused by resource budgets rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::HorizonTooLarge { .. } | Error::OracleHorizonTooLarge { .. }
        )
    }
}
