use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A response denominator fell below the configured floor, i.e. the
    /// evaluation frequency sits on (or numerically at) a susceptibility pole.
    #[error("pole proximity at omega = {omega}: |denominator| = {magnitude:e} is below the floor {floor:e}")]
    PoleProximity { omega: f64, magnitude: f64, floor: f64 },

    #[error("operating point sits exactly at the parametric instability threshold")]
    AtInstability,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bandwidth undefined: {0}")]
    Bandwidth(String),

    #[error("force spectrum grid does not cover frequency {0}")]
    GridCoverage(f64),

    #[error("force spectrum violates the reality condition F[-w] = conj(F[w]) at w = {0}")]
    NotReal(f64),

    #[error("mechanical-to-optical transduction vanishes at omega = {0}")]
    TransductionNull(f64),

    #[error("root search failed: {0}")]
    Bracket(String),

    /// Malformed or inconsistent run configuration. `line` is 1-based when
    /// the offending entry could be located in the source text.
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
