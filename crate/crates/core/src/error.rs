use thiserror::Error;

/// Errors produced by the model, the criteria and the search routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("division or modulo by zero while evaluating `{expr}` at t = {t}")]
    DivisionByZero { expr: String, t: f64 },

    #[error("expression `{expr}` is not finite at t = {t}")]
    NonFinite { expr: String, t: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("average load is nonpositive at iteration {t} (mu = {value})")]
    NonPositiveLoad { t: usize, value: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid criterion `{spec}`: {reason}")]
    InvalidCriterion { spec: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("brute force refused: gamma = {gamma} exceeds the cap of {cap}")]
    BruteForceCap { gamma: usize, cap: usize },

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error("criterion `{family}` has no sweepable parameter `{param}`")]
    UnknownParameter { family: String, param: String },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad user input (as opposed to failures while
    /// running a well-formed request).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::InvalidModel(_)
                | Error::InvalidScenario(_)
                | Error::InvalidCriterion { .. }
                | Error::BruteForceCap { .. }
                | Error::UnknownBenchmark(_)
                | Error::UnknownParameter { .. }
                | Error::InvalidGrid(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
