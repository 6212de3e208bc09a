use thiserror::Error;

/// Errors produced by dataset handling and the fitters.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate abscissa {value}")]
    DuplicateAbscissa { value: f64 },

    #[error("abscissae must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },

    #[error("need at least {required} rows, found {found}")]
    TooFewRows { found: usize, required: usize },

    #[error("abscissae and ordinates differ in length ({t} vs {y})")]
    LengthMismatch { t: usize, y: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("exp({k}*{t}) overflows; shift or rescale the abscissae so that |k*t| <= 700")]
    Overflow { k: f64, t: f64 },

    #[error("rate k = 0 is the line limit; use the line fit instead")]
    ZeroRate,

    #[error("expected exactly {expected} points, found {found}")]
    WrongSize { expected: usize, found: usize },

    #[error("no sign change found for the quartet equation: {0}")]
    BracketNotFound(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("design matrix is rank deficient at every grid node")]
    RankDeficient,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("series diverged: |x[{index}]| = {value} exceeds 1e8")]
    Divergence { index: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FitError {
    /// True for errors caused by the input (malformed data, bad arguments)
    /// rather than by a numerical failure during fitting.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            FitError::Parse { .. }
                | FitError::DuplicateAbscissa { .. }
                | FitError::NotIncreasing { .. }
                | FitError::TooFewRows { .. }
                | FitError::LengthMismatch { .. }
                | FitError::NonFinite { .. }
                | FitError::WrongSize { .. }
                | FitError::ZeroRate
                | FitError::InvalidGrid(_)
                | FitError::Precondition(_)
                | FitError::Io(_)
        )
    }
}

pub type Result<T, E = FitError> = std::result::Result<T, E>;
