use thiserror::Error;

/// Errors raised across the simulator and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("mode structure mismatch: {0}")]
    ModeMismatch(String),

    #[error("photon cutoff violated: needs {needed} photons, cutoff is {cutoff}")]
    CutoffViolation { needed: usize, cutoff: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("no counts recorded for setting {0}")]
    ZeroCounts(String),

    #[error("unknown variant: {0}")]
    UnknownVariant(String),

    #[error("graph too large: {0} vertices (max 16)")]
    GraphTooLarge(usize),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("no real root in range: {0}")]
    NoRoot(String),

    #[error("all likelihoods vanish")]
    DegenerateLikelihood,

    #[error("experiment has zero detection probability")]
    ZeroProbability,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
            Error::UnknownVariant(_) | Error::InvalidArgument(_) => 2,
            _ => 3,
        }
    }
}
