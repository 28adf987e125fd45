use thiserror::Error;

/// Errors produced by scale construction, grid operations, solvers, and
/// experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on inputs was violated (bad grid parameters, malformed
    /// scale spec, non-uniform scale where a uniform one is required, ...).
    #[error("validation: {0}")]
    Validation(String),

    /// A grid function does not fit the time scale it is paired with.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// An index lies outside the valid range of a scale or grid function.
    #[error("index {index} out of range for {context} of length {len}")]
    IndexOutOfRange {
        index: usize,
        len: usize,
        context: &'static str,
    },

    /// A stepping solver failed; `step` is the index of the point being
    /// computed when the failure occurred.
    #[error("solver failure at step {step}: {message}")]
    Solver { step: usize, message: String },

    /// Malformed configuration (CLI arguments or config file).
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end:
    /// 1 for validation problems, 2 for solver failures.
    /// (Exit code 3, acceptance-band failure, is not an error; commands
    /// report it through their outcome types.)
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
