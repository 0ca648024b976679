use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("structure check failed: {0}")]
    Structure(String),

    #[error("function undefined at eigenvalue {0}")]
    Undefined(f64),

    #[error("support violation: {0}")]
    Support(String),

    #[error("numerical guard: {0}")]
    Numerical(String),

    #[error("training diverged at iteration {iteration}: objective {objective}")]
    Diverged { iteration: usize, objective: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Support(_) | Error::Numerical(_) | Error::Diverged { .. } | Error::Undefined(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
