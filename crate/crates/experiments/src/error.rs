use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] harmonicity::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code: 2 for invalid input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use harmonicity::Error as E;
        match self {
            ExperimentError::Config(_) | ExperimentError::Io(_) => 2,
            ExperimentError::Numerical(E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::EmptySubdomain { .. }) => 2,
            ExperimentError::Numerical(_) => 3,
        }
    }
}
