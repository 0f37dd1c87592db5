use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Rejected configuration. The CLI exits with status 2.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Core(#[from] latticesq_core::error::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// Configuration problems, including capacity limits, as opposed to
    /// failures while running.
    pub fn is_config(&self) -> bool {
        use latticesq_core::error::Error as Core;
        matches!(
            self,
            ExperimentError::Config(_)
                | ExperimentError::Capacity(_)
                | ExperimentError::Core(Core::Capacity { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
