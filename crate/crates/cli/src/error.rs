use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] collarlab::CollarError),

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// Process exit class: 2 for configuration and environment problems.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
