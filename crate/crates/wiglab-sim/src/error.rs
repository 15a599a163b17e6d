use wiglab_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    Validation(String),
    #[error("linear algebra backend failure: {0}")]
    Backend(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl SimError {
    pub fn validation(msg: impl Into<String>) -> Self {
        SimError::Validation(msg.into())
    }
}
