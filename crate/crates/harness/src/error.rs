use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: skinwalk::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
}

impl HarnessError {
    pub fn stage(stage: impl Into<String>) -> impl FnOnce(skinwalk::Error) -> Self {
        let stage = stage.into();
        move |source| HarnessError::Stage { stage, source }
    }

    pub fn io(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.as_ref().display().to_string();
        move |source| HarnessError::Io { path, source }
    }

    /// 2 for configuration problems, 3 for numerical failures, 4 for
    /// acceptance failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 2,
            HarnessError::Stage { source, .. } if source.is_configuration() => 2,
            HarnessError::Stage { .. } => 3,
            HarnessError::Acceptance { .. } => 4,
        }
    }
}
