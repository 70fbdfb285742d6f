use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config `{path}`: {source}")]
    ReadConfig {
        path: String,
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error(transparent)]
    Core(#[from] twl_core::Error),

    #[error("every evaluated position is unidentifiable")]
    AllUnidentifiable,

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("cannot write output: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot write output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. } | CliError::Parse(_) | CliError::Invalid { .. } => 2,
            CliError::Core(twl_core::Error::InvalidParameter { .. })
            | CliError::Core(twl_core::Error::DegenerateRegion(_))
            | CliError::Core(twl_core::Error::EmptyInput(_)) => 2,
            CliError::Core(_) | CliError::AllUnidentifiable => 3,
            CliError::Write(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
