use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("config syntax: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("unknown suite {0:?}; expected one of {1}")]
    UnknownSuite(String, String),

    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: memlab_core::Error,
    },

    #[error(transparent)]
    Core(#[from] memlab_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, CliError>;
