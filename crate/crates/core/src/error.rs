use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("price undefined for node {node}: mean demand is zero")]
    UndefinedPrice { node: usize },

    #[error("no fleet size attains a load factor in [{lf_min}, {lf_max}] (attainable: {attainable})")]
    NoFeasibleFleet {
        lf_min: f64,
        lf_max: f64,
        attainable: String,
    },

    #[error("{requests} requests cannot fit in a horizon of {horizon} periods")]
    HorizonTooShort { requests: u64, horizon: usize },

    #[error("period {t} outside 1..={horizon}")]
    PeriodOutOfRange { t: usize, horizon: usize },

    #[error("route with {size} nodes exceeds the Held-Karp limit of {limit}; use the anytime branch-and-bound path")]
    TourTooLarge { size: usize, limit: usize },

    #[error("dynamic program needs {needed} table entries, above the cap of {cap}; use a smaller instance")]
    StateSpaceTooLarge { needed: u128, cap: u128 },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
