use std::path::PathBuf;

use crate::data::FeatureId;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("header mismatch: column '{0}' not found in CSV header")]
    HeaderMismatch(String),

    #[error("label column '{0}' not found in CSV header")]
    LabelColumnMissing(String),

    #[error("dataset has {rows} usable rows but at least {needed} are required")]
    DatasetTooSmall { rows: usize, needed: usize },

    #[error("unknown feature id {0}")]
    UnknownFeature(FeatureId),

    #[error("feature '{feature}' has no category named '{value}'")]
    UnknownCategory { feature: String, value: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty feature set")]
    EmptyFeatureSet,

    #[error("training data contains a single class")]
    SingleClass,

    #[error("training data for fold {fold} contains a single class")]
    OneClassTraining { fold: usize },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("no weak feature found within {max_rounds} threshold escalation rounds")]
    EscalationLimit { max_rounds: u32 },

    #[error("cannot meet budget {budget}: cheapest reachable model costs {floor_cost}")]
    BudgetInfeasible { budget: u64, floor_cost: u64 },

    #[error("malformed network file: {0}")]
    MalformedNetwork(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}
