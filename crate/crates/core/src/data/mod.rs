//! Dataset ingestion, one-hot encoding, fold partitioning, and feature costs.

mod cost;
mod encode;
mod fold;
mod raw;
mod schema;
pub mod synth;

pub use cost::{model_cost, sample_costs, CostProfile};
pub use encode::{encode, EncodedDataset};
pub use fold::{kfold, FoldAssignment};
pub use raw::{load_csv, RawDataset, RawRecord, RawValue};
pub use schema::{FeatureId, FeatureKind, FeatureSchema, FeatureSpec, SchemaFile};
