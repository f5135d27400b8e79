//! Budget-constrained feedforward classifiers via weak-link feature elimination.
//!
//! Collecting the input features of a deployed classifier costs money: every
//! feature a model consumes has to be measured for each new data point. This
//! crate trains small fully connected feedforward networks on tabular binary
//! classification data, ranks input features by how little the trained weights
//! rely on them, and removes the least important feature until the summed
//! feature cost of the model fits a given budget.
//!
//! The building blocks:
//!
//! - [`data`] — CSV ingestion against a declared feature schema, one-hot
//!   encoding with a logical-feature/column map, k-fold partitioning, feature
//!   cost profiles, and a seeded synthetic dataset generator.
//! - [`net`] — a from-scratch fully connected network (ReLU hidden layers,
//!   sigmoid output) with minibatch training, evaluation, k-fold
//!   cross-validation, gradient checking, and text serialization.
//! - [`prune`] — per-neuron thresholds, backward weak-link/weak-neuron
//!   marking, and selection of the least important input feature.
//! - [`budget`] — generation of a single budget-constrained model and of a
//!   budget-sorted schedule of models, plus one-feature-at-a-time ablation.
//! - [`baselines`] — cost-based and random removal strategies and the
//!   best-of-n comparison harness.
//! - [`cli`] — the config-driven command line entry points behind the
//!   `bcmnet` binary.
//!
//! Every operation is deterministic given its seeds: rerunning a command with
//! the same config produces byte-identical output files.

pub mod baselines;
pub mod budget;
pub mod cli;
pub mod data;
mod error;
pub mod net;
pub mod prune;

pub use error::{Error, Result};
