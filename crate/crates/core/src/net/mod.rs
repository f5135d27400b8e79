//! A minimal fully connected feedforward network: training, evaluation,
//! k-fold cross-validation, gradient checking, and text serialization.
//!
//! Everything is deterministic given seeds. A [`Network`] is immutable once
//! returned; training consumes one value and produces a new one, and fold
//! trainings may run in parallel without affecting results.

mod eval;
mod gradcheck;
mod network;
mod serialize;
mod structure;
mod train;

pub use eval::{cross_validate, evaluate, CrossValidation, EvalResult};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use network::Network;
pub use serialize::{load_network, parse_network, render_network, save_network};
pub use structure::{HiddenActivation, NetworkStructure, OutputActivation};
pub use train::{mean_loss, train, train_with_losses, Optimizer, TrainConfig, TrainReport};

/// Initializes a network for a structure and seed; see [`Network::init`].
pub fn init_network(structure: NetworkStructure, seed: u64) -> Network {
    Network::init(structure, seed)
}
