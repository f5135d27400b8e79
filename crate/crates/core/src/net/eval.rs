use rayon::prelude::*;

use crate::data::{EncodedDataset, FoldAssignment};
use crate::net::{train, Network, NetworkStructure, TrainConfig};
use crate::{Error, Result};

/// Classification accuracy over a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub accuracy: f64,
    pub n_correct: usize,
    pub n_total: usize,
}

/// Predicts class 1 when the output is at least 0.5 (ties go to class 1) and
/// reports the fraction of correct predictions.
pub fn evaluate(net: &Network, data: &EncodedDataset) -> Result<EvalResult> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.n_cols() != net.structure().input_size() {
        return Err(Error::DimensionMismatch {
            expected: net.structure().input_size(),
            got: data.n_cols(),
        });
    }
    let mut acts = net.new_activations();
    let mut n_correct = 0usize;
    for r in 0..data.n_rows() {
        net.forward_into(data.row(r), &mut acts);
        let p = acts.last().unwrap()[0];
        let pred = u8::from(p >= 0.5);
        if pred == data.labels()[r] {
            n_correct += 1;
        }
    }
    Ok(EvalResult {
        accuracy: n_correct as f64 / data.n_rows() as f64,
        n_correct,
        n_total: data.n_rows(),
    })
}

/// Result of a k-fold cross-validation run.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub mean_accuracy: f64,
    pub per_fold: Vec<EvalResult>,
    /// A network trained on the full dataset with the base seed; downstream
    /// feature analysis operates on this single weight set.
    pub final_net: Network,
}

/// Trains and tests once per fold (train on the complement, test on the
/// fold), then trains one network on the full dataset.
///
/// Fold `i` uses seed `cfg.seed + i` for both initialization and shuffling,
/// so reruns reproduce `per_fold` exactly and fold trainings are independent
/// of execution order.
pub fn cross_validate(
    structure: &NetworkStructure,
    data: &EncodedDataset,
    folds: &FoldAssignment,
    cfg: &TrainConfig,
) -> Result<CrossValidation> {
    if folds.n_rows() != data.n_rows() {
        return Err(Error::DimensionMismatch { expected: data.n_rows(), got: folds.n_rows() });
    }
    let per_fold: Vec<Result<EvalResult>> = (0..folds.k())
        .into_par_iter()
        .map(|fold| {
            let train_rows = folds.complement_rows(fold);
            let test_rows = folds.fold_rows(fold);
            let train_data = data.select_rows(&train_rows);
            let test_data = data.select_rows(&test_rows);
            if !train_data.has_both_classes() {
                return Err(Error::OneClassTraining { fold });
            }
            let fold_cfg = cfg.with_seed(cfg.seed.wrapping_add(fold as u64));
            let net = Network::init(structure.clone(), fold_cfg.seed);
            let net = train(net, &train_data, &fold_cfg)?;
            evaluate(&net, &test_data)
        })
        .collect();
    let per_fold: Vec<EvalResult> = per_fold.into_iter().collect::<Result<_>>()?;
    let mean_accuracy =
        per_fold.iter().map(|e| e.accuracy).sum::<f64>() / per_fold.len() as f64;

    let final_net = train(Network::init(structure.clone(), cfg.seed), data, cfg)?;
    Ok(CrossValidation { mean_accuracy, per_fold, final_net })
}
