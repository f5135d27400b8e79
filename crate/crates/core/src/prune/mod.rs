//! Weak-link and weak-neuron analysis of a trained network.
//!
//! Every non-input neuron carries a threshold. A link is weak when its
//! absolute weight falls below its target neuron's threshold, or when its
//! target neuron is weak; a neuron is weak when all of its outgoing links are
//! weak. Output neurons have no outgoing links and are never weak. Marking
//! proceeds in a single backward sweep, which on a layered network equals the
//! fixed point of the two rules.
//!
//! When no whole input feature comes out weak, every threshold is doubled and
//! the sweep reruns. The least important feature is the weak feature with the
//! highest measurement cost.

mod trace;

use std::collections::BTreeSet;

use serde::Deserialize;

use crate::data::{CostProfile, EncodedDataset, FeatureId};
use crate::net::Network;
use crate::{Error, Result};

pub use trace::{EscalationTrace, LayerRoundTrace, RoundTrace};

/// Smallest admissible threshold; keeps thresholds positive for neurons whose
/// incoming weights are all zero.
pub const THRESHOLD_FLOOR: f64 = f64::EPSILON * 64.0;

/// Per-neuron thresholds for all non-input neurons, together with the base
/// values they escalate from. `t[n] = base[n] * 2^escalation_round`.
#[derive(Debug, Clone)]
pub struct ThresholdMap {
    base: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    escalation_round: u32,
}

impl ThresholdMap {
    /// Builds a map from explicit per-neuron values: `values[l]` holds the
    /// thresholds of layer `l + 1` (the first non-input layer onward).
    pub fn from_thresholds(values: Vec<Vec<f64>>) -> Self {
        Self { base: values.clone(), t: values, escalation_round: 0 }
    }

    /// Threshold of neuron `index` in (non-input) layer `layer`.
    pub fn threshold(&self, layer: usize, index: usize) -> f64 {
        self.t[layer - 1][index]
    }

    pub fn base(&self, layer: usize, index: usize) -> f64 {
        self.base[layer - 1][index]
    }

    pub fn escalation_round(&self) -> u32 {
        self.escalation_round
    }

    /// Smallest base threshold across all neurons.
    pub fn min_base(&self) -> f64 {
        self.base
            .iter()
            .flat_map(|layer| layer.iter())
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Doubles every threshold: `t = base * 2^round` after `round += 1`.
    pub fn escalate(&mut self) {
        self.escalation_round += 1;
        let scale = (self.escalation_round as f64).exp2();
        for (ts, bases) in self.t.iter_mut().zip(&self.base) {
            for (t, &b) in ts.iter_mut().zip(bases) {
                *t = b * scale;
            }
        }
    }

    fn covers(&self, net: &Network) -> bool {
        let sizes = net.structure().layer_sizes();
        self.t.len() == sizes.len() - 1
            && self.t.iter().zip(&sizes[1..]).all(|(ts, &n)| ts.len() == n)
    }

    pub(crate) fn layers(&self) -> &[Vec<f64>] {
        &self.t
    }
}

/// Initializes each non-input neuron's threshold to `c0` times the mean
/// absolute weight of its incoming links, floored at [`THRESHOLD_FLOOR`].
pub fn init_thresholds(net: &Network, c0: f64) -> Result<ThresholdMap> {
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::InvalidParam(format!("c0 must lie in (0, 1), got {c0}")));
    }
    let sizes = net.structure().layer_sizes();
    let mut base = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let (n_src, n_tgt) = (sizes[l], sizes[l + 1]);
        let w = net.layer_weights(l);
        let mut layer = vec![0.0; n_tgt];
        for t in 0..n_tgt {
            let mut sum = 0.0;
            for s in 0..n_src {
                sum += w[s * n_tgt + t].abs();
            }
            layer[t] = (c0 * sum / n_src as f64).max(THRESHOLD_FLOOR);
        }
        base.push(layer);
    }
    Ok(ThresholdMap { t: base.clone(), base, escalation_round: 0 })
}

/// The weak/strong marking of every link and neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakMarking {
    // weak_links[l][s * n_tgt + t]: link from s in layer l to t in layer l+1.
    weak_links: Vec<Vec<bool>>,
    // weak_neurons[l][s] for layers 0..L-1 (output layer excluded).
    weak_neurons: Vec<Vec<bool>>,
    layer_sizes: Vec<usize>,
    rounds_used: u32,
}

impl WeakMarking {
    pub fn is_weak_link(&self, layer: usize, src: usize, tgt: usize) -> bool {
        self.weak_links[layer][src * self.layer_sizes[layer + 1] + tgt]
    }

    /// Output-layer neurons are never weak.
    pub fn is_weak_neuron(&self, layer: usize, index: usize) -> bool {
        if layer >= self.weak_neurons.len() {
            return false;
        }
        self.weak_neurons[layer][index]
    }

    /// Indices of weak input neurons, ascending.
    pub fn weak_input_neurons(&self) -> Vec<usize> {
        self.weak_neurons[0]
            .iter()
            .enumerate()
            .filter_map(|(i, &w)| w.then_some(i))
            .collect()
    }

    pub fn n_weak_links(&self) -> usize {
        self.weak_links.iter().map(|l| l.iter().filter(|&&w| w).count()).sum()
    }

    pub fn n_weak_neurons(&self) -> usize {
        self.weak_neurons.iter().map(|l| l.iter().filter(|&&w| w).count()).sum()
    }

    /// Escalation rounds applied to the thresholds this marking was built from.
    pub fn rounds_used(&self) -> u32 {
        self.rounds_used
    }

    pub(crate) fn weak_link_layers(&self) -> &[Vec<bool>] {
        &self.weak_links
    }

    pub(crate) fn weak_neuron_layers(&self) -> &[Vec<bool>] {
        &self.weak_neurons
    }
}

/// Marks weak links and neurons in one backward sweep from the last hidden
/// layer down to the input layer.
///
/// # Panics
///
/// Panics when `thresholds` does not cover every non-input neuron of `net`.
pub fn mark_weak(net: &Network, thresholds: &ThresholdMap) -> WeakMarking {
    assert!(thresholds.covers(net), "threshold map does not match network shape");
    let sizes = net.structure().layer_sizes().to_vec();
    let n_layers = sizes.len();
    let mut weak_links: Vec<Vec<bool>> = sizes
        .windows(2)
        .map(|p| vec![false; p[0] * p[1]])
        .collect();
    let mut weak_neurons: Vec<Vec<bool>> =
        sizes[..n_layers - 1].iter().map(|&n| vec![false; n]).collect();

    for l in (0..n_layers - 1).rev() {
        let (n_src, n_tgt) = (sizes[l], sizes[l + 1]);
        let w = net.layer_weights(l);
        let links = &mut weak_links[l];
        for s in 0..n_src {
            let mut all_weak = true;
            let row = s * n_tgt;
            for t in 0..n_tgt {
                let target_weak = l + 1 < n_layers - 1 && weak_neurons[l + 1][t];
                let weak = target_weak || w[row + t].abs() < thresholds.threshold(l + 1, t);
                links[row + t] = weak;
                all_weak &= weak;
            }
            weak_neurons[l][s] = all_weak;
        }
    }

    WeakMarking {
        weak_links,
        weak_neurons,
        layer_sizes: sizes,
        rounds_used: thresholds.escalation_round(),
    }
}

/// Knobs of the least-important-feature search.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneConfig {
    /// Fraction of the mean absolute incoming weight used as the initial
    /// per-neuron threshold.
    pub c0: f64,
    /// Escalation rounds allowed before giving up (a guard against non-finite
    /// weights; finite weights always terminate well below this).
    pub max_rounds: u32,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self { c0: 0.05, max_rounds: 64 }
    }
}

/// Which feature the marking pass would remove, and why.
#[derive(Debug, Clone)]
pub struct FeatureImportanceReport {
    pub weak_input_neurons: BTreeSet<usize>,
    pub weak_features: BTreeSet<FeatureId>,
    /// The weak feature with the highest cost; cost ties break toward the
    /// lowest feature id.
    pub selected_feature: FeatureId,
    pub thresholds_final: ThresholdMap,
    pub rounds_used: u32,
}

/// Runs threshold initialization, backward marking, and threshold escalation
/// until at least one whole input feature is weak, then selects the weak
/// feature with the highest cost.
///
/// A logical feature is weak only when every input neuron in its encoded
/// column group is weak.
pub fn find_least_important_feature(
    net: &Network,
    encoding: &EncodedDataset,
    profile: &CostProfile,
    cfg: &PruneConfig,
) -> Result<FeatureImportanceReport> {
    run_feature_search(net, encoding, profile, cfg, None)
}

/// [`find_least_important_feature`], also collecting a per-round diagnostic
/// trace of thresholds, weak links, and weak neurons.
pub fn find_least_important_feature_traced(
    net: &Network,
    encoding: &EncodedDataset,
    profile: &CostProfile,
    cfg: &PruneConfig,
) -> Result<(FeatureImportanceReport, EscalationTrace)> {
    let mut trace = EscalationTrace::default();
    let report = run_feature_search(net, encoding, profile, cfg, Some(&mut trace))?;
    Ok((report, trace))
}

fn run_feature_search(
    net: &Network,
    encoding: &EncodedDataset,
    profile: &CostProfile,
    cfg: &PruneConfig,
    mut trace: Option<&mut EscalationTrace>,
) -> Result<FeatureImportanceReport> {
    if encoding.n_cols() != net.structure().input_size() {
        return Err(Error::DimensionMismatch {
            expected: net.structure().input_size(),
            got: encoding.n_cols(),
        });
    }
    let active = encoding.active_features();
    if active.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    for &id in active {
        profile.cost(id)?;
    }

    let mut thresholds = init_thresholds(net, cfg.c0)?;
    loop {
        let marking = mark_weak(net, &thresholds);
        let weak_features = weak_feature_set(&marking, encoding);
        if let Some(trace) = trace.as_deref_mut() {
            trace.record_round(&thresholds, &marking, &weak_features);
        }
        if !weak_features.is_empty() {
            let selected_feature = select_highest_cost(&weak_features, profile)?;
            let weak_input_neurons = marking.weak_input_neurons().into_iter().collect();
            return Ok(FeatureImportanceReport {
                weak_input_neurons,
                weak_features,
                selected_feature,
                rounds_used: thresholds.escalation_round(),
                thresholds_final: thresholds,
            });
        }
        if thresholds.escalation_round() >= cfg.max_rounds {
            return Err(Error::EscalationLimit { max_rounds: cfg.max_rounds });
        }
        thresholds.escalate();
    }
}

/// Features whose entire one-hot column group is weak.
fn weak_feature_set(marking: &WeakMarking, encoding: &EncodedDataset) -> BTreeSet<FeatureId> {
    let mut weak: BTreeSet<FeatureId> = encoding.active_features().clone();
    for (col, &feature) in encoding.column_map().iter().enumerate() {
        if !marking.is_weak_neuron(0, col) {
            weak.remove(&feature);
        }
    }
    weak
}

fn select_highest_cost(features: &BTreeSet<FeatureId>, profile: &CostProfile) -> Result<FeatureId> {
    let mut best: Option<(FeatureId, u32)> = None;
    for &id in features {
        let cost = profile.cost(id)?;
        // Strict '>' keeps the lowest id on cost ties (iteration ascends).
        if best.is_none_or(|(_, c)| cost > c) {
            best = Some((id, cost));
        }
    }
    best.map(|(id, _)| id).ok_or(Error::EmptyFeatureSet)
}
