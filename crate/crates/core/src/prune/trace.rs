use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::data::FeatureId;
use crate::prune::{ThresholdMap, WeakMarking};

/// How many weak links a layer pair may have before the dump keeps only the
/// count.
const LINK_LIST_CAP: usize = 64;

/// Per-layer observations for one escalation round.
#[derive(Debug, Clone)]
pub struct LayerRoundTrace {
    /// Index of the link layer (connecting `layer` to `layer + 1`).
    pub layer: usize,
    pub weak_links: usize,
    pub total_links: usize,
    /// Explicit `(src, tgt)` pairs when few enough to list.
    pub weak_link_list: Option<Vec<(u32, u32)>>,
    /// Weak neurons of the source layer.
    pub weak_neurons: Vec<u32>,
    /// (min, mean, max) threshold of the target layer.
    pub threshold_stats: (f64, f64, f64),
}

#[derive(Debug, Clone)]
pub struct RoundTrace {
    pub round: u32,
    pub layers: Vec<LayerRoundTrace>,
    pub weak_features: Vec<FeatureId>,
}

/// Diagnostic record of every escalation round of a feature search; rendered
/// by the CLI's `--explain` flag.
#[derive(Debug, Clone, Default)]
pub struct EscalationTrace {
    pub rounds: Vec<RoundTrace>,
}

impl EscalationTrace {
    pub(crate) fn record_round(
        &mut self,
        thresholds: &ThresholdMap,
        marking: &WeakMarking,
        weak_features: &BTreeSet<FeatureId>,
    ) {
        let mut layers = Vec::new();
        for (l, links) in marking.weak_link_layers().iter().enumerate() {
            let n_tgt = thresholds.layers()[l].len();
            let weak_links = links.iter().filter(|&&w| w).count();
            let weak_link_list = (weak_links <= LINK_LIST_CAP).then(|| {
                links
                    .iter()
                    .enumerate()
                    .filter(|&(_, &w)| w)
                    .map(|(i, _)| ((i / n_tgt) as u32, (i % n_tgt) as u32))
                    .collect()
            });
            let weak_neurons = marking.weak_neuron_layers()[l]
                .iter()
                .enumerate()
                .filter_map(|(i, &w)| w.then_some(i as u32))
                .collect();
            let ts = &thresholds.layers()[l];
            let min = ts.iter().copied().fold(f64::INFINITY, f64::min);
            let max = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = ts.iter().sum::<f64>() / ts.len() as f64;
            layers.push(LayerRoundTrace {
                layer: l,
                weak_links,
                total_links: links.len(),
                weak_link_list,
                weak_neurons,
                threshold_stats: (min, mean, max),
            });
        }
        self.rounds.push(RoundTrace {
            round: marking.rounds_used(),
            layers,
            weak_features: weak_features.iter().copied().collect(),
        });
    }

    /// Plain-text report, one block per escalation round.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for round in &self.rounds {
            writeln!(out, "escalation round {}", round.round).unwrap();
            for layer in &round.layers {
                let (min, mean, max) = layer.threshold_stats;
                writeln!(
                    out,
                    "  layer {} -> {}: thresholds min {:.6e} mean {:.6e} max {:.6e}",
                    layer.layer,
                    layer.layer + 1,
                    min,
                    mean,
                    max
                )
                .unwrap();
                writeln!(
                    out,
                    "    weak links: {}/{}{}",
                    layer.weak_links,
                    layer.total_links,
                    match &layer.weak_link_list {
                        Some(list) if !list.is_empty() => {
                            let items: Vec<String> = list
                                .iter()
                                .map(|(s, t)| format!("{s}->{t}"))
                                .collect();
                            format!(" [{}]", items.join(", "))
                        }
                        _ => String::new(),
                    }
                )
                .unwrap();
                if !layer.weak_neurons.is_empty() {
                    let items: Vec<String> =
                        layer.weak_neurons.iter().map(|n| n.to_string()).collect();
                    writeln!(
                        out,
                        "    weak neurons in layer {}: [{}]",
                        layer.layer,
                        items.join(", ")
                    )
                    .unwrap();
                }
            }
            let feats: Vec<String> =
                round.weak_features.iter().map(|f| f.to_string()).collect();
            writeln!(out, "  weak features: [{}]", feats.join(", ")).unwrap();
        }
        out
    }
}
