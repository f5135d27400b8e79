//! Comparison strategies: cost-based and random feature removal, and the
//! best-of-n harness that pits them against weak-neuron removal per budget
//! level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::budget::{PipelineConfig, RemovalTrajectory};
use crate::data::{CostProfile, FeatureId, FeatureSchema, RawDataset};
use crate::{Error, Result};

/// Feature-removal strategy, carrying per-strategy state where needed.
#[derive(Debug, Clone)]
pub enum Remover {
    /// Remove the weak feature with the highest cost (threshold marking).
    WeakNeuron,
    /// Always remove the most expensive feature.
    CostBased,
    /// Remove a uniformly random feature; draw `step` of stream `seed`.
    Random { seed: u64 },
}

/// Strategy label without per-run state, used as a report key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StrategyKind {
    WeakNeuron,
    CostBased,
    Random,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] =
        [StrategyKind::WeakNeuron, StrategyKind::CostBased, StrategyKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::WeakNeuron => "weak_neuron",
            StrategyKind::CostBased => "cost_based",
            StrategyKind::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "weak_neuron" | "weak-neuron" => Ok(StrategyKind::WeakNeuron),
            "cost_based" | "cost-based" => Ok(StrategyKind::CostBased),
            "random" => Ok(StrategyKind::Random),
            other => Err(Error::InvalidParam(format!("unknown strategy '{other}'"))),
        }
    }
}

/// The most expensive feature; cost ties break toward the lowest id.
pub fn remove_cost_based(
    features: &BTreeSet<FeatureId>,
    profile: &CostProfile,
) -> Result<FeatureId> {
    let mut best: Option<(FeatureId, u32)> = None;
    for &id in features {
        let cost = profile.cost(id)?;
        if best.is_none_or(|(_, c)| cost > c) {
            best = Some((id, cost));
        }
    }
    best.map(|(id, _)| id).ok_or(Error::EmptyFeatureSet)
}

/// A uniformly random feature, deterministic for a given `(seed, step)`.
pub fn remove_random(features: &BTreeSet<FeatureId>, seed: u64, step: u64) -> Result<FeatureId> {
    if features.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(step);
    let idx = rng.random_range(0..features.len());
    Ok(*features.iter().nth(idx).expect("index in range"))
}

/// One generated model of one trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub strategy: StrategyKind,
    pub budget: u64,
    pub trial: usize,
    pub accuracy: f64,
    pub model_cost: u64,
    pub features: BTreeSet<FeatureId>,
}

/// Aggregate of all trials for one `(strategy, budget)` cell.
#[derive(Debug, Clone)]
pub struct StrategyCell {
    pub accuracies: Vec<f64>,
    pub best_accuracy: f64,
    pub best_trial: usize,
    pub best_feature_set: BTreeSet<FeatureId>,
    /// Model cost of the best trial's model.
    pub model_cost: u64,
}

/// Results of a full strategy comparison.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Budget levels, descending.
    pub budget_levels: Vec<u64>,
    pub n_trials: usize,
    pub base_seed: u64,
    pub records: Vec<TrialRecord>,
    pub cells: BTreeMap<(StrategyKind, u64), StrategyCell>,
}

impl ComparisonReport {
    pub fn cell(&self, strategy: StrategyKind, budget: u64) -> Option<&StrategyCell> {
        self.cells.get(&(strategy, budget))
    }

    /// The per-trial CSV: `strategy,budget,trial,accuracy,model_cost,feature_ids`.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("strategy,budget,trial,accuracy,model_cost,feature_ids\n");
        for r in &self.records {
            let ids: Vec<String> = r.features.iter().map(|f| f.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.strategy.as_str(),
                r.budget,
                r.trial,
                r.accuracy,
                r.model_cost,
                ids.join(";")
            )
            .unwrap();
        }
        out
    }

    /// The best-of-n summary CSV: `strategy,budget,best_accuracy`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("strategy,budget,best_accuracy\n");
        for strategy in StrategyKind::ALL {
            for &budget in &self.budget_levels {
                if let Some(cell) = self.cell(strategy, budget) {
                    writeln!(out, "{},{},{}", strategy.as_str(), budget, cell.best_accuracy)
                        .unwrap();
                }
            }
        }
        out
    }
}

/// splitmix64-style mixing for derived seeds.
fn mix_seed(base: u64, salt: u64, index: u64) -> u64 {
    let mut z = base
        ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the training runs of trial `trial`, derived from the base seed.
///
/// Deliberately independent of the strategy: trials differ from each other by
/// training seed, while within one trial all three strategies train the same
/// feature set with the same seed — so at a budget level covering the full
/// feature set they share one identical model.
pub fn trial_train_seed(base: u64, trial: usize) -> u64 {
    mix_seed(base, 1, trial as u64)
}

fn trial_removal_seed(base: u64, trial: usize) -> u64 {
    mix_seed(base, 0xDEAD_BEEF, trial as u64)
}

/// Runs `n_trials` model generations per strategy per budget level and keeps
/// every accuracy plus the best model of each cell.
///
/// Budget levels are processed in descending order along one removal
/// trajectory per `(strategy, trial)` pair. Trials differ only in training
/// seed (and in removal choices for the random strategy); the fold partition
/// is shared. Levels below the cheapest reachable model are skipped.
pub fn run_comparison(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    budget_levels: &[u64],
    n_trials: usize,
    pc: &PipelineConfig,
) -> Result<ComparisonReport> {
    if n_trials == 0 {
        return Err(Error::InvalidParam("n_trials must be at least 1".into()));
    }
    if budget_levels.is_empty() {
        return Err(Error::InvalidParam("no budget levels given".into()));
    }
    let mut levels: Vec<u64> = budget_levels.to_vec();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();

    let base_seed = pc.train.seed;
    let jobs: Vec<(StrategyKind, usize)> = StrategyKind::ALL
        .iter()
        .flat_map(|&s| (0..n_trials).map(move |t| (s, t)))
        .collect();

    let per_job: Vec<Result<Vec<TrialRecord>>> = jobs
        .par_iter()
        .map(|&(strategy, trial)| {
            run_trial(data, schema, profile, &levels, pc, strategy, trial, base_seed)
        })
        .collect();

    let mut records = Vec::new();
    for job in per_job {
        records.extend(job?);
    }

    let mut cells: BTreeMap<(StrategyKind, u64), StrategyCell> = BTreeMap::new();
    for r in &records {
        let cell = cells.entry((r.strategy, r.budget)).or_insert_with(|| StrategyCell {
            accuracies: Vec::new(),
            best_accuracy: f64::NEG_INFINITY,
            best_trial: 0,
            best_feature_set: BTreeSet::new(),
            model_cost: 0,
        });
        cell.accuracies.push(r.accuracy);
        if r.accuracy > cell.best_accuracy {
            cell.best_accuracy = r.accuracy;
            cell.best_trial = r.trial;
            cell.best_feature_set = r.features.clone();
            cell.model_cost = r.model_cost;
        }
    }

    Ok(ComparisonReport { budget_levels: levels, n_trials, base_seed, records, cells })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    levels: &[u64],
    pc: &PipelineConfig,
    strategy: StrategyKind,
    trial: usize,
    base_seed: u64,
) -> Result<Vec<TrialRecord>> {
    let remover = match strategy {
        StrategyKind::WeakNeuron => Remover::WeakNeuron,
        StrategyKind::CostBased => Remover::CostBased,
        StrategyKind::Random => {
            Remover::Random { seed: trial_removal_seed(base_seed, trial) }
        }
    };
    let mut trial_pc = pc.clone();
    trial_pc.train.seed = trial_train_seed(base_seed, trial);

    let mut traj = RemovalTrajectory::new(data, schema, profile, &trial_pc, remover, false)?;
    let mut out = Vec::with_capacity(levels.len());
    for &budget in levels {
        match traj.reduce_to_budget(budget) {
            Ok(()) => {}
            Err(Error::BudgetInfeasible { .. }) => break,
            Err(e) => return Err(e),
        }
        let bcm = traj.bcm(budget)?;
        out.push(TrialRecord {
            strategy,
            budget,
            trial,
            accuracy: bcm.accuracy,
            model_cost: bcm.model_cost,
            features: bcm.features,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::CostProfile;

    fn profile(costs: &[(u16, u32)]) -> CostProfile {
        CostProfile::from_costs(costs.iter().map(|&(id, c)| (FeatureId(id), c)).collect())
    }

    fn set(ids: &[u16]) -> BTreeSet<FeatureId> {
        ids.iter().map(|&i| FeatureId(i)).collect()
    }

    #[test]
    fn cost_based_picks_argmax() {
        let prof = profile(&[(1, 100), (2, 300), (3, 200)]);
        assert_eq!(remove_cost_based(&set(&[1, 2, 3]), &prof).unwrap(), FeatureId(2));
    }

    #[test]
    fn cost_based_tie_breaks_to_lowest_id() {
        let prof = profile(&[(1, 200), (2, 200), (3, 200)]);
        assert_eq!(remove_cost_based(&set(&[1, 2, 3]), &prof).unwrap(), FeatureId(1));
        assert_eq!(remove_cost_based(&set(&[2, 3]), &prof).unwrap(), FeatureId(2));
    }

    #[test]
    fn cost_based_singleton_and_empty() {
        let prof = profile(&[(1, 5)]);
        assert_eq!(remove_cost_based(&set(&[1]), &prof).unwrap(), FeatureId(1));
        assert!(matches!(
            remove_cost_based(&set(&[]), &prof),
            Err(Error::EmptyFeatureSet)
        ));
    }

    #[test]
    fn random_is_deterministic_per_seed_and_step() {
        let features = set(&[1, 2, 3, 4]);
        let a = remove_random(&features, 9, 0).unwrap();
        let b = remove_random(&features, 9, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            remove_random(&set(&[7]), 1234, 55).unwrap(),
            FeatureId(7),
            "singleton sets have no choice"
        );
        assert!(matches!(remove_random(&set(&[]), 0, 0), Err(Error::EmptyFeatureSet)));
    }

    #[test]
    fn random_draws_are_roughly_uniform() {
        let features = set(&[1, 2, 3, 4]);
        let mut counts = BTreeMap::new();
        for step in 0..1000u64 {
            let f = remove_random(&features, 42, step).unwrap();
            *counts.entry(f).or_insert(0usize) += 1;
        }
        for (&f, &n) in &counts {
            assert!(
                (200..=300).contains(&n),
                "feature {f} drawn {n} times out of 1000; expected 250 +/- 50"
            );
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in StrategyKind::ALL {
            assert_eq!(StrategyKind::parse(s.as_str()).unwrap(), s);
        }
        assert!(StrategyKind::parse("gradient").is_err());
    }

    #[test]
    fn trial_seeds_differ_across_trials_but_not_strategies() {
        let a = trial_train_seed(7, 0);
        let b = trial_train_seed(7, 1);
        assert_ne!(a, b);
        assert_eq!(a, trial_train_seed(7, 0));
        assert_ne!(a, trial_train_seed(8, 0));
    }
}
