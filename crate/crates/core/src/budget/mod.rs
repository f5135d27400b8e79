//! Budget-constrained model generation and budget-sorted schedules.
//!
//! A budget-constrained model (BCM) is the 4-tuple of network structure,
//! feature set, trained weights, and expected accuracy, whose summed feature
//! cost fits a budget. Starting from the full feature set, the least
//! important feature is removed (retraining in between) until the cost fits;
//! a schedule repeats this over a descending grid of budget levels.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::baselines::{remove_cost_based, remove_random, Remover};
use crate::data::{
    encode, kfold, model_cost, CostProfile, EncodedDataset, FeatureId, FeatureSchema,
    FoldAssignment, RawDataset,
};
use crate::net::{
    cross_validate, render_network, CrossValidation, Network, NetworkStructure, TrainConfig,
};
use crate::prune::{
    find_least_important_feature, find_least_important_feature_traced, EscalationTrace,
    PruneConfig,
};
use crate::{Error, Result};

/// Everything a model-generation pipeline needs besides the data itself:
/// hidden topology, fold count, training hyperparameters, and pruning knobs.
///
/// The hidden topology is held fixed as the input width shrinks; every
/// feature set gets a freshly built full-width network.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub hidden_layers: Vec<usize>,
    pub k: usize,
    pub train: TrainConfig,
    pub prune: PruneConfig,
    pub fold_seed: u64,
}

impl PipelineConfig {
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        self.train.validate()?;
        if self.k < 2 {
            return Err(Error::InvalidParam(format!("k must be at least 2, got {}", self.k)));
        }
        if n_rows < 2 * self.k {
            return Err(Error::DatasetTooSmall { rows: n_rows, needed: 2 * self.k });
        }
        if self.hidden_layers.len() < 2 {
            return Err(Error::InvalidParam(
                "at least two hidden layers are required".into(),
            ));
        }
        Ok(())
    }

    fn structure_for(&self, n_cols: usize) -> Result<NetworkStructure> {
        NetworkStructure::with_hidden(n_cols, &self.hidden_layers)
    }
}

/// A budget-constrained model: structure, feature set, weights, and expected
/// accuracy, plus the cost/budget pair it satisfies.
#[derive(Debug, Clone)]
pub struct Bcm {
    pub structure: NetworkStructure,
    pub features: BTreeSet<FeatureId>,
    pub network: Network,
    pub accuracy: f64,
    pub model_cost: u64,
    pub budget: u64,
}

/// A list of BCMs sorted by strictly descending budget.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub entries: Vec<Bcm>,
    pub b_max: u64,
    pub d: u64,
    pub p_min: f64,
    pub cost_profile: CostProfile,
}

/// One point of an ablation curve: the model after `n_removed` removals.
#[derive(Debug, Clone)]
pub struct AblationPoint {
    pub n_removed: usize,
    pub accuracy: f64,
    pub model_cost: u64,
    pub features: BTreeSet<FeatureId>,
}

/// Diagnostic trace of one weak-neuron removal step.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub step: usize,
    pub removed: FeatureId,
    pub trace: EscalationTrace,
}

struct TrainedSet {
    encoding: EncodedDataset,
    cv: CrossValidation,
}

/// One removal sequence: starts from the full feature set and removes one
/// feature at a time with the configured strategy, training each distinct
/// feature set at most once.
pub struct RemovalTrajectory<'a> {
    data: &'a RawDataset,
    schema: &'a FeatureSchema,
    profile: &'a CostProfile,
    pc: &'a PipelineConfig,
    remover: Remover,
    folds: FoldAssignment,
    features: BTreeSet<FeatureId>,
    cost: u64,
    trained: Option<TrainedSet>,
    removal_step: u64,
    collect_traces: bool,
    traces: Vec<StepTrace>,
}

impl<'a> RemovalTrajectory<'a> {
    pub fn new(
        data: &'a RawDataset,
        schema: &'a FeatureSchema,
        profile: &'a CostProfile,
        pc: &'a PipelineConfig,
        remover: Remover,
        collect_traces: bool,
    ) -> Result<Self> {
        pc.validate(data.n_rows())?;
        let features = schema.all_ids();
        if features.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        let cost = model_cost(&features, profile)?;
        let folds = kfold(data.n_rows(), pc.k, pc.fold_seed)?;
        Ok(Self {
            data,
            schema,
            profile,
            pc,
            remover,
            folds,
            features,
            cost,
            trained: None,
            removal_step: 0,
            collect_traces,
            traces: Vec::new(),
        })
    }

    pub fn features(&self) -> &BTreeSet<FeatureId> {
        &self.features
    }

    pub fn model_cost(&self) -> u64 {
        self.cost
    }

    pub fn removals_so_far(&self) -> u64 {
        self.removal_step
    }

    pub fn take_traces(&mut self) -> Vec<StepTrace> {
        std::mem::take(&mut self.traces)
    }

    fn ensure_trained(&mut self) -> Result<&TrainedSet> {
        if self.trained.is_none() {
            let encoding = encode(self.data, self.schema, &self.features)?;
            let structure = self.pc.structure_for(encoding.n_cols())?;
            let cv = cross_validate(&structure, &encoding, &self.folds, &self.pc.train)?;
            self.trained = Some(TrainedSet { encoding, cv });
        }
        Ok(self.trained.as_ref().unwrap())
    }

    /// Removes one feature with the configured strategy and returns it.
    pub fn remove_one(&mut self) -> Result<FeatureId> {
        if self.features.len() <= 1 {
            return Err(Error::EmptyFeatureSet);
        }
        let step = self.removal_step;
        let victim = match &self.remover {
            Remover::CostBased => remove_cost_based(&self.features, self.profile)?,
            Remover::Random { seed } => remove_random(&self.features, *seed, step)?,
            Remover::WeakNeuron => {
                let collect = self.collect_traces;
                self.ensure_trained()?;
                let trained = self.trained.as_ref().unwrap();
                let net = &trained.cv.final_net;
                if collect {
                    let (report, trace) = find_least_important_feature_traced(
                        net,
                        &trained.encoding,
                        self.profile,
                        &self.pc.prune,
                    )?;
                    self.traces.push(StepTrace {
                        step: step as usize,
                        removed: report.selected_feature,
                        trace,
                    });
                    report.selected_feature
                } else {
                    find_least_important_feature(
                        net,
                        &trained.encoding,
                        self.profile,
                        &self.pc.prune,
                    )?
                    .selected_feature
                }
            }
        };
        let removed = self.features.remove(&victim);
        debug_assert!(removed, "removal strategies must return an active feature");
        let new_cost = model_cost(&self.features, self.profile)?;
        debug_assert!(new_cost <= self.cost, "removing a feature cannot raise the cost");
        self.cost = new_cost;
        self.trained = None;
        self.removal_step += 1;
        Ok(victim)
    }

    /// Removes features until the model cost fits `budget`.
    pub fn reduce_to_budget(&mut self, budget: u64) -> Result<()> {
        while self.cost > budget {
            if self.features.len() == 1 {
                return Err(Error::BudgetInfeasible { budget, floor_cost: self.cost });
            }
            self.remove_one()?;
        }
        Ok(())
    }

    /// Trains (if needed) and packages the current feature set as a BCM for
    /// the given budget.
    pub fn bcm(&mut self, budget: u64) -> Result<Bcm> {
        assert!(self.cost <= budget, "model cost {} exceeds budget {budget}", self.cost);
        let cost = self.cost;
        let features = self.features.clone();
        let trained = self.ensure_trained()?;
        Ok(Bcm {
            structure: trained.cv.final_net.structure().clone(),
            features,
            network: trained.cv.final_net.clone(),
            accuracy: trained.cv.mean_accuracy,
            model_cost: cost,
            budget,
        })
    }

    /// Cross-validated accuracy of the current feature set.
    pub fn accuracy(&mut self) -> Result<f64> {
        Ok(self.ensure_trained()?.cv.mean_accuracy)
    }
}

/// Generates one BCM for a budget with the weak-neuron removal strategy.
pub fn generate_bcm(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    budget: u64,
    pc: &PipelineConfig,
) -> Result<Bcm> {
    let mut traj = RemovalTrajectory::new(data, schema, profile, pc, Remover::WeakNeuron, false)?;
    traj.reduce_to_budget(budget)?;
    traj.bcm(budget)
}

/// Generates a budget-sorted list of BCMs over the grid
/// `b_max, b_max - d, ...` (budgets stay positive), stopping at the first
/// model whose accuracy falls below `p_min` or at an infeasible budget.
///
/// By default the whole grid shares one removal trajectory, so lower-budget
/// feature sets are subsets of higher-budget ones. With
/// `independent_levels = true` every level restarts the removal from the full
/// feature set; with shared seeds this reproduces the same models, only
/// slower.
#[allow(clippy::too_many_arguments)]
pub fn generate_schedule(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    b_max: u64,
    d: u64,
    p_min: f64,
    pc: &PipelineConfig,
    independent_levels: bool,
) -> Result<Schedule> {
    if b_max == 0 {
        return Err(Error::InvalidParam("b_max must be positive".into()));
    }
    if d == 0 {
        return Err(Error::InvalidParam("d must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p_min) {
        return Err(Error::InvalidParam(format!("p_min must lie in [0, 1], got {p_min}")));
    }

    let mut entries: Vec<Bcm> = Vec::new();
    let mut shared = if independent_levels {
        None
    } else {
        Some(RemovalTrajectory::new(data, schema, profile, pc, Remover::WeakNeuron, false)?)
    };

    let mut b = b_max;
    loop {
        let bcm = match shared.as_mut() {
            Some(traj) => traj.reduce_to_budget(b).and_then(|()| traj.bcm(b)),
            None => generate_bcm(data, schema, profile, b, pc),
        };
        match bcm {
            Ok(bcm) => {
                if bcm.accuracy < p_min {
                    break;
                }
                if let Some(prev) = entries.last() {
                    debug_assert!(
                        independent_levels || bcm.features.is_subset(&prev.features),
                        "shared-trajectory feature sets must be nested"
                    );
                }
                entries.push(bcm);
            }
            Err(Error::BudgetInfeasible { .. }) => break,
            Err(e) => return Err(e),
        }
        if b <= d {
            break;
        }
        b -= d;
    }
    Ok(Schedule { entries, b_max, d, p_min, cost_profile: profile.clone() })
}

/// [`generate_schedule`] along the shared trajectory, also collecting the
/// weak-neuron diagnostic trace of every removal step.
pub fn generate_schedule_traced(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    b_max: u64,
    d: u64,
    p_min: f64,
    pc: &PipelineConfig,
) -> Result<(Schedule, Vec<StepTrace>)> {
    if b_max == 0 || d == 0 {
        return Err(Error::InvalidParam("b_max and d must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p_min) {
        return Err(Error::InvalidParam(format!("p_min must lie in [0, 1], got {p_min}")));
    }
    let mut traj = RemovalTrajectory::new(data, schema, profile, pc, Remover::WeakNeuron, true)?;
    let mut entries = Vec::new();
    let mut b = b_max;
    loop {
        match traj.reduce_to_budget(b).and_then(|()| traj.bcm(b)) {
            Ok(bcm) => {
                if bcm.accuracy < p_min {
                    break;
                }
                entries.push(bcm);
            }
            Err(Error::BudgetInfeasible { .. }) => break,
            Err(e) => return Err(e),
        }
        if b <= d {
            break;
        }
        b -= d;
    }
    let traces = traj.take_traces();
    Ok((Schedule { entries, b_max, d, p_min, cost_profile: profile.clone() }, traces))
}

/// Removes exactly one feature per step with the given strategy, retraining
/// and re-evaluating after each removal, until one feature remains.
///
/// The returned curve has one point per feature count, from zero removals
/// down to a single remaining feature.
pub fn ablation_curve(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    pc: &PipelineConfig,
    remover: &Remover,
) -> Result<Vec<AblationPoint>> {
    ablation_curve_impl(data, schema, profile, pc, remover, false).map(|(points, _)| points)
}

/// [`ablation_curve`], also collecting weak-neuron diagnostic traces.
pub fn ablation_curve_traced(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    pc: &PipelineConfig,
    remover: &Remover,
) -> Result<(Vec<AblationPoint>, Vec<StepTrace>)> {
    ablation_curve_impl(data, schema, profile, pc, remover, true)
}

fn ablation_curve_impl(
    data: &RawDataset,
    schema: &FeatureSchema,
    profile: &CostProfile,
    pc: &PipelineConfig,
    remover: &Remover,
    collect_traces: bool,
) -> Result<(Vec<AblationPoint>, Vec<StepTrace>)> {
    let mut traj =
        RemovalTrajectory::new(data, schema, profile, pc, remover.clone(), collect_traces)?;
    let mut points = Vec::with_capacity(schema.n_features());
    loop {
        let accuracy = traj.accuracy()?;
        points.push(AblationPoint {
            n_removed: traj.removals_so_far() as usize,
            accuracy,
            model_cost: traj.model_cost(),
            features: traj.features().clone(),
        });
        if traj.features().len() == 1 {
            break;
        }
        traj.remove_one()?;
    }
    let traces = traj.take_traces();
    Ok((points, traces))
}

/// Renders the schedule as the machine-readable CSV table.
pub fn schedule_csv(schedule: &Schedule, schema: &FeatureSchema) -> Result<String> {
    let mut out = String::from("model_index,budget,accuracy,model_cost,feature_ids,feature_names\n");
    for (i, bcm) in schedule.entries.iter().enumerate() {
        let ids: Vec<String> = bcm.features.iter().map(|f| f.to_string()).collect();
        let mut names = Vec::with_capacity(ids.len());
        for &id in &bcm.features {
            names.push(schema.feature(id)?.name.clone());
        }
        writeln!(
            out,
            "{},{},{},{},{},{}",
            i + 1,
            bcm.budget,
            bcm.accuracy,
            bcm.model_cost,
            ids.join(";"),
            names.join(";")
        )
        .unwrap();
    }
    Ok(out)
}

/// Renders the schedule's models, each with its embedded serialized network.
pub fn schedule_models_text(schedule: &Schedule, schema: &FeatureSchema) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "bcmnet-schedule v1").unwrap();
    writeln!(out, "b_max {}", schedule.b_max).unwrap();
    writeln!(out, "d {}", schedule.d).unwrap();
    writeln!(out, "p_min {}", schedule.p_min).unwrap();
    writeln!(out, "entries {}", schedule.entries.len()).unwrap();
    for (i, bcm) in schedule.entries.iter().enumerate() {
        let ids: Vec<String> = bcm.features.iter().map(|f| f.to_string()).collect();
        let mut names = Vec::with_capacity(ids.len());
        for &id in &bcm.features {
            names.push(schema.feature(id)?.name.clone());
        }
        writeln!(out).unwrap();
        writeln!(out, "[model {}]", i + 1).unwrap();
        writeln!(out, "budget {}", bcm.budget).unwrap();
        writeln!(out, "model_cost {}", bcm.model_cost).unwrap();
        writeln!(out, "accuracy {}", bcm.accuracy).unwrap();
        writeln!(out, "features {}", ids.join(";")).unwrap();
        writeln!(out, "feature_names {}", names.join(";")).unwrap();
        out.push_str(&render_network(&bcm.network));
    }
    Ok(out)
}

/// Renders ablation curves as CSV rows, one strategy per call or several
/// concatenated under one header.
pub fn ablation_csv(rows: &[(String, Vec<AblationPoint>)]) -> String {
    let mut out = String::from("strategy,n_removed,remaining_feature_ids,model_cost,accuracy\n");
    for (strategy, points) in rows {
        for p in points {
            let ids: Vec<String> = p.features.iter().map(|f| f.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                strategy,
                p.n_removed,
                ids.join(";"),
                p.model_cost,
                p.accuracy
            )
            .unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests;
