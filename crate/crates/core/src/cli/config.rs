use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::baselines::{Remover, StrategyKind};
use crate::budget::PipelineConfig;
use crate::data::{sample_costs, CostProfile, FeatureId, FeatureSchema};
use crate::net::TrainConfig;
use crate::prune::PruneConfig;
use crate::{Error, Result};

/// Where feature costs come from: a saved profile or a seeded sampling spec.
#[derive(Debug, Clone)]
pub enum CostSource {
    Path(PathBuf),
    Sample { lo: u32, hi: u32, zero_cost: Option<Vec<String>>, seed: u64 },
}

/// A fully resolved run configuration: the TOML document with flag overrides
/// applied (flags win).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub k: usize,
    pub hidden_layers: Vec<usize>,
    pub train: TrainConfig,
    pub prune: PruneConfig,
    pub b_max: u64,
    pub d: u64,
    pub p_min: f64,
    pub n_trials: usize,
    pub budget_levels: Option<Vec<u64>>,
    pub costs: CostSource,
    pub independent_levels: bool,
    pub explain: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    dataset: PathBuf,
    schema: PathBuf,
    out_dir: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_k")]
    k: usize,
    hidden_layers: Vec<usize>,
    b_max: u64,
    d: u64,
    p_min: f64,
    #[serde(default = "default_trials")]
    n_trials: usize,
    #[serde(default)]
    budget_levels: Option<Vec<u64>>,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    prune: PruneConfig,
    #[serde(default)]
    costs: CostsDoc,
    #[serde(default)]
    independent_levels: bool,
    #[serde(default)]
    threads: Option<usize>,
}

fn default_k() -> usize {
    10
}

fn default_trials() -> usize {
    10
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsDoc {
    path: Option<PathBuf>,
    lo: Option<u32>,
    hi: Option<u32>,
    seed: Option<u64>,
    zero_cost: Option<Vec<String>>,
}

impl RunConfig {
    /// Reads the TOML document at `path` and applies flag overrides.
    pub(crate) fn load(path: &Path, args: &super::CommonArgs) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: ConfigDoc = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;

        let seed = args.seed.unwrap_or(doc.seed);
        let costs = match doc.costs.path {
            Some(p) => {
                if doc.costs.lo.is_some() || doc.costs.hi.is_some() || doc.costs.seed.is_some() {
                    return Err(Error::InvalidConfig(
                        "[costs] sets both a path and sampling parameters".into(),
                    ));
                }
                CostSource::Path(resolve(path, p))
            }
            None => CostSource::Sample {
                lo: doc.costs.lo.unwrap_or(100),
                hi: doc.costs.hi.unwrap_or(300),
                zero_cost: doc.costs.zero_cost,
                seed: doc.costs.seed.unwrap_or(seed ^ 0x636F_7374),
            },
        };

        let cfg = RunConfig {
            dataset: resolve(path, doc.dataset),
            schema: resolve(path, doc.schema),
            out_dir: args.out.clone().unwrap_or_else(|| resolve(path, doc.out_dir)),
            seed,
            k: args.k.unwrap_or(doc.k),
            hidden_layers: doc.hidden_layers,
            train: doc.train.with_seed(seed),
            prune: doc.prune,
            b_max: args.b_max.unwrap_or(doc.b_max),
            d: args.d.unwrap_or(doc.d),
            p_min: args.p_min.unwrap_or(doc.p_min),
            n_trials: args.trials.unwrap_or(doc.n_trials),
            budget_levels: doc.budget_levels,
            costs,
            independent_levels: args.independent_levels || doc.independent_levels,
            explain: args.explain,
            threads: args.threads.or(doc.threads),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.b_max == 0 {
            return Err(Error::InvalidConfig("b_max must be positive".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return Err(Error::InvalidConfig("p_min must lie in [0, 1]".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidConfig("k must be at least 2".into()));
        }
        if self.hidden_layers.len() < 2 {
            return Err(Error::InvalidConfig(
                "hidden_layers must list at least two layers".into(),
            ));
        }
        if let Some(levels) = &self.budget_levels {
            if levels.is_empty() {
                return Err(Error::InvalidConfig("budget_levels must not be empty".into()));
            }
        }
        Ok(())
    }

    /// The training/pruning pipeline parameters of this run.
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            hidden_layers: self.hidden_layers.clone(),
            k: self.k,
            train: self.train.clone(),
            prune: self.prune,
            fold_seed: self.seed ^ 0x666F_6C64,
        }
    }

    /// Budget levels for comparisons: the explicit list when configured, else
    /// the grid `b_max, b_max - d, ...` down to the last positive level.
    pub fn budget_grid(&self) -> Vec<u64> {
        if let Some(levels) = &self.budget_levels {
            return levels.clone();
        }
        let mut levels = Vec::new();
        let mut b = self.b_max;
        loop {
            levels.push(b);
            if b <= self.d {
                break;
            }
            b -= self.d;
        }
        levels
    }

    /// Resolves the cost profile, sampling when configured to do so. Sampled
    /// profiles exempt the `[costs].zero_cost` names when present, else the
    /// schema file's zero-cost ids.
    pub fn cost_profile(
        &self,
        schema: &FeatureSchema,
        schema_zero_cost: &BTreeSet<FeatureId>,
    ) -> Result<CostProfile> {
        match &self.costs {
            CostSource::Path(p) => CostProfile::read_csv(p, schema),
            CostSource::Sample { lo, hi, zero_cost, seed } => {
                let exempt: BTreeSet<FeatureId> = match zero_cost {
                    Some(names) => {
                        let mut ids = BTreeSet::new();
                        for name in names {
                            let spec = schema.feature_by_name(name).ok_or_else(|| {
                                Error::InvalidConfig(format!(
                                    "zero_cost names unknown feature '{name}'"
                                ))
                            })?;
                            ids.insert(spec.id);
                        }
                        ids
                    }
                    None => schema_zero_cost.clone(),
                };
                sample_costs(schema, *lo, *hi, &exempt, *seed)
            }
        }
    }

    pub(crate) fn remover_for(&self, strategy: StrategyKind) -> Remover {
        match strategy {
            StrategyKind::WeakNeuron => Remover::WeakNeuron,
            StrategyKind::CostBased => Remover::CostBased,
            StrategyKind::Random => Remover::Random { seed: self.seed ^ 0x6162_6C61 },
        }
    }
}

/// Paths in a config file are relative to the config file itself.
fn resolve(config_path: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}
