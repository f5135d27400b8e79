//! Config-driven command line entry points.
//!
//! Every command reads a TOML run config (see the repository README for the
//! grammar), applies flag overrides (flags win), computes, and only then
//! writes its output files atomically (temp file + rename), so a failing run
//! leaves no partial outputs. Reruns with identical config and seeds produce
//! byte-identical files.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::baselines::{run_comparison, StrategyKind};
use crate::budget::{
    ablation_csv, ablation_curve, ablation_curve_traced, generate_schedule,
    generate_schedule_traced, schedule_csv, schedule_models_text, Schedule,
};
use crate::data::{load_csv, CostProfile, FeatureSchema, RawDataset};
use crate::net::{gradient_check, Network, NetworkStructure};
use crate::{Error, Result};

pub use config::{CostSource, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "bcmnet",
    about = "Budget-constrained feedforward classifiers via weak-link feature elimination",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a budget-sorted list of models (descending budget grid).
    Schedule(CommonArgs),
    /// Compare weak-neuron, cost-based, and random removal per budget level.
    Compare(CommonArgs),
    /// Remove one feature at a time and record the accuracy curve.
    Ablate(AblateArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(CommonArgs),
}

/// Flags shared by every command; set flags override the config file.
#[derive(Debug, Args, Clone)]
pub(crate) struct CommonArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum budget level override.
    #[arg(long = "b-max")]
    b_max: Option<u64>,
    /// Budget grid distance override.
    #[arg(long)]
    d: Option<u64>,
    /// Minimum required accuracy override.
    #[arg(long = "p-min")]
    p_min: Option<f64>,
    /// Fold count override.
    #[arg(long)]
    k: Option<usize>,
    /// Trials per budget level override.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Thread pool size (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Emit per-removal threshold/marking diagnostics.
    #[arg(long)]
    explain: bool,
    /// Restart the removal trajectory from the full feature set per level.
    #[arg(long = "independent-levels")]
    independent_levels: bool,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Removal strategy: weak-neuron, cost-based, random, or all.
    #[arg(long, default_value = "all")]
    strategy: String,
}

/// Parses argv and runs one command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Schedule(args) => prepared(args).and_then(|cfg| cmd_schedule(&cfg)),
        Command::Compare(args) => prepared(args).and_then(|cfg| cmd_compare(&cfg)),
        Command::Ablate(args) => prepared(&args.common).and_then(|cfg| {
            let strategies = parse_strategies(&args.strategy)?;
            cmd_ablate(&cfg, &strategies)
        }),
        Command::Gradcheck(args) => {
            return match prepared(args).and_then(|cfg| cmd_gradcheck(&cfg)) {
                Ok(true) => 0,
                Ok(false) => 1,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn prepared(args: &CommonArgs) -> Result<RunConfig> {
    let cfg = RunConfig::load(&args.config, args)?;
    if let Some(n) = cfg.threads {
        // Only the first initialization wins; later calls are no-ops.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(cfg)
}

fn parse_strategies(raw: &str) -> Result<Vec<StrategyKind>> {
    if raw == "all" {
        return Ok(StrategyKind::ALL.to_vec());
    }
    Ok(vec![StrategyKind::parse(raw)?])
}

/// Schema, data, and cost profile loaded per the run config.
struct Experiment {
    schema: FeatureSchema,
    data: RawDataset,
    profile: CostProfile,
}

fn load_experiment(cfg: &RunConfig) -> Result<Experiment> {
    let schema_file = crate::data::SchemaFile::load(&cfg.schema)?;
    let schema = schema_file.schema;
    let data = load_csv(&cfg.dataset, &schema)?;
    let profile = cfg.cost_profile(&schema, &schema_file.zero_cost_ids)?;
    Ok(Experiment { schema, data, profile })
}

/// Generates and writes the budget-sorted schedule, printing its summary
/// table to standard output.
pub fn cmd_schedule(cfg: &RunConfig) -> Result<()> {
    let exp = load_experiment(cfg)?;
    let pc = cfg.pipeline();

    let (schedule, traces) = if cfg.explain {
        if cfg.independent_levels {
            eprintln!("note: --explain uses the shared trajectory; ignoring --independent-levels");
        }
        let (schedule, traces) = generate_schedule_traced(
            &exp.data,
            &exp.schema,
            &exp.profile,
            cfg.b_max,
            cfg.d,
            cfg.p_min,
            &pc,
        )?;
        (schedule, Some(traces))
    } else {
        let schedule = generate_schedule(
            &exp.data,
            &exp.schema,
            &exp.profile,
            cfg.b_max,
            cfg.d,
            cfg.p_min,
            &pc,
            cfg.independent_levels,
        )?;
        (schedule, None)
    };

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.clone(), e))?;
    write_atomic(&cfg.out_dir.join("schedule.csv"), schedule_csv(&schedule, &exp.schema)?.as_bytes())?;
    write_atomic(
        &cfg.out_dir.join("schedule_models.txt"),
        schedule_models_text(&schedule, &exp.schema)?.as_bytes(),
    )?;
    write_cost_profile(cfg, &exp)?;
    if let Some(traces) = traces {
        write_atomic(
            &cfg.out_dir.join("schedule_explain.txt"),
            render_step_traces(&traces).as_bytes(),
        )?;
    }
    print!("{}", schedule_table(&schedule));
    Ok(())
}

/// Runs the three-strategy comparison and writes trial and summary CSVs.
pub fn cmd_compare(cfg: &RunConfig) -> Result<()> {
    let exp = load_experiment(cfg)?;
    let pc = cfg.pipeline();
    let levels = cfg.budget_grid();
    let report =
        run_comparison(&exp.data, &exp.schema, &exp.profile, &levels, cfg.n_trials, &pc)?;

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.clone(), e))?;
    write_atomic(&cfg.out_dir.join("comparison_trials.csv"), report.trials_csv().as_bytes())?;
    write_atomic(&cfg.out_dir.join("comparison_summary.csv"), report.summary_csv().as_bytes())?;
    write_cost_profile(cfg, &exp)?;
    println!(
        "compared {} strategies x {} budget levels x {} trials",
        StrategyKind::ALL.len(),
        report.budget_levels.len(),
        report.n_trials
    );
    Ok(())
}

/// Writes one ablation curve CSV per strategy (plus diagnostics under
/// `--explain` for the weak-neuron strategy).
pub fn cmd_ablate(cfg: &RunConfig, strategies: &[StrategyKind]) -> Result<()> {
    let exp = load_experiment(cfg)?;
    let pc = cfg.pipeline();

    let mut outputs: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    for &strategy in strategies {
        let remover = cfg.remover_for(strategy);
        let name = strategy.as_str();
        if cfg.explain && strategy == StrategyKind::WeakNeuron {
            let (curve, traces) =
                ablation_curve_traced(&exp.data, &exp.schema, &exp.profile, &pc, &remover)?;
            outputs.push((
                cfg.out_dir.join(format!("ablation_{name}.csv")),
                ablation_csv(&[(name.to_string(), curve)]).into_bytes(),
            ));
            outputs.push((
                cfg.out_dir.join(format!("ablation_{name}_explain.txt")),
                render_step_traces(&traces).into_bytes(),
            ));
        } else {
            let curve = ablation_curve(&exp.data, &exp.schema, &exp.profile, &pc, &remover)?;
            outputs.push((
                cfg.out_dir.join(format!("ablation_{name}.csv")),
                ablation_csv(&[(name.to_string(), curve)]).into_bytes(),
            ));
        }
    }

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.clone(), e))?;
    for (path, bytes) in &outputs {
        write_atomic(path, bytes)?;
    }
    write_cost_profile(cfg, &exp)?;
    println!("wrote {} ablation file(s)", outputs.len());
    Ok(())
}

/// Builds the configured topology on the dataset's encoded width and checks
/// analytic gradients against finite differences on a random row.
///
/// Returns whether the worst relative error stayed below `1e-4`.
pub fn cmd_gradcheck(cfg: &RunConfig) -> Result<bool> {
    let exp = load_experiment(cfg)?;
    let encoding = crate::data::encode(&exp.data, &exp.schema, &exp.schema.all_ids())?;
    let structure = NetworkStructure::with_hidden(encoding.n_cols(), &cfg.hidden_layers)?;
    let net = Network::init(structure, cfg.seed);

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ 0x67726164);
    let input: Vec<f64> = (0..encoding.n_cols()).map(|_| rng.random_range(0.0..1.0)).collect();
    let label = u8::from(rng.random_range(0.0..1.0) < 0.5);
    let report = gradient_check(&net, &input, label, 1e-5, cfg.seed)?;
    let pass = report.max_relative_error < 1e-4;
    println!(
        "gradient check: max relative error {:.3e} over {} parameters -> {}",
        report.max_relative_error,
        report.n_checked,
        if pass { "ok" } else { "FAIL" }
    );
    Ok(pass)
}

fn write_cost_profile(cfg: &RunConfig, exp: &Experiment) -> Result<()> {
    let path = cfg.out_dir.join("cost_profile.csv");
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["feature_name", "cost"])
            .map_err(|e| Error::csv(path.clone(), e))?;
        for (&id, &cost) in exp.profile.costs() {
            let name = &exp.schema.feature(id)?.name;
            w.write_record([name.as_str(), &cost.to_string()])
                .map_err(|e| Error::csv(path.clone(), e))?;
        }
        w.flush().map_err(|e| Error::io(path.clone(), e))?;
    }
    write_atomic(&path, &buf)
}

/// Writes via a temp file in the same directory, then renames into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp-partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.clone(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.to_path_buf(), e))
}

fn schedule_table(schedule: &Schedule) -> String {
    let mut out = String::new();
    writeln!(out, "{:<6} {:>8} {:>10} {:>11}  features", "model", "budget", "accuracy", "model_cost")
        .unwrap();
    for (i, bcm) in schedule.entries.iter().enumerate() {
        let ids: Vec<String> = bcm.features.iter().map(|f| f.to_string()).collect();
        writeln!(
            out,
            "{:<6} {:>8} {:>10.4} {:>11}  {{{}}}",
            i + 1,
            bcm.budget,
            bcm.accuracy,
            bcm.model_cost,
            ids.join(",")
        )
        .unwrap();
    }
    if schedule.entries.is_empty() {
        writeln!(out, "(no model met the accuracy floor)").unwrap();
    }
    out
}

fn render_step_traces(traces: &[crate::budget::StepTrace]) -> String {
    let mut out = String::new();
    for t in traces {
        writeln!(out, "### removal step {} -> feature {}", t.step, t.removed).unwrap();
        out.push_str(&t.trace.render());
        out.push('\n');
    }
    if traces.is_empty() {
        out.push_str("(no weak-neuron removal steps)\n");
    }
    out
}
