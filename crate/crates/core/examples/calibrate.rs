//! Scratch calibration harness (not part of the deliverable).

use std::time::Instant;

use bcmnet::budget::{generate_schedule, PipelineConfig};
use bcmnet::data::{encode, kfold, load_csv, SchemaFile};
use bcmnet::net::{cross_validate, Optimizer, TrainConfig};
use bcmnet::prune::PruneConfig;

fn pc(epochs: usize, hidden: Vec<usize>, k: usize, seed: u64) -> PipelineConfig {
    PipelineConfig {
        hidden_layers: hidden,
        k,
        train: TrainConfig {
            epochs,
            batch_size: 32,
            learning_rate: 0.01,
            optimizer: Optimizer::Momentum,
            momentum: 0.9,
            seed,
        },
        prune: PruneConfig::default(),
        fold_seed: seed ^ 0x666F_6C64,
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).cloned().unwrap_or_else(|| "ds1cv".into());
    match which.as_str() {
        "ds1cv" => ds_cv("data/diabetes_schema.toml", "data/diabetes.csv", vec![120; 5], 200),
        "ds1cv-fast" => ds_cv("data/diabetes_schema.toml", "data/diabetes.csv", vec![120; 5], 60),
        "ds1cv-small" => ds_cv("data/diabetes_schema.toml", "data/diabetes.csv", vec![48; 5], 60),
        "ds2cv" => ds_cv("data/heart_schema.toml", "data/heart.csv", vec![200; 3], 60),
        "ds2cv-small" => ds_cv("data/heart_schema.toml", "data/heart.csv", vec![64; 3], 60),
        "ds1sched" => ds1_schedule(60, vec![120; 5]),
        "ds1sched-small" => ds1_schedule(60, vec![48; 5]),
        "costscan" => cost_scan(),
        "noise10" => noise10(
            args.get(2).and_then(|s| s.parse().ok()).unwrap_or(40),
            args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.02),
            args.get(4).and_then(|s| s.parse().ok()).unwrap_or(32),
        ),
        "dominance" => dominance(),
        "weights" => weight_report(
            args.get(2).and_then(|s| s.parse().ok()).unwrap_or(160),
            args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.02),
        ),
        other => eprintln!("unknown mode {other}"),
    }
}

fn ds_cv(schema_path: &str, csv_path: &str, hidden: Vec<usize>, epochs: usize) {
    let schema_file = SchemaFile::load(schema_path).unwrap();
    let data = load_csv(csv_path, &schema_file.schema).unwrap();
    let enc = encode(&data, &schema_file.schema, &schema_file.schema.all_ids()).unwrap();
    println!("{} rows x {} cols", enc.n_rows(), enc.n_cols());
    let p = pc(epochs, hidden, 10, 42);
    let folds = kfold(enc.n_rows(), p.k, p.fold_seed).unwrap();
    let structure =
        bcmnet::net::NetworkStructure::with_hidden(enc.n_cols(), &p.hidden_layers).unwrap();
    let t0 = Instant::now();
    let cv = cross_validate(&structure, &enc, &folds, &p.train).unwrap();
    let dt = t0.elapsed();
    println!(
        "epochs {}: cv mean accuracy {:.4} in {:.1?} (per-fold {:?})",
        epochs,
        cv.mean_accuracy,
        dt,
        cv.per_fold.iter().map(|e| (e.accuracy * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
}

fn noise10(epochs: usize, lr: f64, batch: usize) {
    use bcmnet::data::{CostProfile, FeatureId};
    use bcmnet::net::{train, Network, NetworkStructure};
    use bcmnet::prune::find_least_important_feature;

    let schema_file = SchemaFile::load("data/synthetic10_schema.toml").unwrap();
    let data = load_csv("data/synthetic10.csv", &schema_file.schema).unwrap();
    let enc = encode(&data, &schema_file.schema, &schema_file.schema.all_ids()).unwrap();
    let costs: Vec<(u16, u32)> = vec![
        (1, 250), (2, 240), (3, 230), (4, 220), (5, 210),
        (6, 200), (7, 180), (8, 160), (9, 290), (10, 300),
    ];
    let profile =
        CostProfile::from_costs(costs.into_iter().map(|(i, c)| (FeatureId(i), c)).collect());
    let hidden: Vec<usize> = std::env::var("CAL_HIDDEN")
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|_| vec![16, 16, 16]);
    let structure = NetworkStructure::with_hidden(enc.n_cols(), &hidden).unwrap();
    let t0 = Instant::now();
    let mut discriminative = 0;
    let mut hits = 0;
    for seed in 0..10u64 {
        let cfg = TrainConfig {
            epochs,
            batch_size: batch,
            learning_rate: lr,
            optimizer: Optimizer::Momentum,
            momentum: 0.9,
            seed,
        };
        let net = train(Network::init(structure.clone(), seed), &enc, &cfg).unwrap();
        let prune_cfg = PruneConfig {
            c0: std::env::var("CAL_C0").ok().and_then(|s| s.parse().ok()).unwrap_or(0.05),
            max_rounds: 64,
        };
        let report = find_least_important_feature(&net, &enc, &profile, &prune_cfg).unwrap();
        let weak: Vec<u16> = report.weak_features.iter().map(|f| f.0).collect();
        let hit = [FeatureId(9), FeatureId(10)].contains(&report.selected_feature);
        hits += hit as u32;
        discriminative += (report.weak_features.len() < 10) as u32;
        println!(
            "seed {seed}: selected {} (rounds {}) weak {:?} {}",
            report.selected_feature,
            report.rounds_used,
            weak,
            if hit { "HIT" } else { "miss" }
        );
    }
    println!("epochs {epochs} lr {lr} batch {batch}: {hits}/10 hits, {discriminative}/10 discriminative in {:.1?}", t0.elapsed());
}

fn weight_report(epochs: usize, lr: f64) {
    use bcmnet::net::{train, Network, NetworkStructure};

    let schema_file = SchemaFile::load("data/synthetic10_schema.toml").unwrap();
    let data = load_csv("data/synthetic10.csv", &schema_file.schema).unwrap();
    let enc = encode(&data, &schema_file.schema, &schema_file.schema.all_ids()).unwrap();
    let hidden: Vec<usize> = std::env::var("CAL_HIDDEN")
        .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
        .unwrap_or_else(|_| vec![16, 16, 16]);
    let structure = NetworkStructure::with_hidden(enc.n_cols(), &hidden).unwrap();
    let cfg = TrainConfig {
        epochs,
        batch_size: std::env::var("CAL_BATCH").ok().and_then(|s| s.parse().ok()).unwrap_or(32),
        learning_rate: lr,
        optimizer: Optimizer::Momentum,
        momentum: 0.9,
        seed: 0,
    };
    let net = train(Network::init(structure.clone(), 0), &enc, &cfg).unwrap();
    let n_tgt = structure.layer_sizes()[1];
    println!("input column |w| stats (layer 0 -> 1):");
    for (col, &feat) in enc.column_map().iter().enumerate() {
        let row = &net.layer_weights(0)[col * n_tgt..(col + 1) * n_tgt];
        let max = row.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let mean = row.iter().map(|w| w.abs()).sum::<f64>() / row.len() as f64;
        println!("  col {col:2} (feature {feat}): max {max:.4} mean {mean:.4}");
    }
    for l in 0..structure.n_layers() - 1 {
        let w = net.layer_weights(l);
        let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mean = w.iter().map(|v| v.abs()).sum::<f64>() / w.len() as f64;
        println!("layer {l}: max {max:.4} mean {mean:.4} max/mean {:.2}", max / mean);
    }
}

fn dominance() {
    use bcmnet::baselines::{run_comparison, StrategyKind};
    use std::collections::BTreeMap;

    let schema_file = SchemaFile::load("data/synthetic10_schema.toml").unwrap();
    let data = load_csv("data/synthetic10.csv", &schema_file.schema).unwrap();
    let levels: Vec<u64> = (1..=15).map(|i| i * 200).rev().collect();
    let mut best: BTreeMap<(StrategyKind, u64), Vec<f64>> = BTreeMap::new();
    let t0 = Instant::now();
    for cost_seed in 0..5u64 {
        let profile = bcmnet::data::sample_costs(
            &schema_file.schema,
            100,
            300,
            &Default::default(),
            cost_seed,
        )
        .unwrap();
        let mut p = pc(300, vec![16, 64], 3, 40 + cost_seed);
        p.train.learning_rate = 0.3;
        p.train.batch_size = 600;
        p.prune.c0 = 0.035;
        let report =
            run_comparison(&data, &schema_file.schema, &profile, &levels, 10, &p).unwrap();
        for (&(s, b), cell) in &report.cells {
            best.entry((s, b)).or_default().push(cell.best_accuracy);
        }
        println!("cost seed {cost_seed} (total {}) done at {:.1?}", profile.total_cost(), t0.elapsed());
    }
    let mut wins = 0;
    let mut total = 0;
    for &b in &levels {
        let avg = |s: StrategyKind| -> Option<f64> {
            best.get(&(s, b)).map(|v| v.iter().sum::<f64>() / v.len() as f64)
        };
        let (Some(w), Some(r)) = (avg(StrategyKind::WeakNeuron), avg(StrategyKind::Random))
        else {
            println!("level {b}: (skipped)");
            continue;
        };
        let c = avg(StrategyKind::CostBased).unwrap_or(f64::NAN);
        total += 1;
        let win = w >= r;
        wins += win as u32;
        println!(
            "level {b}: weak {w:.4} cost {c:.4} random {r:.4} {}",
            if win { "WIN" } else { "LOSS" }
        );
    }
    println!("weak >= random at {wins}/{total} levels in {:.1?}", t0.elapsed());
}

fn cost_scan() {
    let schema_file = SchemaFile::load("data/diabetes_schema.toml").unwrap();
    let mut found = 0;
    for seed in 0..20_000u64 {
        let p = bcmnet::data::sample_costs(
            &schema_file.schema,
            100,
            300,
            &schema_file.zero_cost_ids,
            seed,
        )
        .unwrap();
        if p.total_cost() <= 1880 {
            println!("seed {seed}: total {}", p.total_cost());
            found += 1;
            if found >= 10 {
                break;
            }
        }
    }
}

fn ds1_schedule(epochs: usize, hidden: Vec<usize>) {
    let schema_file = SchemaFile::load("data/diabetes_schema.toml").unwrap();
    let data = load_csv("data/diabetes.csv", &schema_file.schema).unwrap();
    let profile = bcmnet::data::sample_costs(
        &schema_file.schema,
        100,
        300,
        &schema_file.zero_cost_ids,
        2060,
    )
    .unwrap();
    println!("total cost {}", profile.total_cost());
    let p = pc(epochs, hidden, 10, 42);
    let t0 = Instant::now();
    let schedule =
        generate_schedule(&data, &schema_file.schema, &profile, 1900, 200, 0.65, &p, false)
            .unwrap();
    println!("schedule with {} entries in {:.1?}", schedule.entries.len(), t0.elapsed());
    for (i, bcm) in schedule.entries.iter().enumerate() {
        println!(
            "  {} budget {} cost {} acc {:.4} features {:?}",
            i + 1,
            bcm.budget,
            bcm.model_cost,
            bcm.accuracy,
            bcm.features.iter().map(|f| f.0).collect::<Vec<_>>()
        );
    }
}
