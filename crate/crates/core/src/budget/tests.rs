use super::*;
use crate::baselines::{run_comparison, StrategyKind};
use crate::data::synth::{generate, PlantedFeature, PlantedRule, PlantedSpec};
use crate::data::sample_costs;
use crate::net::{Optimizer, TrainConfig};

/// A small planted problem that trains in milliseconds.
fn small_problem(seed: u64) -> (FeatureSchema, RawDataset, CostProfile) {
    let spec = PlantedSpec {
        label_name: "y".into(),
        label_values: ["n".into(), "p".into()],
        features: vec![
            PlantedFeature::binary("a", 2.0),
            PlantedFeature::binary("b", 1.5),
            PlantedFeature::binary("c", 1.0),
            PlantedFeature::binary("d", 0.0),
        ],
        rule: PlantedRule::Linear,
        quad_coeff: 0.0,
        bias: 0.0,
        margin: 0.0,
        label_noise: 0.1,
        n_rows: 80,
        seed,
    };
    let (schema, data) = generate(&spec).unwrap();
    let profile = sample_costs(&schema, 100, 300, &Default::default(), seed ^ 0xC0).unwrap();
    (schema, data, profile)
}

fn fast_pc(seed: u64) -> PipelineConfig {
    PipelineConfig {
        hidden_layers: vec![8, 8],
        k: 3,
        train: TrainConfig {
            epochs: 25,
            batch_size: 16,
            learning_rate: 0.05,
            optimizer: Optimizer::Momentum,
            momentum: 0.9,
            seed,
        },
        prune: PruneConfig::default(),
        fold_seed: seed.wrapping_add(101),
    }
}

#[test]
fn budget_above_total_cost_keeps_every_feature() {
    let (schema, data, profile) = small_problem(1);
    let total = profile.total_cost();
    let bcm = generate_bcm(&data, &schema, &profile, total + 100, &fast_pc(1)).unwrap();
    assert_eq!(bcm.features, schema.all_ids());
    assert_eq!(bcm.model_cost, total);
    assert!(bcm.model_cost <= bcm.budget);
    assert!((0.0..=1.0).contains(&bcm.accuracy));
}

#[test]
fn generated_bcm_respects_tight_budget() {
    let (schema, data, profile) = small_problem(2);
    let total = profile.total_cost();
    let budget = total / 2;
    let bcm = generate_bcm(&data, &schema, &profile, budget, &fast_pc(2)).unwrap();
    assert!(bcm.model_cost <= budget, "cost {} > budget {budget}", bcm.model_cost);
    assert!(!bcm.features.is_empty());
    assert!(bcm.features.len() < schema.n_features());
}

#[test]
fn infeasible_budget_is_reported() {
    let (schema, data, profile) = small_problem(3);
    let min_single = profile.costs().values().copied().min().unwrap() as u64;
    assert!(min_single > 0, "sampled costs here are all positive");
    let err = generate_bcm(&data, &schema, &profile, min_single - 1, &fast_pc(3)).unwrap_err();
    assert!(matches!(err, Error::BudgetInfeasible { .. }));
}

#[test]
fn schedule_grid_descends_by_d_with_nested_features() {
    let (schema, data, profile) = small_problem(4);
    let total = profile.total_cost();
    let d = 150;
    let b_max = total + 50;
    let schedule =
        generate_schedule(&data, &schema, &profile, b_max, d, 0.0, &fast_pc(4), false).unwrap();
    assert!(!schedule.entries.is_empty());
    assert_eq!(schedule.entries[0].budget, b_max);
    assert_eq!(schedule.entries[0].features, schema.all_ids());
    for pair in schedule.entries.windows(2) {
        assert_eq!(pair[0].budget - pair[1].budget, d);
        assert!(pair[1].features.is_subset(&pair[0].features));
        assert!(pair[1].model_cost <= pair[1].budget);
    }
}

#[test]
fn unreachable_p_min_gives_empty_schedule() {
    let (schema, data, profile) = small_problem(5);
    // 10% label noise makes perfect CV accuracy unattainable.
    let schedule = generate_schedule(
        &data,
        &schema,
        &profile,
        profile.total_cost() + 10,
        200,
        1.0,
        &fast_pc(5),
        false,
    )
    .unwrap();
    assert!(schedule.entries.is_empty());
}

#[test]
fn d_larger_than_b_max_yields_at_most_one_entry() {
    let (schema, data, profile) = small_problem(6);
    let schedule = generate_schedule(
        &data,
        &schema,
        &profile,
        profile.total_cost() + 10,
        profile.total_cost() * 4,
        0.0,
        &fast_pc(6),
        false,
    )
    .unwrap();
    assert!(schedule.entries.len() <= 1);
}

#[test]
fn independent_levels_match_shared_trajectory_with_shared_seeds() {
    let (schema, data, profile) = small_problem(7);
    let pc = fast_pc(7);
    let b_max = profile.total_cost() + 20;
    let shared =
        generate_schedule(&data, &schema, &profile, b_max, 200, 0.0, &pc, false).unwrap();
    let indep =
        generate_schedule(&data, &schema, &profile, b_max, 200, 0.0, &pc, true).unwrap();
    assert_eq!(shared.entries.len(), indep.entries.len());
    for (a, b) in shared.entries.iter().zip(&indep.entries) {
        assert_eq!(a.budget, b.budget);
        assert_eq!(a.features, b.features);
        assert_eq!(a.accuracy, b.accuracy);
    }
}

#[test]
fn schedule_is_deterministic() {
    let (schema, data, profile) = small_problem(8);
    let pc = fast_pc(8);
    let b_max = profile.total_cost();
    let a = generate_schedule(&data, &schema, &profile, b_max, 180, 0.3, &pc, false).unwrap();
    let b = generate_schedule(&data, &schema, &profile, b_max, 180, 0.3, &pc, false).unwrap();
    assert_eq!(a.entries.len(), b.entries.len());
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(x.features, y.features);
        assert_eq!(x.accuracy.to_bits(), y.accuracy.to_bits());
        assert_eq!(x.network, y.network);
    }
}

#[test]
fn ablation_curve_has_one_point_per_feature_count() {
    let (schema, data, profile) = small_problem(9);
    let pc = fast_pc(9);
    for remover in [Remover::WeakNeuron, Remover::CostBased, Remover::Random { seed: 5 }] {
        let curve = ablation_curve(&data, &schema, &profile, &pc, &remover).unwrap();
        assert_eq!(curve.len(), schema.n_features());
        assert_eq!(curve[0].n_removed, 0);
        assert_eq!(curve[0].features, schema.all_ids());
        assert_eq!(curve.last().unwrap().features.len(), 1);
        for (i, point) in curve.iter().enumerate() {
            assert_eq!(point.n_removed, i);
            assert_eq!(point.features.len(), schema.n_features() - i);
        }
        for pair in curve.windows(2) {
            assert!(pair[1].model_cost <= pair[0].model_cost);
        }
    }
}

#[test]
fn traced_ablation_collects_weak_neuron_steps() {
    let (schema, data, profile) = small_problem(10);
    let pc = fast_pc(10);
    let (curve, traces) =
        ablation_curve_traced(&data, &schema, &profile, &pc, &Remover::WeakNeuron).unwrap();
    assert_eq!(traces.len(), curve.len() - 1, "one trace per removal");
    for (i, t) in traces.iter().enumerate() {
        assert_eq!(t.step, i);
        assert!(!t.trace.rounds.is_empty());
    }
    // Non-marking strategies have nothing to trace.
    let (_, traces) =
        ablation_curve_traced(&data, &schema, &profile, &pc, &Remover::CostBased).unwrap();
    assert!(traces.is_empty());
}

#[test]
fn schedule_csv_shape() {
    let (schema, data, profile) = small_problem(11);
    let schedule = generate_schedule(
        &data,
        &schema,
        &profile,
        profile.total_cost() + 5,
        250,
        0.0,
        &fast_pc(11),
        false,
    )
    .unwrap();
    let csv = schedule_csv(&schedule, &schema).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model_index,budget,accuracy,model_cost,feature_ids,feature_names"
    );
    assert_eq!(lines.count(), schedule.entries.len());
    let text = schedule_models_text(&schedule, &schema).unwrap();
    assert!(text.starts_with("bcmnet-schedule v1"));
    assert_eq!(
        text.matches("bcmnet-network v1").count(),
        schedule.entries.len()
    );
}

#[test]
fn comparison_strategies_agree_at_budgets_covering_all_features() {
    let (schema, data, profile) = small_problem(12);
    let pc = fast_pc(12);
    let top = profile.total_cost() + 100;
    let report = run_comparison(&data, &schema, &profile, &[top], 2, &pc).unwrap();
    let weak = report.cell(StrategyKind::WeakNeuron, top).unwrap();
    let cost = report.cell(StrategyKind::CostBased, top).unwrap();
    let random = report.cell(StrategyKind::Random, top).unwrap();
    assert_eq!(weak.best_feature_set, schema.all_ids());
    assert_eq!(cost.best_feature_set, schema.all_ids());
    assert_eq!(random.best_feature_set, schema.all_ids());
    assert_eq!(weak.accuracies, cost.accuracies);
    assert_eq!(weak.accuracies, random.accuracies);
}

#[test]
fn cost_based_trials_share_feature_sets() {
    let (schema, data, profile) = small_problem(13);
    let pc = fast_pc(13);
    let budget = profile.total_cost() / 2;
    let report = run_comparison(&data, &schema, &profile, &[budget], 3, &pc).unwrap();
    let sets: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.strategy == StrategyKind::CostBased)
        .map(|r| r.features.clone())
        .collect();
    assert_eq!(sets.len(), 3);
    assert!(sets.windows(2).all(|w| w[0] == w[1]), "removal order is training-independent");
    for r in &report.records {
        assert!(r.model_cost <= r.budget, "budget safety violated");
    }
}

#[test]
fn comparison_csvs_have_expected_headers() {
    let (schema, data, profile) = small_problem(14);
    let pc = fast_pc(14);
    let top = profile.total_cost();
    let report = run_comparison(&data, &schema, &profile, &[top], 1, &pc).unwrap();
    assert!(report
        .trials_csv()
        .starts_with("strategy,budget,trial,accuracy,model_cost,feature_ids\n"));
    assert!(report.summary_csv().starts_with("strategy,budget,best_accuracy\n"));
    assert_eq!(report.trials_csv().lines().count(), 1 + 3);
}
