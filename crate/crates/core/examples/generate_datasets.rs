//! Regenerates the bundled datasets under `data/`.
//!
//! The two clinical-style tables are seeded synthetic stand-ins shaped like
//! the UCI early-stage diabetes and Cleveland heart-disease tables (the
//! originals are not redistributed here); the third is the ten-feature
//! planted benchmark used by the test suites. Rerunning always produces the
//! same bytes.
//!
//! Usage: cargo run --example generate_datasets [-- <out_dir>]

use std::fmt::Write as _;
use std::path::Path;

use bcmnet::data::synth::{
    generate, write_raw_csv, PlantedFeature, PlantedRule, PlantedSpec,
};
use bcmnet::data::{FeatureKind, FeatureSchema};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let out_dir = args.get(1).map(String::as_str).unwrap_or("data");
    std::fs::create_dir_all(out_dir).expect("create output directory");

    emit(out_dir, "diabetes", &diabetes_spec(), &[13]);
    emit(out_dir, "heart", &heart_spec(), &[]);
    emit(out_dir, "synthetic10", &PlantedSpec::ten_feature(600, 7), &[]);
}

fn emit(out_dir: &str, name: &str, spec: &PlantedSpec, zero_cost: &[u16]) {
    let (schema, data) = generate(spec).expect("generate dataset");
    let csv_path = Path::new(out_dir).join(format!("{name}.csv"));
    write_raw_csv(&csv_path, &schema, &data).expect("write csv");
    let schema_path = Path::new(out_dir).join(format!("{name}_schema.toml"));
    std::fs::write(&schema_path, schema_toml(&schema, zero_cost)).expect("write schema");

    let positives = data.records().iter().filter(|r| r.label == 1).count();
    println!(
        "{}: {} rows, {} features, {:.1}% positive -> {}",
        name,
        data.n_rows(),
        schema.n_features(),
        100.0 * positives as f64 / data.n_rows() as f64,
        csv_path.display()
    );
}

fn schema_toml(schema: &FeatureSchema, zero_cost: &[u16]) -> String {
    let mut out = String::new();
    writeln!(out, "label = \"{}\"", schema.label_name()).unwrap();
    writeln!(
        out,
        "label_values = [\"{}\", \"{}\"]",
        schema.label_values()[0],
        schema.label_values()[1]
    )
    .unwrap();
    if !zero_cost.is_empty() {
        let ids: Vec<String> = zero_cost.iter().map(|i| i.to_string()).collect();
        writeln!(out, "zero_cost = [{}]", ids.join(", ")).unwrap();
    }
    for spec in schema.features() {
        writeln!(out).unwrap();
        writeln!(out, "[[features]]").unwrap();
        writeln!(out, "id = {}", spec.id).unwrap();
        writeln!(out, "name = \"{}\"", spec.name).unwrap();
        match &spec.kind {
            FeatureKind::Categorical { categories } => {
                let cats: Vec<String> =
                    categories.iter().map(|c| format!("\"{c}\"")).collect();
                writeln!(out, "categories = [{}]", cats.join(", ")).unwrap();
            }
            FeatureKind::Integer => writeln!(out, "kind = \"integer\"").unwrap(),
        }
    }
    out
}

/// 520 rows shaped like the early-stage diabetes table: twelve yes/no
/// symptoms plus an integer age, 13 features in all.
///
/// Symptom categories are declared Yes-first, which maps "Yes" to 0 in the
/// planted rule; negative weights make a "Yes" answer push toward a positive
/// diagnosis.
fn diabetes_spec() -> PlantedSpec {
    let binary = |name: &str, w: f64| PlantedFeature::binary(name, -w);
    PlantedSpec {
        label_name: "Diabetes".into(),
        label_values: ["No".into(), "Yes".into()],
        features: vec![
            binary("Dheal", 0.5),
            binary("Alopecia", 0.15),
            binary("Vblur", 1.5),
            binary("Obesity", 0.3),
            binary("Itching", 0.4),
            binary("Gthrush", 1.1),
            binary("Polydipsia", 1.7),
            binary("Irritability", 0.7),
            binary("Polyphagia", 0.8),
            binary("Par", 0.9),
            binary("Mstiff", 0.2),
            binary("Weakness", 0.25),
            PlantedFeature::integer("Age", 16, 90, 1.3),
        ],
        rule: PlantedRule::Linear,
        quad_coeff: 0.0,
        bias: 0.45,
        margin: 0.55,
        label_noise: 0.04,
        n_rows: 520,
        seed: 0x5D1A_BE7E,
    }
}

/// 303 rows shaped like the Cleveland heart-disease table: seven categorical
/// and six integer features (Oldpeak stored in tenths).
fn heart_spec() -> PlantedSpec {
    let cat = |name: &str, cats: &[&str], w: f64| PlantedFeature {
        name: name.into(),
        kind: bcmnet::data::synth::PlantedKind::Categorical {
            categories: cats.iter().map(|c| c.to_string()).collect(),
        },
        weight: w,
        mirror_of: None,
    };
    PlantedSpec {
        label_name: "Diagnosis".into(),
        label_values: ["No".into(), "Yes".into()],
        features: vec![
            cat("Ca", &["0", "1", "2", "3"], 1.5),
            cat("Exang", &["No", "Yes"], 0.8),
            cat("Cp", &["typical", "atypical", "nonanginal", "asymptomatic"], 1.1),
            cat("Thal", &["normal", "fixed", "reversible"], 1.2),
            PlantedFeature::integer("Thalach", 71, 202, 0.8),
            PlantedFeature::integer("Oldpeak", 0, 62, 0.9),
            PlantedFeature::integer("Trestbps", 94, 200, 0.3),
            cat("Slope", &["upsloping", "flat", "downsloping"], 0.6),
            PlantedFeature::integer("Fbs", 0, 1, 0.15),
            cat("Restecg", &["normal", "stt", "lvh"], 0.35),
            PlantedFeature::integer("Chol", 126, 564, 0.25),
            cat("Sex", &["Female", "Male"], 0.5),
            PlantedFeature::integer("Age", 29, 77, 0.5),
        ],
        rule: PlantedRule::Quadratic,
        quad_coeff: 0.8,
        bias: -0.05,
        margin: 0.4,
        label_noise: 0.07,
        n_rows: 303,
        seed: 0x6EA2_7D15,
    }
}
