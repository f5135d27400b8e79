use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::data::{
    FeatureId, FeatureKind, FeatureSchema, FeatureSpec, RawDataset, RawRecord, RawValue,
};
use crate::{Error, Result};

/// Shape of the planted labeling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantedRule {
    /// score = Σ wᵢ·(zᵢ − ½) + bias
    Linear,
    /// Linear plus an interaction term between the first two weighted features.
    Quadratic,
}

#[derive(Debug, Clone)]
pub enum PlantedKind {
    Categorical { categories: Vec<String> },
    Integer { lo: i64, hi: i64 },
}

impl PlantedKind {
    /// Number of distinct values the feature can take (used to check that a
    /// mirror feature has the same shape as its source).
    fn n_levels(&self) -> i64 {
        match self {
            PlantedKind::Categorical { categories } => categories.len() as i64,
            PlantedKind::Integer { lo, hi } => hi - lo + 1,
        }
    }
}

/// One generated feature. `weight == 0.0` keeps it out of the labeling rule;
/// `mirror_of = Some((i, fidelity))` makes it a noisy copy of feature index
/// `i` instead of an independent draw — it takes that feature's value with
/// probability `fidelity` and a fresh uniform draw otherwise, so it carries
/// redundant signal without entering the rule itself.
#[derive(Debug, Clone)]
pub struct PlantedFeature {
    pub name: String,
    pub kind: PlantedKind,
    pub weight: f64,
    pub mirror_of: Option<(usize, f64)>,
}

impl PlantedFeature {
    pub fn binary(name: impl Into<String>, weight: f64) -> Self {
        Self {
            name: name.into(),
            kind: PlantedKind::Categorical { categories: vec!["Yes".into(), "No".into()] },
            weight,
            mirror_of: None,
        }
    }

    pub fn integer(name: impl Into<String>, lo: i64, hi: i64, weight: f64) -> Self {
        Self { name: name.into(), kind: PlantedKind::Integer { lo, hi }, weight, mirror_of: None }
    }
}

/// A seeded binary-classification dataset with a planted rule over named
/// features. Values are sampled uniformly; the label is the sign of the rule
/// score, then flipped with probability `label_noise`.
///
/// A positive `margin` rejects rows whose score falls within it, leaving an
/// empty band around the decision boundary (an easily separable problem, the
/// way strongly diagnostic clinical tables are).
#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub label_name: String,
    pub label_values: [String; 2],
    pub features: Vec<PlantedFeature>,
    pub rule: PlantedRule,
    pub quad_coeff: f64,
    pub bias: f64,
    pub margin: f64,
    pub label_noise: f64,
    pub n_rows: usize,
    pub seed: u64,
}

impl PlantedSpec {
    /// The ten-feature benchmark: four strong four-level categorical
    /// features, four noisy mirrors of them (redundant signal carriers, the
    /// way correlated clinical measurements duplicate each other), and two
    /// yes/no features carrying zero weight (pure noise).
    pub fn ten_feature(n_rows: usize, seed: u64) -> Self {
        let four_cat = || PlantedKind::Categorical {
            categories: vec!["A".into(), "B".into(), "C".into(), "D".into()],
        };
        let weights = [4.0, 3.0, 2.2, 1.6];
        let mut features: Vec<PlantedFeature> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| PlantedFeature {
                name: format!("f{}", i + 1),
                kind: four_cat(),
                weight: w,
                mirror_of: None,
            })
            .collect();
        for i in 0..4 {
            features.push(PlantedFeature {
                name: format!("f{}", i + 5),
                kind: four_cat(),
                weight: 0.0,
                mirror_of: Some((i, 0.9)),
            });
        }
        features.push(PlantedFeature::binary("f9", 0.0));
        features.push(PlantedFeature::binary("f10", 0.0));
        Self {
            label_name: "target".into(),
            label_values: ["neg".into(), "pos".into()],
            features,
            rule: PlantedRule::Linear,
            quad_coeff: 0.0,
            bias: 0.0,
            margin: 0.3,
            label_noise: 0.0,
            n_rows,
            seed,
        }
    }

    /// Ids of the pure-noise features: zero weight and no mirror source.
    pub fn noise_feature_ids(&self) -> Vec<FeatureId> {
        self.features
            .iter()
            .enumerate()
            .filter_map(|(i, f)| {
                (f.weight == 0.0 && f.mirror_of.is_none()).then_some(FeatureId(i as u16 + 1))
            })
            .collect()
    }
}

/// Generates the schema and dataset for a planted spec.
pub fn generate(spec: &PlantedSpec) -> Result<(FeatureSchema, RawDataset)> {
    if !(0.0..=0.5).contains(&spec.label_noise) {
        return Err(Error::InvalidParam(format!(
            "label_noise must be in [0, 0.5], got {}",
            spec.label_noise
        )));
    }
    let mut specs = Vec::with_capacity(spec.features.len());
    for (i, f) in spec.features.iter().enumerate() {
        let kind = match &f.kind {
            PlantedKind::Categorical { categories } => {
                FeatureKind::Categorical { categories: categories.clone() }
            }
            PlantedKind::Integer { lo, hi } => {
                if lo >= hi {
                    return Err(Error::InvalidParam(format!(
                        "integer feature '{}' has empty range [{lo}, {hi}]",
                        f.name
                    )));
                }
                FeatureKind::Integer
            }
        };
        if let Some((src, fidelity)) = f.mirror_of {
            if src >= i {
                return Err(Error::InvalidParam(format!(
                    "feature '{}' mirrors a later feature",
                    f.name
                )));
            }
            if spec.features[src].kind.n_levels() != f.kind.n_levels() {
                return Err(Error::InvalidParam(format!(
                    "feature '{}' mirrors a feature of a different shape",
                    f.name
                )));
            }
            if !(0.0..=1.0).contains(&fidelity) {
                return Err(Error::InvalidParam(format!(
                    "feature '{}' has fidelity {fidelity} outside [0, 1]",
                    f.name
                )));
            }
        }
        specs.push(FeatureSpec { id: FeatureId(i as u16 + 1), name: f.name.clone(), kind });
    }
    let schema =
        FeatureSchema::new(specs, spec.label_name.clone(), spec.label_values.clone())?;

    // The interaction term pairs the first two weighted features.
    let informative: Vec<usize> = spec
        .features
        .iter()
        .enumerate()
        .filter_map(|(i, f)| (f.weight != 0.0).then_some(i))
        .collect();
    let quad_pair = match (spec.rule, informative.as_slice()) {
        (PlantedRule::Quadratic, [a, b, ..]) => Some((*a, *b)),
        _ => None,
    };

    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.n_rows);
    let mut zs = Vec::with_capacity(spec.features.len());
    for _ in 0..spec.n_rows {
        let mut values = Vec::with_capacity(spec.features.len());
        let mut score;
        let mut attempts = 0;
        loop {
            values.clear();
            zs.clear();
            for f in &spec.features {
                let copy_source = match f.mirror_of {
                    Some((src, fidelity)) if rng.random_range(0.0..1.0) < fidelity => Some(src),
                    _ => None,
                };
                match &f.kind {
                    PlantedKind::Categorical { categories } => {
                        let idx = match copy_source {
                            Some(src) => match values[src] {
                                RawValue::Category(c) => c as usize,
                                RawValue::Integer(v) => v as usize,
                            },
                            None => rng.random_range(0..categories.len()),
                        };
                        values.push(RawValue::Category(idx as u16));
                        zs.push(idx as f64 / (categories.len() - 1) as f64);
                    }
                    PlantedKind::Integer { lo, hi } => {
                        let v = match copy_source {
                            Some(src) => match values[src] {
                                RawValue::Integer(v) => v,
                                RawValue::Category(c) => lo + c as i64,
                            },
                            None => rng.random_range(*lo..=*hi),
                        };
                        values.push(RawValue::Integer(v));
                        zs.push((v - lo) as f64 / (hi - lo) as f64);
                    }
                }
            }
            score = spec.bias;
            for (f, &z) in spec.features.iter().zip(&zs) {
                score += f.weight * (z - 0.5);
            }
            if let Some((a, b)) = quad_pair {
                score += spec.quad_coeff * (zs[a] - 0.5) * (zs[b] - 0.5);
            }
            if score.abs() >= spec.margin {
                break;
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::InvalidParam(format!(
                    "margin {} rejects nearly every row",
                    spec.margin
                )));
            }
        }
        let mut label = u8::from(score > 0.0);
        if spec.label_noise > 0.0 && rng.random_range(0.0..1.0) < spec.label_noise {
            label = 1 - label;
        }
        records.push(RawRecord { values, label });
    }
    Ok((schema, RawDataset::from_records(records)))
}

/// Writes a raw dataset back out as a schema-conformant CSV file.
pub fn write_raw_csv(
    path: impl AsRef<Path>,
    schema: &FeatureSchema,
    data: &RawDataset,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
    header.push(schema.label_name());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for rec in data.records() {
        let mut row = Vec::with_capacity(header.len());
        for (spec, value) in schema.features().iter().zip(&rec.values) {
            match (&spec.kind, value) {
                (FeatureKind::Categorical { categories }, RawValue::Category(idx)) => {
                    row.push(categories[*idx as usize].clone());
                }
                (FeatureKind::Integer, RawValue::Integer(v)) => row.push(v.to_string()),
                _ => {
                    return Err(Error::InvalidParam(format!(
                        "record value kind does not match feature '{}'",
                        spec.name
                    )))
                }
            }
        }
        row.push(schema.label_values()[rec.label as usize].clone());
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::load_csv;

    #[test]
    fn deterministic_given_seed() {
        let spec = PlantedSpec::ten_feature(50, 9);
        let (_, a) = generate(&spec).unwrap();
        let (_, b) = generate(&spec).unwrap();
        assert_eq!(a.records().len(), b.records().len());
        for (ra, rb) in a.records().iter().zip(b.records()) {
            assert_eq!(ra.values, rb.values);
            assert_eq!(ra.label, rb.label);
        }
    }

    #[test]
    fn noise_ids_are_last_two() {
        let spec = PlantedSpec::ten_feature(10, 0);
        assert_eq!(spec.noise_feature_ids(), vec![FeatureId(9), FeatureId(10)]);
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let spec = PlantedSpec::ten_feature(30, 4);
        let (schema, data) = generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.csv");
        write_raw_csv(&path, &schema, &data).unwrap();
        let loaded = load_csv(&path, &schema).unwrap();
        assert_eq!(loaded.n_rows(), 30);
        assert_eq!(loaded.dropped_rows(), 0);
        for (a, b) in data.records().iter().zip(loaded.records()) {
            assert_eq!(a.values, b.values);
            assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn classes_are_roughly_balanced() {
        let spec = PlantedSpec::ten_feature(2000, 17);
        let (_, data) = generate(&spec).unwrap();
        let pos = data.records().iter().filter(|r| r.label == 1).count();
        let rate = pos as f64 / 2000.0;
        assert!((0.35..=0.65).contains(&rate), "positive rate {rate}");
    }
}
