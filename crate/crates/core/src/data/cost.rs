use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::data::{FeatureId, FeatureSchema};
use crate::{Error, Result};

/// The measurement cost of every feature in a schema, in whole currency
/// units. Features in `zero_cost_ids` cost exactly 0; all others lie in
/// `[range_lo, range_hi]`.
#[derive(Debug, Clone)]
pub struct CostProfile {
    costs: BTreeMap<FeatureId, u32>,
    seed: u64,
    range_lo: u32,
    range_hi: u32,
    zero_cost_ids: BTreeSet<FeatureId>,
}

impl CostProfile {
    pub fn cost(&self, id: FeatureId) -> Result<u32> {
        self.costs.get(&id).copied().ok_or(Error::UnknownFeature(id))
    }

    pub fn costs(&self) -> &BTreeMap<FeatureId, u32> {
        &self.costs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn range(&self) -> (u32, u32) {
        (self.range_lo, self.range_hi)
    }

    pub fn zero_cost_ids(&self) -> &BTreeSet<FeatureId> {
        &self.zero_cost_ids
    }

    /// Total cost of all features in the profile.
    pub fn total_cost(&self) -> u64 {
        self.costs.values().map(|&c| c as u64).sum()
    }

    /// Writes the two-column `feature_name,cost` CSV form.
    pub fn write_csv(&self, path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["feature_name", "cost"]).map_err(|e| Error::csv(path, e))?;
        for (&id, &cost) in &self.costs {
            let name = &schema.feature(id)?.name;
            w.write_record([name.as_str(), &cost.to_string()])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads the two-column CSV form. Every schema feature must be priced
    /// exactly once. Zero-cost ids and the range are inferred from the data.
    pub fn read_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut costs = BTreeMap::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let name = row.get(0).unwrap_or_default();
            let spec = schema
                .feature_by_name(name)
                .ok_or_else(|| Error::HeaderMismatch(name.to_string()))?;
            let cost: u32 = row
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad cost for feature '{name}'")))?;
            if costs.insert(spec.id, cost).is_some() {
                return Err(Error::InvalidParam(format!("feature '{name}' priced twice")));
            }
        }
        if costs.len() != schema.n_features() {
            return Err(Error::InvalidParam(format!(
                "cost file prices {} of {} schema features",
                costs.len(),
                schema.n_features()
            )));
        }
        let zero_cost_ids: BTreeSet<FeatureId> =
            costs.iter().filter_map(|(&id, &c)| (c == 0).then_some(id)).collect();
        let nonzero: Vec<u32> = costs.values().copied().filter(|&c| c > 0).collect();
        let range_lo = nonzero.iter().copied().min().unwrap_or(0);
        let range_hi = nonzero.iter().copied().max().unwrap_or(0);
        Ok(Self { costs, seed: 0, range_lo, range_hi, zero_cost_ids })
    }

    /// Builds a profile directly from explicit per-feature costs.
    pub fn from_costs(costs: BTreeMap<FeatureId, u32>) -> Self {
        let zero_cost_ids =
            costs.iter().filter_map(|(&id, &c)| (c == 0).then_some(id)).collect();
        let nonzero: Vec<u32> = costs.values().copied().filter(|&c| c > 0).collect();
        let range_lo = nonzero.iter().copied().min().unwrap_or(0);
        let range_hi = nonzero.iter().copied().max().unwrap_or(0);
        Self { costs, seed: 0, range_lo, range_hi, zero_cost_ids }
    }
}

/// Draws an independent uniform integer cost in `[lo, hi]` for every feature
/// not in `zero_cost_ids`; exempt features cost 0. Pure function of the seed.
pub fn sample_costs(
    schema: &FeatureSchema,
    lo: u32,
    hi: u32,
    zero_cost_ids: &BTreeSet<FeatureId>,
    seed: u64,
) -> Result<CostProfile> {
    if lo > hi {
        return Err(Error::InvalidParam(format!("cost range [{lo}, {hi}] is empty")));
    }
    for &id in zero_cost_ids {
        schema.feature(id)?;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut costs = BTreeMap::new();
    for spec in schema.features() {
        let cost = if zero_cost_ids.contains(&spec.id) {
            0
        } else {
            rng.random_range(lo..=hi)
        };
        costs.insert(spec.id, cost);
    }
    Ok(CostProfile {
        costs,
        seed,
        range_lo: lo,
        range_hi: hi,
        zero_cost_ids: zero_cost_ids.clone(),
    })
}

/// Total cost of a feature set: the sum of per-feature costs. Each logical
/// feature is charged once no matter how many encoded columns it owns.
pub fn model_cost(features: &BTreeSet<FeatureId>, profile: &CostProfile) -> Result<u64> {
    let mut total = 0u64;
    for &id in features {
        total += profile.cost(id)? as u64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureKind, FeatureSpec};
    use proptest::prelude::*;

    fn schema(n: u16) -> FeatureSchema {
        let features = (1..=n)
            .map(|i| FeatureSpec {
                id: FeatureId(i),
                name: format!("f{i}"),
                kind: FeatureKind::Categorical { categories: vec!["Yes".into(), "No".into()] },
            })
            .collect();
        FeatureSchema::new(features, "label", ["No".into(), "Yes".into()]).unwrap()
    }

    #[test]
    fn zero_cost_ids_cost_zero_and_rest_in_range() {
        let schema = schema(13);
        let exempt: BTreeSet<_> = [FeatureId(13)].into();
        let profile = sample_costs(&schema, 100, 300, &exempt, 7).unwrap();
        assert_eq!(profile.cost(FeatureId(13)).unwrap(), 0);
        for spec in schema.features() {
            let c = profile.cost(spec.id).unwrap();
            if spec.id == FeatureId(13) {
                continue;
            }
            assert!((100..=300).contains(&c), "cost {c} out of range");
        }
    }

    #[test]
    fn degenerate_range_pins_costs() {
        let schema = schema(4);
        let profile = sample_costs(&schema, 200, 200, &BTreeSet::new(), 1).unwrap();
        assert!(profile.costs().values().all(|&c| c == 200));
    }

    #[test]
    fn same_seed_same_profile() {
        let schema = schema(8);
        let a = sample_costs(&schema, 100, 300, &BTreeSet::new(), 42).unwrap();
        let b = sample_costs(&schema, 100, 300, &BTreeSet::new(), 42).unwrap();
        assert_eq!(a.costs(), b.costs());
        let c = sample_costs(&schema, 100, 300, &BTreeSet::new(), 43).unwrap();
        assert_ne!(a.costs(), c.costs());
    }

    #[test]
    fn unknown_zero_cost_id_is_an_error() {
        let schema = schema(3);
        let exempt: BTreeSet<_> = [FeatureId(7)].into();
        assert!(matches!(
            sample_costs(&schema, 100, 300, &exempt, 0),
            Err(Error::UnknownFeature(FeatureId(7)))
        ));
    }

    #[test]
    fn model_cost_examples() {
        let profile = CostProfile::from_costs(
            [(FeatureId(1), 100), (FeatureId(2), 200), (FeatureId(3), 300)].into(),
        );
        assert_eq!(model_cost(&BTreeSet::new(), &profile).unwrap(), 0);
        assert_eq!(model_cost(&[FeatureId(3)].into(), &profile).unwrap(), 300);
        let all: BTreeSet<_> = [FeatureId(1), FeatureId(2), FeatureId(3)].into();
        assert_eq!(model_cost(&all, &profile).unwrap(), 600);
    }

    #[test]
    fn model_cost_unknown_feature_is_an_error() {
        let profile = CostProfile::from_costs([(FeatureId(1), 10)].into());
        assert!(matches!(
            model_cost(&[FeatureId(2)].into(), &profile),
            Err(Error::UnknownFeature(FeatureId(2)))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let schema = schema(5);
        let exempt: BTreeSet<_> = [FeatureId(2)].into();
        let profile = sample_costs(&schema, 100, 300, &exempt, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("costs.csv");
        profile.write_csv(&path, &schema).unwrap();
        let loaded = CostProfile::read_csv(&path, &schema).unwrap();
        assert_eq!(loaded.costs(), profile.costs());
        assert_eq!(loaded.zero_cost_ids(), profile.zero_cost_ids());
    }

    proptest! {
        #[test]
        fn monotone_and_additive(seed in any::<u64>(), split in 1u16..8) {
            let schema = schema(8);
            let profile = sample_costs(&schema, 100, 300, &BTreeSet::new(), seed).unwrap();
            let a: BTreeSet<FeatureId> = (1..=split).map(FeatureId).collect();
            let b: BTreeSet<FeatureId> = (split + 1..=8).map(FeatureId).collect();
            let all: BTreeSet<FeatureId> = (1..=8).map(FeatureId).collect();
            let ca = model_cost(&a, &profile).unwrap();
            let cb = model_cost(&b, &profile).unwrap();
            let call = model_cost(&all, &profile).unwrap();
            // Monotone under inclusion and additive over disjoint sets.
            prop_assert!(ca <= call);
            prop_assert!(cb <= call);
            prop_assert_eq!(ca + cb, call);
        }
    }
}
