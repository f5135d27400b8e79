use std::collections::BTreeSet;

use crate::data::{FeatureId, FeatureKind, FeatureSchema, RawDataset, RawValue};
use crate::{Error, Result};

/// Numeric matrix ready for training, plus the map back to logical features.
///
/// Active categorical features own one column per declared category; active
/// integer features own a single min-max scaled column. Inactive features own
/// no columns. Columns are ordered by ascending feature id, categories in
/// declared order.
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    matrix: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    labels: Vec<u8>,
    column_map: Vec<FeatureId>,
    active_features: BTreeSet<FeatureId>,
}

impl EncodedDataset {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Owning feature of each input column.
    pub fn column_map(&self) -> &[FeatureId] {
        &self.column_map
    }

    pub fn active_features(&self) -> &BTreeSet<FeatureId> {
        &self.active_features
    }

    /// Input-column indices owned by `feature`, ascending.
    pub fn columns_of(&self, feature: FeatureId) -> Vec<usize> {
        self.column_map
            .iter()
            .enumerate()
            .filter_map(|(col, &f)| (f == feature).then_some(col))
            .collect()
    }

    /// Copies out the rows selected by `keep` (in original order).
    pub fn select_rows(&self, keep: &[usize]) -> EncodedDataset {
        let mut matrix = Vec::with_capacity(keep.len() * self.n_cols);
        let mut labels = Vec::with_capacity(keep.len());
        for &i in keep {
            matrix.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        EncodedDataset {
            matrix,
            n_rows: keep.len(),
            n_cols: self.n_cols,
            labels,
            column_map: self.column_map.clone(),
            active_features: self.active_features.clone(),
        }
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }
}

/// One-hot encodes `raw` for the given active feature set.
///
/// Integer features are min-max scaled to [0, 1] using the statistics of the
/// dataset being encoded; a constant column scales to all zeros.
pub fn encode(
    raw: &RawDataset,
    schema: &FeatureSchema,
    active: &BTreeSet<FeatureId>,
) -> Result<EncodedDataset> {
    for &id in active {
        schema.feature(id)?;
    }

    // Column layout and integer scaling statistics.
    let mut column_map = Vec::new();
    let mut int_stats: Vec<Option<(i64, i64)>> = vec![None; schema.n_features()];
    for spec in schema.features() {
        if !active.contains(&spec.id) {
            continue;
        }
        for _ in 0..spec.kind.n_columns() {
            column_map.push(spec.id);
        }
        if spec.kind == FeatureKind::Integer {
            let idx = spec.id.0 as usize - 1;
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            for rec in raw.records() {
                if let RawValue::Integer(v) = rec.values[idx] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            int_stats[idx] = Some((lo, hi));
        }
    }

    let n_cols = column_map.len();
    let n_rows = raw.n_rows();
    let mut matrix = vec![0.0; n_rows * n_cols];
    let mut labels = Vec::with_capacity(n_rows);

    for (r, rec) in raw.records().iter().enumerate() {
        let row = &mut matrix[r * n_cols..(r + 1) * n_cols];
        let mut col = 0usize;
        for spec in schema.features() {
            if !active.contains(&spec.id) {
                continue;
            }
            let value = rec.values[spec.id.0 as usize - 1];
            match (&spec.kind, value) {
                (FeatureKind::Categorical { categories }, RawValue::Category(idx)) => {
                    let idx = idx as usize;
                    if idx >= categories.len() {
                        return Err(Error::UnknownCategory {
                            feature: spec.name.clone(),
                            value: format!("#{idx}"),
                        });
                    }
                    row[col + idx] = 1.0;
                    col += categories.len();
                }
                (FeatureKind::Integer, RawValue::Integer(v)) => {
                    let (lo, hi) = int_stats[spec.id.0 as usize - 1].expect("stats computed");
                    row[col] = if hi > lo {
                        (v - lo) as f64 / (hi - lo) as f64
                    } else {
                        0.0
                    };
                    col += 1;
                }
                (FeatureKind::Categorical { .. }, RawValue::Integer(_))
                | (FeatureKind::Integer, RawValue::Category(_)) => {
                    return Err(Error::UnknownCategory {
                        feature: spec.name.clone(),
                        value: "value kind does not match feature kind".into(),
                    })
                }
            }
        }
        labels.push(rec.label);
    }

    Ok(EncodedDataset {
        matrix,
        n_rows,
        n_cols,
        labels,
        column_map,
        active_features: active.clone(),
    })
}
