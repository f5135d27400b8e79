use std::path::Path;

use crate::data::{FeatureKind, FeatureSchema};
use crate::{Error, Result};

/// One parsed cell, aligned with the schema's feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawValue {
    /// Index into the feature's declared category list.
    Category(u16),
    Integer(i64),
}

#[derive(Debug, Clone)]
pub struct RawRecord {
    /// One value per schema feature, in schema order.
    pub values: Vec<RawValue>,
    /// 0 or 1; 1 is the second declared label value.
    pub label: u8,
}

/// Typed records after preprocessing. Rows with missing or unparseable cells
/// have been removed and counted.
#[derive(Debug, Clone)]
pub struct RawDataset {
    records: Vec<RawRecord>,
    dropped_rows: usize,
}

impl RawDataset {
    pub fn from_records(records: Vec<RawRecord>) -> Self {
        Self { records, dropped_rows: 0 }
    }

    pub fn records(&self) -> &[RawRecord] {
        &self.records
    }

    pub fn n_rows(&self) -> usize {
        self.records.len()
    }

    /// Rows removed as outliers while loading.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }
}

/// Reads a CSV file against a schema.
///
/// The header row must contain every schema feature name and the label
/// column; extra columns are ignored. Rows with an empty cell, an integer
/// cell that does not parse, a categorical cell outside the declared
/// categories, or an unrecognized label are dropped and counted.
pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<RawDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, e))
            }
            _ => Error::csv(path, e),
        })?;

    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let header_index = |name: &str| headers.iter().position(|h| h == name);

    let label_col = header_index(schema.label_name())
        .ok_or_else(|| Error::LabelColumnMissing(schema.label_name().to_string()))?;
    let mut feature_cols = Vec::with_capacity(schema.n_features());
    for spec in schema.features() {
        let col = header_index(&spec.name).ok_or_else(|| Error::HeaderMismatch(spec.name.clone()))?;
        feature_cols.push(col);
    }

    let mut records = Vec::new();
    let mut dropped_rows = 0usize;
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        match parse_row(&row, schema, &feature_cols, label_col) {
            Some(record) => records.push(record),
            None => dropped_rows += 1,
        }
    }
    Ok(RawDataset { records, dropped_rows })
}

fn parse_row(
    row: &csv::StringRecord,
    schema: &FeatureSchema,
    feature_cols: &[usize],
    label_col: usize,
) -> Option<RawRecord> {
    let label_cell = row.get(label_col)?;
    let label_values = schema.label_values();
    let label = if label_cell == label_values[0] {
        0
    } else if label_cell == label_values[1] {
        1
    } else {
        return None;
    };

    let mut values = Vec::with_capacity(schema.n_features());
    for (spec, &col) in schema.features().iter().zip(feature_cols) {
        let cell = row.get(col)?;
        if cell.is_empty() {
            return None;
        }
        let value = match &spec.kind {
            FeatureKind::Categorical { categories } => {
                let idx = categories.iter().position(|c| c == cell)?;
                RawValue::Category(idx as u16)
            }
            FeatureKind::Integer => RawValue::Integer(cell.parse().ok()?),
        };
        values.push(value);
    }
    Some(RawRecord { values, label })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureId, FeatureSpec};
    use std::io::Write;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                FeatureSpec {
                    id: FeatureId(1),
                    name: "Itching".into(),
                    kind: FeatureKind::Categorical {
                        categories: vec!["Yes".into(), "No".into()],
                    },
                },
                FeatureSpec { id: FeatureId(2), name: "Age".into(), kind: FeatureKind::Integer },
            ],
            "Diabetes",
            ["No".into(), "Yes".into()],
        )
        .unwrap()
    }

    fn write_csv(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_clean_rows() {
        let f = write_csv("Itching,Age,Diabetes\nYes,40,Yes\nNo,31,No\n");
        let data = load_csv(f.path(), &schema()).unwrap();
        assert_eq!(data.n_rows(), 2);
        assert_eq!(data.dropped_rows(), 0);
        assert_eq!(data.records()[0].label, 1);
        assert_eq!(data.records()[0].values[0], RawValue::Category(0));
        assert_eq!(data.records()[1].values[1], RawValue::Integer(31));
    }

    #[test]
    fn ignores_extra_columns() {
        let f = write_csv("Patient,Itching,Age,Diabetes\np1,Yes,40,Yes\n");
        let data = load_csv(f.path(), &schema()).unwrap();
        assert_eq!(data.n_rows(), 1);
    }

    #[test]
    fn drops_row_with_empty_label() {
        let f = write_csv("Itching,Age,Diabetes\nYes,40,\nNo,31,No\n");
        let data = load_csv(f.path(), &schema()).unwrap();
        assert_eq!(data.n_rows(), 1);
        assert_eq!(data.dropped_rows(), 1);
    }

    #[test]
    fn drops_row_with_bad_integer_and_bad_category() {
        let f = write_csv("Itching,Age,Diabetes\nYes,forty,Yes\nMaybe,31,No\nNo,28,No\n");
        let data = load_csv(f.path(), &schema()).unwrap();
        assert_eq!(data.n_rows(), 1);
        assert_eq!(data.dropped_rows(), 2);
    }

    #[test]
    fn missing_feature_column_is_an_error() {
        let f = write_csv("Itching,Diabetes\nYes,Yes\n");
        let err = load_csv(f.path(), &schema()).unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch(name) if name == "Age"));
    }

    #[test]
    fn missing_label_column_is_an_error() {
        let f = write_csv("Itching,Age\nYes,40\n");
        let err = load_csv(f.path(), &schema()).unwrap_err();
        assert!(matches!(err, Error::LabelColumnMissing(_)));
    }

    #[test]
    fn missing_file_is_an_error() {
        let err = load_csv("/nonexistent/nope.csv", &schema()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
