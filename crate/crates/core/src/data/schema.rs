use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Identifier of a logical input feature. Ids are small integers, unique and
/// contiguous from 1 within a schema.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FeatureId(pub u16);

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How a feature is represented in the raw CSV and in the encoded matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureKind {
    /// Expands to one column per category under one-hot encoding.
    Categorical { categories: Vec<String> },
    /// A single column, min-max scaled to [0, 1].
    Integer,
}

impl FeatureKind {
    /// Number of encoded columns this feature owns.
    pub fn n_columns(&self) -> usize {
        match self {
            FeatureKind::Categorical { categories } => categories.len(),
            FeatureKind::Integer => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureSpec {
    pub id: FeatureId,
    pub name: String,
    pub kind: FeatureKind,
}

/// Declares the features, label column, and label values of a dataset.
///
/// Features are kept sorted by id; ids are validated to be unique and
/// contiguous from 1, so `features()[id.0 - 1]` is always the spec for `id`.
#[derive(Debug, Clone)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
    label_name: String,
    label_values: [String; 2],
}

impl FeatureSchema {
    pub fn new(
        mut features: Vec<FeatureSpec>,
        label_name: impl Into<String>,
        label_values: [String; 2],
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidSchema("schema declares no features".into()));
        }
        features.sort_by_key(|f| f.id);
        for (i, f) in features.iter().enumerate() {
            let expected = FeatureId(i as u16 + 1);
            if f.id != expected {
                return Err(Error::InvalidSchema(format!(
                    "feature ids must be unique and contiguous from 1; \
                     found id {} where {} was expected",
                    f.id, expected
                )));
            }
            if let FeatureKind::Categorical { categories } = &f.kind {
                if categories.len() < 2 {
                    return Err(Error::InvalidSchema(format!(
                        "categorical feature '{}' lists {} categories; at least 2 required",
                        f.name,
                        categories.len()
                    )));
                }
                let unique: BTreeSet<&String> = categories.iter().collect();
                if unique.len() != categories.len() {
                    return Err(Error::InvalidSchema(format!(
                        "categorical feature '{}' lists duplicate categories",
                        f.name
                    )));
                }
            }
        }
        let names: BTreeSet<&String> = features.iter().map(|f| &f.name).collect();
        if names.len() != features.len() {
            return Err(Error::InvalidSchema("feature names must be unique".into()));
        }
        let label_name = label_name.into();
        if label_values[0] == label_values[1] {
            return Err(Error::InvalidSchema(
                "the two label values must be distinct".into(),
            ));
        }
        Ok(Self { features, label_name, label_values })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    /// `[negative, positive]`: the value at index 1 is encoded as class 1.
    pub fn label_values(&self) -> &[String; 2] {
        &self.label_values
    }

    pub fn feature(&self, id: FeatureId) -> Result<&FeatureSpec> {
        self.features
            .get((id.0 as usize).wrapping_sub(1))
            .filter(|f| f.id == id)
            .ok_or(Error::UnknownFeature(id))
    }

    pub fn feature_by_name(&self, name: &str) -> Option<&FeatureSpec> {
        self.features.iter().find(|f| f.name == name)
    }

    /// All feature ids, ascending.
    pub fn all_ids(&self) -> BTreeSet<FeatureId> {
        self.features.iter().map(|f| f.id).collect()
    }
}

/// A schema file: the [`FeatureSchema`] plus the ids declared free to measure.
#[derive(Debug, Clone)]
pub struct SchemaFile {
    pub schema: FeatureSchema,
    pub zero_cost_ids: BTreeSet<FeatureId>,
}

#[derive(Deserialize)]
struct SchemaDoc {
    label: String,
    label_values: [String; 2],
    #[serde(default)]
    zero_cost: Vec<u16>,
    features: Vec<FeatureDoc>,
}

#[derive(Deserialize)]
struct FeatureDoc {
    id: u16,
    name: String,
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    categories: Option<Vec<String>>,
}

impl SchemaFile {
    /// Loads a schema from its TOML document form (see the repository README
    /// for the grammar).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: SchemaDoc = toml::from_str(text)
            .map_err(|e| Error::InvalidSchema(format!("schema file does not parse: {e}")))?;
        let mut features = Vec::with_capacity(doc.features.len());
        for f in doc.features {
            let kind = match (f.kind.as_deref(), f.categories) {
                (Some("integer"), None) => FeatureKind::Integer,
                (Some("categorical") | None, Some(categories)) => {
                    FeatureKind::Categorical { categories }
                }
                (Some("integer"), Some(_)) => {
                    return Err(Error::InvalidSchema(format!(
                        "feature '{}' is integer but lists categories",
                        f.name
                    )))
                }
                (Some(other), _) => {
                    return Err(Error::InvalidSchema(format!(
                        "feature '{}' has unknown kind '{other}'",
                        f.name
                    )))
                }
                (None, None) => {
                    return Err(Error::InvalidSchema(format!(
                        "feature '{}' must list categories or set kind = \"integer\"",
                        f.name
                    )))
                }
            };
            features.push(FeatureSpec { id: FeatureId(f.id), name: f.name, kind });
        }
        let schema = FeatureSchema::new(features, doc.label, doc.label_values)?;
        let zero_cost_ids: BTreeSet<FeatureId> = doc.zero_cost.iter().map(|&i| FeatureId(i)).collect();
        for &id in &zero_cost_ids {
            schema.feature(id)?;
        }
        Ok(Self { schema, zero_cost_ids })
    }
}
