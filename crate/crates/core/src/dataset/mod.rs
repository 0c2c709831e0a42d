//! Flow records, preprocessing, hierarchical labels and stratified sampling.

pub mod iotid20;
mod io;
mod labels;
mod preprocess;
mod split;
mod synth;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use io::{load_csv, read_csv, write_csv, MalformedCell};
pub use labels::{check_hierarchy, encode_labels, EncodedLabels, LabelHierarchy, LabelSpace};
pub use preprocess::{
    preprocess, ColumnFill, ColumnSanitization, DropReason, DroppedColumn, MinMaxScaler,
    Preprocessed, Provenance,
};
pub use split::{allocate, split_indices, stratified_indices, stratified_split, stratified_subset};
pub use synth::{synth_generate, SynthClass, SynthSpec};

/// Granularity of the classification target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Binary,
    Category,
    Subcategory,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Binary, Level::Category, Level::Subcategory];

    pub fn name(self) -> &'static str {
        match self {
            Level::Binary => "binary",
            Level::Category => "category",
            Level::Subcategory => "subcategory",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Level::Binary),
            "category" => Ok(Level::Category),
            "subcategory" => Ok(Level::Subcategory),
            other => Err(Error::Precondition(format!("unknown level {other:?}"))),
        }
    }
}

/// The three nested labels of one flow.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HierLabel {
    pub binary: String,
    pub category: String,
    pub subcategory: String,
}

impl HierLabel {
    pub fn new(binary: &str, category: &str, subcategory: &str) -> Self {
        HierLabel {
            binary: binary.to_owned(),
            category: category.to_owned(),
            subcategory: subcategory.to_owned(),
        }
    }

    pub fn at(&self, level: Level) -> &str {
        match level {
            Level::Binary => &self.binary,
            Level::Category => &self.category,
            Level::Subcategory => &self.subcategory,
        }
    }
}

/// One flow: numeric feature values aligned with [`FlowTable::columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub values: Vec<f64>,
    pub label: HierLabel,
}

/// Parsed flow records sharing one header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowTable {
    /// Numeric feature columns.
    pub columns: Vec<String>,
    pub records: Vec<FlowRecord>,
    /// Columns whose cells are not numbers (addresses, timestamps); not loaded.
    pub text_columns: Vec<String>,
    pub malformed: Vec<MalformedCell>,
}

impl FlowTable {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Feature value by name, the map-like view of a record.
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let col = self.column_index(column)?;
        self.records.get(row).map(|r| r.values[col])
    }

    pub fn labels(&self) -> Vec<HierLabel> {
        self.records.iter().map(|r| r.label.clone()).collect()
    }
}

/// Numeric feature matrix with the column names and the scaling that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub values: Array2<f64>,
    pub scaling: MinMaxScaler,
}

/// Preprocessed features paired with their labels, row for row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub labels: Vec<HierLabel>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.columns.len()
    }

    pub fn labels_at(&self, level: Level) -> Vec<&str> {
        self.labels.iter().map(|l| l.at(level)).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: FeatureMatrix {
                columns: self.features.columns.clone(),
                values: self.features.values.select(Axis(0), indices),
                scaling: self.features.scaling.clone(),
            },
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Refits min-max scaling on `self` and applies the same map to `other`.
    ///
    /// Used to keep scaling parameters learned on the training split only.
    pub fn rescale_pair(&self, other: &Dataset) -> (Dataset, Dataset) {
        let scaler = MinMaxScaler::fit(&self.features.values);
        let apply = |d: &Dataset| Dataset {
            features: FeatureMatrix {
                columns: d.features.columns.clone(),
                values: scaler.transform(&d.features.values),
                scaling: scaler.clone(),
            },
            labels: d.labels.clone(),
        };
        (apply(self), apply(other))
    }

    /// Wraps already-preprocessed records without rescaling them.
    pub fn from_flow_table(table: &FlowTable) -> Result<Dataset> {
        if let Some(cell) = table.malformed.first() {
            return Err(Error::Schema(format!(
                "non-numeric cell {:?} in column {} row {}",
                cell.text, cell.column, cell.row
            )));
        }
        if let Some(col) = table.text_columns.first() {
            return Err(Error::Schema(format!("text column {col} in a feature file")));
        }
        let width = table.columns.len();
        if width == 0 {
            return Err(Error::EmptyFeatureSpace);
        }
        let values = Array2::from_shape_fn((table.len(), width), |(r, c)| table.records[r].values[c]);
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                context: "feature file".into(),
            });
        }
        Ok(Dataset {
            features: FeatureMatrix {
                columns: table.columns.clone(),
                values,
                scaling: MinMaxScaler::identity(width),
            },
            labels: table.labels(),
        })
    }

    pub fn to_flow_table(&self) -> FlowTable {
        FlowTable {
            columns: self.features.columns.clone(),
            records: self
                .features
                .values
                .axis_iter(Axis(0))
                .zip(&self.labels)
                .map(|(row, label)| FlowRecord {
                    values: row.to_vec(),
                    label: label.clone(),
                })
                .collect(),
            text_columns: Vec::new(),
            malformed: Vec::new(),
        }
    }
}
