use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::iotid20;
use super::{HierLabel, Level};
use crate::{Error, Result};

/// The ordered class vocabulary of one label level.
///
/// Classes are sorted alphabetically so one-hot indices are reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace {
    pub level: Level,
    pub classes: Vec<String>,
}

impl LabelSpace {
    /// The IoTID20 vocabulary: 2 binary, 5 category or 9 subcategory classes.
    pub fn iotid20(level: Level) -> Self {
        let names = iotid20::CLASSES.iter().map(|c| match level {
            Level::Binary => c.0,
            Level::Category => c.1,
            Level::Subcategory => c.2,
        });
        Self::from_names(level, names)
    }

    pub fn from_names<'a>(level: Level, names: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<&str> = names.into_iter().collect();
        LabelSpace {
            level,
            classes: set.into_iter().map(str::to_owned).collect(),
        }
    }

    /// The classes present in `labels` at `level`.
    pub fn observed(level: Level, labels: &[HierLabel]) -> Self {
        Self::from_names(level, labels.iter().map(|l| l.at(level)))
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.classes.binary_search_by(|c| c.as_str().cmp(name)).ok()
    }
}

/// Per-class support at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelHierarchy {
    pub level: Level,
    pub classes: Vec<String>,
    pub counts: Vec<usize>,
}

impl LabelHierarchy {
    pub fn count_of(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class).map(|i| self.counts[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedLabels {
    pub indices: Vec<usize>,
    pub one_hot: Array2<f64>,
    pub hierarchy: LabelHierarchy,
}

/// Maps each record's label at `space.level` to a class index and one-hot row.
pub fn encode_labels(labels: &[HierLabel], space: &LabelSpace) -> Result<EncodedLabels> {
    let k = space.len();
    let mut indices = Vec::with_capacity(labels.len());
    let mut counts = vec![0usize; k];
    let mut one_hot = Array2::zeros((labels.len(), k));
    for (row, label) in labels.iter().enumerate() {
        let name = label.at(space.level);
        let idx = space.index_of(name).ok_or_else(|| Error::Labeling {
            row,
            label: name.to_owned(),
        })?;
        indices.push(idx);
        counts[idx] += 1;
        one_hot[[row, idx]] = 1.0;
    }
    Ok(EncodedLabels {
        indices,
        one_hot,
        hierarchy: LabelHierarchy {
            level: space.level,
            classes: space.classes.clone(),
            counts,
        },
    })
}

/// Checks that each subcategory belongs to one category and each category to
/// one binary label.
pub fn check_hierarchy(labels: &[HierLabel]) -> Result<()> {
    let mut sub_to_cat: BTreeMap<&str, &str> = BTreeMap::new();
    let mut cat_to_bin: BTreeMap<&str, &str> = BTreeMap::new();
    for (row, l) in labels.iter().enumerate() {
        let cat = *sub_to_cat.entry(&l.subcategory).or_insert(&l.category);
        let bin = *cat_to_bin.entry(&l.category).or_insert(&l.binary);
        if cat != l.category || bin != l.binary {
            return Err(Error::Schema(format!(
                "row {row}: label hierarchy violated ({} / {} / {})",
                l.binary, l.category, l.subcategory
            )));
        }
    }
    Ok(())
}
