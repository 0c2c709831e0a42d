//! A trained model with everything needed to apply it to feature rows.

use std::path::Path;

use anyhow::Result;
use mamid_core::dataset::{Level, MinMaxScaler};
use mamid_core::explain::{LinearModel, Predictor};
use mamid_core::nn::{Network, NetworkFile};
use mamid_core::tuner::Hyperparameters;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::layout::read_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Network(NetworkFile),
    Linear(LinearModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub level: Level,
    pub classes: Vec<String>,
    /// Input columns, in model order.
    pub features: Vec<String>,
    /// Applied to preprocessed feature values before the model.
    pub scaler: MinMaxScaler,
    #[serde(default)]
    pub hyperparameters: Option<Hyperparameters>,
    /// Split file the model was trained on, relative to the output directory.
    #[serde(default)]
    pub split: Option<String>,
    pub model: ModelSpec,
}

pub enum LoadedModel {
    Network(Network),
    Linear(LinearModel),
}

impl ModelBundle {
    pub fn load(path: &Path) -> Result<Self> {
        let bundle: ModelBundle = read_json(path)?;
        if bundle.scaler.min.len() != bundle.features.len() {
            return Err(mamid_core::Error::Schema("scaler width differs from the feature list".into()).into());
        }
        Ok(bundle)
    }

    pub fn instantiate(&self) -> Result<LoadedModel> {
        Ok(match &self.model {
            ModelSpec::Network(file) => LoadedModel::Network(Network::try_from(file.clone())?),
            ModelSpec::Linear(m) => LoadedModel::Linear(m.clone()),
        })
    }

    /// Output names: the classes when the model has one output per class.
    pub fn output_names(&self, model: &LoadedModel) -> Vec<String> {
        let n = model.n_outputs();
        if n == self.classes.len() {
            self.classes.clone()
        } else {
            (0..n).map(|i| format!("output_{i}")).collect()
        }
    }
}

impl Predictor for LoadedModel {
    fn n_outputs(&self) -> usize {
        match self {
            LoadedModel::Network(n) => n.n_outputs(),
            LoadedModel::Linear(m) => m.n_outputs(),
        }
    }

    fn predict(&self, rows: ArrayView2<'_, f64>) -> mamid_core::Result<Array2<f64>> {
        match self {
            LoadedModel::Network(n) => n.predict(rows),
            LoadedModel::Linear(m) => m.predict(rows),
        }
    }
}
