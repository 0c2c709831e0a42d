//! Hyperparameter grid search and option selection.
//!
//! [`enumerate_grid`] lays out every combination of a [`GridSpace`];
//! [`run_grid`] trains one network per point and keeps failures as
//! structured outcomes instead of errors. [`top_k`] and [`option_summary`]
//! rank and aggregate the results, and [`select_optimal`] combines them into
//! a single configuration.

mod ledger;
mod run;
mod select;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::nn::{ActivationKind, OptimizerKind};
use crate::{Error, Result};

pub use ledger::{
    read_ledger, read_top_k_csv, scatter_csv, summary_csv, top_k_csv, write_ledger, LedgerWriter,
};
pub use run::{
    fit, run_experiment, run_grid, run_grid_resumable, ExperimentData, ExperimentResult, FailureReason,
    Outcome,
};
pub use select::{
    option_summary, select_optimal, top_k, top_k_table, Axis, AxisSummary, OptionStat,
    OptionSummary, RankedRow, Selection, SelectionPolicy, TopKTable,
};

/// One grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epochs: usize,
    pub batch_size: usize,
    pub neurons: usize,
    pub optimizer: OptimizerKind,
    pub hidden_activation: ActivationKind,
    pub output_activation: ActivationKind,
}

impl Hyperparameters {
    pub fn new(
        epochs: usize,
        batch_size: usize,
        neurons: usize,
        optimizer: OptimizerKind,
        hidden_activation: ActivationKind,
        output_activation: ActivationKind,
    ) -> Self {
        Hyperparameters {
            epochs,
            batch_size,
            neurons,
            optimizer,
            hidden_activation,
            output_activation,
        }
    }
}

impl fmt::Display for Hyperparameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epochs={} batch={} neurons={} optimizer={} hidden={} output={}",
            self.epochs,
            self.batch_size,
            self.neurons,
            self.optimizer.name(),
            self.hidden_activation,
            self.output_activation
        )
    }
}

/// Options per axis. Enumeration order is lexicographic with epochs outermost
/// and output activation innermost, each axis in the order listed here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpace {
    pub epochs: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub neurons: Vec<usize>,
    #[serde(deserialize_with = "optimizers_from_names_or_objects")]
    pub optimizers: Vec<OptimizerKind>,
    pub hidden_activations: Vec<ActivationKind>,
    pub output_activations: Vec<ActivationKind>,
}

impl Default for GridSpace {
    fn default() -> Self {
        GridSpace {
            epochs: vec![100, 200],
            batch_sizes: vec![10, 100],
            neurons: vec![100, 200],
            optimizers: OptimizerKind::defaults().to_vec(),
            hidden_activations: ActivationKind::ALL.to_vec(),
            output_activations: ActivationKind::ALL.to_vec(),
        }
    }
}

impl GridSpace {
    pub fn cardinality(&self) -> usize {
        self.epochs.len()
            * self.batch_sizes.len()
            * self.neurons.len()
            * self.optimizers.len()
            * self.hidden_activations.len()
            * self.output_activations.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cardinality() == 0 {
            return Err(Error::Precondition("grid space has an empty axis".into()));
        }
        let zero = |v: &[usize]| v.contains(&0);
        if zero(&self.epochs) || zero(&self.batch_sizes) || zero(&self.neurons) {
            return Err(Error::Precondition(
                "epochs, batch sizes and neurons must be >= 1".into(),
            ));
        }
        for opt in &self.optimizers {
            opt.validate()?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let space: GridSpace = serde_json::from_str(&text)?;
        space.validate()?;
        Ok(space)
    }
}

/// Accepts `"adam"` as shorthand for the optimizer with default settings.
fn optimizers_from_names_or_objects<'de, D>(de: D) -> std::result::Result<Vec<OptimizerKind>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Name(String),
        Full(OptimizerKind),
    }
    Vec::<Entry>::deserialize(de)?
        .into_iter()
        .map(|e| match e {
            Entry::Name(n) => n.parse().map_err(serde::de::Error::custom),
            Entry::Full(k) => Ok(k),
        })
        .collect()
}

/// Every point of `space` in lexicographic order.
pub fn enumerate_grid(space: &GridSpace) -> Vec<Hyperparameters> {
    let mut out = Vec::with_capacity(space.cardinality());
    for &epochs in &space.epochs {
        for &batch_size in &space.batch_sizes {
            for &neurons in &space.neurons {
                for optimizer in &space.optimizers {
                    for &hidden in &space.hidden_activations {
                        for &output in &space.output_activations {
                            out.push(Hyperparameters::new(
                                epochs,
                                batch_size,
                                neurons,
                                *optimizer,
                                hidden,
                                output,
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}
