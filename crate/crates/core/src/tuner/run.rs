use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{enumerate_grid, GridSpace, Hyperparameters};
use crate::dataset::{Dataset, LabelSpace, Level};
use crate::metrics::{confusion, report, ClassificationReport};
use crate::nn::{encode_targets, init_network, output_layout, train, Network, TrainConfig};
use crate::par::Execution;
use crate::{Error, Result};

/// A train/test split with class indices for one label level.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub level: Level,
    pub classes: Vec<String>,
    pub train_x: Array2<f64>,
    pub train_y: Vec<usize>,
    pub test_x: Array2<f64>,
    pub test_y: Vec<usize>,
}

impl ExperimentData {
    pub fn new(
        level: Level,
        classes: Vec<String>,
        train_x: Array2<f64>,
        train_y: Vec<usize>,
        test_x: Array2<f64>,
        test_y: Vec<usize>,
    ) -> Result<Self> {
        if train_x.nrows() != train_y.len() || test_x.nrows() != test_y.len() {
            return Err(Error::Dimension("feature rows and labels differ in length".into()));
        }
        if train_x.ncols() != test_x.ncols() {
            return Err(Error::Dimension(format!(
                "train has {} features, test has {}",
                train_x.ncols(),
                test_x.ncols()
            )));
        }
        if train_x.nrows() == 0 || test_x.nrows() == 0 {
            return Err(Error::Precondition("empty train or test split".into()));
        }
        if train_x.ncols() == 0 {
            return Err(Error::EmptyFeatureSpace);
        }
        let k = classes.len();
        if train_y.iter().chain(&test_y).any(|&c| c >= k) {
            return Err(Error::Precondition("class index out of range".into()));
        }
        Ok(ExperimentData {
            level,
            classes,
            train_x,
            train_y,
            test_x,
            test_y,
        })
    }

    /// Encodes both splits against the classes observed in either of them.
    pub fn from_datasets(train: &Dataset, test: &Dataset, level: Level) -> Result<Self> {
        let mut all = train.labels.clone();
        all.extend(test.labels.iter().cloned());
        let space = LabelSpace::observed(level, &all);
        let index = |d: &Dataset| -> Vec<usize> {
            d.labels
                .iter()
                .map(|l| space.index_of(l.at(level)).expect("observed label"))
                .collect()
        };
        Self::new(
            level,
            space.classes.clone(),
            train.features.values.clone(),
            index(train),
            test.features.values.clone(),
            index(test),
        )
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    IncompatibleConfiguration,
    TrainingDiverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Success {
        report: ClassificationReport,
        final_loss: f64,
        wall_time_secs: f64,
    },
    Failed {
        reason: FailureReason,
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// Position of `config` in the enumerated grid.
    pub index: usize,
    pub config: Hyperparameters,
    pub level: Level,
    pub seed: u64,
    pub outcome: Outcome,
}

impl ExperimentResult {
    pub fn report(&self) -> Option<&ClassificationReport> {
        match &self.outcome {
            Outcome::Success { report, .. } => Some(report),
            Outcome::Failed { .. } => None,
        }
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.report().map(|r| r.accuracy_plain)
    }

    pub fn failure(&self) -> Option<FailureReason> {
        match &self.outcome {
            Outcome::Failed { reason, .. } => Some(*reason),
            Outcome::Success { .. } => None,
        }
    }

    /// Equality that ignores wall-clock time.
    pub fn same_result(&self, other: &ExperimentResult) -> bool {
        let strip = |r: &ExperimentResult| {
            let mut r = r.clone();
            if let Outcome::Success { wall_time_secs, .. } = &mut r.outcome {
                *wall_time_secs = 0.0;
            }
            r
        };
        strip(self) == strip(other)
    }
}

/// Trains and evaluates the one-hidden-layer network described by `config`.
///
/// Both the weight initialization and the batch shuffling are seeded from
/// `seed`, so every configuration starts from the same random stream.
pub fn run_experiment(
    index: usize,
    config: &Hyperparameters,
    data: &ExperimentData,
    seed: u64,
) -> ExperimentResult {
    let outcome = match train_and_score(config, data, seed) {
        Ok(outcome) => outcome,
        Err(Error::TrainingDiverged { epoch }) => Outcome::Failed {
            reason: FailureReason::TrainingDiverged,
            detail: format!("loss became non-finite in epoch {epoch}"),
        },
        Err(Error::NonFinite { .. }) => Outcome::Failed {
            reason: FailureReason::TrainingDiverged,
            detail: "non-finite predictions on the test split".into(),
        },
        Err(e) => Outcome::Failed {
            reason: FailureReason::IncompatibleConfiguration,
            detail: e.to_string(),
        },
    };
    ExperimentResult {
        index,
        config: config.clone(),
        level: data.level,
        seed,
        outcome,
    }
}

fn train_and_score(config: &Hyperparameters, data: &ExperimentData, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let (net, final_loss) = fit(config, data, seed)?;
    let preds = net.predict_classes(data.test_x.view())?;
    let cm = confusion(&preds, &data.test_y, &data.classes)?;
    Ok(Outcome::Success {
        report: report(&cm)?,
        final_loss,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Trains a network for `config` on the training split and returns it with its last epoch loss.
pub fn fit(config: &Hyperparameters, data: &ExperimentData, seed: u64) -> Result<(Network, f64)> {
    let (output_dim, loss) = output_layout(config.output_activation, data.n_classes())?;
    if config.batch_size > data.train_x.nrows() {
        return Err(Error::IncompatibleConfiguration(format!(
            "batch size {} exceeds {} training rows",
            config.batch_size,
            data.train_x.nrows()
        )));
    }
    let mut net = init_network(
        data.train_x.ncols(),
        &[config.neurons],
        output_dim,
        config.hidden_activation,
        config.output_activation,
        seed,
    )?;
    let targets = encode_targets(&data.train_y, output_dim)?;
    let cfg = TrainConfig {
        epochs: config.epochs,
        batch_size: config.batch_size,
        shuffle_seed: seed,
        loss,
    };
    let history = train(&mut net, data.train_x.view(), targets.view(), &cfg, &config.optimizer)?;
    let final_loss = history.epochs.last().map_or(f64::NAN, |e| e.loss);
    Ok((net, final_loss))
}

/// Runs every grid point and returns the results in grid order.
pub fn run_grid(
    space: &GridSpace,
    data: &ExperimentData,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ExperimentResult>> {
    run_grid_resumable(space, data, seed, exec, Vec::new(), &|_| {})
}

/// Like [`run_grid`], skipping grid points already present in `done`.
///
/// `on_result` sees each newly finished experiment as soon as it completes,
/// possibly from a worker thread; callers use it to append to a ledger.
/// Entries of `done` must come from the same grid, level and seed.
pub fn run_grid_resumable(
    space: &GridSpace,
    data: &ExperimentData,
    seed: u64,
    exec: Execution,
    done: Vec<ExperimentResult>,
    on_result: &(dyn Fn(&ExperimentResult) + Sync),
) -> Result<Vec<ExperimentResult>> {
    space.validate()?;
    let grid = enumerate_grid(space);
    let mut slots: Vec<Option<ExperimentResult>> = vec![None; grid.len()];
    for r in done {
        let matches = grid.get(r.index) == Some(&r.config) && r.level == data.level && r.seed == seed;
        if !matches {
            return Err(Error::Precondition(format!(
                "prior result {} does not belong to this grid, level and seed",
                r.index
            )));
        }
        let index = r.index;
        slots[index] = Some(r);
    }
    let pending: Vec<usize> = (0..grid.len()).filter(|&i| slots[i].is_none()).collect();
    let fresh = exec.map(&pending, |_, &i| {
        let r = run_experiment(i, &grid[i], data, seed);
        on_result(&r);
        r
    });
    for r in fresh {
        let index = r.index;
        slots[index] = Some(r);
    }
    Ok(slots.into_iter().map(|s| s.expect("every slot filled")).collect())
}
