use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::{ExperimentResult, Hyperparameters};
use crate::dataset::Level;
use crate::nn::{ActivationKind, OptimizerKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Epochs,
    BatchSize,
    Neurons,
    Optimizer,
    HiddenActivation,
    OutputActivation,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::Epochs,
        Axis::BatchSize,
        Axis::Neurons,
        Axis::Optimizer,
        Axis::HiddenActivation,
        Axis::OutputActivation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Epochs => "epochs",
            Axis::BatchSize => "batch_size",
            Axis::Neurons => "neurons",
            Axis::Optimizer => "optimizer",
            Axis::HiddenActivation => "hidden_activation",
            Axis::OutputActivation => "output_activation",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Axis::Epochs | Axis::BatchSize | Axis::Neurons)
    }

    /// The option `config` takes on this axis, as a label.
    pub fn label(self, config: &Hyperparameters) -> String {
        match self {
            Axis::Epochs => config.epochs.to_string(),
            Axis::BatchSize => config.batch_size.to_string(),
            Axis::Neurons => config.neurons.to_string(),
            Axis::Optimizer => config.optimizer.name().to_string(),
            Axis::HiddenActivation => config.hidden_activation.name().to_string(),
            Axis::OutputActivation => config.output_activation.name().to_string(),
        }
    }

    /// Position of a categorical label in the default grid order.
    fn canonical_rank(self, label: &str) -> usize {
        let pos = match self {
            Axis::Optimizer => OptimizerKind::defaults().iter().position(|o| o.name() == label),
            Axis::HiddenActivation | Axis::OutputActivation => {
                ActivationKind::ALL.iter().position(|a| a.name() == label)
            }
            _ => None,
        };
        pos.unwrap_or(usize::MAX)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    /// Grid index, when the row came from a run rather than a hand-entered table.
    pub index: Option<usize>,
    pub accuracy: f64,
    pub config: Hyperparameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKTable {
    pub level: Level,
    pub rows: Vec<RankedRow>,
}

/// Successful results by accuracy, highest first; equal accuracies keep grid order.
pub fn top_k(results: &[ExperimentResult], k: usize) -> Vec<RankedRow> {
    let mut ok: Vec<(f64, usize, &Hyperparameters)> = results
        .iter()
        .filter_map(|r| r.accuracy().map(|a| (a, r.index, &r.config)))
        .collect();
    ok.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ok.into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (accuracy, index, config))| RankedRow {
            rank: i + 1,
            index: Some(index),
            accuracy,
            config: config.clone(),
        })
        .collect()
}

pub fn top_k_table(level: Level, results: &[ExperimentResult], k: usize) -> TopKTable {
    TopKTable {
        level,
        rows: top_k(results, k),
    }
}

impl TopKTable {
    /// Fixed-width text with one line per row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>7} {:>6} {:>6} {:>9} {:>12} {:>13}",
            "Output", "Accuracy", "Neurons", "Batch", "Epoch", "Optimiser", "Activation I", "Activation II"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let level = if i == 0 { self.level.name() } else { "" };
            let c = &r.config;
            let _ = writeln!(
                out,
                "{:<12} {:>8.4}% {:>7} {:>6} {:>6} {:>9} {:>12} {:>13}",
                level,
                r.accuracy * 100.0,
                c.neurons,
                c.batch_size,
                c.epochs,
                c.optimizer.name(),
                c.hidden_activation,
                c.output_activation
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionStat {
    pub option: String,
    pub experiments: usize,
    pub successes: usize,
    /// Mean accuracy over the successful experiments; `None` when there were none.
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSummary {
    pub axis: Axis,
    pub options: Vec<OptionStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionSummary {
    /// Set when every result shares one level.
    pub level: Option<Level>,
    pub experiments: usize,
    pub successes: usize,
    /// True when no experiment succeeded; every mean is then absent.
    pub empty: bool,
    pub axes: Vec<AxisSummary>,
}

impl OptionSummary {
    pub fn axis(&self, axis: Axis) -> Option<&AxisSummary> {
        self.axes.iter().find(|a| a.axis == axis)
    }

    pub fn mean(&self, axis: Axis, option: &str) -> Option<f64> {
        self.axis(axis)?
            .options
            .iter()
            .find(|o| o.option == option)?
            .mean_accuracy
    }
}

/// Per-axis, per-option success counts and mean accuracy.
///
/// Options are listed in the order they first appear in `results`, so a
/// grid-ordered result list yields grid-ordered options.
pub fn option_summary(results: &[ExperimentResult]) -> OptionSummary {
    let level = match results.first() {
        Some(first) if results.iter().all(|r| r.level == first.level) => Some(first.level),
        _ => None,
    };
    let successes = results.iter().filter(|r| r.accuracy().is_some()).count();
    let axes = Axis::ALL
        .iter()
        .map(|&axis| {
            let mut order: Vec<String> = Vec::new();
            let mut acc: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();
            for r in results {
                let label = axis.label(&r.config);
                let entry = acc.entry(label.clone()).or_insert_with(|| {
                    order.push(label);
                    (0, 0, 0.0)
                });
                entry.0 += 1;
                if let Some(a) = r.accuracy() {
                    entry.1 += 1;
                    entry.2 += a;
                }
            }
            let options = order
                .into_iter()
                .map(|option| {
                    let (experiments, successes, sum) = acc[&option];
                    OptionStat {
                        option,
                        experiments,
                        successes,
                        mean_accuracy: (successes > 0).then(|| sum / successes as f64),
                    }
                })
                .collect();
            AxisSummary { axis, options }
        })
        .collect();
    OptionSummary {
        level,
        experiments: results.len(),
        successes,
        empty: successes == 0,
        axes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    /// Numeric options whose averaged mean accuracy is within this distance of
    /// the best count as tied; ties go to the larger value.
    pub tie_tolerance: f64,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy { tie_tolerance: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub hyperparameters: Hyperparameters,
    /// One line per axis explaining the choice.
    pub log: Vec<String>,
}

/// Combines top-k tables with per-option summaries into one configuration.
///
/// Optimizer and activations go to the option that appears most often across
/// all table rows; count ties fall to the higher summary mean, then to the
/// default grid order. Epochs, batch size and neurons go to the option with
/// the highest mean accuracy averaged over the summaries; options within
/// `policy.tie_tolerance` of the best, or all options when no summary covers
/// the axis, are tied and resolved toward the larger value.
pub fn select_optimal(
    tables: &[TopKTable],
    summaries: &[OptionSummary],
    policy: &SelectionPolicy,
) -> Result<Selection> {
    let rows: Vec<&RankedRow> = tables.iter().flat_map(|t| &t.rows).collect();
    if rows.is_empty() {
        return Err(Error::Precondition("no successful results to select from".into()));
    }
    let averaged = |axis: Axis, option: &str| -> Option<f64> {
        let means: Vec<f64> = summaries.iter().filter_map(|s| s.mean(axis, option)).collect();
        (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64)
    };
    let mut log = Vec::new();
    let mut chosen: BTreeMap<&'static str, String> = BTreeMap::new();

    for axis in Axis::ALL {
        let label = if axis.is_numeric() {
            let mut candidates: Vec<usize> = rows
                .iter()
                .map(|r| axis.label(&r.config))
                .chain(
                    summaries
                        .iter()
                        .filter_map(|s| s.axis(axis))
                        .flat_map(|a| a.options.iter().map(|o| o.option.clone())),
                )
                .filter_map(|l| l.parse().ok())
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            let scored: Vec<(usize, f64)> = candidates
                .iter()
                .filter_map(|&v| averaged(axis, &v.to_string()).map(|m| (v, m)))
                .collect();
            let (winner, detail) = if scored.is_empty() {
                let v = *candidates.last().expect("rows are non-empty");
                (v, "no summary data; taking the larger value".to_string())
            } else {
                let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
                let tied: Vec<usize> = scored
                    .iter()
                    .filter(|s| s.1 >= best - policy.tie_tolerance)
                    .map(|s| s.0)
                    .collect();
                let v = *tied.iter().max().expect("best is attained");
                let means = scored
                    .iter()
                    .map(|(v, m)| format!("{v}={m:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                let note = if tied.len() > 1 {
                    format!("; {} options within {}, taking the larger", tied.len(), policy.tie_tolerance)
                } else {
                    String::new()
                };
                (v, format!("mean accuracy {means}{note}"))
            };
            log.push(format!("{axis}: {winner} ({detail})"));
            winner.to_string()
        } else {
            let mut counts: Vec<(String, usize)> = Vec::new();
            for r in &rows {
                let l = axis.label(&r.config);
                match counts.iter_mut().find(|c| c.0 == l) {
                    Some(c) => c.1 += 1,
                    None => counts.push((l, 1)),
                }
            }
            counts.sort_by(|a, b| {
                b.1.cmp(&a.1)
                    .then_with(|| {
                        let ma = averaged(axis, &a.0).unwrap_or(f64::NEG_INFINITY);
                        let mb = averaged(axis, &b.0).unwrap_or(f64::NEG_INFINITY);
                        mb.total_cmp(&ma)
                    })
                    .then_with(|| axis.canonical_rank(&a.0).cmp(&axis.canonical_rank(&b.0)))
                    .then_with(|| a.0.cmp(&b.0))
            });
            let tally = counts
                .iter()
                .map(|(l, n)| format!("{l} {n}"))
                .collect::<Vec<_>>()
                .join(", ");
            log.push(format!(
                "{axis}: {} ({} of {} top rows; {tally})",
                counts[0].0,
                counts[0].1,
                rows.len()
            ));
            counts[0].0.clone()
        };
        chosen.insert(axis.name(), label);
    }

    let num = |axis: Axis| -> usize { chosen[axis.name()].parse().expect("numeric label") };
    let pick = |axis: Axis| -> &Hyperparameters {
        let label = &chosen[axis.name()];
        &rows
            .iter()
            .find(|r| &axis.label(&r.config) == label)
            .expect("categorical winner comes from a row")
            .config
    };
    let hyperparameters = Hyperparameters {
        epochs: num(Axis::Epochs),
        batch_size: num(Axis::BatchSize),
        neurons: num(Axis::Neurons),
        optimizer: pick(Axis::Optimizer).optimizer,
        hidden_activation: pick(Axis::HiddenActivation).hidden_activation,
        output_activation: pick(Axis::OutputActivation).output_activation,
    };
    Ok(Selection {
        hyperparameters,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{FailureReason, Outcome};
    use super::*;
    use crate::metrics::{report, ConfusionMatrix};
    use ActivationKind::*;

    fn success(index: usize, config: Hyperparameters, correct: u64) -> ExperimentResult {
        let cm = ConfusionMatrix::from_rows(
            vec!["a".into(), "b".into()],
            &[vec![correct, 100 - correct], vec![0, 0]],
        )
        .unwrap();
        ExperimentResult {
            index,
            config,
            level: Level::Binary,
            seed: 0,
            outcome: Outcome::Success {
                report: report(&cm).unwrap(),
                final_loss: 0.1,
                wall_time_secs: 0.0,
            },
        }
    }

    fn failed(index: usize, config: Hyperparameters) -> ExperimentResult {
        ExperimentResult {
            index,
            config,
            level: Level::Binary,
            seed: 0,
            outcome: Outcome::Failed {
                reason: FailureReason::IncompatibleConfiguration,
                detail: String::new(),
            },
        }
    }

    fn hp(epochs: usize, opt: OptimizerKind, hidden: ActivationKind) -> Hyperparameters {
        Hyperparameters::new(epochs, 10, 100, opt, hidden, Softmax)
    }

    #[test]
    fn top_k_orders_by_accuracy_then_index() {
        let results = vec![
            success(0, hp(1, OptimizerKind::sgd(), Relu), 80),
            failed(1, hp(2, OptimizerKind::sgd(), Relu)),
            success(2, hp(3, OptimizerKind::sgd(), Relu), 90),
            success(3, hp(4, OptimizerKind::sgd(), Relu), 80),
        ];
        let top = top_k(&results, 10);
        let idx: Vec<_> = top.iter().map(|r| r.index.unwrap()).collect();
        assert_eq!(idx, vec![2, 0, 3]);
        assert_eq!(top.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(top_k(&results, 1).len(), 1);
    }

    #[test]
    fn two_result_summary() {
        let results = vec![
            success(0, hp(1, OptimizerKind::adam(), Relu), 90),
            success(1, hp(1, OptimizerKind::sgd(), Relu), 80),
        ];
        let s = option_summary(&results);
        assert_eq!(s.mean(Axis::Optimizer, "adam"), Some(0.9));
        assert_eq!(s.mean(Axis::Optimizer, "sgd"), Some(0.8));
        assert!(!s.empty);
    }

    #[test]
    fn all_failed_summary_is_marked_empty() {
        let results = vec![failed(0, hp(1, OptimizerKind::adam(), Relu))];
        let s = option_summary(&results);
        assert!(s.empty);
        assert_eq!(s.successes, 0);
        assert_eq!(s.mean(Axis::Optimizer, "adam"), None);
        assert_eq!(s.axis(Axis::Optimizer).unwrap().options[0].experiments, 1);
    }

    #[test]
    fn unanimous_tables_select_the_unanimous_option() {
        let cfg = Hyperparameters::new(7, 3, 5, OptimizerKind::rmsprop(), Softplus, Sigmoid);
        let table = TopKTable {
            level: Level::Binary,
            rows: (0..10)
                .map(|i| RankedRow {
                    rank: i + 1,
                    index: None,
                    accuracy: 0.9,
                    config: cfg.clone(),
                })
                .collect(),
        };
        let sel = select_optimal(&[table.clone(), table.clone(), table], &[], &SelectionPolicy::default())
            .unwrap();
        assert_eq!(sel.hyperparameters, cfg);
        assert_eq!(sel.log.len(), 6);
    }

    #[test]
    fn summary_means_decide_numeric_axes() {
        let results = vec![
            success(0, hp(100, OptimizerKind::adam(), Tanh), 95),
            success(1, hp(200, OptimizerKind::adam(), Tanh), 70),
        ];
        let table = top_k_table(Level::Binary, &results, 10);
        let s = option_summary(&results);
        let sel = select_optimal(&[table], &[s], &SelectionPolicy::default()).unwrap();
        assert_eq!(sel.hyperparameters.epochs, 100);
    }

    #[test]
    fn near_equal_means_prefer_the_larger_value() {
        let results = vec![
            success(0, hp(100, OptimizerKind::adam(), Tanh), 90),
            success(1, hp(200, OptimizerKind::adam(), Tanh), 90),
        ];
        let table = top_k_table(Level::Binary, &results, 10);
        let s = option_summary(&results);
        let sel = select_optimal(&[table], &[s], &SelectionPolicy::default()).unwrap();
        assert_eq!(sel.hyperparameters.epochs, 200);
    }

    #[test]
    fn categorical_count_tie_uses_summary_then_grid_order() {
        let results = vec![
            success(0, hp(1, OptimizerKind::rmsprop(), Tanh), 90),
            success(1, hp(1, OptimizerKind::sgd(), Relu), 85),
        ];
        let table = top_k_table(Level::Binary, &results, 10);
        let with_summary =
            select_optimal(std::slice::from_ref(&table), &[option_summary(&results)], &SelectionPolicy::default()).unwrap();
        assert_eq!(with_summary.hyperparameters.optimizer.name(), "rmsprop");
        let without = select_optimal(&[table], &[], &SelectionPolicy::default()).unwrap();
        assert_eq!(without.hyperparameters.optimizer.name(), "sgd");
        assert_eq!(without.hyperparameters.hidden_activation, Relu);
    }

    #[test]
    fn empty_tables_are_rejected() {
        let t = TopKTable {
            level: Level::Binary,
            rows: vec![],
        };
        assert!(select_optimal(&[t], &[], &SelectionPolicy::default()).is_err());
    }
}
