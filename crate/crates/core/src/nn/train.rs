use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{backward_with_output, compute_loss, LossKind};
use super::network::{argmax_rows, Network};
use super::optimizer::{optimizer_step, OptimizerKind, OptimizerState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub loss: LossKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Sample-weighted mean of the batch losses seen during the epoch.
    pub loss: f64,
    /// Accuracy of the predictions made during the epoch (before each update).
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochStats>,
    pub steps: u64,
}

/// Trains `net` in place with mini-batch updates.
///
/// Runs `epochs × ceil(n / batch_size)` optimizer steps, reshuffling the rows
/// every epoch from `cfg.shuffle_seed`. `targets` must already be encoded for
/// the output layer (one 0/1 column for a sigmoid unit, one-hot otherwise).
pub fn train(
    net: &mut Network,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    cfg: &TrainConfig,
    opt: &OptimizerKind,
) -> Result<History> {
    let n = inputs.nrows();
    if cfg.epochs == 0 {
        return Err(Error::Precondition("epochs must be >= 1".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("empty training set".into()));
    }
    if cfg.batch_size == 0 || cfg.batch_size > n {
        return Err(Error::Precondition(format!(
            "batch size {} outside 1..={n}",
            cfg.batch_size
        )));
    }
    if targets.nrows() != n || targets.ncols() != net.output_dim() {
        return Err(Error::Dimension(format!(
            "targets {:?} for {n} rows and {} outputs",
            targets.shape(),
            net.output_dim()
        )));
    }
    opt.validate()?;

    let truth = target_classes(targets);
    let mut state = OptimizerState::new(opt, net.params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = History::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = inputs.select(Axis(0), chunk);
            let yb = targets.select(Axis(0), chunk);
            let (grads, output) = backward_with_output(net, xb.view(), yb.view(), cfg.loss)?;
            let batch_loss = compute_loss(cfg.loss, output.view(), yb.view())?;
            if !batch_loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            loss_sum += batch_loss * chunk.len() as f64;
            correct += predicted_classes(&output)
                .iter()
                .zip(chunk)
                .filter(|(p, &row)| **p == truth[row])
                .count();
            match optimizer_step(opt, &mut state, net.params_mut(), &grads) {
                Ok(()) => {}
                Err(Error::NonFinite { .. }) => return Err(Error::TrainingDiverged { epoch }),
                Err(e) => return Err(e),
            }
            if !net.params().all_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
        }
        history.epochs.push(EpochStats {
            epoch,
            loss: loss_sum / n as f64,
            accuracy: correct as f64 / n as f64,
        });
    }
    history.steps = state.t;
    Ok(history)
}

fn target_classes(targets: ArrayView2<'_, f64>) -> Vec<usize> {
    if targets.ncols() == 1 {
        targets.column(0).iter().map(|&y| usize::from(y >= 0.5)).collect()
    } else {
        argmax_rows(&targets.to_owned())
    }
}

fn predicted_classes(output: &Array2<f64>) -> Vec<usize> {
    if output.ncols() == 1 {
        output.column(0).iter().map(|&p| usize::from(p >= 0.5)).collect()
    } else {
        argmax_rows(output)
    }
}

/// Encodes class indices for an output layer of width `output_dim`.
///
/// Width 1 gives a single 0/1 column (class 1 is the positive class); any
/// other width gives one-hot rows.
pub fn encode_targets(classes: &[usize], output_dim: usize) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((classes.len(), output_dim));
    for (row, &c) in classes.iter().enumerate() {
        if output_dim == 1 {
            if c > 1 {
                return Err(Error::Dimension(format!(
                    "class {c} cannot be encoded in a single output"
                )));
            }
            out[[row, 0]] = c as f64;
        } else {
            if c >= output_dim {
                return Err(Error::Dimension(format!(
                    "class {c} outside {output_dim} outputs"
                )));
            }
            out[[row, c]] = 1.0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_network, ActivationKind};
    use ndarray::array;

    fn tiny() -> (Network, Array2<f64>, Array2<f64>) {
        let net = init_network(2, &[4], 1, ActivationKind::Tanh, ActivationKind::Sigmoid, 1).unwrap();
        let x = array![[0.0, 0.1], [0.9, 1.0], [0.2, 0.0], [1.0, 0.8]];
        let y = array![[0.0], [1.0], [0.0], [1.0]];
        (net, x, y)
    }

    #[test]
    fn zero_epochs_rejected() {
        let (mut net, x, y) = tiny();
        let cfg = TrainConfig {
            epochs: 0,
            batch_size: 2,
            shuffle_seed: 0,
            loss: LossKind::BinaryCrossEntropy,
        };
        assert!(matches!(
            train(&mut net, x.view(), y.view(), &cfg, &OptimizerKind::sgd()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn batch_larger_than_data_rejected() {
        let (mut net, x, y) = tiny();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 5,
            shuffle_seed: 0,
            loss: LossKind::BinaryCrossEntropy,
        };
        assert!(train(&mut net, x.view(), y.view(), &cfg, &OptimizerKind::sgd()).is_err());
    }

    #[test]
    fn step_count_is_epochs_times_batches() {
        let (mut net, x, y) = tiny();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 3,
            shuffle_seed: 9,
            loss: LossKind::BinaryCrossEntropy,
        };
        let h = train(&mut net, x.view(), y.view(), &cfg, &OptimizerKind::adam()).unwrap();
        assert_eq!(h.steps, 3 * 2);
        assert_eq!(h.epochs.len(), 3);
    }

    #[test]
    fn divergence_reports_epoch() {
        let (_, x, _) = tiny();
        let mut net =
            init_network(2, &[4], 2, ActivationKind::Relu, ActivationKind::Softmax, 1).unwrap();
        let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        let x = x * 1e3;
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 4,
            shuffle_seed: 0,
            loss: LossKind::CategoricalCrossEntropy,
        };
        let err = train(&mut net, x.view(), y.view(), &cfg, &OptimizerKind::Sgd { lr: 1e200 })
            .unwrap_err();
        assert!(matches!(err, Error::TrainingDiverged { .. }), "{err}");
    }

    #[test]
    fn target_encoding() {
        assert_eq!(encode_targets(&[0, 1], 2).unwrap(), array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(encode_targets(&[1, 0], 1).unwrap(), array![[1.0], [0.0]]);
        assert!(encode_targets(&[2], 1).is_err());
    }
}
