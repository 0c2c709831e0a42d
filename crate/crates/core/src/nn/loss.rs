use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::activation::{backprop, ActivationKind};
use super::network::{Network, ParamSet};
use crate::{Error, Result};

/// Predictions are clipped into `[LOG_CLIP, 1 − LOG_CLIP]` before taking logs.
pub const LOG_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    BinaryCrossEntropy,
    CategoricalCrossEntropy,
}

/// Output layer width and loss for a classification task with `n_classes`.
///
/// Only the two canonical pairs are trainable: one sigmoid unit with binary
/// cross-entropy (two classes), or `n_classes` softmax units with categorical
/// cross-entropy. Everything else is an incompatible configuration.
pub fn output_layout(output_act: ActivationKind, n_classes: usize) -> Result<(usize, LossKind)> {
    match output_act {
        _ if n_classes < 2 => Err(Error::IncompatibleConfiguration(format!(
            "classification needs at least two classes, got {n_classes}"
        ))),
        ActivationKind::Sigmoid if n_classes == 2 => Ok((1, LossKind::BinaryCrossEntropy)),
        ActivationKind::Sigmoid => Err(Error::IncompatibleConfiguration(format!(
            "a single sigmoid unit cannot encode {n_classes} classes"
        ))),
        ActivationKind::Softmax => Ok((n_classes, LossKind::CategoricalCrossEntropy)),
        other => Err(Error::IncompatibleConfiguration(format!(
            "{other} output has no probabilistic loss pairing"
        ))),
    }
}

fn check_pairing(output_act: ActivationKind, loss: LossKind) -> Result<()> {
    match (output_act, loss) {
        (ActivationKind::Sigmoid, LossKind::BinaryCrossEntropy)
        | (ActivationKind::Softmax, LossKind::CategoricalCrossEntropy) => Ok(()),
        (act, loss) => Err(Error::IncompatibleConfiguration(format!(
            "{act} output cannot be trained with {loss:?}"
        ))),
    }
}

/// Mean cross-entropy over the batch.
pub fn compute_loss(
    loss: LossKind,
    predictions: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<f64> {
    if predictions.shape() != targets.shape() {
        return Err(Error::Dimension(format!(
            "predictions {:?} vs targets {:?}",
            predictions.shape(),
            targets.shape()
        )));
    }
    let n = predictions.nrows();
    if n == 0 {
        return Err(Error::Precondition("empty batch".into()));
    }
    let clip = |p: f64| p.clamp(LOG_CLIP, 1.0 - LOG_CLIP);
    let total: f64 = match loss {
        LossKind::BinaryCrossEntropy => predictions
            .iter()
            .zip(targets.iter())
            .map(|(&p, &y)| {
                let p = clip(p);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum(),
        LossKind::CategoricalCrossEntropy => predictions
            .iter()
            .zip(targets.iter())
            .filter(|(_, &y)| y != 0.0)
            .map(|(&p, &y)| -y * clip(p).ln())
            .sum(),
    };
    Ok(total / n as f64)
}

/// Gradients of the mean loss with respect to every parameter.
///
/// For both canonical pairs the gradient at the output pre-activation is
/// `(prediction − target) / batch_size`.
pub fn backward(
    net: &Network,
    batch: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    loss: LossKind,
) -> Result<ParamSet> {
    Ok(backward_with_output(net, batch, targets, loss)?.0)
}

/// Like [`backward`] but also returns the forward-pass output.
pub(crate) fn backward_with_output(
    net: &Network,
    batch: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    loss: LossKind,
) -> Result<(ParamSet, Array2<f64>)> {
    check_pairing(net.output_activation(), loss)?;
    if targets.nrows() != batch.nrows() || targets.ncols() != net.output_dim() {
        return Err(Error::Dimension(format!(
            "targets {:?} for batch of {} rows and {} outputs",
            targets.shape(),
            batch.nrows(),
            net.output_dim()
        )));
    }
    let n = batch.nrows();
    if n == 0 {
        return Err(Error::Precondition("empty batch".into()));
    }
    let mut cache = net.forward_cached(batch)?;
    let output = cache.activations.pop().expect("at least one layer");
    let n_layers = net.weights().len();

    let mut delta = (&output - &targets) / n as f64;
    let mut grads = ParamSet::zeros_like(net.params());
    for layer in (0..n_layers).rev() {
        let input = &cache.activations[layer];
        grads.weights[layer] = delta.t().dot(input);
        grads.biases[layer] = delta.sum_axis(Axis(0));
        if layer > 0 {
            let upstream = delta.dot(&net.weights()[layer]);
            delta = backprop(
                net.hidden_activation(),
                &cache.pre_activations[layer - 1],
                input,
                &upstream,
            );
        }
    }
    Ok((grads, output))
}
