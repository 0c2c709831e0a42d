use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayViewMut1, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The activation menu: applied after the hidden layer (Activation I) or
/// the output layer (Activation II).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Tanh,
    Sigmoid,
    Softplus,
    Softmax,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Relu,
        ActivationKind::Tanh,
        ActivationKind::Sigmoid,
        ActivationKind::Softplus,
        ActivationKind::Softmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Softplus => "softplus",
            ActivationKind::Softmax => "softmax",
        }
    }

    /// Softmax couples the units of a layer; the others act elementwise.
    pub fn is_elementwise(self) -> bool {
        self != ActivationKind::Softmax
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(ActivationKind::Relu),
            "tanh" => Ok(ActivationKind::Tanh),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "softplus" => Ok(ActivationKind::Softplus),
            "softmax" => Ok(ActivationKind::Softmax),
            other => Err(Error::Precondition(format!("unknown activation {other:?}"))),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn scalar(kind: ActivationKind, x: f64) -> f64 {
    match kind {
        ActivationKind::Relu => x.max(0.0),
        ActivationKind::Tanh => x.tanh(),
        ActivationKind::Sigmoid => sigmoid(x),
        ActivationKind::Softplus => softplus(x),
        ActivationKind::Softmax => unreachable!("softmax is not elementwise"),
    }
}

fn softmax_in_place(mut row: ArrayViewMut1<'_, f64>) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    row.mapv_inplace(|v| {
        let e = (v - max).exp();
        sum += e;
        e
    });
    row.mapv_inplace(|v| v / sum);
}

/// Applies `kind` to a single vector, rejecting non-finite input.
pub fn apply_activation(kind: ActivationKind, v: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            index,
            context: format!("{kind} input"),
        });
    }
    if kind == ActivationKind::Softmax {
        if v.len() < 2 {
            return Err(Error::IncompatibleConfiguration(
                "softmax needs at least two units".into(),
            ));
        }
        let mut out = ndarray::Array1::from(v.to_vec());
        softmax_in_place(out.view_mut());
        return Ok(out.to_vec());
    }
    Ok(v.iter().map(|&x| scalar(kind, x)).collect())
}

/// Row-wise activation of a batch of pre-activations.
pub(crate) fn activate(kind: ActivationKind, z: &Array2<f64>) -> Array2<f64> {
    if kind == ActivationKind::Softmax {
        let mut out = z.clone();
        for row in out.axis_iter_mut(Axis(0)) {
            softmax_in_place(row);
        }
        out
    } else {
        z.mapv(|x| scalar(kind, x))
    }
}

/// Back-propagates `upstream` (dL/da) through the activation, returning dL/dz.
///
/// `z` is the pre-activation and `a` the activation output of the same layer.
pub(crate) fn backprop(
    kind: ActivationKind,
    z: &Array2<f64>,
    a: &Array2<f64>,
    upstream: &Array2<f64>,
) -> Array2<f64> {
    match kind {
        ActivationKind::Relu => {
            Zip::from(upstream).and(z).map_collect(|&g, &z| if z > 0.0 { g } else { 0.0 })
        }
        ActivationKind::Tanh => Zip::from(upstream).and(a).map_collect(|&g, &a| g * (1.0 - a * a)),
        ActivationKind::Sigmoid => {
            Zip::from(upstream).and(a).map_collect(|&g, &a| g * a * (1.0 - a))
        }
        ActivationKind::Softplus => Zip::from(upstream).and(z).map_collect(|&g, &z| g * sigmoid(z)),
        ActivationKind::Softmax => {
            // Jacobian-vector product per row: s ⊙ (g − ⟨g, s⟩).
            let mut out = Array2::zeros(a.raw_dim());
            for ((g, s), mut o) in upstream
                .axis_iter(Axis(0))
                .zip(a.axis_iter(Axis(0)))
                .zip(out.axis_iter_mut(Axis(0)))
            {
                let dot = dot(g, s);
                Zip::from(&mut o).and(g).and(s).for_each(|o, &g, &s| *o = s * (g - dot));
            }
            out
        }
    }
}

fn dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
