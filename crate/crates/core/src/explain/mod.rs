//! Kernel SHAP attributions for black-box models.
//!
//! Features are grouped into *players*; a coalition of players takes its
//! values from the explained instance while every other feature is drawn
//! from a background set and the model output averaged. With at most
//! [`ShapConfig::max_enumerated_players`] players all coalitions are
//! enumerated and the weighted regression returns exact Shapley values.
//! Beyond that, coalitions are sampled in complementary pairs.

mod kernel;
mod report;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::nn::{ActivationKind, Network};
use crate::{Error, Result};

pub use kernel::{kernel_shap, Explanation};
pub use report::{
    explain, feature_importance, force_data, force_csv, importance_csv, summary_csv,
    AttributionReport, Contribution, ForceData, Importance, SampleAttribution,
};

/// Name of the player holding every feature outside the selected set.
pub const OTHER_PLAYER: &str = "other_features";

/// A model evaluated on a batch of rows, one output column per class.
pub trait Predictor: Sync {
    fn n_outputs(&self) -> usize;
    fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>>;
}

impl Predictor for Network {
    fn n_outputs(&self) -> usize {
        if self.output_dim() == 1 && self.output_activation() == ActivationKind::Sigmoid {
            2
        } else {
            self.output_dim()
        }
    }

    fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.predict_proba(rows)
    }
}

/// Wraps a row-wise closure.
pub struct FnModel<F> {
    pub n_outputs: usize,
    pub f: F,
}

impl<F> Predictor for FnModel<F>
where
    F: Fn(ArrayView1<'_, f64>) -> Vec<f64> + Sync,
{
    fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((rows.nrows(), self.n_outputs));
        for (i, row) in rows.axis_iter(Axis(0)).enumerate() {
            let y = (self.f)(row);
            if y.len() != self.n_outputs {
                return Err(Error::Dimension(format!(
                    "model returned {} outputs, expected {}",
                    y.len(),
                    self.n_outputs
                )));
            }
            out.row_mut(i).assign(&ArrayView1::from(&y));
        }
        Ok(out)
    }
}

/// `f(x) = w·x + b`, a single output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Predictor for LinearModel {
    fn n_outputs(&self) -> usize {
        1
    }

    fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if rows.ncols() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "{} columns for {} weights",
                rows.ncols(),
                self.weights.len()
            )));
        }
        let w = ArrayView1::from(&self.weights);
        Ok(rows.dot(&w).mapv(|v| v + self.bias).insert_axis(Axis(1)))
    }
}

/// A partition of the feature columns into named players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Players {
    pub names: Vec<String>,
    pub members: Vec<Vec<usize>>,
    pub n_features: usize,
}

impl Players {
    /// One player per feature.
    pub fn singletons(features: &[String]) -> Self {
        Players {
            names: features.to_vec(),
            members: (0..features.len()).map(|i| vec![i]).collect(),
            n_features: features.len(),
        }
    }

    /// Explicit groups, which must partition `0..n_features`.
    pub fn grouped(n_features: usize, groups: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut seen = vec![false; n_features];
        for (_, m) in &groups {
            for &i in m {
                if i >= n_features || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Precondition(format!(
                        "feature {i} is out of range or in two players"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) || groups.iter().any(|g| g.1.is_empty()) {
            return Err(Error::Precondition("players must cover every feature".into()));
        }
        let (names, members) = groups.into_iter().unzip();
        Ok(Players {
            names,
            members,
            n_features,
        })
    }

    /// Singletons when `features.len() <= max_players`. Otherwise the
    /// `max_players - 1` highest-variance background columns stay single
    /// (in column order) and the rest form one [`OTHER_PLAYER`].
    pub fn top_variance(features: &[String], background: ArrayView2<'_, f64>, max_players: usize) -> Result<Self> {
        let d = features.len();
        if background.ncols() != d {
            return Err(Error::Dimension(format!(
                "background has {} columns for {d} features",
                background.ncols()
            )));
        }
        if max_players < 2 {
            return Err(Error::Precondition("need at least 2 players".into()));
        }
        if d <= max_players {
            return Ok(Self::singletons(features));
        }
        let var = background.var_axis(Axis(0), 0.0);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
        let mut keep = order[..max_players - 1].to_vec();
        keep.sort_unstable();
        let mut groups: Vec<(String, Vec<usize>)> = keep.iter().map(|&i| (features[i].clone(), vec![i])).collect();
        let rest: Vec<usize> = (0..d).filter(|i| keep.binary_search(i).is_err()).collect();
        groups.push((OTHER_PLAYER.to_string(), rest));
        Self::grouped(d, groups)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapConfig {
    /// Enumerate every coalition up to this many players.
    pub max_enumerated_players: usize,
    /// Coalitions drawn per instance when sampling.
    pub n_coalition_samples: usize,
    pub seed: u64,
}

impl Default for ShapConfig {
    fn default() -> Self {
        ShapConfig {
            max_enumerated_players: 12,
            n_coalition_samples: 2048,
            seed: 0,
        }
    }
}
