use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Players, Predictor, ShapConfig};
use crate::{Error, Result};

/// Coalitions evaluated per model call.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Mean model output over the background, per output.
    pub base_value: Vec<f64>,
    /// Model output at the instance, per output.
    pub prediction: Vec<f64>,
    /// `shap[player][output]`.
    pub shap: Vec<Vec<f64>>,
    /// Every coalition was evaluated, so the values are exact Shapley values.
    pub enumerated: bool,
    /// The regression system was singular and solved with a ridge term.
    pub regularized: bool,
}

/// Explains `instance` against `background`.
///
/// The instance stream is derived from `cfg.seed` and `stream`, so batch
/// callers can give each row its own deterministic sample.
pub fn kernel_shap(
    model: &dyn Predictor,
    background: ArrayView2<'_, f64>,
    instance: ArrayView1<'_, f64>,
    players: &Players,
    cfg: &ShapConfig,
    stream: u64,
) -> Result<Explanation> {
    let d = players.n_features;
    if background.nrows() == 0 {
        return Err(Error::Precondition("background set is empty".into()));
    }
    if background.ncols() != d || instance.len() != d {
        return Err(Error::Dimension(format!(
            "instance has {} features, background {}, players cover {d}",
            instance.len(),
            background.ncols()
        )));
    }
    if players.is_empty() {
        return Err(Error::EmptyFeatureSpace);
    }
    if let Some(index) = instance.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index,
            context: "explained instance".into(),
        });
    }

    let base = background_mean(model, background)?;
    let prediction = model.predict(instance.insert_axis(Axis(0)))?.row(0).to_owned();
    let outputs = base.len();
    let delta = &prediction - &base;
    let m = players.len();

    if m == 1 {
        return Ok(Explanation {
            base_value: base.to_vec(),
            prediction: prediction.to_vec(),
            shap: vec![delta.to_vec()],
            enumerated: true,
            regularized: false,
        });
    }

    let total = (1u128 << m.min(127)) - 2;
    let enumerated = m <= cfg.max_enumerated_players || total <= cfg.n_coalition_samples as u128;
    let (masks, weights) = if enumerated {
        enumerate_coalitions(m)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        sample_coalitions(m, cfg.n_coalition_samples.max(2), &mut rng)
    };

    let values = coalition_values(model, background, instance, players, &masks)?;

    // Eliminate the last player through the efficiency constraint:
    // φ_last = Δ − Σ_{j<last} φ_j.
    let k = m - 1;
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DMatrix::<f64>::zeros(k, outputs);
    let mut x = vec![0.0; k];
    for ((mask, &w), v) in masks.iter().zip(&weights).zip(values.axis_iter(Axis(0))) {
        let last = f64::from(u8::from(mask[k]));
        for j in 0..k {
            x[j] = f64::from(u8::from(mask[j])) - last;
        }
        for i in 0..k {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..k {
                a[(i, j)] += w * x[i] * x[j];
            }
            for o in 0..outputs {
                let y = v[o] - base[o] - last * delta[o];
                b[(i, o)] += w * x[i] * y;
            }
        }
    }
    let (phi, regularized) = solve_spd(a, b)?;

    let mut shap = vec![vec![0.0; outputs]; m];
    for o in 0..outputs {
        let mut sum = 0.0;
        for j in 0..k {
            shap[j][o] = phi[(j, o)];
            sum += phi[(j, o)];
        }
        shap[k][o] = delta[o] - sum;
    }
    Ok(Explanation {
        base_value: base.to_vec(),
        prediction: prediction.to_vec(),
        shap,
        enumerated,
        regularized,
    })
}

fn background_mean(model: &dyn Predictor, background: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let out = model.predict(background)?;
    if out.ncols() != model.n_outputs() {
        return Err(Error::Dimension("model output width changed".into()));
    }
    Ok(out.mean_axis(Axis(0)).expect("background is non-empty"))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Every proper non-empty coalition with its Shapley kernel weight.
fn enumerate_coalitions(m: usize) -> (Vec<Vec<bool>>, Vec<f64>) {
    let count = (1usize << m) - 2;
    let mut masks = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for bits in 1..(1usize << m) - 1 {
        let mask: Vec<bool> = (0..m).map(|j| bits >> j & 1 == 1).collect();
        let s = bits.count_ones() as usize;
        weights.push((m - 1) as f64 / (binomial(m, s) * s as f64 * (m - s) as f64));
        masks.push(mask);
    }
    (masks, weights)
}

/// Coalition sizes drawn in proportion to the total kernel weight of each
/// size, members uniformly, each sample paired with its complement.
fn sample_coalitions(m: usize, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<bool>>, Vec<f64>) {
    let sizes: Vec<usize> = (1..m).collect();
    let size_weights: Vec<f64> = sizes.iter().map(|&s| (m - 1) as f64 / (s * (m - s)) as f64).collect();
    let dist = WeightedIndex::new(&size_weights).expect("positive weights");
    let mut masks = Vec::with_capacity(n + 1);
    while masks.len() < n {
        let s = sizes[dist.sample(rng)];
        let mut mask = vec![false; m];
        for j in sample(rng, m, s) {
            mask[j] = true;
        }
        let complement = mask.iter().map(|b| !b).collect();
        masks.push(mask);
        masks.push(complement);
    }
    let weights = vec![1.0; masks.len()];
    (masks, weights)
}

/// Mean model output per coalition, background rows filling absent players.
fn coalition_values(
    model: &dyn Predictor,
    background: ArrayView2<'_, f64>,
    instance: ArrayView1<'_, f64>,
    players: &Players,
    masks: &[Vec<bool>],
) -> Result<Array2<f64>> {
    let n_bg = background.nrows();
    let outputs = model.n_outputs();
    let mut values = Array2::zeros((masks.len(), outputs));
    for (chunk_idx, chunk) in masks.chunks(CHUNK).enumerate() {
        let mut rows = Array2::zeros((chunk.len() * n_bg, players.n_features));
        for (c, mask) in chunk.iter().enumerate() {
            let mut block = rows.slice_mut(ndarray::s![c * n_bg..(c + 1) * n_bg, ..]);
            block.assign(&background);
            for (p, members) in players.members.iter().enumerate() {
                if mask[p] {
                    for &f in members {
                        block.column_mut(f).fill(instance[f]);
                    }
                }
            }
        }
        let out = model.predict(rows.view())?;
        for c in 0..chunk.len() {
            let mean = out
                .slice(ndarray::s![c * n_bg..(c + 1) * n_bg, ..])
                .mean_axis(Axis(0))
                .expect("background is non-empty");
            values.row_mut(chunk_idx * CHUNK + c).assign(&mean);
        }
    }
    Ok(values)
}

/// Solves `a x = b` for symmetric positive semidefinite `a`. A singular
/// system gets a small ridge term and is reported as regularized.
fn solve_spd(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    if let Some(ch) = a.clone().cholesky() {
        let x = ch.solve(&b);
        if x.iter().all(|v| v.is_finite()) {
            return Ok((x, false));
        }
    }
    let n = a.nrows();
    let scale = (a.trace() / n as f64).abs().max(1.0);
    let ridge = a + DMatrix::identity(n, n) * (1e-8 * scale);
    let x = ridge
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Precondition("coalition regression could not be solved".into()))?;
    Ok((x, true))
}


#[cfg(test)]
mod tests {
    use super::super::{FnModel, LinearModel};
    use super::*;
    use ndarray::array;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn kernel_weights_match_closed_form() {
        let (masks, w) = enumerate_coalitions(3);
        assert_eq!(masks.len(), 6);
        // m = 3: sizes 1 and 2 both weigh 2 / (3 · 1 · 2).
        for wi in w {
            assert!((wi - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_model_gets_zero_attributions() {
        let model = FnModel {
            n_outputs: 2,
            f: |_: ArrayView1<'_, f64>| vec![0.3, 0.7],
        };
        let bg = array![[0.0, 1.0, 2.0], [1.0, 0.0, 3.0]];
        let e = kernel_shap(&model, bg.view(), array![5.0, 5.0, 5.0].view(), &Players::singletons(&names(3)), &ShapConfig::default(), 0)
            .unwrap();
        assert_eq!(e.base_value, vec![0.3, 0.7]);
        for row in &e.shap {
            for v in row {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_model_closed_form() {
        let model = LinearModel {
            weights: vec![2.0, -1.0, 0.5],
            bias: 1.0,
        };
        let bg = array![[0.0, 1.0, 2.0], [1.0, 0.0, 4.0], [2.0, 2.0, 0.0]];
        let x = array![3.0, -1.0, 1.0];
        let e = kernel_shap(&model, bg.view(), x.view(), &Players::singletons(&names(3)), &ShapConfig::default(), 0)
            .unwrap();
        let mean = bg.mean_axis(Axis(0)).unwrap();
        for j in 0..3 {
            let expected = model.weights[j] * (x[j] - mean[j]);
            assert!((e.shap[j][0] - expected).abs() < 1e-12, "{j}: {} vs {expected}", e.shap[j][0]);
        }
        assert!(e.enumerated && !e.regularized);
    }

    #[test]
    fn sampled_mode_keeps_efficiency() {
        let model = FnModel {
            n_outputs: 1,
            f: |r: ArrayView1<'_, f64>| vec![r.iter().enumerate().map(|(i, v)| v * v * i as f64).sum::<f64>().sin()],
        };
        let d = 16;
        let bg = Array2::from_shape_fn((5, d), |(i, j)| ((i * 7 + j * 3) % 5) as f64 / 5.0);
        let x = Array1::from_shape_fn(d, |j| j as f64 / d as f64);
        let cfg = ShapConfig {
            n_coalition_samples: 2048,
            ..ShapConfig::default()
        };
        let e = kernel_shap(&model, bg.view(), x.view(), &Players::singletons(&names(d)), &cfg, 3).unwrap();
        assert!(!e.enumerated);
        let total: f64 = e.base_value[0] + e.shap.iter().map(|r| r[0]).sum::<f64>();
        assert!((total - e.prediction[0]).abs() < 1e-9);
        let again = kernel_shap(&model, bg.view(), x.view(), &Players::singletons(&names(d)), &cfg, 3).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let model = LinearModel {
            weights: vec![1.0, 1.0],
            bias: 0.0,
        };
        let p = Players::singletons(&names(2));
        let cfg = ShapConfig::default();
        let empty = Array2::<f64>::zeros((0, 2));
        assert!(kernel_shap(&model, empty.view(), array![1.0, 2.0].view(), &p, &cfg, 0).is_err());
        let bg = array![[0.0, 0.0]];
        assert!(kernel_shap(&model, bg.view(), array![1.0].view(), &p, &cfg, 0).is_err());
        assert!(kernel_shap(&model, bg.view(), array![f64::NAN, 1.0].view(), &p, &cfg, 0).is_err());
    }

    #[test]
    fn singular_system_falls_back_to_ridge() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let (x, reg) = solve_spd(a, b).unwrap();
        assert!(reg);
        assert!(x.iter().all(|v| v.is_finite()));
    }
}
