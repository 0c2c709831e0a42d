//! Exact Shapley values by summing marginal contributions over all coalitions.

use ndarray::{Array1, ArrayView1, ArrayView2};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `phi[j][o]` for a model `f` with `n_outputs` outputs, absent features
/// averaged over `background`.
pub fn brute_force<F>(f: F, n_outputs: usize, background: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>) -> Vec<Vec<f64>>
where
    F: Fn(ArrayView1<'_, f64>) -> Vec<f64>,
{
    let d = x.len();
    let value = |mask: usize| -> Vec<f64> {
        let mut sum = vec![0.0; n_outputs];
        for b in background.rows() {
            let z: Array1<f64> = (0..d).map(|j| if mask >> j & 1 == 1 { x[j] } else { b[j] }).collect();
            for (s, y) in sum.iter_mut().zip(f(z.view())) {
                *s += y;
            }
        }
        sum.iter().map(|s| s / background.nrows() as f64).collect()
    };
    let values: Vec<Vec<f64>> = (0..1usize << d).map(value).collect();
    let mut phi = vec![vec![0.0; n_outputs]; d];
    for j in 0..d {
        for mask in 0..1usize << d {
            if mask >> j & 1 == 1 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = factorial(s) * factorial(d - s - 1) / factorial(d);
            for o in 0..n_outputs {
                phi[j][o] += w * (values[mask | 1 << j][o] - values[mask][o]);
            }
        }
    }
    phi
}
