#![allow(clippy::needless_range_loop)]

mod oracles;

use mamid_core::explain::{kernel_shap, FnModel, LinearModel, Players, ShapConfig};
use mamid_core::nn::{init_network, ActivationKind};
use ndarray::{Array1, Array2, ArrayView1};
use oracles::shapley::brute_force;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

fn random_data(rng: &mut ChaCha8Rng, n_bg: usize, d: usize) -> (Array2<f64>, Array1<f64>) {
    let bg = Array2::from_shape_fn((n_bg, d), |_| rng.gen_range(-1.0..1.0));
    let x = Array1::from_shape_fn(d, |_| rng.gen_range(-1.0..1.0));
    (bg, x)
}

#[test]
fn enumeration_equals_brute_force_for_nonlinear_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in [2, 3, 5, 8, 12] {
        let (bg, x) = random_data(&mut rng, 4, d);
        let f = move |r: ArrayView1<'_, f64>| {
            let a: f64 = r.iter().enumerate().map(|(i, v)| v * (i as f64 + 1.0)).sum();
            let b = r[0] * r[d - 1];
            vec![a.tanh() + b, (a * b).sin()]
        };
        let model = FnModel { n_outputs: 2, f };
        let e = kernel_shap(&model, bg.view(), x.view(), &Players::singletons(&names(d)), &ShapConfig::default(), 0).unwrap();
        assert!(e.enumerated);
        let want = brute_force(f, 2, bg.view(), x.view());
        for j in 0..d {
            for o in 0..2 {
                assert!((e.shap[j][o] - want[j][o]).abs() <= 1e-6, "d={d} j={j} o={o}: {} vs {}", e.shap[j][o], want[j][o]);
            }
        }
        for o in 0..2 {
            let s = e.base_value[o] + e.shap.iter().map(|r| r[o]).sum::<f64>();
            assert!((s - e.prediction[o]).abs() <= 1e-6);
        }
    }
}

#[test]
fn enumeration_equals_brute_force_for_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (d, out) in [(4, ActivationKind::Softmax), (6, ActivationKind::Sigmoid), (9, ActivationKind::Softmax)] {
        let k = if out == ActivationKind::Sigmoid { 1 } else { 3 };
        let net = init_network(d, &[5], k, ActivationKind::Tanh, out, rng.gen()).unwrap();
        let (bg, x) = random_data(&mut rng, 6, d);
        let e = kernel_shap(&net, bg.view(), x.view(), &Players::singletons(&names(d)), &ShapConfig::default(), 0).unwrap();
        let f = |r: ArrayView1<'_, f64>| net.predict_proba(r.insert_axis(ndarray::Axis(0))).unwrap().row(0).to_vec();
        let outputs = e.base_value.len();
        let want = brute_force(f, outputs, bg.view(), x.view());
        for j in 0..d {
            for o in 0..outputs {
                assert!((e.shap[j][o] - want[j][o]).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn linear_closed_form_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in [1, 3, 7, 12] {
        let model = LinearModel {
            weights: (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            bias: rng.gen_range(-1.0..1.0),
        };
        let (bg, x) = random_data(&mut rng, 10, d);
        let mean = bg.mean_axis(ndarray::Axis(0)).unwrap();
        let e = kernel_shap(&model, bg.view(), x.view(), &Players::singletons(&names(d)), &ShapConfig::default(), 0).unwrap();
        for j in 0..d {
            let want = model.weights[j] * (x[j] - mean[j]);
            assert!((e.shap[j][0] - want).abs() <= 1e-10, "d={d} j={j}");
        }
    }
}

#[test]
fn dummy_and_symmetric_features() {
    let f = |r: ArrayView1<'_, f64>| vec![(r[0] * r[1]).exp() + r[3]];
    let model = FnModel { n_outputs: 1, f };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut bg, mut x) = random_data(&mut rng, 5, 4);
    // Features 0 and 1 are exchangeable: equal at x and swapped-equal in the background.
    x[1] = x[0];
    for mut row in bg.rows_mut() {
        row[1] = row[0];
    }
    let e = kernel_shap(&model, bg.view(), x.view(), &Players::singletons(&names(4)), &ShapConfig::default(), 0).unwrap();
    assert!(e.shap[2][0].abs() <= 1e-9, "dummy got {}", e.shap[2][0]);
    assert!((e.shap[0][0] - e.shap[1][0]).abs() <= 1e-9);
}

#[test]
fn sampled_efficiency_with_2048_coalitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let d = 20;
    let net = init_network(d, &[8], 3, ActivationKind::Relu, ActivationKind::Softmax, 4).unwrap();
    let (bg, x) = random_data(&mut rng, 20, d);
    let cfg = ShapConfig {
        n_coalition_samples: 2048,
        ..ShapConfig::default()
    };
    let e = kernel_shap(&net, bg.view(), x.view(), &Players::singletons(&names(d)), &cfg, 0).unwrap();
    assert!(!e.enumerated);
    for o in 0..3 {
        let s = e.base_value[o] + e.shap.iter().map(|r| r[o]).sum::<f64>();
        assert!((s - e.prediction[o]).abs() <= 1e-2);
    }
}

#[test]
fn grouped_players_match_brute_force_on_groups() {
    // Three players over five features: {0,1}, {2}, {3,4}.
    let f = |r: ArrayView1<'_, f64>| vec![r[0] * r[2] + r[1] - r[3] * r[4]];
    let model = FnModel { n_outputs: 1, f };
    let players = Players::grouped(5, vec![("a".into(), vec![0, 1]), ("b".into(), vec![2]), ("c".into(), vec![3, 4])]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (bg, x) = random_data(&mut rng, 4, 5);
    let e = kernel_shap(&model, bg.view(), x.view(), &players, &ShapConfig::default(), 0).unwrap();
    // Brute force over the 3 groups by lifting the model to group space.
    let lift = |g: ArrayView1<'_, f64>| {
        let z: Array1<f64> = (0..5)
            .map(|j| {
                let gi = [0, 0, 1, 2, 2][j];
                if g[gi] == 1.0 { x[j] } else { f64::NAN }
            })
            .collect();
        z
    };
    let mut phi = [0.0; 3];
    for j in 0..3 {
        for mask in 0..8usize {
            if mask >> j & 1 == 1 {
                continue;
            }
            let s = mask.count_ones() as f64;
            let w = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0][s as usize];
            let v = |m: usize| -> f64 {
                let g = Array1::from_shape_fn(3, |i| (m >> i & 1) as f64);
                let z = lift(g.view());
                bg.rows()
                    .into_iter()
                    .map(|b| {
                        let row: Array1<f64> = (0..5).map(|k| if z[k].is_nan() { b[k] } else { z[k] }).collect();
                        f(row.view())[0]
                    })
                    .sum::<f64>()
                    / bg.nrows() as f64
            };
            phi[j] += w * (v(mask | 1 << j) - v(mask));
        }
    }
    for j in 0..3 {
        assert!((e.shap[j][0] - phi[j]).abs() <= 1e-9);
    }
}
