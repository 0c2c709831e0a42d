use mamid_core::nn::{
    backward, compute_loss, encode_targets, init_network, ActivationKind, LossKind, Network,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-6;
pub const REL_TOL: f64 = 1e-5;

fn loss_at(net: &Network, x: &Array2<f64>, t: &Array2<f64>, loss: LossKind) -> f64 {
    let out = net.forward(x.view()).unwrap();
    compute_loss(loss, out.view(), t.view()).unwrap()
}

/// Largest relative error between backprop and central differences.
pub fn max_relative_error(net: &Network, x: &Array2<f64>, t: &Array2<f64>, loss: LossKind) -> f64 {
    let analytic: Vec<f64> = backward(net, x.view(), t.view(), loss).unwrap().iter().copied().collect();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = *probe.params().iter().nth(k).unwrap();
        *probe.params_mut().iter_mut().nth(k).unwrap() = orig + H;
        let plus = loss_at(&probe, x, t, loss);
        *probe.params_mut().iter_mut().nth(k).unwrap() = orig - H;
        let minus = loss_at(&probe, x, t, loss);
        *probe.params_mut().iter_mut().nth(k).unwrap() = orig;
        let numeric = (plus - minus) / (2.0 * H);
        let denom = a.abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}

pub struct Case {
    pub net: Network,
    pub x: Array2<f64>,
    pub t: Array2<f64>,
    pub loss: LossKind,
}

/// A small random network with nonzero biases and a random batch.
pub fn random_case(rng: &mut ChaCha8Rng, hidden: ActivationKind, output: ActivationKind) -> Case {
    let input_dim = rng.gen_range(1..=5);
    let hidden_dim = rng.gen_range(2..=5);
    let (n_classes, output_dim, loss) = match output {
        ActivationKind::Sigmoid => (2, 1, LossKind::BinaryCrossEntropy),
        _ => {
            let k = rng.gen_range(2..=5);
            (k, k, LossKind::CategoricalCrossEntropy)
        }
    };
    let mut net = init_network(input_dim, &[hidden_dim], output_dim, hidden, output, rng.gen()).unwrap();
    for b in net.params_mut().iter_mut() {
        if *b == 0.0 {
            *b = rng.gen_range(-0.5..0.5);
        }
    }
    let rows = rng.gen_range(1..=6);
    let x = Array2::from_shape_fn((rows, input_dim), |_| rng.gen_range(-2.0..2.0));
    let classes: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..n_classes)).collect();
    let t = encode_targets(&classes, output_dim).unwrap();
    Case { net, x, t, loss }
}

/// 50 networks: every hidden activation crossed with both output pairings, five each.
pub fn fifty_cases(seed: u64) -> Vec<(ActivationKind, ActivationKind, Case)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for hidden in ActivationKind::ALL {
        for output in [ActivationKind::Sigmoid, ActivationKind::Softmax] {
            for _ in 0..5 {
                out.push((hidden, output, random_case(&mut rng, hidden, output)));
            }
        }
    }
    out
}
