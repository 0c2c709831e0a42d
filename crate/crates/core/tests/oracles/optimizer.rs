//! Scalar update recurrences with the library defaults written out.

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const RHO: f64 = 0.9;
pub const EPS: f64 = 1e-8;

/// Parameter after each gradient in `grads`, starting from `p`.
pub fn trajectory(name: &str, mut p: f64, grads: &[f64]) -> Vec<f64> {
    let (mut m, mut v, mut u, mut acc, mut avg) = (0.0, 0.0, 0.0f64, 0.0, 0.0);
    let mut out = Vec::new();
    for (i, &g) in grads.iter().enumerate() {
        let t = (i + 1) as i32;
        match name {
            "sgd" => p -= 0.01 * g,
            "adam" => {
                m = BETA1 * m + (1.0 - BETA1) * g;
                v = BETA2 * v + (1.0 - BETA2) * g * g;
                let m_hat = m / (1.0 - BETA1.powi(t));
                let v_hat = v / (1.0 - BETA2.powi(t));
                p -= 0.001 * m_hat / (v_hat.sqrt() + EPS);
            }
            "adamax" => {
                m = BETA1 * m + (1.0 - BETA1) * g;
                u = (BETA2 * u).max(g.abs());
                p -= 0.001 / (1.0 - BETA1.powi(t)) * m / (u + EPS);
            }
            "adagrad" => {
                acc += g * g;
                p -= 0.01 * g / (acc.sqrt() + EPS);
            }
            "rmsprop" => {
                avg = RHO * avg + (1.0 - RHO) * g * g;
                p -= 0.001 * g / (avg.sqrt() + EPS);
            }
            other => panic!("unknown optimizer {other}"),
        }
        out.push(p);
    }
    out
}
