use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::network::ParamSet;
use crate::{Error, Result};

/// An optimizer and its scalar hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    /// Adam with the infinity norm in place of the second moment.
    Adamax { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Adagrad { lr: f64, eps: f64 },
    Rmsprop { lr: f64, rho: f64, eps: f64 },
}

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_RHO: f64 = 0.9;
pub const DEFAULT_EPS: f64 = 1e-8;

impl OptimizerKind {
    pub fn sgd() -> Self {
        OptimizerKind::Sgd { lr: 0.01 }
    }

    pub fn adam() -> Self {
        OptimizerKind::Adam {
            lr: 0.001,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
        }
    }

    pub fn adamax() -> Self {
        OptimizerKind::Adamax {
            lr: 0.001,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
        }
    }

    pub fn adagrad() -> Self {
        OptimizerKind::Adagrad {
            lr: 0.01,
            eps: DEFAULT_EPS,
        }
    }

    pub fn rmsprop() -> Self {
        OptimizerKind::Rmsprop {
            lr: 0.001,
            rho: DEFAULT_RHO,
            eps: DEFAULT_EPS,
        }
    }

    /// The five optimizers with default settings, in grid order.
    pub fn defaults() -> [OptimizerKind; 5] {
        [
            Self::sgd(),
            Self::adam(),
            Self::adamax(),
            Self::adagrad(),
            Self::rmsprop(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd { .. } => "sgd",
            OptimizerKind::Adam { .. } => "adam",
            OptimizerKind::Adamax { .. } => "adamax",
            OptimizerKind::Adagrad { .. } => "adagrad",
            OptimizerKind::Rmsprop { .. } => "rmsprop",
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match *self {
            OptimizerKind::Sgd { lr }
            | OptimizerKind::Adam { lr, .. }
            | OptimizerKind::Adamax { lr, .. }
            | OptimizerKind::Adagrad { lr, .. }
            | OptimizerKind::Rmsprop { lr, .. } => lr,
        }
    }

    /// Same optimizer with a different learning rate.
    pub fn with_lr(mut self, new_lr: f64) -> Self {
        match &mut self {
            OptimizerKind::Sgd { lr }
            | OptimizerKind::Adam { lr, .. }
            | OptimizerKind::Adamax { lr, .. }
            | OptimizerKind::Adagrad { lr, .. }
            | OptimizerKind::Rmsprop { lr, .. } => *lr = new_lr,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Precondition(format!("{}: {what}", self.name())));
        if !(self.learning_rate() > 0.0 && self.learning_rate().is_finite()) {
            return bad("learning rate must be > 0");
        }
        let beta_ok = |b: f64| (0.0..1.0).contains(&b);
        match *self {
            OptimizerKind::Sgd { .. } => Ok(()),
            OptimizerKind::Adam { beta1, beta2, eps, .. }
            | OptimizerKind::Adamax { beta1, beta2, eps, .. } => {
                if !beta_ok(beta1) || !beta_ok(beta2) {
                    bad("betas must lie in [0, 1)")
                } else if eps.is_nan() || eps <= 0.0 {
                    bad("epsilon must be > 0")
                } else {
                    Ok(())
                }
            }
            OptimizerKind::Adagrad { eps, .. } => {
                if eps > 0.0 {
                    Ok(())
                } else {
                    bad("epsilon must be > 0")
                }
            }
            OptimizerKind::Rmsprop { rho, eps, .. } => {
                if !beta_ok(rho) {
                    bad("rho must lie in [0, 1)")
                } else if eps.is_nan() || eps <= 0.0 {
                    bad("epsilon must be > 0")
                } else {
                    Ok(())
                }
            }
        }
    }

    fn moments(&self) -> (bool, bool) {
        match self {
            OptimizerKind::Sgd { .. } => (false, false),
            OptimizerKind::Adagrad { .. } | OptimizerKind::Rmsprop { .. } => (false, true),
            OptimizerKind::Adam { .. } | OptimizerKind::Adamax { .. } => (true, true),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    /// Parses a name into the optimizer with default settings.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Self::sgd()),
            "adam" => Ok(Self::adam()),
            "adamax" => Ok(Self::adamax()),
            "adagrad" => Ok(Self::adagrad()),
            "rmsprop" => Ok(Self::rmsprop()),
            other => Err(Error::Precondition(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// Per-parameter accumulators and the step counter.
///
/// `first` holds the first moment (Adam, AdaMax); `second` holds the second
/// moment (Adam), the infinity-norm accumulator (AdaMax), the squared
/// gradient sum (AdaGrad) or its decaying average (RMSprop).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub t: u64,
    pub first: Option<ParamSet>,
    pub second: Option<ParamSet>,
}

impl OptimizerState {
    /// Zeroed accumulators shaped like `params`, `t = 0`.
    pub fn new(kind: &OptimizerKind, params: &ParamSet) -> Self {
        let (first, second) = kind.moments();
        OptimizerState {
            t: 0,
            first: first.then(|| ParamSet::zeros_like(params)),
            second: second.then(|| ParamSet::zeros_like(params)),
        }
    }
}

/// Applies one update of `kind` in place and advances `state.t`.
///
/// Non-finite gradients are refused before anything is modified.
pub fn optimizer_step(
    kind: &OptimizerKind,
    state: &mut OptimizerState,
    params: &mut ParamSet,
    grads: &ParamSet,
) -> Result<()> {
    if !params.same_shape(grads) {
        return Err(Error::Dimension("gradient shapes differ from parameters".into()));
    }
    for acc in [&state.first, &state.second].into_iter().flatten() {
        if !acc.same_shape(params) {
            return Err(Error::Dimension("optimizer state shapes differ from parameters".into()));
        }
    }
    let needs = kind.moments();
    if needs.0 != state.first.is_some() || needs.1 != state.second.is_some() {
        return Err(Error::Precondition(format!(
            "optimizer state was not built for {}",
            kind.name()
        )));
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            index,
            context: format!("{} step refused: gradient", kind.name()),
        });
    }

    state.t += 1;
    let t = state.t as f64;
    let grads = grads.slices();
    let mut first = state.first.as_mut().map(|m| m.slices_mut());
    let mut second = state.second.as_mut().map(|v| v.slices_mut());

    for (i, (p, g)) in params.slices_mut().into_iter().zip(grads).enumerate() {
        match *kind {
            OptimizerKind::Sgd { lr } => {
                for (p, g) in p.iter_mut().zip(g) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam { lr, beta1, beta2, eps } => {
                let m = &mut first.as_mut().expect("first moment")[i];
                let v = &mut second.as_mut().expect("second moment")[i];
                let c1 = 1.0 - beta1.powf(t);
                let c2 = 1.0 - beta2.powf(t);
                for k in 0..p.len() {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                    let m_hat = m[k] / c1;
                    let v_hat = v[k] / c2;
                    p[k] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
            OptimizerKind::Adamax { lr, beta1, beta2, eps } => {
                let m = &mut first.as_mut().expect("first moment")[i];
                let u = &mut second.as_mut().expect("infinity norm")[i];
                let step = lr / (1.0 - beta1.powf(t));
                for k in 0..p.len() {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                    u[k] = (beta2 * u[k]).max(g[k].abs());
                    p[k] -= step * m[k] / (u[k] + eps);
                }
            }
            OptimizerKind::Adagrad { lr, eps } => {
                let acc = &mut second.as_mut().expect("squared sum")[i];
                for k in 0..p.len() {
                    acc[k] += g[k] * g[k];
                    p[k] -= lr * g[k] / (acc[k].sqrt() + eps);
                }
            }
            OptimizerKind::Rmsprop { lr, rho, eps } => {
                let avg = &mut second.as_mut().expect("squared average")[i];
                for k in 0..p.len() {
                    avg[k] = rho * avg[k] + (1.0 - rho) * g[k] * g[k];
                    p[k] -= lr * g[k] / (avg[k].sqrt() + eps);
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};

    fn scalar(p: f64) -> ParamSet {
        ParamSet {
            weights: vec![Array2::from_elem((1, 1), p)],
            biases: vec![Array1::zeros(0)],
        }
    }

    fn value(p: &ParamSet) -> f64 {
        p.weights[0][[0, 0]]
    }

    #[test]
    fn sgd_single_step() {
        let kind = OptimizerKind::Sgd { lr: 0.01 };
        let mut p = scalar(1.0);
        let mut state = OptimizerState::new(&kind, &p);
        optimizer_step(&kind, &mut state, &mut p, &scalar(0.5)).unwrap();
        assert!((value(&p) - 0.995).abs() < 1e-15);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn adam_first_step_moves_by_about_lr() {
        let kind = OptimizerKind::adam();
        let mut p = scalar(1.0);
        let mut state = OptimizerState::new(&kind, &p);
        optimizer_step(&kind, &mut state, &mut p, &scalar(0.5)).unwrap();
        // m̂ = g and v̂ = g² on the first step.
        let expected = 1.0 - 0.001 * 0.5 / (0.5 + 1e-8);
        assert!((value(&p) - expected).abs() < 1e-15);
    }

    #[test]
    fn adagrad_steps_shrink() {
        let kind = OptimizerKind::adagrad();
        let mut p = scalar(0.0);
        let mut state = OptimizerState::new(&kind, &p);
        optimizer_step(&kind, &mut state, &mut p, &scalar(1.0)).unwrap();
        let first = value(&p).abs();
        let before = value(&p);
        optimizer_step(&kind, &mut state, &mut p, &scalar(1.0)).unwrap();
        let second = (value(&p) - before).abs();
        assert!(second < first, "{second} !< {first}");
    }

    #[test]
    fn nan_gradient_is_refused_without_side_effects() {
        let kind = OptimizerKind::adam();
        let mut p = scalar(1.0);
        let mut state = OptimizerState::new(&kind, &p);
        let err = optimizer_step(&kind, &mut state, &mut p, &scalar(f64::NAN)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 0, .. }));
        assert_eq!(state.t, 0);
        assert_eq!(value(&p), 1.0);
    }

    #[test]
    fn state_shapes_track_parameters() {
        let params = ParamSet {
            weights: vec![array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], array![[1.0, 1.0]]],
            biases: vec![array![0.0, 0.0], array![0.0]],
        };
        for kind in OptimizerKind::defaults() {
            let mut p = params.clone();
            let mut state = OptimizerState::new(&kind, &p);
            let grads = ParamSet {
                weights: vec![Array2::from_elem((2, 3), 0.1), Array2::from_elem((1, 2), -0.2)],
                biases: vec![Array1::from_elem(2, 0.3), Array1::from_elem(1, 0.4)],
            };
            for step in 1..=4 {
                optimizer_step(&kind, &mut state, &mut p, &grads).unwrap();
                assert_eq!(state.t, step);
            }
            for acc in [&state.first, &state.second].into_iter().flatten() {
                assert!(acc.same_shape(&p));
            }
            assert!(p.all_finite());
        }
    }

    #[test]
    fn invalid_hyperparameters() {
        assert!(OptimizerKind::Sgd { lr: 0.0 }.validate().is_err());
        assert!(OptimizerKind::Adam { lr: 0.1, beta1: 1.0, beta2: 0.9, eps: 1e-8 }
            .validate()
            .is_err());
        assert!(OptimizerKind::Rmsprop { lr: 0.1, rho: 0.9, eps: 0.0 }.validate().is_err());
        for kind in OptimizerKind::defaults() {
            kind.validate().unwrap();
        }
    }

    #[test]
    fn names_parse_to_defaults() {
        assert_eq!("AdaMax".parse::<OptimizerKind>().unwrap(), OptimizerKind::adamax());
        assert!("momentum".parse::<OptimizerKind>().is_err());
    }
}
