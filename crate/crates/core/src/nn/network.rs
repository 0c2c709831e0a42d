use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::activation::{activate, ActivationKind};
use crate::{Error, Result};

/// Weight matrices and bias vectors of a dense network, layer by layer.
///
/// The same container holds gradients and optimizer moments, so their shapes
/// mirror the parameters by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// Layer `i` has shape `(out_i, in_i)`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl ParamSet {
    pub fn zeros_like(other: &ParamSet) -> Self {
        ParamSet {
            weights: other.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: other.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn same_shape(&self, other: &ParamSet) -> bool {
        self.weights.len() == other.weights.len()
            && self.biases.len() == other.biases.len()
            && self.weights.iter().zip(&other.weights).all(|(a, b)| a.shape() == b.shape())
            && self.biases.iter().zip(&other.biases).all(|(a, b)| a.len() == b.len())
    }

    pub fn len(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattened view of every scalar, weights first then biases, layer order.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .flat_map(|w| w.iter_mut())
            .chain(self.biases.iter_mut().flat_map(|b| b.iter_mut()))
    }

    pub fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    /// Mutable slices, one per tensor, in the order of [`ParamSet::iter`].
    pub(crate) fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.weights.len() + self.biases.len());
        for w in &mut self.weights {
            out.push(w.as_slice_mut().expect("standard layout"));
        }
        for b in &mut self.biases {
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub(crate) fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.weights.len() + self.biases.len());
        for w in &self.weights {
            out.push(w.as_slice().expect("standard layout"));
        }
        for b in &self.biases {
            out.push(b.as_slice().expect("standard layout"));
        }
        out
    }
}

/// Dense feedforward network: `f(x) = out(W² · hidden(W¹x + b¹) + b²)`,
/// generalised to any number of hidden layers sharing one activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    hidden_dims: Vec<usize>,
    output_dim: usize,
    hidden_activation: ActivationKind,
    output_activation: ActivationKind,
    seed: u64,
    params: ParamSet,
}

/// Intermediate values of a forward pass, kept for backpropagation.
pub(crate) struct ForwardCache {
    /// `activations[0]` is the input batch; `activations[i+1]` the output of layer `i`.
    pub activations: Vec<Array2<f64>>,
    pub pre_activations: Vec<Array2<f64>>,
}

/// Builds a network with Glorot-uniform weights and zero biases.
pub fn init_network(
    input_dim: usize,
    hidden_dims: &[usize],
    output_dim: usize,
    hidden_act: ActivationKind,
    output_act: ActivationKind,
    seed: u64,
) -> Result<Network> {
    if input_dim == 0 || output_dim == 0 || hidden_dims.contains(&0) {
        return Err(Error::InvalidArchitecture(format!(
            "all layer sizes must be >= 1 (input {input_dim}, hidden {hidden_dims:?}, output {output_dim})"
        )));
    }
    if output_act == ActivationKind::Softmax && output_dim < 2 {
        return Err(Error::IncompatibleConfiguration(
            "softmax output over a single unit".into(),
        ));
    }
    if hidden_act == ActivationKind::Softmax && hidden_dims.iter().any(|&h| h < 2) {
        return Err(Error::IncompatibleConfiguration(
            "softmax hidden layer over a single unit".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = layer_dims(input_dim, hidden_dims, output_dim);
    let mut weights = Vec::with_capacity(dims.len() - 1);
    let mut biases = Vec::with_capacity(dims.len() - 1);
    for pair in dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || dist.sample(&mut rng)));
        biases.push(Array1::zeros(fan_out));
    }

    Ok(Network {
        input_dim,
        hidden_dims: hidden_dims.to_vec(),
        output_dim,
        hidden_activation: hidden_act,
        output_activation: output_act,
        seed,
        params: ParamSet { weights, biases },
    })
}

fn layer_dims(input_dim: usize, hidden_dims: &[usize], output_dim: usize) -> Vec<usize> {
    let mut dims = Vec::with_capacity(hidden_dims.len() + 2);
    dims.push(input_dim);
    dims.extend_from_slice(hidden_dims);
    dims.push(output_dim);
    dims
}

impl Network {
    /// Assembles a network from explicit parameters, validating every shape.
    pub fn from_params(
        input_dim: usize,
        hidden_dims: &[usize],
        output_dim: usize,
        hidden_act: ActivationKind,
        output_act: ActivationKind,
        params: ParamSet,
    ) -> Result<Self> {
        let mut net = init_network(input_dim, hidden_dims, output_dim, hidden_act, output_act, 0)?;
        if !net.params.same_shape(&params) {
            return Err(Error::Dimension(
                "parameter shapes do not match the layer dimensions".into(),
            ));
        }
        if !params.all_finite() {
            return Err(Error::NonFinite {
                index: params.iter().position(|x| !x.is_finite()).unwrap_or(0),
                context: "network parameters".into(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dims(&self) -> &[usize] {
        &self.hidden_dims
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn hidden_activation(&self) -> ActivationKind {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> ActivationKind {
        self.output_activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.params.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.params.biases
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn check_batch(&self, batch: &ArrayView2<'_, f64>) -> Result<()> {
        if batch.ncols() != self.input_dim {
            return Err(Error::Dimension(format!(
                "batch has {} columns, network expects {}",
                batch.ncols(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Per-row network outputs.
    pub fn forward(&self, batch: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_batch(&batch)?;
        let n_layers = self.params.weights.len();
        let mut a = batch.to_owned();
        for (i, (w, b)) in self.params.weights.iter().zip(&self.params.biases).enumerate() {
            let z = a.dot(&w.t()) + b;
            let kind = if i + 1 == n_layers {
                self.output_activation
            } else {
                self.hidden_activation
            };
            a = activate(kind, &z);
        }
        Ok(a)
    }

    pub(crate) fn forward_cached(&self, batch: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        self.check_batch(&batch)?;
        let n_layers = self.params.weights.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        let mut pre_activations = Vec::with_capacity(n_layers);
        activations.push(batch.to_owned());
        for (i, (w, b)) in self.params.weights.iter().zip(&self.params.biases).enumerate() {
            let z = activations[i].dot(&w.t()) + b;
            let kind = if i + 1 == n_layers {
                self.output_activation
            } else {
                self.hidden_activation
            };
            activations.push(activate(kind, &z));
            pre_activations.push(z);
        }
        Ok(ForwardCache {
            activations,
            pre_activations,
        })
    }

    /// Class probabilities: a single sigmoid unit `p` expands to `[1 − p, p]`,
    /// any other output layer is returned as is.
    pub fn predict_proba(&self, batch: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let out = self.forward(batch)?;
        if self.output_dim == 1 && self.output_activation == ActivationKind::Sigmoid {
            let mut probs = Array2::zeros((out.nrows(), 2));
            for (mut row, p) in probs.axis_iter_mut(Axis(0)).zip(out.column(0)) {
                row[0] = 1.0 - p;
                row[1] = *p;
            }
            return Ok(probs);
        }
        Ok(out)
    }

    /// Arg-max class per row (threshold 0.5 for a single sigmoid unit).
    pub fn predict_classes(&self, batch: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_proba(batch)?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<NetworkFile>(text)?.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// First index of the row maximum; ties resolve to the lower class.
pub(crate) fn argmax_rows(m: &Array2<f64>) -> Vec<usize> {
    m.axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// On-disk form: dimensions, activation names, row-major weights, biases and the init seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: ActivationKind,
    pub output_activation: ActivationKind,
    pub seed: u64,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&Network> for NetworkFile {
    fn from(net: &Network) -> Self {
        NetworkFile {
            input_dim: net.input_dim,
            hidden_dims: net.hidden_dims.clone(),
            output_dim: net.output_dim,
            hidden_activation: net.hidden_activation,
            output_activation: net.output_activation,
            seed: net.seed,
            weights: net.params.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: net.params.biases.iter().map(|b| b.to_vec()).collect(),
        }
    }
}

impl TryFrom<NetworkFile> for Network {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        let dims = layer_dims(file.input_dim, &file.hidden_dims, file.output_dim);
        if file.weights.len() != dims.len() - 1 || file.biases.len() != dims.len() - 1 {
            return Err(Error::Dimension(format!(
                "expected {} layers, file has {} weight and {} bias arrays",
                dims.len() - 1,
                file.weights.len(),
                file.biases.len()
            )));
        }
        let mut weights = Vec::with_capacity(file.weights.len());
        for (pair, w) in dims.windows(2).zip(file.weights) {
            let w = Array2::from_shape_vec((pair[1], pair[0]), w)
                .map_err(|e| Error::Dimension(format!("weight array: {e}")))?;
            weights.push(w);
        }
        let biases = file.biases.into_iter().map(Array1::from).collect();
        let mut net = Network::from_params(
            file.input_dim,
            &file.hidden_dims,
            file.output_dim,
            file.hidden_activation,
            file.output_activation,
            ParamSet { weights, biases },
        )?;
        net.seed = file.seed;
        Ok(net)
    }
}
