//! Dense feedforward networks trained from scratch.

mod activation;
mod loss;
mod network;
mod optimizer;
mod train;

pub use activation::{apply_activation, ActivationKind};
pub use loss::{backward, compute_loss, output_layout, LossKind, LOG_CLIP};
pub use network::{init_network, Network, NetworkFile, ParamSet};
pub use optimizer::{
    optimizer_step, OptimizerKind, OptimizerState, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS,
    DEFAULT_RHO,
};
pub use train::{encode_targets, train, EpochStats, History, TrainConfig};
