//! Multi-tiered feedforward intrusion detection for IoT flow records.
//!
//! The crate is organised around the stages of the pipeline:
//!
//! - [`dataset`]: CSV ingestion, sanitisation, min-max scaling, hierarchical
//!   labels (binary / category / subcategory) and stratified sampling.
//! - [`nn`]: a dense one-hidden-layer network written from scratch, with
//!   backpropagation and five optimizers.
//! - [`metrics`]: confusion matrices and macro / weighted scores.
//! - [`tuner`]: the 1000-point hyperparameter grid, the experiment ledger and
//!   the two selection approaches (top-k inspection, per-option means).
//! - [`explain`]: Kernel SHAP attributions and plot-ready data.
//!
//! Independent experiments and per-sample explanations run on a rayon pool
//! when the `parallel` feature is enabled (the default); without it every
//! loop runs sequentially and produces identical results.

pub mod dataset;
pub mod error;
pub mod explain;
pub mod metrics;
pub mod nn;
pub mod par;
pub mod tuner;

pub use error::{Error, Result};
