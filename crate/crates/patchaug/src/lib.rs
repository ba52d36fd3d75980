//! Augmentation of small sequence datasets by one-shot patch-distribution
//! matching, with verification of the transport bounds that relate
//! subsequence similarity to sequence similarity.
//!
//! The crate has five parts:
//!
//! - [`algebra`]: sequences, subsequence selectors, covering families,
//!   exact reconstruction, and the closed-form amplification factors.
//! - [`transport`]: exact and sliced Wasserstein-1 distances with L1
//!   ground cost over uniform empirical distributions, analytic sliced
//!   gradients, and the deterministic bound checks.
//! - [`generator`]: the one-shot coarse-to-fine generator that matches
//!   patch distributions of a single target grid.
//! - [`classifier`]: a small from-scratch MLP (ReLU hidden layers,
//!   sigmoid outputs, Adam, early stopping) plus classification metrics.
//! - [`pipeline`]: dataset ingestion, label-weighted reduction,
//!   stratified cross-validation, the original/reduced/synthetic
//!   evaluation flow, and report emission.
//!
//! Start with the `examples/` directory: each example is a runnable tour
//! of one capability.

pub mod algebra;
pub mod classifier;
pub mod config;
pub mod error;
pub mod generator;
pub mod grid;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};
