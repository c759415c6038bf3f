//! Associative-memory model of stacked attention layers.
//!
//! Stored patterns act as attractors of a distance-based LogSumExp energy.
//! The crate provides the energy zoo of classical, dense, exponential and
//! modern continuous Hopfield networks and retrieval dynamics for each.
//! Stacked layers are combined into a smooth-minimum global energy.
//! Partition functions over the pattern balls drive a cross-entropy loss
//! model, complemented by scaling-law arithmetic for relating model size
//! to data size.
//!
//! Module map:
//! - [`numerics`]: stable LogSumExp/softmax, Γ and incomplete Γ, ball geometry.
//! - [`patterns`]: pattern storage, ingestion (CSV, AMV1), nearest-neighbour search.
//! - [`energy`]: energy functions and their bound checks.
//! - [`dynamics`]: retrieval, layered trust-region passes, binary updates, capacity.
//! - [`partition`]: Gaussian ball integrals, Monte Carlo oracle, loss model.
//! - [`scaling`]: parameter counting, Kaplan/Chinchilla forms, D* selection.

pub mod dynamics;
pub mod energy;
mod error;
pub mod numerics;
pub mod partition;
pub mod patterns;
pub mod rng;
pub mod scaling;

pub use error::{Error, Result};
