//! Regenerative block empirical likelihood for Markov chains.
//!
//! The observed trajectory is cut into blocks at regeneration times, exact
//! ones when the chain has a known atom and approximate ones obtained by
//! Nummelin splitting otherwise. Block sums of an estimating function feed
//! an empirical likelihood ratio whose Wilks limit yields confidence
//! regions, estimators and tests.

pub mod baselines;
pub mod chain_models;
pub mod cli;
pub mod dist;
pub mod el_core;
pub mod error;
pub mod inference;
pub mod mc;
pub mod optim;
pub mod regeneration;
pub mod rng;

pub use error::{Error, Result};
