//! Evidence-synthesis engine for network meta-analysis of count outcomes.
//!
//! Combines randomized-trial and real-world count data (events + person-years)
//! under several synthesis models — naive pooling, power-prior down-weighting,
//! and hierarchical design-level models — sampled with an adaptive
//! Metropolis-within-Gibbs kernel. Downstream modules turn posterior draws
//! into rate-ratio matrices, down-weighting sweeps, treatment rankings and
//! model-fit diagnostics.

pub mod config;
pub mod diagnostics;
pub mod model;
pub mod network;
pub mod posterior;
pub mod sampler;
pub mod svg;
pub mod synth;

mod util;

pub use util::{derive_seed, ln_factorial};
