//! Branching random walks on the regular tree and the 2-D comb: certified
//! two-sided extinction-probability brackets, Monte Carlo validation, and
//! the ordering/distinctness experiments.

pub mod clamps;
pub mod critical;
pub mod experiments;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod law;
pub mod model;
pub mod montecarlo;
pub mod projection;
pub mod report;
pub mod rng;
pub mod solver;
pub mod truncation;

pub use error::{Error, Result};
