//! Runtime-analysis laboratory for (1+1) evolutionary neural architecture
//! search on the UNIFORM disk classification problem.
//!
//! * [`geometry`]: the problem instance, its regions and point labels.
//! * [`fitness`]: closed-form and placement-based fitness on `(i, j)` levels.
//! * [`network`]: threshold-neuron networks and Monte Carlo accuracy.
//! * [`enas`]: initialization, mutation and the elitist loop.
//! * [`harness`]: sweeps, statistics, drift estimates and bound checks.
//! * [`validation`]: oracle and distribution self-checks.
//! * [`cli`]: configuration resolution and output files.

pub mod cli;
pub mod enas;
pub mod error;
pub mod fitness;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod seeds;
pub mod validation;

pub use error::{LabError, Result};
pub use fitness::{Architecture, FitnessScore, Levels, Semantics};
pub use geometry::UniformInstance;
