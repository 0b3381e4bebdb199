//! Numerical workbench for weighted band-operator algebras on finitely
//! generated groups: word metrics and growth, subexponential admissible
//! weights, weighted kernel norms, and Neumann-series inversion with decay
//! tracking.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band_operator;
pub mod error;
pub mod experiment_cli;
pub mod group_metric;
pub mod linalg;
pub mod spectral_engine;
pub mod stats;
pub mod weight_system;

pub use error::{Error, Result};
