//! Pseudo-spectral simulation of the abcd Boussinesq family on periodic
//! boxes, with Littlewood-Paley block calculus, energy diagnostics and an
//! ε-scaling experiment harness.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod littlewood_paley;
pub mod model;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{Field, Spectrum, VectorField};
pub use grid::{Grid, GridSpec, DEFAULT_LENGTH};
pub use littlewood_paley::{DyadicPartition, Summability};
pub use model::{AbcdParams, Classification, WaveState};
