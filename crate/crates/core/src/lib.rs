//! Staleness-corrected momentum for temporal-difference learning: models
//! with hand-rolled gradients, Taylor terms, the corrected / plain / oracle
//! momentum optimizers, the regression and Mountain Car tasks, diagnostics
//! and a deterministic experiment runner.

pub mod error;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod runner;
pub mod tasks;
pub mod taylor;

pub use error::{Error, Result};
