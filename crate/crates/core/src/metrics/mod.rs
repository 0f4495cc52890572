//! Diagnostics: value error against a reference, value drift of bootstrap
//! targets, alignment of Taylor-corrected gradients, bootstrap confidence
//! intervals and the per-run CSV row format.

mod bootstrap;
mod diagnostics;
mod row;
mod stats;

pub use bootstrap::bootstrap_ci;
pub use diagnostics::{taylor_cosine, value_drift, value_mse, History, HistoryEntry};
pub use row::{MetricsRow, RunTags, CSV_HEADER};
pub use stats::{mean, median, quantile, spearman};
