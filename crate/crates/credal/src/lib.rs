//! File formats, configuration, synthetic ensembles and batch drivers for
//! [`credal_core`].

pub mod config;
mod error;
pub mod pipeline;
pub mod records;
pub mod report;
pub mod synth;

pub use config::{Mode, RunConfig};
pub use error::{Error, Result};
pub use pipeline::{run_ablate, run_cdec, run_decisions, run_idec, run_metrics, AblationRow, Batch, MetricKind};
pub use records::{load_samples, read_samples, write_samples, Rows, SampleRecord};
pub use report::{load_report, read_report, write_report, Report, ReportRecord, Summary};
pub use synth::{generate_synthetic, SyntheticSpec};
