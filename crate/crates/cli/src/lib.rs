//! Library surface of the batch CLI: run configuration, report assembly and
//! plot-data extraction, shared by the binary and the integration tests.

pub mod config;
pub mod plot;
pub mod report;

pub use config::{InputSource, RunConfig};
pub use plot::{emit_plot_data, emit_plot_data_value, PlotKind};
pub use report::{report_json, run, write_outputs, RunError, RunOutput, SpaceReport};
