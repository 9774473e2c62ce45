//! Harness internals behind the `difflab` binary: config parsing, sweep
//! execution, run persistence, SVG plotting, and summary reporting.

pub mod config;
pub mod error;
pub mod persist;
pub mod plot;
pub mod report;
pub mod sweep;

pub use config::{parse_config, NoiseParams, SweepConfig};
pub use error::{CliError, Result};
pub use persist::{load_runs, read_run, run_dir, run_id, write_run, RunArtifacts, RunConfig};
pub use plot::{emit_energy_plot, group_runs, render_energy_plot, GroupBy, PlotGroup};
pub use report::{build_report, summary_table};
pub use sweep::{execute_run, expand_grid, run_sweep, SweepOutcome};
