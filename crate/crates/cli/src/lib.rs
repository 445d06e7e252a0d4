//! Scenario files, parameter sweeps and result files for the `idnc`
//! command-line tool.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{parse_config, parse_str, ConfigError, Document, SweepSpec, Variable};
pub use output::{emit_outputs, emit_run, sweep_csv, OutputError, OutputOptions, Written, SWEEP_HEADER};
pub use sweep::{run_sweep, PartialSweep, SweepRow, SweepTable};
