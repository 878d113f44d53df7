//! Config-driven experiment runner for `nlwave`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{echo, parse_config, parse_config_with_overrides, reconfigure, ConfigError, ExperimentConfig};
pub use presets::{list_presets, preset, Preset};
pub use runner::{run_scenario, run_sweep, run_to_dir, write_outputs, RunError, RunOutput, RunReport};
