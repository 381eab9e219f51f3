//! Config-driven experiment runs.
//!
//! A [`ScenarioConfig`] names one of six experiments and its parameters.
//! [`run_scenario`] produces a [`ResultBundle`] of tables and scalar metrics;
//! [`execute`] also writes it to disk with a manifest.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, ConfigIssue, ScenarioConfig, ScenarioKind, TableFormat};
pub use output::{write_bundle, Manifest, ResultBundle, Table, MANIFEST_NAME};
pub use run::{count_local_maxima, execute, run_scenario, ExecuteError, RunFailure, FRINGE_THRESHOLD};
