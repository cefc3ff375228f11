//! Config-driven scenarios and their reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, Kind, ScenarioConfig, Thresholds};
pub use report::{emit_report, Check, RunReport, SCHEMA};
pub use run::{cone_run, run_scenario, smooth_bump, ConeRun};
