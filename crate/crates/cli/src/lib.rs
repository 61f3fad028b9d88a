//! Experiment orchestration over the Ising engine: configuration, the exact
//! verification suite, scaling scans, tilting experiments, and fits.

pub mod config;
pub mod fitcmd;
pub mod fixtures;
pub mod report;
pub mod scan;
pub mod selftest;
pub mod tilt;
pub mod verify;

pub use config::{critical_beta, BetaSpec, ExperimentConfig, ScheduleConfig};
pub use report::{read_csv, write_csv, ResultRecord, Row};
pub use scan::run_scan;
pub use tilt::run_tilt;
pub use verify::{run_verify, VerifyProfile, VerifyReport};
