//! Scenario configuration, seeded channels, parameter sweeps and result
//! export.

mod channel;
mod config;
mod export;
mod plot;
mod runner;

pub use channel::{generate_channel_gains, ChannelSource, RandomChannelSpec};
pub use config::{
    dbm_to_watts, ChannelConfig, ConfigError, CurveConfig, Scenario, ScenarioConfig, SystemConfig, DEFAULT_KNOTS,
};
pub use export::{export_csv, format_number, ExportOptions, ExportPaths, DETAIL_HEADER, SUMMARY_HEADER};
pub use plot::{emit_plot, render_svg};
pub use runner::{
    method2_candidate_count, run_scenario, run_sweep, scenario_result, MethodRun, RunOptions, ScenarioResult,
    SweepParam, SweepSpec, SweepTable, METHOD2_MAX_CANDIDATES, METHOD2_WARN_CANDIDATES,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::{Method, SolverError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{method}: {source}")]
    Solver { method: Method, source: SolverError },
    #[error("method2 would enumerate {} candidate vectors (limit {limit}); pass --force to run anyway", .count.map_or("more than 2^64".to_string(), |c| c.to_string()))]
    TooManyCandidates { count: Option<u64>, limit: u64 },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("nothing to plot: result table is empty")]
    EmptyTable,
    #[error("thread pool: {0}")]
    Threads(String),
}
