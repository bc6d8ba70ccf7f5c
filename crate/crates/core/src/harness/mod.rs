//! Scenario loading, experiment runs, metrics files and summaries.

mod compare;
mod config;
mod metrics;
mod runner;
mod summary;

pub use compare::{compare, format_table, CompareRow};
pub use config::{
    AgentKind, AgentSection, CqiSection, KpiSection, LevelSpec, LinkSection, MtSection,
    ScenarioConfig, SimSection, TileSection,
};
pub use metrics::{
    read_metrics, read_metrics_file, write_metrics, write_metrics_file, MetricsRow, METRICS_COLUMNS,
};
pub use runner::{run_experiment, write_run, AnyPolicy, RunFiles, RunOutput, RunOverrides};
pub use summary::{
    detect_convergence, period_rewards, reward_series, summarize, CutoffSource, LinkSummary,
    MtSummary, SeriesRow, Summary, CONVERGENCE_TOLERANCE, CONVERGENCE_WINDOW,
};
