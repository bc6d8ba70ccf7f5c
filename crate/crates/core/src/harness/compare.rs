use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::metrics::read_metrics_file;
use super::runner::{run_experiment, RunOverrides};
use super::summary::{summarize, Summary};
use crate::domain::KpiTargets;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub source: PathBuf,
    pub summary: Summary,
}

fn is_toml(p: &Path) -> bool {
    p.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"))
}

/// Summaries for a mix of scenario files (run here, in parallel) and metrics
/// CSVs (summarized against `targets`).
pub fn compare(
    inputs: &[PathBuf],
    overrides: &RunOverrides,
    targets: &KpiTargets,
) -> Result<Vec<CompareRow>> {
    if inputs.is_empty() {
        return Err(Error::Empty("compare inputs"));
    }
    let results: Vec<Result<Summary>> = std::thread::scope(|s| {
        let handles: Vec<_> = inputs
            .iter()
            .map(|p| {
                s.spawn(move || -> Result<Summary> {
                    if is_toml(p) {
                        let mut cfg = ScenarioConfig::load(p)?;
                        overrides.apply(&mut cfg);
                        Ok(run_experiment(&cfg)?.summary)
                    } else {
                        summarize(&read_metrics_file(p)?, targets, None)
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Metrics("run panicked".into())))
            })
            .collect()
    });
    inputs
        .iter()
        .zip(results)
        .map(|(p, r)| {
            Ok(CompareRow {
                source: p.clone(),
                summary: r.map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            })
        })
        .collect()
}

/// Plain-text table, one line per input.
pub fn format_table(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<40} {:>8} {:>10} {:>11} {:>9} {:>10} {:>7}",
        "source", "reward", "compliance", "latency_ms", "loss", "tput_mbps", "cutoff"
    );
    for r in rows {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{:<40} {:>8.4} {:>10.4} {:>11.2} {:>9.5} {:>10.4} {:>7}",
            r.source.display(),
            s.mean_reward,
            s.compliance,
            s.mean_latency_s * 1e3,
            s.mean_loss,
            s.mean_throughput_mbps,
            s.cutoff_period
        );
    }
    out
}
