use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vran_rrm::domain::KpiTargets;
use vran_rrm::harness::{
    compare, format_table, read_metrics_file, run_experiment, summarize, write_run, RunOverrides,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "vran-rrm",
    version,
    about = "Run and compare multi-link vRAN resource control experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct Overrides {
    /// Replace the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the number of decision periods.
    #[arg(long)]
    periods: Option<usize>,
    /// Start the agent from this snapshot.
    #[arg(long)]
    snapshot_in: Option<PathBuf>,
}

impl From<Overrides> for RunOverrides {
    fn from(o: Overrides) -> Self {
        RunOverrides {
            seed: o.seed,
            periods: o.periods,
            snapshot_in: o.snapshot_in,
        }
    }
}

#[derive(clap::Args, Clone)]
struct Targets {
    /// Packet-loss target used for compliance.
    #[arg(long, default_value_t = 0.01)]
    loss_target: f64,
    /// Latency target in seconds used for compliance.
    #[arg(long, default_value_t = 0.1)]
    latency_target: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write metrics.csv, series.csv and summary.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Save the trained agent here.
        #[arg(long)]
        snapshot_out: Option<PathBuf>,
    },
    /// Summarize a metrics CSV as JSON.
    Summarize {
        csv: PathBuf,
        /// Decision period at which post-convergence statistics start;
        /// detected from the data when omitted.
        #[arg(long)]
        cutoff: Option<usize>,
        #[command(flatten)]
        targets: Targets,
    },
    /// Compare metrics CSVs and scenario files (the latter are run first).
    Compare {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        targets: Targets,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> vran_rrm::Result<String> {
    match cli.cmd {
        Cmd::Run {
            config,
            overrides,
            out,
            snapshot_out,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            RunOverrides::from(overrides).apply(&mut cfg);
            let result = run_experiment(&cfg)?;
            let files = write_run(&result, &out, snapshot_out.as_deref())?;
            let s = &result.summary;
            Ok(format!(
                "{} periods, {} MTs: compliance {:.4}, mean reward {:.4}, mean latency {:.2} ms, throughput {:.4} Mbps (from period {})\nwrote {}\n",
                s.periods,
                s.mts,
                s.compliance,
                s.mean_reward,
                s.mean_latency_s * 1e3,
                s.mean_throughput_mbps,
                s.cutoff_period,
                files.metrics.display()
            ))
        }
        Cmd::Summarize {
            csv,
            cutoff,
            targets,
        } => {
            let t = KpiTargets::new(targets.loss_target, targets.latency_target)?;
            let s = summarize(&read_metrics_file(&csv)?, &t, cutoff)?;
            Ok(serde_json::to_string_pretty(&s)? + "\n")
        }
        Cmd::Compare {
            inputs,
            overrides,
            targets,
            json,
        } => {
            let t = KpiTargets::new(targets.loss_target, targets.latency_target)?;
            let rows = compare(&inputs, &overrides.into(), &t)?;
            Ok(if json {
                serde_json::to_string_pretty(&rows)? + "\n"
            } else {
                format_table(&rows)
            })
        }
    }
}
