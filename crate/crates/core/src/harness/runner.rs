use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{AgentKind, ScenarioConfig};
use super::metrics::{write_metrics_file, MetricsRow};
use super::summary::{reward_series, summarize, Summary};
use crate::agent::{run_period, AgentSnapshot, AgentState, DecideContext, Decision, Policy};
use crate::baselines::{BanditState, StaticLte};
use crate::domain::{ContextSample, LinkCatalog};
use crate::env::{Environment, VranEnv};
use crate::error::{Error, Result};
use crate::tiles::TileCoder;

/// Policy built from a scenario.
#[derive(Debug, Clone)]
pub enum AnyPolicy {
    Carem(AgentState),
    Cb(BanditState),
    StaticLte(StaticLte),
}

impl AnyPolicy {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let catalog = cfg.catalog()?;
        let dctx = DecideContext {
            criterion: cfg.agent.criterion.clone(),
            offered_bps: cfg.traffic_per_mt().iter().map(|t| t.load_bps()).collect(),
            background_load: cfg.sim.background_load.clone(),
        };
        let params = cfg.agent_params();
        Ok(match cfg.agent.kind {
            AgentKind::Carem => {
                let coder = TileCoder::new(cfg.tile_config()?)?;
                let mut a = AgentState::new(coder, catalog, cfg.mt_count(), &params)?
                    .with_decide_context(dctx);
                if let Some(p) = &cfg.agent.snapshot {
                    a.restore(&AgentSnapshot::load(p)?)?;
                }
                AnyPolicy::Carem(a)
            }
            AgentKind::Cb => {
                let coder = TileCoder::new(cfg.tile_config()?)?;
                AnyPolicy::Cb(BanditState::new(coder, catalog, &params)?.with_decide_context(dctx))
            }
            AgentKind::StaticLte => {
                AnyPolicy::StaticLte(StaticLte::new(catalog, cfg.cqi_table()?)?)
            }
        })
    }

    fn inner(&mut self) -> &mut dyn Policy {
        match self {
            AnyPolicy::Carem(a) => a,
            AnyPolicy::Cb(b) => b,
            AnyPolicy::StaticLte(s) => s,
        }
    }

    fn inner_ref(&self) -> &dyn Policy {
        match self {
            AnyPolicy::Carem(a) => a,
            AnyPolicy::Cb(b) => b,
            AnyPolicy::StaticLte(s) => s,
        }
    }

    pub fn snapshot(&self) -> Option<AgentSnapshot> {
        match self {
            AnyPolicy::Carem(a) => Some(a.snapshot()),
            _ => None,
        }
    }
}

impl Policy for AnyPolicy {
    fn catalog(&self) -> &LinkCatalog {
        self.inner_ref().catalog()
    }

    fn bootstrap(&mut self, contexts: &[ContextSample]) -> Result<Decision> {
        self.inner().bootstrap(contexts)
    }

    fn decide(
        &mut self,
        mean_contexts: &[ContextSample],
        rng: &mut dyn rand::RngCore,
    ) -> Result<Decision> {
        self.inner().decide(mean_contexts, rng)
    }

    fn learn(&mut self, prev: &Decision, mean_rewards: &[f64], next: &Decision) -> Result<()> {
        self.inner().learn(prev, mean_rewards, next)
    }

    fn epsilon(&self) -> f64 {
        self.inner_ref().epsilon()
    }

    fn avg_reward(&self, mt: usize) -> f64 {
        self.inner_ref().avg_reward(mt)
    }
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub periods: Option<usize>,
    pub snapshot_in: Option<PathBuf>,
}

impl RunOverrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(s) = self.seed {
            cfg.sim.seed = s;
        }
        if let Some(p) = self.periods {
            cfg.sim.periods = p;
        }
        if let Some(p) = &self.snapshot_in {
            cfg.agent.snapshot = Some(p.clone());
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub summary: Summary,
    pub policy: AnyPolicy,
}

/// Random streams for the environment and the policy, both derived from the
/// scenario seed.
fn streams(seed: u64) -> (u64, ChaCha8Rng) {
    (
        seed,
        ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
    )
}

/// Run a scenario to completion.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let catalog = cfg.catalog()?;
    let (env_seed, mut rng) = streams(cfg.sim.seed);
    let mut env = VranEnv::new(cfg.env_config(), catalog.clone(), env_seed)?;
    let mut policy = AnyPolicy::from_config(cfg)?;
    let targets = cfg.targets();
    let n = cfg.sim.decision_period;
    let k = env.mt_count();
    let slot_s = cfg.sim.slot_s;

    let mut rows = Vec::with_capacity(cfg.sim.periods * n * k);
    let mut before: Vec<ContextSample> = env.contexts();
    let mut current = policy.bootstrap(&before)?;
    for h in 0..cfg.sim.periods {
        let eps = policy.epsilon();
        let avg: Vec<f64> = (0..k).map(|mt| policy.avg_reward(mt)).collect();
        let res = run_period(&mut policy, &mut env, &current, n, &targets, &mut rng)?;
        for slot in 0..n {
            for (mt, t) in res.traces.iter().enumerate() {
                let o = &t.slot_outcomes[slot];
                let r = &t.slot_rewards[slot];
                let a = &t.active;
                let cap = catalog.link(a.action.link)?.capacity;
                let snr = if slot == 0 {
                    before[mt].snr_db
                } else {
                    t.slot_contexts[slot - 1].snr_db
                };
                rows.push(MetricsRow {
                    period: h,
                    slot: h * n + slot,
                    mt,
                    reward: r.total,
                    r_x: r.loss,
                    r_l: r.latency,
                    x_o: o.loss,
                    l_o: o.latency_s,
                    throughput: o.delivered_bytes as f64 * 8.0 / slot_s / 1e6,
                    link: a.action.link,
                    mcs: a.action.mcs,
                    level: a.action.level,
                    resource_fraction: a.amount / cap,
                    snr_db: snr,
                    buffer_bytes: o.queue_bytes,
                    epsilon: eps,
                    avg_reward: avg[mt],
                });
            }
        }
        before = res
            .traces
            .iter()
            .map(|t| t.slot_contexts[n - 1].clone())
            .collect();
        current = res.next;
    }
    let summary = summarize(&rows, &targets, None)?;
    Ok(RunOutput {
        rows,
        summary,
        policy,
    })
}

/// Files written by [`write_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFiles {
    pub metrics: PathBuf,
    pub summary: PathBuf,
    pub series: PathBuf,
    pub snapshot: Option<PathBuf>,
}

/// Write `metrics.csv`, `summary.json` and `series.csv` into `dir`, and the
/// agent snapshot to `snapshot_out` when given.
pub fn write_run(out: &RunOutput, dir: &Path, snapshot_out: Option<&Path>) -> Result<RunFiles> {
    std::fs::create_dir_all(dir)?;
    let metrics = dir.join("metrics.csv");
    write_metrics_file(&out.rows, &metrics)?;
    let summary = dir.join("summary.json");
    std::fs::write(&summary, serde_json::to_string_pretty(&out.summary)? + "\n")?;
    let series = dir.join("series.csv");
    let mut w = csv::Writer::from_path(&series)?;
    for r in reward_series(&out.rows, &out.summary)? {
        w.serialize(r)?;
    }
    w.flush()?;
    let snapshot = match snapshot_out {
        Some(p) => {
            let snap = out
                .policy
                .snapshot()
                .ok_or_else(|| Error::Snapshot("only the SARSA agent has a snapshot".into()))?;
            snap.save(p)?;
            Some(p.to_path_buf())
        }
        None => None,
    };
    Ok(RunFiles {
        metrics,
        summary,
        series,
        snapshot,
    })
}
