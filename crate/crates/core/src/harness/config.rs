//! Scenario files.
//!
//! A scenario is a TOML document with `[sim]`, `[agent]`, `[kpi]`, `[cqi]`
//! sections and repeated `[[links]]` and `[[mts]]` tables. Each MCS row of a
//! link is `[rate_bps_per_unit, snr50_db, slope]`. See `configs/` for complete
//! examples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentParams, CriterionKind};
use crate::baselines::CqiTable;
use crate::domain::{ContextBounds, KpiTargets, LinkCatalog, LinkKind, LinkSpec, McsEntry};
use crate::env::{ArrivalKind, EnvConfig, SnrProcess, TrafficSpec};
use crate::error::{Error, Result};
use crate::tiles::{TileCoderConfig, TiledDims};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub sim: SimSection,
    #[serde(default)]
    pub agent: AgentSection,
    #[serde(default)]
    pub kpi: KpiSection,
    #[serde(default)]
    pub cqi: CqiSection,
    pub links: Vec<LinkSection>,
    pub mts: Vec<MtSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub seed: u64,
    pub periods: usize,
    /// Slots per decision period (`N`).
    #[serde(default = "one")]
    pub decision_period: usize,
    #[serde(default = "default_slot")]
    pub slot_s: f64,
    #[serde(default = "default_retx")]
    pub max_retx: u32,
    #[serde(default)]
    pub snr: SnrProcess,
    /// Per-MT transmit buffer in bytes; unbounded when absent.
    #[serde(default)]
    pub buffer_limit_bytes: Option<u64>,
    /// Link loads assumed present before any MT is placed.
    #[serde(default)]
    pub background_load: Vec<f64>,
}

fn one() -> usize {
    1
}
fn default_slot() -> f64 {
    0.1
}
fn default_retx() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    #[default]
    Carem,
    Cb,
    StaticLte,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub kind: AgentKind,
    pub epsilon: f64,
    pub epsilon_decay: f64,
    pub alpha: f64,
    pub beta: f64,
    pub shared_avg_reward: bool,
    pub criterion: CriterionKind,
    /// Buffer occupancy mapped to the top of the tiled range.
    pub buffer_max_bytes: f64,
    pub tiles: TileSection,
    /// Agent snapshot to start from.
    pub snapshot: Option<PathBuf>,
}

impl Default for AgentSection {
    fn default() -> Self {
        let p = AgentParams::default();
        Self {
            kind: AgentKind::Carem,
            epsilon: p.epsilon,
            epsilon_decay: p.epsilon_decay,
            alpha: p.alpha,
            beta: p.beta,
            shared_avg_reward: p.shared_avg_reward,
            criterion: CriterionKind::QValue,
            buffer_max_bytes: 100_000.0,
            tiles: TileSection::default(),
            snapshot: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TileSection {
    pub num_tilings: usize,
    pub tiles_per_tiling: usize,
    pub intervals: usize,
    pub dims: TiledDims,
    pub hash_seed: u64,
}

impl Default for TileSection {
    fn default() -> Self {
        let b = ContextBounds::for_links((0.0, 1.0), 1.0, 0).expect("static bounds");
        let c = TileCoderConfig::with_bounds(b);
        Self {
            num_tilings: c.num_tilings,
            tiles_per_tiling: c.tiles_per_tiling,
            intervals: c.intervals,
            dims: c.dims,
            hash_seed: c.hash_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KpiSection {
    pub loss: f64,
    pub latency_s: f64,
}

impl Default for KpiSection {
    fn default() -> Self {
        let t = KpiTargets::default();
        Self {
            loss: t.loss,
            latency_s: t.latency_s,
        }
    }
}

/// Either explicit `(threshold_db, mcs)` rows or an evenly spaced table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CqiSection {
    pub entries: Vec<(f64, usize)>,
    pub count: usize,
    pub min_db: f64,
    pub max_db: f64,
}

impl Default for CqiSection {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            count: 15,
            min_db: 0.0,
            max_db: 22.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelSpec {
    /// `n` evenly spaced levels up to capacity.
    Count(usize),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub name: String,
    pub kind: LinkKind,
    pub capacity: f64,
    pub levels: LevelSpec,
    /// `[rate_bps_per_unit, snr50_db, slope]` per MCS.
    pub mcs: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MtSection {
    #[serde(default = "one")]
    pub count: usize,
    pub load_mbps: f64,
    #[serde(default = "default_packet")]
    pub packet_bytes: u32,
    #[serde(default)]
    pub arrivals: ArrivalKind,
}

fn default_packet() -> u32 {
    1250
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        // Relative snapshot paths are relative to the scenario file.
        if let (Some(s), Some(dir)) = (&cfg.agent.snapshot, path.parent()) {
            if s.is_relative() {
                cfg.agent.snapshot = Some(dir.join(s));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if self.sim.periods == 0 {
            return bad("sim.periods", "must be at least 1".into());
        }
        if self.sim.decision_period == 0 {
            return bad("sim.decision_period", "must be at least 1".into());
        }
        if self.links.is_empty() {
            return bad("links", "at least one link is required".into());
        }
        if self.mts.is_empty() || self.mt_count() == 0 {
            return bad("mts", "at least one MT is required".into());
        }
        if !self.sim.background_load.is_empty()
            && self.sim.background_load.len() != self.links.len()
        {
            return bad(
                "sim.background_load",
                format!(
                    "{} values for {} links",
                    self.sim.background_load.len(),
                    self.links.len()
                ),
            );
        }
        if self
            .sim
            .background_load
            .iter()
            .any(|l| !(0.0..=1.0).contains(l))
        {
            return bad("sim.background_load", "values must lie in [0, 1]".into());
        }
        if !(self.agent.buffer_max_bytes > 0.0) {
            return bad("agent.buffer_max_bytes", "must be positive".into());
        }
        let at = |key: &str| {
            let key = key.to_owned();
            move |e: Error| Error::Config(format!("{key}: {e}"))
        };
        self.agent_params().validate().map_err(at("agent"))?;
        KpiTargets::new(self.kpi.loss, self.kpi.latency_s).map_err(at("kpi"))?;
        for (i, l) in self.links.iter().enumerate() {
            self.link_spec(l).map_err(at(&format!("links[{i}]")))?;
        }
        for (i, m) in self.mts.iter().enumerate() {
            self.traffic(m)
                .validate()
                .map_err(at(&format!("mts[{i}]")))?;
        }
        self.env_config().validate().map_err(at("sim"))?;
        if self.agent.kind == AgentKind::StaticLte {
            self.cqi_table().map_err(at("cqi"))?;
            if !self.links.iter().any(|l| l.kind == LinkKind::ResourceBlock) {
                return bad(
                    "agent.kind",
                    "static-lte needs a resource-block link".into(),
                );
            }
        }
        Ok(())
    }

    fn link_spec(&self, l: &LinkSection) -> Result<LinkSpec> {
        let levels = match &l.levels {
            LevelSpec::Count(0) => {
                return Err(Error::InvalidParameter("levels must be at least 1".into()))
            }
            LevelSpec::Count(n) => LinkSpec::uniform_levels(l.capacity, *n),
            LevelSpec::Explicit(v) => v.clone(),
        };
        let mcs = l
            .mcs
            .iter()
            .map(|r| McsEntry {
                rate_bps_per_unit: r[0],
                snr50_db: r[1],
                slope: r[2],
            })
            .collect();
        LinkSpec::new(l.name.clone(), l.kind, l.capacity, levels, mcs)
    }

    fn traffic(&self, m: &MtSection) -> TrafficSpec {
        TrafficSpec {
            load_mbps: m.load_mbps,
            packet_bytes: m.packet_bytes,
            arrivals: m.arrivals,
        }
    }

    pub fn mt_count(&self) -> usize {
        self.mts.iter().map(|m| m.count).sum()
    }

    pub fn catalog(&self) -> Result<LinkCatalog> {
        LinkCatalog::new(
            self.links
                .iter()
                .map(|l| self.link_spec(l))
                .collect::<Result<_>>()?,
        )
    }

    pub fn traffic_per_mt(&self) -> Vec<TrafficSpec> {
        self.mts
            .iter()
            .flat_map(|m| std::iter::repeat_n(self.traffic(m), m.count))
            .collect()
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            traffic: self.traffic_per_mt(),
            slot_s: self.sim.slot_s,
            max_retx: self.sim.max_retx,
            snr: self.sim.snr,
            buffer_limit_bytes: self.sim.buffer_limit_bytes,
        }
    }

    pub fn targets(&self) -> KpiTargets {
        KpiTargets {
            loss: self.kpi.loss,
            latency_s: self.kpi.latency_s,
        }
    }

    pub fn agent_params(&self) -> AgentParams {
        AgentParams {
            epsilon: self.agent.epsilon,
            epsilon_decay: self.agent.epsilon_decay,
            alpha: self.agent.alpha,
            beta: self.agent.beta,
            shared_avg_reward: self.agent.shared_avg_reward,
        }
    }

    pub fn tile_config(&self) -> Result<TileCoderConfig> {
        let bounds = ContextBounds::for_links(
            self.sim.snr.range(),
            self.agent.buffer_max_bytes,
            self.links.len(),
        )?;
        let t = &self.agent.tiles;
        Ok(TileCoderConfig {
            num_tilings: t.num_tilings,
            tiles_per_tiling: t.tiles_per_tiling,
            intervals: t.intervals,
            dims: t.dims,
            hash_seed: t.hash_seed,
            bounds,
        })
    }

    pub fn cqi_table(&self) -> Result<CqiTable> {
        if !self.cqi.entries.is_empty() {
            return CqiTable::new(self.cqi.entries.clone());
        }
        let mcs = self
            .links
            .iter()
            .find(|l| l.kind == LinkKind::ResourceBlock)
            .map_or(1, |l| l.mcs.len());
        CqiTable::evenly_spaced(self.cqi.count, self.cqi.min_db, self.cqi.max_db, mcs)
    }
}
