//! JSON snapshot of a trained agent.
//!
//! ```json
//! {
//!   "magic": "vran-rrm-agent",
//!   "version": 1,
//!   "table_size": 4096,
//!   "tile_coder": { "num_tilings": 8, "tiles_per_tiling": 512, ... },
//!   "weights": [...],
//!   "avg_reward": [...],
//!   "epsilon": 0.3, "alpha": 0.01, "beta": 0.01
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AgentState;
use crate::error::{Error, Result};
use crate::tiles::TileCoderConfig;

pub const SNAPSHOT_MAGIC: &str = "vran-rrm-agent";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub magic: String,
    pub version: u32,
    pub table_size: usize,
    pub tile_coder: TileCoderConfig,
    pub weights: Vec<f64>,
    pub avg_reward: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl AgentSnapshot {
    pub(super) fn capture(a: &AgentState) -> Self {
        Self {
            magic: SNAPSHOT_MAGIC.into(),
            version: SNAPSHOT_VERSION,
            table_size: a.weights.len(),
            tile_coder: a.coder.config().clone(),
            weights: a.weights.clone(),
            avg_reward: a.avg_reward.clone(),
            epsilon: a.epsilon,
            alpha: a.alpha,
            beta: a.beta,
        }
    }

    pub(super) fn check_compatible(&self, a: &AgentState) -> Result<()> {
        if self.magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot(format!("bad magic {:?}", self.magic)));
        }
        if self.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.table_size != self.weights.len() || self.table_size != a.weights.len() {
            return Err(Error::Snapshot(format!(
                "table size {} (with {} weights) does not match agent size {}",
                self.table_size,
                self.weights.len(),
                a.weights.len()
            )));
        }
        if &self.tile_coder != a.coder.config() {
            return Err(Error::Snapshot("tile coder configuration differs".into()));
        }
        if self.avg_reward.len() != a.avg_reward.len() {
            return Err(Error::Snapshot(format!(
                "{} average-reward estimates, agent has {}",
                self.avg_reward.len(),
                a.avg_reward.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Snapshot(format!(
                "epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: Self = serde_json::from_str(s)?;
        if snap.magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot(format!("bad magic {:?}", snap.magic)));
        }
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
