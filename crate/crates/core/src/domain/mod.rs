//! Shared domain types: contexts, KPI targets, slot outcomes, links and the
//! action codec, and the reward functions.

mod action;
mod link;
mod reward;

pub use action::{decode_action, encode_action, ActionIndex, AppliedAction, DecodedAction};
pub use link::{LinkCatalog, LinkKind, LinkSpec, McsEntry};
pub use reward::{mean_reward, reward_component, slot_reward, RewardValue};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target packet-loss rate and MAC latency for one QoS class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiTargets {
    /// Packet-loss-rate threshold, a fraction in `[0, 1]`.
    pub loss: f64,
    /// Latency threshold in seconds.
    pub latency_s: f64,
}

impl KpiTargets {
    pub fn new(loss: f64, latency_s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::InvalidParameter(format!(
                "loss target {loss} outside [0, 1]"
            )));
        }
        if !(latency_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "latency target {latency_s} must be positive"
            )));
        }
        Ok(Self { loss, latency_s })
    }

    /// Whether an outcome meets both targets (equality counts as met).
    pub fn met_by(&self, outcome: &SlotOutcome) -> bool {
        outcome.loss <= self.loss && outcome.latency_s <= self.latency_s
    }
}

impl Default for KpiTargets {
    fn default() -> Self {
        Self {
            loss: 0.01,
            latency_s: 0.1,
        }
    }
}

/// Per-MT observation: SNR, buffered bytes, and the load of every link as a
/// fraction of its capacity.
///
/// `buffer_bytes` is fractional only for averaged contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSample {
    pub snr_db: f64,
    pub buffer_bytes: f64,
    pub link_loads: Vec<f64>,
}

impl ContextSample {
    pub fn new(snr_db: f64, buffer_bytes: f64, link_loads: Vec<f64>) -> Self {
        Self {
            snr_db,
            buffer_bytes,
            link_loads,
        }
    }

    /// Number of scalar dimensions (`2 + L`).
    pub fn dims(&self) -> usize {
        2 + self.link_loads.len()
    }

    /// The context as a flat vector `[snr, buffer, load_0, .., load_{L-1}]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dims());
        v.push(self.snr_db);
        v.push(self.buffer_bytes);
        v.extend_from_slice(&self.link_loads);
        v
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "context needs at least 2 dimensions, got {}",
                values.len()
            )));
        }
        Ok(Self::new(values[0], values[1], values[2..].to_vec()))
    }
}

/// Per-dimension `(min, max)` ranges used to normalize contexts into the unit
/// cube before tiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextBounds {
    ranges: Vec<(f64, f64)>,
}

impl ContextBounds {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::Empty("context bounds"));
        }
        for (d, &(lo, hi)) in ranges.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "context dimension {d}: min {lo} must be below max {hi}"
                )));
            }
        }
        Ok(Self { ranges })
    }

    /// Bounds for an `L`-link context: SNR range, buffer range `[0, max]`,
    /// and `[0, 1]` for each load.
    pub fn for_links(snr_db: (f64, f64), buffer_max_bytes: f64, links: usize) -> Result<Self> {
        let mut ranges = vec![snr_db, (0.0, buffer_max_bytes)];
        ranges.extend(std::iter::repeat_n((0.0, 1.0), links));
        Self::new(ranges)
    }

    pub fn dims(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    /// Map a context into `[0, 1]^D`, clamping out-of-range values.
    pub fn normalize(&self, ctx: &ContextSample) -> Vec<f64> {
        ctx.to_vec()
            .iter()
            .zip(&self.ranges)
            .map(|(&x, &(lo, hi))| {
                let u = (x - lo) / (hi - lo);
                if u.is_nan() {
                    0.0
                } else {
                    u.clamp(0.0, 1.0)
                }
            })
            .collect()
    }
}

/// KPIs observed for one MT in one monitoring slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    /// Fraction of packets completed this slot that were dropped.
    pub loss: f64,
    /// Mean MAC delay of packets delivered this slot, or the head-of-line
    /// age when nothing was delivered.
    pub latency_s: f64,
    pub delivered_bytes: u64,
    pub queue_bytes: u64,
}
