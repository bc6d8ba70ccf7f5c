use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalKind {
    /// Evenly spaced packets.
    #[default]
    Cbr,
    /// Exponential inter-arrival times.
    Poisson,
}

/// Downlink traffic offered to one MT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub load_mbps: f64,
    pub packet_bytes: u32,
    pub arrivals: ArrivalKind,
}

impl TrafficSpec {
    pub fn cbr(load_mbps: f64, packet_bytes: u32) -> Result<Self> {
        let t = Self {
            load_mbps,
            packet_bytes,
            arrivals: ArrivalKind::Cbr,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.load_mbps >= 0.0) || !self.load_mbps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "traffic load {} must be >= 0",
                self.load_mbps
            )));
        }
        if self.packet_bytes == 0 {
            return Err(Error::InvalidParameter(
                "packet size must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn load_bps(&self) -> f64 {
        self.load_mbps * 1e6
    }

    /// Mean seconds between packets; infinite for an idle source.
    pub fn mean_interval_s(&self) -> f64 {
        if self.load_mbps > 0.0 {
            self.packet_bytes as f64 * 8.0 / self.load_bps()
        } else {
            f64::INFINITY
        }
    }

    pub(crate) fn next_gap<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mean = self.mean_interval_s();
        match self.arrivals {
            ArrivalKind::Cbr => mean,
            ArrivalKind::Poisson if mean.is_finite() => {
                Exp::new(1.0 / mean).expect("positive rate").sample(rng)
            }
            ArrivalKind::Poisson => f64::INFINITY,
        }
    }
}

/// A queued downlink packet.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub mt: usize,
    pub size_bytes: u32,
    /// Slot in which the packet arrived.
    pub arrival_slot: u64,
    /// Arrival offset within that slot, seconds.
    pub arrival_offset_s: f64,
    /// Failed attempts so far.
    pub retransmissions: u32,
    /// Bits of the current attempt already on the air.
    pub(crate) sent_bits: f64,
}
