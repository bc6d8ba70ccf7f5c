use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a link's capacity-constrained resource is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    /// Cellular link; the resource is a number of resource blocks.
    ResourceBlock,
    /// Contention-free broadcast link; the resource is an airtime fraction.
    Airtime,
}

/// One row of a link's MCS catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    /// Physical rate delivered by one resource unit, in bits per second.
    pub rate_bps_per_unit: f64,
    /// SNR (dB) at which the block error probability is 0.5.
    pub snr50_db: f64,
    /// Steepness of the logistic error curve, per dB.
    pub slope: f64,
}

/// A radio link: capacity, discrete resource levels, and MCS catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub name: String,
    pub kind: LinkKind,
    /// Total resource units available per slot (`rho_max`).
    pub capacity: f64,
    /// Allocatable resource amounts, strictly increasing, within `(0, capacity]`.
    pub levels: Vec<f64>,
    pub mcs: Vec<McsEntry>,
}

impl LinkSpec {
    pub fn new(
        name: impl Into<String>,
        kind: LinkKind,
        capacity: f64,
        levels: Vec<f64>,
        mcs: Vec<McsEntry>,
    ) -> Result<Self> {
        let link = Self {
            name: name.into(),
            kind,
            capacity,
            levels,
            mcs,
        };
        link.validate()?;
        Ok(link)
    }

    /// `count` evenly spaced levels: `capacity * (j + 1) / count`.
    pub fn uniform_levels(capacity: f64, count: usize) -> Vec<f64> {
        (1..=count)
            .map(|j| capacity * j as f64 / count as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let name = &self.name;
        if !(self.capacity > 0.0) || !self.capacity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "link {name}: capacity must be positive"
            )));
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "link {name}: no resource levels"
            )));
        }
        if self.mcs.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "link {name}: empty MCS catalog"
            )));
        }
        let eps = 1e-9 * self.capacity;
        for w in self.levels.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "link {name}: resource levels must be strictly increasing"
                )));
            }
        }
        if !(self.levels[0] > 0.0) || self.levels[self.levels.len() - 1] > self.capacity + eps {
            return Err(Error::InvalidParameter(format!(
                "link {name}: resource levels must lie in (0, capacity]"
            )));
        }
        for w in self.mcs.windows(2) {
            if !(w[0].rate_bps_per_unit < w[1].rate_bps_per_unit) {
                return Err(Error::InvalidParameter(format!(
                    "link {name}: MCS rates must be strictly increasing"
                )));
            }
            if !(w[0].snr50_db < w[1].snr50_db) {
                return Err(Error::InvalidParameter(format!(
                    "link {name}: MCS error-curve midpoints must be strictly increasing"
                )));
            }
        }
        if self
            .mcs
            .iter()
            .any(|m| !(m.rate_bps_per_unit > 0.0) || !(m.slope > 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "link {name}: MCS rates and slopes must be positive"
            )));
        }
        Ok(())
    }

    /// `i_l`, the number of MCS values.
    pub fn mcs_count(&self) -> usize {
        self.mcs.len()
    }

    /// `p_l`, the number of resource levels.
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn action_count(&self) -> usize {
        self.mcs_count() * self.level_count()
    }

    pub fn level_amount(&self, level: usize) -> f64 {
        self.levels[level]
    }

    /// Highest level whose amount does not exceed `amount`, if any.
    pub fn floor_level(&self, amount: f64) -> Option<usize> {
        let tol = 1e-9 * self.capacity;
        self.levels.iter().rposition(|&l| l <= amount + tol)
    }
}

/// Ordered set of links. The order fixes the action-space block layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCatalog {
    links: Vec<LinkSpec>,
    offsets: Vec<usize>,
    total: usize,
}

impl LinkCatalog {
    pub fn new(links: Vec<LinkSpec>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::Empty("link catalog"));
        }
        for l in &links {
            l.validate()?;
        }
        let mut offsets = Vec::with_capacity(links.len());
        let mut total = 0;
        for l in &links {
            offsets.push(total);
            total += l.action_count();
        }
        Ok(Self {
            links,
            offsets,
            total,
        })
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn link(&self, id: usize) -> Result<&LinkSpec> {
        self.links.get(id).ok_or(Error::LinkOutOfRange {
            link: id,
            count: self.links.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Total action count, `sum_l i_l * p_l`.
    pub fn action_count(&self) -> usize {
        self.total
    }

    /// First action index of link `id`'s block.
    pub fn offset(&self, id: usize) -> usize {
        self.offsets[id]
    }
}
