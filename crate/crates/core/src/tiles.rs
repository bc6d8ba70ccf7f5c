//! Hashed tile coding over (context, action) pairs.
//!
//! Each normalized context dimension is cut into `intervals` tiles. Tiling
//! `k` is displaced by `k * (2d + 1) / num_tilings` of a tile width along
//! dimension `d`. The tile coordinates, the tiling number and the action are
//! hashed into that tiling's own block of `tiles_per_tiling` weight slots, so
//! every featurization activates exactly one slot per tiling.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{ActionIndex, ContextBounds, ContextSample};
use crate::error::{Error, Result};

/// Which context dimensions take part in tiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiledDims {
    /// SNR, buffer and every link load.
    #[default]
    Full,
    /// SNR and buffer only.
    SnrBuffer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileCoderConfig {
    pub num_tilings: usize,
    pub tiles_per_tiling: usize,
    /// Tiles per normalized dimension.
    pub intervals: usize,
    pub dims: TiledDims,
    pub hash_seed: u64,
    pub bounds: ContextBounds,
}

impl TileCoderConfig {
    /// 8 tilings of 512 slots, 8 intervals per dimension.
    pub fn with_bounds(bounds: ContextBounds) -> Self {
        Self {
            num_tilings: 8,
            tiles_per_tiling: 512,
            intervals: 8,
            dims: TiledDims::Full,
            hash_seed: 0x5eed_71e5,
            bounds,
        }
    }

    /// `F`, the number of weight slots.
    pub fn table_size(&self) -> usize {
        self.num_tilings * self.tiles_per_tiling
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tilings == 0 || self.tiles_per_tiling == 0 || self.intervals == 0 {
            return Err(Error::InvalidParameter(
                "tilings, tiles per tiling and intervals must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Active weight indices for one (context, action) pair, one per tiling.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    indices: Vec<usize>,
}

impl FeatureSet {
    pub fn new(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of indices shared with `other`.
    pub fn shared_with(&self, other: &FeatureSet) -> usize {
        let a: BTreeSet<_> = self.indices.iter().collect();
        other.indices.iter().filter(|i| a.contains(i)).count()
    }
}

#[derive(Debug, Clone)]
pub struct TileCoder {
    cfg: TileCoderConfig,
}

impl TileCoder {
    pub fn new(cfg: TileCoderConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &TileCoderConfig {
        &self.cfg
    }

    pub fn table_size(&self) -> usize {
        self.cfg.table_size()
    }

    pub fn num_tilings(&self) -> usize {
        self.cfg.num_tilings
    }

    pub fn featurize(&self, ctx: &ContextSample, action: ActionIndex) -> FeatureSet {
        let mut out = Vec::with_capacity(self.cfg.num_tilings);
        self.featurize_into(ctx, action, &mut out);
        FeatureSet::new(out)
    }

    /// Like [`featurize`](Self::featurize), reusing `out`.
    pub fn featurize_into(&self, ctx: &ContextSample, action: ActionIndex, out: &mut Vec<usize>) {
        let scaled = self.scaled(ctx);
        self.features_scaled(&scaled, action, out);
    }

    /// Normalized context multiplied by `intervals * num_tilings`, floored.
    /// Shared across actions when scoring every action of one context.
    pub(crate) fn scaled(&self, ctx: &ContextSample) -> Vec<i64> {
        let mut u = self.cfg.bounds.normalize(ctx);
        if self.cfg.dims == TiledDims::SnrBuffer {
            u.truncate(2);
        }
        let res = (self.cfg.intervals * self.cfg.num_tilings) as f64;
        u.iter().map(|&x| (x * res).floor() as i64).collect()
    }

    pub(crate) fn features_scaled(
        &self,
        scaled: &[i64],
        action: ActionIndex,
        out: &mut Vec<usize>,
    ) {
        let hashes = self.context_hashes(scaled);
        self.features_hashed(&hashes, action, out);
    }

    /// Per-tiling hash of the context coordinates, before the action is mixed in.
    pub(crate) fn context_hashes(&self, scaled: &[i64]) -> Vec<u64> {
        let n = self.cfg.num_tilings as i64;
        (0..n)
            .map(|k| {
                let mut h =
                    mix(self.cfg.hash_seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                for (d, &q) in scaled.iter().enumerate() {
                    let coord = (q + k * (2 * d as i64 + 1)).div_euclid(n);
                    h = mix(h ^ coord as u64);
                }
                h
            })
            .collect()
    }

    pub(crate) fn features_hashed(
        &self,
        hashes: &[u64],
        action: ActionIndex,
        out: &mut Vec<usize>,
    ) {
        out.clear();
        let tpt = self.cfg.tiles_per_tiling;
        let a = (action.0 as u64).wrapping_add(0xa076_1d64_78bd_642f);
        for (k, &h) in hashes.iter().enumerate() {
            out.push(k * tpt + (mix(h ^ a) % tpt as u64) as usize);
        }
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Linear action value: the sum of the weights at the active indices.
pub fn q_hat(weights: &[f64], features: &FeatureSet) -> Result<f64> {
    let mut q = 0.0;
    for &i in features.indices() {
        q += *weights.get(i).ok_or(Error::FeatureOutOfRange {
            index: i,
            size: weights.len(),
        })?;
    }
    Ok(q)
}
