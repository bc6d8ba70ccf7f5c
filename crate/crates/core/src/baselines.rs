//! Comparison policies: a contextual bandit sharing the SARSA agent's
//! features and selection rule, and a fixed CQI-table MCS rule with an equal
//! resource split.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{
    bootstrap_action, decide_sequential, select_action, AgentParams, DecideContext, Decision,
    Policy, ValueModel,
};
use crate::domain::{
    encode_action, ActionIndex, AppliedAction, ContextSample, DecodedAction, LinkCatalog, LinkKind,
};
use crate::error::{Error, Result};
use crate::tiles::{q_hat, FeatureSet, TileCoder};

/// Contextual bandit: regresses `q_hat` on the period's mean reward, with no
/// average-reward estimate and no bootstrapped next-period term.
#[derive(Debug, Clone)]
pub struct BanditState {
    coder: TileCoder,
    catalog: LinkCatalog,
    weights: Vec<f64>,
    epsilon: f64,
    epsilon_decay: f64,
    alpha: f64,
    decide_ctx: DecideContext,
}

impl BanditState {
    pub fn new(coder: TileCoder, catalog: LinkCatalog, params: &AgentParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            weights: vec![0.0; coder.table_size()],
            coder,
            catalog,
            epsilon: params.epsilon,
            epsilon_decay: params.epsilon_decay,
            alpha: params.alpha,
            decide_ctx: DecideContext::default(),
        })
    }

    pub fn with_decide_context(mut self, dctx: DecideContext) -> Self {
        self.decide_ctx = dctx;
        self
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon.clamp(0.0, 1.0);
    }

    /// `w_f += α (r̄ − q_hat)` at each active index.
    pub fn cb_update(&mut self, mean_reward: f64, features: &FeatureSet) -> Result<()> {
        let err = mean_reward - q_hat(&self.weights, features)?;
        for &i in features.indices() {
            self.weights[i] += self.alpha * err;
        }
        Ok(())
    }
}

/// ε-greedy over the bandit's action values, as for the SARSA agent.
pub fn cb_select<R: Rng + ?Sized>(
    bandit: &BanditState,
    ctx: &ContextSample,
    rng: &mut R,
) -> Result<ActionIndex> {
    let q = bandit.action_values(ctx, bandit.catalog.action_count());
    Ok(select_action(bandit.epsilon, &q, rng)?.0)
}

impl ValueModel for BanditState {
    fn coder(&self) -> &TileCoder {
        &self.coder
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Policy for BanditState {
    fn catalog(&self) -> &LinkCatalog {
        &self.catalog
    }

    fn bootstrap(&mut self, contexts: &[ContextSample]) -> Result<Decision> {
        let a = bootstrap_action(&self.catalog)?;
        decide_sequential(self, contexts, &self.catalog, &self.decide_ctx, |_, _| {
            Ok((a, true))
        })
    }

    fn decide(
        &mut self,
        mean_contexts: &[ContextSample],
        rng: &mut dyn rand::RngCore,
    ) -> Result<Decision> {
        let n = self.catalog.action_count();
        let eps = self.epsilon;
        let d = decide_sequential(
            self,
            mean_contexts,
            &self.catalog,
            &self.decide_ctx,
            |_, ctx| select_action(eps, &self.action_values(ctx, n), rng),
        )?;
        self.epsilon *= self.epsilon_decay;
        Ok(d)
    }

    fn learn(&mut self, prev: &Decision, mean_rewards: &[f64], _next: &Decision) -> Result<()> {
        for (mt, &r) in mean_rewards.iter().enumerate() {
            let f = self
                .coder
                .featurize(&prev.contexts[mt], prev.applied[mt].index);
            self.cb_update(r, &f)?;
        }
        Ok(())
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn avg_reward(&self, _mt: usize) -> f64 {
        0.0
    }
}

/// SNR thresholds (dB) and the MCS chosen at or above each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqiTable {
    entries: Vec<(f64, usize)>,
}

impl CqiTable {
    pub fn new(entries: Vec<(f64, usize)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("CQI table"));
        }
        for w in entries.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidParameter(
                    "CQI thresholds must be strictly increasing".into(),
                ));
            }
            if w[0].1 > w[1].1 {
                return Err(Error::InvalidParameter(
                    "CQI MCS indices must be non-decreasing".into(),
                ));
            }
        }
        Ok(Self { entries })
    }

    /// `count` thresholds evenly spaced over `[lo_db, hi_db]`, mapped evenly
    /// (rounded) onto MCS `0..mcs_count`.
    pub fn evenly_spaced(count: usize, lo_db: f64, hi_db: f64, mcs_count: usize) -> Result<Self> {
        if count < 2 || mcs_count == 0 {
            return Err(Error::InvalidParameter(
                "CQI table needs at least two entries".into(),
            ));
        }
        let last = (count - 1) as f64;
        Self::new(
            (0..count)
                .map(|i| {
                    let t = lo_db + (hi_db - lo_db) * i as f64 / last;
                    let m = (i as f64 * (mcs_count - 1) as f64 / last).round() as usize;
                    (t, m)
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    /// MCS of the highest threshold not above `snr_db`; the first entry's MCS
    /// below every threshold.
    pub fn lookup(&self, snr_db: f64) -> usize {
        let i = self.entries.partition_point(|&(t, _)| t <= snr_db);
        self.entries[i.saturating_sub(1)].1
    }
}

/// Table MCS on the given link, with an equal share of its capacity.
pub fn static_lte_select(
    snr_db: f64,
    table: &CqiTable,
    link: usize,
    sharing_mts: usize,
    catalog: &LinkCatalog,
) -> Result<AppliedAction> {
    let spec = catalog.link(link)?;
    let mcs = table.lookup(snr_db).min(spec.mcs_count() - 1);
    let share = spec.capacity / sharing_mts.max(1) as f64;
    let level = spec.floor_level(share).unwrap_or(0);
    let amount = spec.level_amount(level).min(share);
    Ok(AppliedAction {
        index: encode_action(link, mcs, level, catalog)?,
        action: DecodedAction { link, mcs, level },
        amount,
    })
}

/// Every MT on the first resource-block link, MCS from the CQI table, equal split.
#[derive(Debug, Clone)]
pub struct StaticLte {
    catalog: LinkCatalog,
    table: CqiTable,
    link: usize,
}

impl StaticLte {
    pub fn new(catalog: LinkCatalog, table: CqiTable) -> Result<Self> {
        let link = catalog
            .links()
            .iter()
            .position(|l| l.kind == LinkKind::ResourceBlock)
            .ok_or_else(|| {
                Error::InvalidParameter("static LTE policy needs a resource-block link".into())
            })?;
        Ok(Self {
            catalog,
            table,
            link,
        })
    }

    fn decision(&self, contexts: &[ContextSample]) -> Result<Decision> {
        let k = contexts.len();
        let applied = contexts
            .iter()
            .map(|c| static_lte_select(c.snr_db, &self.table, self.link, k, &self.catalog))
            .collect::<Result<Vec<_>>>()?;
        Ok(Decision {
            contexts: contexts.to_vec(),
            greedy: applied.clone(),
            exploited: vec![true; k],
            applied,
        })
    }
}

impl Policy for StaticLte {
    fn catalog(&self) -> &LinkCatalog {
        &self.catalog
    }

    fn bootstrap(&mut self, contexts: &[ContextSample]) -> Result<Decision> {
        self.decision(contexts)
    }

    fn decide(
        &mut self,
        mean_contexts: &[ContextSample],
        _rng: &mut dyn rand::RngCore,
    ) -> Result<Decision> {
        self.decision(mean_contexts)
    }

    fn learn(&mut self, _prev: &Decision, _mean_rewards: &[f64], _next: &Decision) -> Result<()> {
        Ok(())
    }

    fn epsilon(&self) -> f64 {
        0.0
    }

    fn avg_reward(&self, _mt: usize) -> f64 {
        0.0
    }
}
