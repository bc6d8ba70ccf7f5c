//! Differential semi-gradient SARSA over tile-coded (context, action) pairs,
//! and the per-period decision loop shared by every learning policy.

mod period;
mod snapshot;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use period::{run_period, PeriodResult, PeriodTrace};
pub use snapshot::{AgentSnapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::domain::{
    decode_action, encode_action, ActionIndex, AppliedAction, ContextSample, LinkCatalog,
};
use crate::error::{Error, Result};
use crate::pareto::{self, CriterionEvaluator};
use crate::tiles::{q_hat, FeatureSet, TileCoder};

/// Component-wise mean of the slot contexts with weights `1, 2, ..., N`, so
/// the latest slot counts most.
pub fn weighted_mean_context(samples: &[ContextSample]) -> Result<ContextSample> {
    let first = samples.first().ok_or(Error::Empty("context samples"))?;
    let dims = first.dims();
    let mut acc = vec![0.0; dims];
    let mut norm = 0.0;
    for (n, s) in samples.iter().enumerate() {
        if s.dims() != dims {
            return Err(Error::InvalidParameter(format!(
                "context dimension changed from {dims} to {}",
                s.dims()
            )));
        }
        let y = (n + 1) as f64;
        for (a, v) in acc.iter_mut().zip(s.to_vec()) {
            *a += y * v;
        }
        norm += y;
    }
    for a in &mut acc {
        *a /= norm;
    }
    ContextSample::from_slice(&acc)
}

/// ε-greedy choice. Returns the action and whether it was the greedy one.
///
/// One uniform draw decides between exploring and exploiting; exploring draws
/// a second uniform index. Greedy ties go to the lowest index.
pub fn select_action<R: Rng + ?Sized>(
    epsilon: f64,
    q: &[f64],
    rng: &mut R,
) -> Result<(ActionIndex, bool)> {
    if q.is_empty() {
        return Err(Error::Empty("action values"));
    }
    if rng.random::<f64>() < epsilon {
        return Ok((ActionIndex(rng.random_range(0..q.len())), false));
    }
    Ok((argmax(q), true))
}

fn argmax(q: &[f64]) -> ActionIndex {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    ActionIndex(best)
}

/// `δ = r̄ − r̂ + q_next − q_cur`.
pub fn td_error(mean_reward: f64, avg_reward: f64, q_next: f64, q_cur: f64) -> f64 {
    mean_reward - avg_reward + q_next - q_cur
}

/// A tile-coded linear action-value model.
pub trait ValueModel {
    fn coder(&self) -> &TileCoder;
    fn weights(&self) -> &[f64];

    fn q(&self, ctx: &ContextSample, action: ActionIndex) -> f64 {
        let f = self.coder().featurize(ctx, action);
        q_hat(self.weights(), &f).expect("feature indices come from the model's own coder")
    }

    /// `q_hat` for actions `0..n`.
    fn action_values(&self, ctx: &ContextSample, n: usize) -> Vec<f64> {
        let coder = self.coder();
        let w = self.weights();
        let hashes = coder.context_hashes(&coder.scaled(ctx));
        let mut buf = Vec::with_capacity(coder.num_tilings());
        (0..n)
            .map(|a| {
                coder.features_hashed(&hashes, ActionIndex(a), &mut buf);
                buf.iter().map(|&i| w[i]).sum()
            })
            .collect()
    }
}

/// How the Pareto step scores a candidate resource amount for an MT.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    /// Learned action value of the same link and MCS at the candidate level,
    /// maximized over levels not above the candidate so it never decreases.
    #[default]
    QValue,
    /// Predicted fraction of offered traffic served:
    /// `min(1, amount * rate * (1 - BLER(snr)) / offered)`.
    ServiceRatio,
}

/// Greedy and applied actions for every MT for one decision period, plus the
/// contexts they were chosen under.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Mean contexts with link loads replaced by the sequential estimate.
    pub contexts: Vec<ContextSample>,
    pub greedy: Vec<AppliedAction>,
    /// Whether each greedy action came from the exploitation branch.
    pub exploited: Vec<bool>,
    /// Post-allocation actions, capacity-feasible on every link.
    pub applied: Vec<AppliedAction>,
}

/// A policy driven by `run_period`.
pub trait Policy {
    fn catalog(&self) -> &LinkCatalog;
    /// Decision for the first period, before anything has been observed.
    fn bootstrap(&mut self, contexts: &[ContextSample]) -> Result<Decision>;
    /// Decide the next period from per-MT mean contexts.
    fn decide(
        &mut self,
        mean_contexts: &[ContextSample],
        rng: &mut dyn rand::RngCore,
    ) -> Result<Decision>;
    /// Learn from a completed period.
    fn learn(&mut self, prev: &Decision, mean_rewards: &[f64], next: &Decision) -> Result<()>;
    fn epsilon(&self) -> f64;
    fn avg_reward(&self, mt: usize) -> f64;
}

/// Extra inputs for the Pareto criteria.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecideContext {
    pub criterion: CriterionKind,
    /// Offered load per MT in bits per second (service-ratio criterion).
    pub offered_bps: Vec<f64>,
    /// Link loads present before any MT is placed.
    pub background_load: Vec<f64>,
}

struct QCriterion<'a, M: ValueModel + ?Sized> {
    model: &'a M,
    contexts: &'a [ContextSample],
    catalog: &'a LinkCatalog,
}

impl<M: ValueModel + ?Sized> CriterionEvaluator for QCriterion<'_, M> {
    fn score(&self, mt: usize, amount: f64, link: usize, mcs: usize) -> f64 {
        let spec = &self.catalog.links()[link];
        let top = spec.floor_level(amount).unwrap_or(0);
        (0..=top)
            .map(|lv| {
                let a = encode_action(link, mcs, lv, self.catalog).expect("level within link");
                self.model.q(&self.contexts[mt], a)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct ServiceCriterion<'a> {
    contexts: &'a [ContextSample],
    catalog: &'a LinkCatalog,
    offered_bps: &'a [f64],
}

impl CriterionEvaluator for ServiceCriterion<'_> {
    fn score(&self, mt: usize, amount: f64, link: usize, mcs: usize) -> f64 {
        let spec = &self.catalog.links()[link];
        let ok = 1.0 - crate::env::block_error_probability(spec, mcs, self.contexts[mt].snr_db);
        let served = amount * spec.mcs[mcs].rate_bps_per_unit * ok;
        match self.offered_bps.get(mt) {
            Some(&o) if o > 0.0 => (served / o).min(1.0),
            _ => 1.0,
        }
    }
}

/// Sequential per-MT choice followed by per-link Pareto refinement.
///
/// MTs are visited in index order. Each sees the link loads implied by the
/// greedy choices of the MTs before it (on top of the background load).
/// `choose` returns the action for one MT given its adjusted context.
pub fn decide_sequential<M, F>(
    model: &M,
    mean_contexts: &[ContextSample],
    catalog: &LinkCatalog,
    dctx: &DecideContext,
    mut choose: F,
) -> Result<Decision>
where
    M: ValueModel + ?Sized,
    F: FnMut(usize, &ContextSample) -> Result<(ActionIndex, bool)>,
{
    if mean_contexts.is_empty() {
        return Err(Error::Empty("MT contexts"));
    }
    let mut loads = if dctx.background_load.is_empty() {
        vec![0.0; catalog.len()]
    } else {
        dctx.background_load.clone()
    };
    if loads.len() != catalog.len() {
        return Err(Error::InvalidParameter(format!(
            "{} background loads for {} links",
            loads.len(),
            catalog.len()
        )));
    }
    let mut contexts = Vec::with_capacity(mean_contexts.len());
    let mut greedy = Vec::with_capacity(mean_contexts.len());
    let mut exploited = Vec::with_capacity(mean_contexts.len());
    for (mt, mean) in mean_contexts.iter().enumerate() {
        let mut ctx = mean.clone();
        ctx.link_loads.clone_from(&loads);
        let (a, ex) = choose(mt, &ctx)?;
        let applied = AppliedAction::nominal(a, catalog)?;
        let cap = catalog.link(applied.action.link)?.capacity;
        loads[applied.action.link] = (loads[applied.action.link] + applied.amount / cap).min(1.0);
        contexts.push(ctx);
        greedy.push(applied);
        exploited.push(ex);
    }
    let applied = match dctx.criterion {
        CriterionKind::QValue => pareto::allocate(
            &greedy,
            catalog,
            &QCriterion {
                model,
                contexts: &contexts,
                catalog,
            },
        )?,
        CriterionKind::ServiceRatio => pareto::allocate(
            &greedy,
            catalog,
            &ServiceCriterion {
                contexts: &contexts,
                catalog,
                offered_bps: &dctx.offered_bps,
            },
        )?,
    };
    Ok(Decision {
        contexts,
        greedy,
        exploited,
        applied,
    })
}

/// First link, lowest MCS, largest resource level.
pub fn bootstrap_action(catalog: &LinkCatalog) -> Result<ActionIndex> {
    let link = catalog.link(0)?;
    encode_action(0, 0, link.level_count() - 1, catalog)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub epsilon: f64,
    pub epsilon_decay: f64,
    pub alpha: f64,
    pub beta: f64,
    /// One average-reward estimate for all MTs instead of one each.
    pub shared_avg_reward: bool,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            epsilon_decay: 0.999,
            alpha: 0.01,
            beta: 0.01,
            shared_avg_reward: false,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if !(0.0..=1.0).contains(&self.epsilon) || !(0.0..=1.0).contains(&self.epsilon_decay) {
            return Err(Error::InvalidParameter(
                "epsilon and its decay must lie in [0, 1]".into(),
            ));
        }
        if !unit(self.alpha) || !unit(self.beta) {
            return Err(Error::InvalidParameter(
                "alpha and beta must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Learner state for the SARSA policy.
#[derive(Debug, Clone)]
pub struct AgentState {
    coder: TileCoder,
    catalog: LinkCatalog,
    weights: Vec<f64>,
    avg_reward: Vec<f64>,
    epsilon: f64,
    epsilon_decay: f64,
    alpha: f64,
    beta: f64,
    decide_ctx: DecideContext,
}

impl AgentState {
    /// Zero weights and average-reward estimates.
    pub fn new(
        coder: TileCoder,
        catalog: LinkCatalog,
        mts: usize,
        params: &AgentParams,
    ) -> Result<Self> {
        params.validate()?;
        if mts == 0 {
            return Err(Error::Empty("MT list"));
        }
        let f = coder.table_size();
        Ok(Self {
            coder,
            catalog,
            weights: vec![0.0; f],
            avg_reward: vec![0.0; if params.shared_avg_reward { 1 } else { mts }],
            epsilon: params.epsilon,
            epsilon_decay: params.epsilon_decay,
            alpha: params.alpha,
            beta: params.beta,
            decide_ctx: DecideContext::default(),
        })
    }

    pub fn with_decide_context(mut self, dctx: DecideContext) -> Self {
        self.decide_ctx = dctx;
        self
    }

    pub fn decide_context(&self) -> &DecideContext {
        &self.decide_ctx
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon_decay(&self) -> f64 {
        self.epsilon_decay
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon.clamp(0.0, 1.0);
    }

    pub fn avg_rewards(&self) -> &[f64] {
        &self.avg_reward
    }

    fn slot(&self, mt: usize) -> usize {
        if self.avg_reward.len() == 1 {
            0
        } else {
            mt
        }
    }

    /// `δ` for one MT from its previous and next (context, action) pairs.
    pub fn td_error_for(
        &self,
        mt: usize,
        mean_reward: f64,
        prev: &FeatureSet,
        next: &FeatureSet,
    ) -> Result<f64> {
        Ok(td_error(
            mean_reward,
            self.avg_reward[self.slot(mt)],
            q_hat(&self.weights, next)?,
            q_hat(&self.weights, prev)?,
        ))
    }

    /// `r̂ += βδ` and `w_f += αδ` at each active index.
    pub fn apply_update(&mut self, mt: usize, delta: f64, features: &FeatureSet) -> Result<()> {
        for &i in features.indices() {
            if i >= self.weights.len() {
                return Err(Error::FeatureOutOfRange {
                    index: i,
                    size: self.weights.len(),
                });
            }
        }
        let s = self.slot(mt);
        self.avg_reward[s] += self.beta * delta;
        for &i in features.indices() {
            self.weights[i] += self.alpha * delta;
        }
        Ok(())
    }

    /// Greedy choice per MT, Pareto refinement, then one ε decay.
    pub fn decide_all<R: Rng + ?Sized>(
        &mut self,
        mean_contexts: &[ContextSample],
        rng: &mut R,
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

    pub fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot::capture(self)
    }

    /// Replace weights, average rewards and ε from a snapshot taken with the
    /// same tile-coder configuration.
    pub fn restore(&mut self, snap: &AgentSnapshot) -> Result<()> {
        snap.check_compatible(self)?;
        self.weights.clone_from(&snap.weights);
        self.avg_reward.clone_from(&snap.avg_reward);
        self.epsilon = snap.epsilon;
        Ok(())
    }
}

impl ValueModel for AgentState {
    fn coder(&self) -> &TileCoder {
        &self.coder
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Policy for AgentState {
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
        self.decide_all(mean_contexts, rng)
    }

    fn learn(&mut self, prev: &Decision, mean_rewards: &[f64], next: &Decision) -> Result<()> {
        for (mt, &r) in mean_rewards.iter().enumerate() {
            let f_prev = self
                .coder
                .featurize(&prev.contexts[mt], prev.applied[mt].index);
            let f_next = self
                .coder
                .featurize(&next.contexts[mt], next.applied[mt].index);
            let delta = self.td_error_for(mt, r, &f_prev, &f_next)?;
            self.apply_update(mt, delta, &f_prev)?;
        }
        Ok(())
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn avg_reward(&self, mt: usize) -> f64 {
        self.avg_reward[self.slot(mt)]
    }
}

/// Decode helper for traces.
pub fn describe(a: ActionIndex, catalog: &LinkCatalog) -> Result<(usize, usize, usize)> {
    let d = decode_action(a, catalog)?;
    Ok((d.link, d.mcs, d.level))
}
