use super::{weighted_mean_context, Decision, Policy};
use crate::domain::{
    mean_reward, slot_reward, AppliedAction, ContextSample, KpiTargets, RewardValue, SlotOutcome,
};
use crate::env::Environment;
use crate::error::{Error, Result};

/// One MT's record of a decision period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodTrace {
    /// Action in force during the period.
    pub active: AppliedAction,
    pub slot_contexts: Vec<ContextSample>,
    pub slot_outcomes: Vec<SlotOutcome>,
    pub slot_rewards: Vec<RewardValue>,
    pub mean_context: ContextSample,
    pub mean_reward: f64,
    /// Greedy and post-allocation actions chosen for the next period.
    pub greedy_action: AppliedAction,
    pub applied_action: AppliedAction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodResult {
    pub traces: Vec<PeriodTrace>,
    pub next: Decision,
    /// ε and per-MT average reward after learning.
    pub epsilon: f64,
    pub avg_reward: Vec<f64>,
}

/// Apply `current` for `slots` slots, average, decide the next period and
/// learn from the transition.
///
/// The contexts in `slot_contexts` are those observed at the end of each slot,
/// which are the ones the following slot runs under.
pub fn run_period<P, E, R>(
    policy: &mut P,
    env: &mut E,
    current: &Decision,
    slots: usize,
    targets: &KpiTargets,
    rng: &mut R,
) -> Result<PeriodResult>
where
    P: Policy + ?Sized,
    E: Environment + ?Sized,
    R: rand::RngCore,
{
    if slots == 0 {
        return Err(Error::InvalidParameter(
            "decision period must be at least one slot".into(),
        ));
    }
    let k = env.mt_count();
    let mut ctx: Vec<Vec<ContextSample>> = vec![Vec::with_capacity(slots); k];
    let mut out: Vec<Vec<SlotOutcome>> = vec![Vec::with_capacity(slots); k];
    let mut rew: Vec<Vec<RewardValue>> = vec![Vec::with_capacity(slots); k];
    for _ in 0..slots {
        for (mt, (o, c)) in env.step_slot(&current.applied)?.into_iter().enumerate() {
            rew[mt].push(slot_reward(&o, targets));
            out[mt].push(o);
            ctx[mt].push(c);
        }
    }
    let means = ctx
        .iter()
        .map(|c| weighted_mean_context(c))
        .collect::<Result<Vec<_>>>()?;
    let rbar = rew
        .iter()
        .map(|r| mean_reward(&r.iter().map(|v| v.total).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;

    let next = policy.decide(&means, rng)?;
    policy.learn(current, &rbar, &next)?;

    let traces = (0..k)
        .map(|mt| PeriodTrace {
            active: current.applied[mt],
            slot_contexts: std::mem::take(&mut ctx[mt]),
            slot_outcomes: std::mem::take(&mut out[mt]),
            slot_rewards: std::mem::take(&mut rew[mt]),
            mean_context: means[mt].clone(),
            mean_reward: rbar[mt],
            greedy_action: next.greedy[mt],
            applied_action: next.applied[mt],
        })
        .collect();
    Ok(PeriodResult {
        traces,
        epsilon: policy.epsilon(),
        avg_reward: (0..k).map(|mt| policy.avg_reward(mt)).collect(),
        next,
    })
}
