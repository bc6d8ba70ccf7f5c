use serde::{Deserialize, Serialize};

use super::{KpiTargets, SlotOutcome};
use crate::error::{Error, Result};

/// Per-slot reward split into its packet-loss and latency components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardValue {
    pub loss: f64,
    pub latency: f64,
    pub total: f64,
}

/// Reward for one KPI against its threshold.
///
/// When the KPI is met (`observed <= threshold`) the value is
/// `1 - erf(threshold - observed)`, which peaks at 1 on the threshold and
/// decays toward 0 as the KPI gets needlessly good. Otherwise it is
/// `erf(threshold - observed)`, negative and saturating at -1.
pub fn reward_component(observed: f64, threshold: f64) -> f64 {
    let gap = threshold - observed;
    if observed <= threshold {
        // erfc(x) == 1 - erf(x), without cancellation for large gaps.
        libm::erfc(gap)
    } else {
        libm::erf(gap)
    }
}

pub fn slot_reward(outcome: &SlotOutcome, targets: &KpiTargets) -> RewardValue {
    let loss = reward_component(outcome.loss, targets.loss);
    let latency = reward_component(outcome.latency_s, targets.latency_s);
    RewardValue {
        loss,
        latency,
        total: loss + latency,
    }
}

/// Arithmetic mean of the slot rewards of one decision period.
pub fn mean_reward(slot_rewards: &[f64]) -> Result<f64> {
    if slot_rewards.is_empty() {
        return Err(Error::Empty("slot rewards"));
    }
    Ok(slot_rewards.iter().sum::<f64>() / slot_rewards.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Frozen from a 40-digit erf evaluation.
    const ONE_MINUS_ERF_0_01: f64 = 0.988_716_584_444_150_4;
    const ERF_NEG_0_99: f64 = -0.838_508_069_555_369_8;
    const ERF_NEG_1_9: f64 = -0.992_790_429_235_257_5;

    fn outcome(loss: f64, latency_s: f64) -> SlotOutcome {
        SlotOutcome {
            loss,
            latency_s,
            delivered_bytes: 0,
            queue_bytes: 0,
        }
    }

    #[test]
    fn component_at_threshold_is_one() {
        assert_eq!(reward_component(0.1, 0.1), 1.0);
        assert_eq!(reward_component(0.0, 0.0), 1.0);
    }

    #[test]
    fn component_reference_values() {
        assert!((reward_component(0.0, 0.01) - ONE_MINUS_ERF_0_01).abs() < 1e-15);
        assert!((reward_component(1.0, 0.01) - ERF_NEG_0_99).abs() < 1e-15);
    }

    #[test]
    fn slot_reward_reference_values() {
        let t = KpiTargets::default();
        assert_eq!(slot_reward(&outcome(0.01, 0.1), &t).total, 2.0);
        let r = slot_reward(&outcome(0.0, 0.1), &t);
        assert!((r.total - (ONE_MINUS_ERF_0_01 + 1.0)).abs() < 1e-14);
        let r = slot_reward(&outcome(1.0, 2.0), &t);
        assert!((r.total - (ERF_NEG_0_99 + ERF_NEG_1_9)).abs() < 1e-14);
        assert!((r.total - (-1.831_298_498_790_627)).abs() < 1e-14);
    }

    #[test]
    fn mean_reward_values() {
        assert_eq!(mean_reward(&[2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert_eq!(mean_reward(&[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(mean_reward(&[0.5, 1.0, 1.5, 2.0]).unwrap(), 1.25);
        assert!(mean_reward(&[]).is_err());
    }

    #[test]
    fn targets_validate() {
        assert!(KpiTargets::new(1.5, 0.1).is_err());
        assert!(KpiTargets::new(0.01, 0.0).is_err());
        assert!(KpiTargets::new(0.0, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn component_sign_follows_threshold(obs in -5.0f64..5.0, th in -5.0f64..5.0) {
            let r = reward_component(obs, th);
            if obs <= th {
                prop_assert!(r > 0.0 && r <= 1.0);
            } else {
                prop_assert!((-1.0..0.0).contains(&r));
            }
        }

        #[test]
        fn component_is_erf_of_signed_gap(t in 0.0f64..1.0, d in 1e-6f64..2.0) {
            // Undershoot by d loses erf(d) from the maximum; overshoot by d
            // yields -erf(d).
            let under = reward_component(t - d, t);
            let over = reward_component(t + d, t);
            prop_assert!((1.0 - under + over).abs() < 1e-12);
        }

        #[test]
        fn total_is_bounded(x in 0.0f64..=1.0, l in 0.0f64..100.0, xt in 0.0f64..=1.0, lt in 1e-6f64..10.0) {
            let t = KpiTargets::new(xt, lt).unwrap();
            let r = slot_reward(&outcome(x, l), &t);
            prop_assert!((-2.0..=2.0).contains(&r.total));
            prop_assert_eq!(r.total, r.loss + r.latency);
        }
    }
}
