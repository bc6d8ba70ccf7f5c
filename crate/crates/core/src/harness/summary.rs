use serde::{Deserialize, Serialize};

use super::metrics::MetricsRow;
use crate::domain::KpiTargets;
use crate::error::{Error, Result};

/// Moving-average window, and the number of consecutive stable periods,
/// used to detect convergence.
pub const CONVERGENCE_WINDOW: usize = 100;
/// Largest relative change of the moving average counted as stable.
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffSource {
    Given,
    Detected,
    /// No convergence detected; the last quarter of the run is used.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtSummary {
    pub mt: usize,
    /// Over the whole run.
    pub mean_reward: f64,
    /// The rest are over post-cutoff slots.
    pub compliance: f64,
    pub throughput_mbps: f64,
    pub latency_s: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub link: usize,
    /// Post-cutoff MT-slots served on this link.
    pub mt_slots: u64,
    /// Mean over post-cutoff slots of the capacity fraction in use.
    pub utilization: f64,
    /// Mean capacity fraction per MT-slot served on the link.
    pub mean_fraction_per_mt: f64,
    pub mcs_histogram: Vec<u64>,
    /// Ten bins of width 0.1 over the per-MT capacity fraction.
    pub fraction_histogram: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mts: usize,
    pub periods: usize,
    pub slots: usize,
    pub cutoff_period: usize,
    pub cutoff_source: CutoffSource,
    pub best_mt: usize,
    pub worst_mt: usize,
    /// Post-cutoff fraction of MT-slots meeting both KPI targets.
    pub compliance: f64,
    pub mean_reward: f64,
    pub mean_latency_s: f64,
    pub mean_loss: f64,
    pub mean_throughput_mbps: f64,
    pub per_mt: Vec<MtSummary>,
    pub links: Vec<LinkSummary>,
}

/// Best, worst and average MT reward in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub slot: usize,
    pub best: f64,
    pub worst: f64,
    pub average: f64,
}

struct Shape {
    mts: usize,
    periods: usize,
    slots: usize,
}

fn shape(rows: &[MetricsRow]) -> Result<Shape> {
    if rows.is_empty() {
        return Err(Error::Empty("metrics"));
    }
    let mts = rows.iter().map(|r| r.mt).max().unwrap() + 1;
    let periods = rows.iter().map(|r| r.period).max().unwrap() + 1;
    let slots = rows.iter().map(|r| r.slot).max().unwrap() + 1;
    if rows.len() != mts * slots {
        return Err(Error::Metrics(format!(
            "{} rows for {mts} MTs over {slots} slots",
            rows.len()
        )));
    }
    Ok(Shape {
        mts,
        periods,
        slots,
    })
}

/// Mean reward over all MTs and slots of each period.
pub fn period_rewards(rows: &[MetricsRow]) -> Result<Vec<f64>> {
    let s = shape(rows)?;
    let mut sum = vec![0.0; s.periods];
    let mut n = vec![0usize; s.periods];
    for r in rows {
        sum[r.period] += r.reward;
        n[r.period] += 1;
    }
    Ok(sum
        .iter()
        .zip(&n)
        .map(|(s, &c)| s / c.max(1) as f64)
        .collect())
}

/// First period from which the moving-average reward changes by at most
/// the tolerance against its value one window earlier, for a full window of
/// consecutive periods.
pub fn detect_convergence(series: &[f64]) -> Option<usize> {
    let w = CONVERGENCE_WINDOW;
    if series.len() < 3 * w {
        return None;
    }
    let mut prefix = vec![0.0; series.len() + 1];
    for (i, v) in series.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let ma = |t: usize| (prefix[t + 1] - prefix[t + 1 - w]) / w as f64;
    let stable = |t: usize| {
        let (now, before) = (ma(t), ma(t - w));
        (now - before).abs() <= CONVERGENCE_TOLERANCE * before.abs()
    };
    let mut run = 0;
    for t in (2 * w - 1)..series.len() {
        if stable(t) {
            run += 1;
            if run == w {
                return Some(t + 1 - w);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Summary statistics of a run. With `cutoff` unset the convergence period
/// is detected from the data.
pub fn summarize(
    rows: &[MetricsRow],
    targets: &KpiTargets,
    cutoff: Option<usize>,
) -> Result<Summary> {
    let s = shape(rows)?;
    let (cutoff_period, cutoff_source) = match cutoff {
        Some(c) if c >= s.periods => {
            return Err(Error::InvalidParameter(format!(
                "cutoff period {c} is beyond the run's {} periods",
                s.periods
            )))
        }
        Some(c) => (c, CutoffSource::Given),
        None => match detect_convergence(&period_rewards(rows)?) {
            Some(c) => (c, CutoffSource::Detected),
            None => (s.periods - s.periods.div_ceil(4), CutoffSource::Fallback),
        },
    };

    let mut reward_sum = vec![0.0; s.mts];
    let mut post = vec![0u64; s.mts];
    let mut ok = vec![0u64; s.mts];
    let mut tput = vec![0.0; s.mts];
    let mut lat = vec![0.0; s.mts];
    let mut loss = vec![0.0; s.mts];
    let links = rows.iter().map(|r| r.link).max().unwrap() + 1;
    let mut mcs_hist: Vec<Vec<u64>> = vec![Vec::new(); links];
    let mut frac_hist = vec![vec![0u64; 10]; links];
    let mut link_slots = vec![0u64; links];
    let mut link_frac = vec![0.0; links];
    let mut post_slots = std::collections::BTreeSet::new();

    for r in rows {
        reward_sum[r.mt] += r.reward;
        if r.period < cutoff_period {
            continue;
        }
        post_slots.insert(r.slot);
        post[r.mt] += 1;
        if r.x_o <= targets.loss && r.l_o <= targets.latency_s {
            ok[r.mt] += 1;
        }
        tput[r.mt] += r.throughput;
        lat[r.mt] += r.l_o;
        loss[r.mt] += r.x_o;
        let h = &mut mcs_hist[r.link];
        if h.len() <= r.mcs {
            h.resize(r.mcs + 1, 0);
        }
        h[r.mcs] += 1;
        frac_hist[r.link][((r.resource_fraction * 10.0) as usize).min(9)] += 1;
        link_slots[r.link] += 1;
        link_frac[r.link] += r.resource_fraction;
    }

    let slots_per_mt = s.slots as f64;
    let per_mt: Vec<MtSummary> = (0..s.mts)
        .map(|mt| {
            let n = post[mt].max(1) as f64;
            MtSummary {
                mt,
                mean_reward: reward_sum[mt] / slots_per_mt,
                compliance: ok[mt] as f64 / n,
                throughput_mbps: tput[mt] / n,
                latency_s: lat[mt] / n,
                loss: loss[mt] / n,
            }
        })
        .collect();

    let mut best = 0;
    let mut worst = 0;
    for m in &per_mt {
        if m.mean_reward > per_mt[best].mean_reward {
            best = m.mt;
        }
        if m.mean_reward < per_mt[worst].mean_reward {
            worst = m.mt;
        }
    }

    let total_post: u64 = post.iter().sum();
    let np = total_post.max(1) as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / np;
    let n_post_slots = post_slots.len().max(1) as f64;
    let post_reward: f64 = rows
        .iter()
        .filter(|r| r.period >= cutoff_period)
        .map(|r| r.reward)
        .sum();

    Ok(Summary {
        mts: s.mts,
        periods: s.periods,
        slots: s.slots,
        cutoff_period,
        cutoff_source,
        best_mt: best,
        worst_mt: worst,
        compliance: ok.iter().sum::<u64>() as f64 / np,
        mean_reward: post_reward / np,
        mean_latency_s: mean(&lat),
        mean_loss: mean(&loss),
        mean_throughput_mbps: mean(&tput),
        per_mt,
        links: (0..links)
            .map(|l| LinkSummary {
                link: l,
                mt_slots: link_slots[l],
                utilization: link_frac[l] / n_post_slots,
                mean_fraction_per_mt: link_frac[l] / link_slots[l].max(1) as f64,
                mcs_histogram: std::mem::take(&mut mcs_hist[l]),
                fraction_histogram: std::mem::take(&mut frac_hist[l]),
            })
            .collect(),
    })
}

/// Per-slot reward of the best and worst MT (by whole-run mean) and the
/// average over all MTs.
pub fn reward_series(rows: &[MetricsRow], summary: &Summary) -> Result<Vec<SeriesRow>> {
    let s = shape(rows)?;
    let mut out: Vec<SeriesRow> = (0..s.slots)
        .map(|slot| SeriesRow {
            slot,
            best: 0.0,
            worst: 0.0,
            average: 0.0,
        })
        .collect();
    for r in rows {
        let o = &mut out[r.slot];
        if r.mt == summary.best_mt {
            o.best = r.reward;
        }
        if r.mt == summary.worst_mt {
            o.worst = r.reward;
        }
        o.average += r.reward / s.mts as f64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(period: usize, slot: usize, mt: usize, reward: f64) -> MetricsRow {
        MetricsRow {
            period,
            slot,
            mt,
            reward,
            r_x: 0.0,
            r_l: 0.0,
            x_o: 0.0,
            l_o: 0.05,
            throughput: 1.0,
            link: 0,
            mcs: 0,
            level: 0,
            resource_fraction: 0.25,
            snr_db: 10.0,
            buffer_bytes: 0,
            epsilon: 0.0,
            avg_reward: 0.0,
        }
    }

    #[test]
    fn equal_rewards_pick_mt_zero() {
        let rows: Vec<_> = (0..4)
            .flat_map(|t| (0..3).map(move |m| row(t, t, m, 1.0)))
            .collect();
        let s = summarize(&rows, &KpiTargets::default(), Some(0)).unwrap();
        assert_eq!((s.best_mt, s.worst_mt), (0, 0));
    }

    #[test]
    fn fixture_arithmetic() {
        // Two MTs, two periods of two slots.
        let mut rows = Vec::new();
        let rewards = [[2.0, -1.0], [1.0, 0.5], [1.5, 0.0], [0.5, 1.0]];
        for (slot, rw) in rewards.iter().enumerate() {
            for (mt, &r) in rw.iter().enumerate() {
                let mut x = row(slot / 2, slot, mt, r);
                x.throughput = (slot + mt) as f64;
                x.l_o = if mt == 1 && slot == 3 { 0.3 } else { 0.05 };
                x.link = mt;
                x.mcs = slot;
                x.resource_fraction = 0.1 * (slot + 1) as f64;
                rows.push(x);
            }
        }
        let s = summarize(&rows, &KpiTargets::default(), Some(1)).unwrap();
        assert_eq!(s.per_mt[0].mean_reward, 1.25);
        assert_eq!(s.per_mt[1].mean_reward, 0.125);
        assert_eq!((s.best_mt, s.worst_mt), (0, 1));
        // Post-cutoff: slots 2 and 3.
        assert_eq!(s.per_mt[0].compliance, 1.0);
        assert_eq!(s.per_mt[1].compliance, 0.5);
        assert_eq!(s.compliance, 0.75);
        assert_eq!(s.per_mt[0].throughput_mbps, 2.5);
        assert_eq!(s.per_mt[1].throughput_mbps, 3.5);
        assert_eq!(s.mean_reward, 0.75);
        assert_eq!(s.links[0].mcs_histogram, vec![0, 0, 1, 1]);
        assert!((s.links[1].utilization - 0.35).abs() < 1e-12);
        assert_eq!(
            s.links[1].fraction_histogram[3] + s.links[1].fraction_histogram[4],
            2
        );

        let series = reward_series(&rows, &s).unwrap();
        assert_eq!(series[0].best, 2.0);
        assert_eq!(series[0].worst, -1.0);
        assert_eq!(series[1].average, 0.75);
    }

    #[test]
    fn cutoff_beyond_run_is_an_error() {
        let rows = vec![row(0, 0, 0, 1.0)];
        assert!(summarize(&rows, &KpiTargets::default(), Some(1)).is_err());
    }

    #[test]
    fn convergence_detection() {
        let mut s: Vec<f64> = (0..300).map(|t| t as f64 / 300.0).collect();
        s.extend(std::iter::repeat_n(1.0, 400));
        let c = detect_convergence(&s).unwrap();
        // The moving average stays within 1% once the last ramp values leave
        // the window compared against.
        assert!(c > 300 && c < 500, "{c}");
        assert_eq!(detect_convergence(&vec![1.0; 299]), None);
        assert_eq!(detect_convergence(&vec![1.0; 300]), Some(199));
    }
}
