//! Pareto-efficient fair refinement of the resource amounts requested on one
//! link.
//!
//! When the greedy requests on a link exceed its capacity, the requests `S1`
//! are expanded into every component-wise larger combination on the level
//! grid whose total stays within `|K| * capacity`, each combination is divided
//! by `|K|`, the non-dominated combinations under the per-MT criteria are kept,
//! and the one maximizing the smallest weighted criterion wins. Winning
//! amounts are floored onto the level grid.

use std::cmp::Ordering;

use crate::domain::{encode_action, AppliedAction, LinkCatalog, LinkSpec};
use crate::error::{Error, Result};

/// Resource amounts for the MTs sharing one link, in MT order.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSolution(pub Vec<f64>);

impl AllocationSolution {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Non-negative per-MT coefficients summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoWeights(Vec<f64>);

impl ParetoWeights {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Empty("pareto weights"));
        }
        if v.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParameter(
                "pareto weights must be non-negative".into(),
            ));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "pareto weights sum to {s}, not 1"
            )));
        }
        Ok(Self(v))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Scores a candidate amount for one MT; larger is better.
///
/// Implementations must be deterministic. `mt` is the MT's position in the
/// full decision (not within the link).
pub trait CriterionEvaluator {
    fn score(&self, mt: usize, amount: f64, link: usize, mcs: usize) -> f64;
}

impl<F> CriterionEvaluator for F
where
    F: Fn(usize, f64, usize, usize) -> f64,
{
    fn score(&self, mt: usize, amount: f64, link: usize, mcs: usize) -> f64 {
        self(mt, amount, link, mcs)
    }
}

fn tol(capacity: f64) -> f64 {
    1e-9 * capacity.abs().max(1.0)
}

/// True iff the requested amounts exceed the link capacity.
pub fn needs_refinement(amounts: &[f64], capacity: f64) -> bool {
    amounts.iter().sum::<f64>() > capacity + tol(capacity)
}

/// Per-MT candidate values: `S1`'s own value followed by every grid value
/// above it.
fn candidate_values(s1: &[f64], grids: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if s1.len() != grids.len() {
        return Err(Error::InvalidParameter(format!(
            "{} requests but {} grids",
            s1.len(),
            grids.len()
        )));
    }
    s1.iter()
        .zip(grids)
        .map(|(&r, grid)| {
            if grid.is_empty() {
                return Err(Error::Empty("level grid"));
            }
            let t = tol(r);
            let mut c = vec![r];
            c.extend(grid.iter().copied().filter(|&g| g > r + t));
            Ok(c)
        })
        .collect()
}

/// Lexicographic product (first MT outermost) of candidate indices whose
/// total is within `limit`.
fn expand_indices(cands: &[Vec<f64>], limit: f64) -> Vec<Vec<usize>> {
    let k = cands.len();
    let lim = limit + tol(limit);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    // Smallest possible sum of the suffix starting at each MT.
    let mut suffix_min = vec![0.0; k + 1];
    for m in (0..k).rev() {
        suffix_min[m] = suffix_min[m + 1] + cands[m][0];
    }
    fn rec(
        m: usize,
        acc: f64,
        cands: &[Vec<f64>],
        suffix_min: &[f64],
        lim: f64,
        idx: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if m == cands.len() {
            out.push(idx.clone());
            return;
        }
        for (j, &v) in cands[m].iter().enumerate() {
            // Candidates ascend, so once the cheapest completion overflows,
            // every later value does too.
            if acc + v + suffix_min[m + 1] > lim {
                break;
            }
            idx[m] = j;
            rec(m + 1, acc + v, cands, suffix_min, lim, idx, out);
        }
    }
    rec(0, 0.0, cands, &suffix_min, lim, &mut idx, &mut out);
    out
}

/// The expanded solution set: every component-wise `>= S1` combination of
/// grid values whose total is at most `|K| * capacity`, `S1` first.
pub fn expand_solutions(
    s1: &AllocationSolution,
    capacity: f64,
    grids: &[Vec<f64>],
) -> Result<Vec<AllocationSolution>> {
    let cands = candidate_values(&s1.0, grids)?;
    let limit = cands.len() as f64 * capacity;
    if s1.total() > limit + tol(limit) {
        return Err(Error::InvalidParameter(format!(
            "requests total {} exceed {} MTs x capacity {capacity}",
            s1.total(),
            cands.len()
        )));
    }
    Ok(expand_indices(&cands, limit)
        .into_iter()
        .map(|ix| AllocationSolution(ix.iter().enumerate().map(|(m, &j)| cands[m][j]).collect()))
        .collect())
}

/// Divide every component by the number of MTs sharing the link.
pub fn scale_solutions(set: &[AllocationSolution], mts: usize) -> Vec<AllocationSolution> {
    let k = mts.max(1) as f64;
    set.iter()
        .map(|s| AllocationSolution(s.0.iter().map(|&r| r / k).collect()))
        .collect()
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Indices (ascending) of the criterion vectors no other vector dominates.
pub fn pareto_front(scores: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let sum = |i: usize| scores[i].iter().sum::<f64>();
    order.sort_by(|&a, &b| sum(b).partial_cmp(&sum(a)).unwrap_or(Ordering::Equal));
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if front.iter().any(|&f| dominates(&scores[f], &scores[i])) {
            continue;
        }
        front.retain(|&f| !dominates(&scores[i], &scores[f]));
        front.push(i);
    }
    front.sort_unstable();
    front
}

/// Pick the front member maximizing `min_i v_i * score_i`.
///
/// Ties go to the lexicographically largest ascending-sorted weighted vector,
/// then to the lowest index.
pub fn select_fair(front: &[usize], scores: &[Vec<f64>], weights: &ParetoWeights) -> Result<usize> {
    select_weighted(front, scores, weights.as_slice())
}

fn select_weighted(front: &[usize], scores: &[Vec<f64>], weights: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, Vec<f64>)> = None;
    for &i in front {
        let mut w: Vec<f64> = scores[i].iter().zip(weights).map(|(s, v)| s * v).collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let better = match &best {
            None => true,
            Some((_, bw)) => match w[0].partial_cmp(&bw[0]) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Less) => false,
                _ => w.partial_cmp(bw) == Some(Ordering::Greater),
            },
        };
        if better {
            best = Some((i, w));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Empty("pareto front"))
}

/// Score table for one MT over its candidate values, after scaling by `k`.
fn score_candidates(
    criteria: &dyn CriterionEvaluator,
    mt: usize,
    cands: &[f64],
    k: f64,
    link: usize,
    mcs: usize,
) -> Vec<f64> {
    cands
        .iter()
        .map(|&v| criteria.score(mt, v / k, link, mcs))
        .collect()
}

/// Candidate index per MT of the fair Pareto-efficient solution.
///
/// Scores are separable: MT `m`'s score depends only on its own amount. When
/// even the largest candidates fit within `limit`, the expanded set is the
/// full product, its Pareto front is the product of the per-MT argmax sets,
/// every front member has the same score vector, and the lowest enumeration
/// index is each MT's first argmax. Otherwise the front is enumerated.
fn choose_indices(cands: &[Vec<f64>], tables: &[Vec<f64>], limit: f64) -> Result<Vec<usize>> {
    let top: f64 = cands.iter().map(|c| c[c.len() - 1]).sum();
    if top <= limit + tol(limit) {
        return Ok(tables
            .iter()
            .map(|t| {
                let mut best = 0;
                for (j, &v) in t.iter().enumerate() {
                    if v > t[best] {
                        best = j;
                    }
                }
                best
            })
            .collect());
    }
    let expanded = expand_indices(cands, limit);
    let scores: Vec<Vec<f64>> = expanded
        .iter()
        .map(|ix| {
            ix.iter()
                .enumerate()
                .map(|(pos, &j)| tables[pos][j])
                .collect()
        })
        .collect();
    let front = pareto_front(&scores);
    let k = cands.len();
    let chosen = select_fair(&front, &scores, &ParetoWeights::uniform(k))?;
    Ok(expanded[chosen].clone())
}

/// Refine the MTs sharing one link. `members` are positions into `actions`.
fn refine_link(
    actions: &mut [AppliedAction],
    members: &[usize],
    link_id: usize,
    catalog: &LinkCatalog,
    criteria: &dyn CriterionEvaluator,
) -> Result<()> {
    let spec: &LinkSpec = catalog.link(link_id)?;
    let s1: Vec<f64> = members.iter().map(|&m| actions[m].amount).collect();
    if !needs_refinement(&s1, spec.capacity) {
        return Ok(());
    }
    let k = members.len();
    let grids = vec![spec.levels.clone(); k];
    let cands = candidate_values(&s1, &grids)?;
    let tables: Vec<Vec<f64>> = members
        .iter()
        .enumerate()
        .map(|(pos, &m)| {
            score_candidates(
                criteria,
                m,
                &cands[pos],
                k as f64,
                link_id,
                actions[m].action.mcs,
            )
        })
        .collect();
    let chosen = choose_indices(&cands, &tables, k as f64 * spec.capacity)?;

    let scaled: Vec<f64> = chosen
        .iter()
        .enumerate()
        .map(|(pos, &j)| cands[pos][j] / k as f64)
        .collect();
    let levels: Vec<usize> = scaled
        .iter()
        .map(|&v| spec.floor_level(v).unwrap_or(0))
        .collect();
    let amounts: Vec<f64> = levels.iter().map(|&l| spec.level_amount(l)).collect();

    if !needs_refinement(&amounts, spec.capacity) {
        for (pos, &m) in members.iter().enumerate() {
            set_level(&mut actions[m], levels[pos], amounts[pos], catalog)?;
        }
    } else {
        // Clamping to the smallest level overflowed: share the capacity in
        // proportion to the original requests instead.
        let total: f64 = s1.iter().sum();
        for (pos, &m) in members.iter().enumerate() {
            let amount = s1[pos] * spec.capacity / total * (1.0 - 1e-12);
            let level = spec.floor_level(amount).unwrap_or(0);
            set_level(&mut actions[m], level, amount, catalog)?;
        }
    }
    Ok(())
}

fn set_level(
    a: &mut AppliedAction,
    level: usize,
    amount: f64,
    catalog: &LinkCatalog,
) -> Result<()> {
    a.action.level = level;
    a.amount = amount;
    a.index = encode_action(a.action.link, a.action.mcs, level, catalog)?;
    Ok(())
}

/// Refine every link independently. Links whose requests fit pass through
/// unchanged; link and MCS of every action are preserved.
pub fn allocate(
    greedy: &[AppliedAction],
    catalog: &LinkCatalog,
    criteria: &dyn CriterionEvaluator,
) -> Result<Vec<AppliedAction>> {
    let mut out = greedy.to_vec();
    for link_id in 0..catalog.len() {
        let members: Vec<usize> = (0..out.len())
            .filter(|&m| out[m].action.link == link_id)
            .collect();
        if members.is_empty() {
            continue;
        }
        refine_link(&mut out, &members, link_id, catalog, criteria)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LinkKind, LinkSpec, McsEntry};
    use proptest::prelude::*;

    fn sol(v: &[f64]) -> AllocationSolution {
        AllocationSolution(v.to_vec())
    }

    fn link(name: &str, cap: f64, levels: usize, mcs: usize) -> LinkSpec {
        let mcs = (0..mcs)
            .map(|m| McsEntry {
                rate_bps_per_unit: 1000.0 * (m + 1) as f64,
                snr50_db: m as f64,
                slope: 1.0,
            })
            .collect();
        LinkSpec::new(
            name,
            LinkKind::ResourceBlock,
            cap,
            LinkSpec::uniform_levels(cap, levels),
            mcs,
        )
        .unwrap()
    }

    fn identity(_: usize, amount: f64, _: usize, _: usize) -> f64 {
        amount
    }

    #[test]
    fn refinement_trigger() {
        assert!(!needs_refinement(&[4.0, 5.0], 10.0));
        assert!(needs_refinement(&[8.0, 6.0], 10.0));
        assert!(!needs_refinement(&[10.0], 10.0));
    }

    #[test]
    fn expand_two_mts_step_two() {
        let grid: Vec<f64> = vec![2.0, 4.0, 6.0, 8.0, 10.0];
        let set = expand_solutions(&sol(&[8.0, 6.0]), 10.0, &[grid.clone(), grid]).unwrap();
        let got: Vec<Vec<f64>> = set.into_iter().map(|s| s.0).collect();
        assert_eq!(
            got,
            vec![
                vec![8.0, 6.0],
                vec![8.0, 8.0],
                vec![8.0, 10.0],
                vec![10.0, 6.0],
                vec![10.0, 8.0],
                vec![10.0, 10.0],
            ]
        );
    }

    #[test]
    fn expand_at_maxima_is_singleton() {
        let grid = vec![5.0, 10.0];
        let set = expand_solutions(&sol(&[10.0, 10.0]), 10.0, &[grid.clone(), grid]).unwrap();
        assert_eq!(set, vec![sol(&[10.0, 10.0])]);
        assert!(expand_solutions(&sol(&[1.0]), 10.0, &[vec![]]).is_err());
    }

    #[test]
    fn scaling() {
        assert_eq!(
            scale_solutions(&[sol(&[8.0, 6.0])], 2),
            vec![sol(&[4.0, 3.0])]
        );
        assert_eq!(
            scale_solutions(&[sol(&[8.0, 6.0])], 1),
            vec![sol(&[8.0, 6.0])]
        );
        let grid: Vec<f64> = vec![2.0, 4.0, 6.0, 8.0, 10.0];
        let set = expand_solutions(&sol(&[8.0, 6.0]), 10.0, &[grid.clone(), grid]).unwrap();
        assert!(scale_solutions(&set, 2).iter().all(|s| s.total() <= 10.0));
    }

    #[test]
    fn front_small_cases() {
        assert_eq!(pareto_front(&[vec![1.0, 2.0]]), vec![0]);
        assert_eq!(pareto_front(&[vec![1.0, 2.0], vec![1.0, 3.0]]), vec![1]);
        assert_eq!(pareto_front(&[vec![1.0, 3.0], vec![2.0, 2.0]]), vec![0, 1]);
        // Duplicates do not dominate each other.
        assert_eq!(pareto_front(&[vec![1.0, 1.0], vec![1.0, 1.0]]), vec![0, 1]);
    }

    #[test]
    fn fair_selection() {
        let scores = vec![vec![1.0, 3.0], vec![2.0, 2.0]];
        let w = ParetoWeights::uniform(2);
        assert_eq!(select_fair(&[0, 1], &scores, &w).unwrap(), 1);
        assert_eq!(select_fair(&[0], &scores, &w).unwrap(), 0);
        assert!(select_fair(&[], &scores, &w).is_err());
        // Equal minima: larger sorted vector wins, then lower index.
        let scores = vec![vec![2.0, 3.0], vec![2.0, 5.0], vec![5.0, 2.0]];
        assert_eq!(select_fair(&[0, 1, 2], &scores, &w).unwrap(), 1);
    }

    #[test]
    fn weights_validate() {
        assert!(ParetoWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(ParetoWeights::new(vec![0.5, 0.6]).is_err());
        assert!(ParetoWeights::new(vec![-0.5, 1.5]).is_err());
        assert!(ParetoWeights::new(vec![]).is_err());
    }

    fn applied(catalog: &LinkCatalog, link: usize, mcs: usize, level: usize) -> AppliedAction {
        AppliedAction::nominal(encode_action(link, mcs, level, catalog).unwrap(), catalog).unwrap()
    }

    #[test]
    fn allocate_passthrough_when_feasible() {
        let cat = LinkCatalog::new(vec![link("a", 10.0, 5, 3)]).unwrap();
        let g = vec![applied(&cat, 0, 1, 1), applied(&cat, 0, 2, 2)];
        assert_eq!(allocate(&g, &cat, &identity).unwrap(), g);
    }

    #[test]
    fn allocate_overflow_two_mts() {
        // Levels 2, 4, ..., 10; greedy (8, 6) overflows 10.
        let cat = LinkCatalog::new(vec![link("a", 10.0, 5, 3)]).unwrap();
        let g = vec![applied(&cat, 0, 0, 3), applied(&cat, 0, 2, 2)];
        let out = allocate(&g, &cat, &identity).unwrap();
        let total: f64 = out.iter().map(|a| a.amount).sum();
        assert!(total <= 10.0);
        assert_eq!(out[0].action.mcs, 0);
        assert_eq!(out[1].action.mcs, 2);
        // Identity criteria: max-min over the scaled set is (5, 5), floored to (4, 4).
        assert_eq!(out[0].amount, 4.0);
        assert_eq!(out[1].amount, 4.0);
    }

    #[test]
    fn allocate_links_independently() {
        let cat = LinkCatalog::new(vec![link("a", 10.0, 5, 3), link("b", 1.0, 10, 2)]).unwrap();
        let g = vec![
            applied(&cat, 0, 0, 4),
            applied(&cat, 1, 1, 3),
            applied(&cat, 0, 1, 4),
            applied(&cat, 0, 2, 4),
        ];
        let out = allocate(&g, &cat, &identity).unwrap();
        assert_eq!(out[1], g[1]);
        let total: f64 = [0, 2, 3].iter().map(|&i| out[i].amount).sum();
        assert!(total <= 10.0);
        for (o, i) in out.iter().zip(&g) {
            assert_eq!((o.action.link, o.action.mcs), (i.action.link, i.action.mcs));
            assert_eq!(o.index, o.action.encode(&cat).unwrap());
        }
    }

    #[test]
    fn allocate_falls_back_to_proportional_share() {
        // Ten MTs, smallest level 2 on capacity 10: floors overflow.
        let cat = LinkCatalog::new(vec![link("a", 10.0, 5, 1)]).unwrap();
        let g: Vec<_> = (0..10).map(|_| applied(&cat, 0, 0, 4)).collect();
        let out = allocate(&g, &cat, &identity).unwrap();
        let total: f64 = out.iter().map(|a| a.amount).sum();
        assert!(total <= 10.0);
        assert!(out.iter().all(|a| a.amount > 0.99 && a.amount <= 1.0));
    }

    proptest! {
        #[test]
        fn expansion_dominates_s1(
            s1 in prop::collection::vec(0usize..6, 1..4),
            cap in 12.0f64..20.0,
        ) {
            let grid: Vec<f64> = (1..=6).map(|j| j as f64 * 2.0).collect();
            let s: Vec<f64> = s1.iter().map(|&j| grid[j]).collect();
            let set = expand_solutions(&sol(&s), cap, &vec![grid; s.len()]).unwrap();
            prop_assert_eq!(&set[0].0, &s);
            let k = s.len() as f64;
            for m in &set[1..] {
                prop_assert!(m.0.iter().zip(&s).all(|(a, b)| a >= b));
                prop_assert!(m.total() <= k * cap + 1e-9);
            }
        }

        #[test]
        fn separable_shortcut_matches_enumeration(
            steps in prop::collection::vec(prop::collection::vec(0.1f64..3.0, 1..6), 1..4),
            tables in prop::collection::vec(prop::collection::vec(0i32..4, 6), 3),
        ) {
            let cands: Vec<Vec<f64>> = steps
                .iter()
                .map(|st| st.iter().scan(0.0, |acc, d| { *acc += d; Some(*acc) }).collect())
                .collect();
            let tables: Vec<Vec<f64>> = cands
                .iter()
                .zip(&tables)
                .map(|(c, t)| t[..c.len()].iter().map(|&x| x as f64).collect())
                .collect();
            let limit: f64 = cands.iter().map(|c| c[c.len() - 1]).sum();
            let fast = choose_indices(&cands, &tables, limit).unwrap();
            let expanded = expand_indices(&cands, limit);
            let scores: Vec<Vec<f64>> = expanded
                .iter()
                .map(|ix| ix.iter().enumerate().map(|(p, &j)| tables[p][j]).collect())
                .collect();
            let front = pareto_front(&scores);
            let pick = select_fair(&front, &scores, &ParetoWeights::uniform(cands.len())).unwrap();
            prop_assert_eq!(fast, expanded[pick].clone());
        }

        #[test]
        fn positive_weight_scaling_keeps_choice(
            scores in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 3), 1..20),
            w in prop::collection::vec(0.01f64..1.0, 3),
            c in 0.1f64..10.0,
        ) {
            let front: Vec<usize> = (0..scores.len()).collect();
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            prop_assert_eq!(
                select_weighted(&front, &scores, &w).unwrap(),
                select_weighted(&front, &scores, &scaled).unwrap()
            );
        }
    }
}
