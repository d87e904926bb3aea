//! Per-step greedy comparison baseline: at each step, over all n-subsets of
//! regions covering at least one pending pair, move to the one with the
//! cheapest transition from the current configuration, breaking cost ties by
//! the most newly covered pairs (then first in lexicographic order).
//!
//! Unlike the main planner, the baseline does not optimize the robot-to-slot
//! assignment: robots relocate slot-by-slot between sorted configurations,
//! and its transition cost is that naive assignment's travel sum.
//!
//! Exact subset enumeration with exact-prefix cost pruning; a configurable
//! candidate cap guards the combinatorial worst case.

use super::cover::PairAdjacency;
use super::{CollectionMatrix, Configuration, PairSet, Plan, PlanError};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct BaselineOptions {
    /// Upper bound on candidate subsets evaluated per step; exceeding it
    /// truncates the search and flags the outcome.
    pub candidate_cap: usize,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            candidate_cap: 5_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome<R> {
    pub plan: Plan<R>,
    /// True when any step hit the candidate cap before exhausting the
    /// subset space.
    pub truncated: bool,
}

fn cap_inf<R: Real>(x: R) -> R {
    if x.is_finite() {
        x
    } else {
        R::from_f64(1e12)
    }
}

struct StepSearch<'a, R: Real> {
    adj: &'a PairAdjacency,
    m: usize,
    n: usize,
    /// current configuration, sorted ascending
    current: &'a [usize],
    travel: &'a [Vec<R>],
    best: Option<(R, u32, Vec<usize>)>,
    visited: usize,
    cap: usize,
    truncated: bool,
}

impl<'a, R: Real> StepSearch<'a, R> {
    fn consider_leaf(&mut self, cost: R, newly: u32, subset: &[usize]) {
        if newly == 0 {
            return;
        }
        let replace = match &self.best {
            None => true,
            Some((bc, bn, _)) => cost < *bc || (cost == *bc && newly > *bn),
        };
        if replace {
            self.best = Some((cost, newly, subset.to_vec()));
        }
    }

    /// Lexicographic DFS over ascending subsets; slot k of the candidate is
    /// filled in order, so the naive assignment cost of the prefix is exact.
    fn recurse(&mut self, first: usize, subset: &mut Vec<usize>, mask: u128, newly: u32, cost: R) {
        if self.truncated {
            return;
        }
        if let Some((bc, _, _)) = &self.best {
            // equal-cost subtrees may still win the coverage tie
            if cost > *bc {
                return;
            }
        }
        if subset.len() == self.n {
            self.visited += 1;
            if self.visited > self.cap {
                self.truncated = true;
                return;
            }
            self.consider_leaf(cost, newly, subset);
            return;
        }
        let slot = subset.len();
        let slots_left = self.n - slot;
        for r in first..self.m {
            if self.m - r < slots_left {
                break;
            }
            let add = (self.adj.rows[r] & mask).count_ones();
            let step_cost = cap_inf(self.travel[self.current[slot]][r]);
            subset.push(r);
            self.recurse(r + 1, subset, mask | 1 << r, newly + add, cost + step_cost);
            subset.pop();
            if self.truncated {
                return;
            }
        }
    }
}

/// Runs the greedy baseline until no pending pairs remain.
pub fn baseline_greedy<R: Real>(
    matrix: &CollectionMatrix,
    n: usize,
    start: &Configuration,
    travel: &[Vec<R>],
    opts: &BaselineOptions,
) -> Result<BaselineOutcome<R>, PlanError> {
    let m = matrix.region_count();
    if n < 2 || n > m {
        return Err(PlanError::BadRobotCount {
            n,
            reason: format!("need 2 <= n <= m = {m}"),
        });
    }
    let zeros = matrix.zero_pairs();
    if zeros.is_empty() {
        return Ok(BaselineOutcome {
            plan: Plan::empty(start.clone()),
            truncated: false,
        });
    }
    let mut adj = PairAdjacency::from_pairs(&zeros, m)?;
    let mut current: Vec<usize> = start.regions().to_vec();
    current.sort_unstable();
    let mut configs = Vec::new();
    let mut assignments = Vec::new();
    let mut per_cost = Vec::new();
    let mut covered = PairSet::new();
    let mut total = R::zero();
    let mut truncated = false;

    while !adj.is_empty() {
        let mut search = StepSearch {
            adj: &adj,
            m,
            n,
            current: &current,
            travel,
            best: None,
            visited: 0,
            cap: opts.candidate_cap,
            truncated: false,
        };
        // staying put is free: when the current configuration still covers
        // pending pairs it is the step optimum outright
        if current.len() == n {
            let mut mask = 0u128;
            let mut newly = 0u32;
            for &r in &current {
                newly += (adj.rows[r] & mask).count_ones();
                mask |= 1 << r;
            }
            search.consider_leaf(R::zero(), newly, &current);
        }
        let stay_won = matches!(&search.best, Some((c, _, _)) if *c <= R::zero());
        if !stay_won {
            search.recurse(0, &mut Vec::with_capacity(n), 0, 0, R::zero());
        }
        truncated |= search.truncated;
        let subset = match search.best {
            Some((_, _, subset)) => subset,
            None => {
                // cap hit before any covering candidate; fall back to the
                // first pending pair padded with the lowest free ids
                let (a, b) = adj
                    .rows
                    .iter()
                    .enumerate()
                    .find_map(|(r, &row)| {
                        (row != 0).then(|| (r, row.trailing_zeros() as usize))
                    })
                    .expect("adjacency non-empty");
                let mut subset = vec![a.min(b), a.max(b)];
                for r in 0..m {
                    if subset.len() == n {
                        break;
                    }
                    if !subset.contains(&r) {
                        subset.push(r);
                    }
                }
                subset.sort_unstable();
                subset
            }
        };
        // naive slot-by-slot relocation
        let mut cost = R::zero();
        for (slot, &r) in subset.iter().enumerate() {
            cost += travel[current[slot]][r];
        }
        let next = Configuration::new(subset.clone(), m)?;
        let mut mask = 0u128;
        for &r in next.regions() {
            mask |= 1 << r;
        }
        adj.remove_pairs_within(mask);
        covered.union_with(&next.pairs_of());
        total += cost;
        per_cost.push(cost);
        assignments.push((0..n).collect());
        configs.push(next);
        current = subset;
    }

    Ok(BaselineOutcome {
        plan: Plan {
            start: start.clone(),
            configs,
            assignments,
            per_transition_cost: per_cost,
            total_cost: total,
            covered_pairs: covered,
        },
        truncated,
    })
}
