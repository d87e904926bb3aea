//! Open-path TSP over configurations: nearest-neighbor construction followed
//! by 2-opt segment reversals until locally optimal.

use super::{transition_cost, Configuration, PairSet, Plan, PlanError};
use crate::scalar::Real;

/// Orders `configs` into an open path starting (but not ending) at `start`,
/// with edge weights given by the optimal-assignment transition cost.
pub fn order_configs_tsp<R: Real>(
    configs: Vec<Configuration>,
    start: &Configuration,
    travel: &[Vec<R>],
) -> Result<Plan<R>, PlanError> {
    if configs.is_empty() {
        return Ok(Plan::empty(start.clone()));
    }
    let l = configs.len();
    // symmetric pairwise costs plus the start row
    let mut from_start = vec![R::zero(); l];
    for (i, c) in configs.iter().enumerate() {
        from_start[i] = transition_cost(start, c, travel)?.0;
    }
    let mut between = vec![vec![R::zero(); l]; l];
    for i in 0..l {
        for j in (i + 1)..l {
            let c = transition_cost(&configs[i], &configs[j], travel)?.0;
            between[i][j] = c;
            between[j][i] = c;
        }
    }
    let edge = |prev: Option<usize>, to: usize| -> R {
        match prev {
            None => from_start[to],
            Some(p) => between[p][to],
        }
    };

    // nearest-neighbor construction, ties to the lowest index
    let mut order: Vec<usize> = Vec::with_capacity(l);
    let mut used = vec![false; l];
    let mut prev: Option<usize> = None;
    for _ in 0..l {
        let mut best: Option<usize> = None;
        for cand in 0..l {
            if used[cand] {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => edge(prev, cand) < edge(prev, b),
            };
            if better {
                best = Some(cand);
            }
        }
        let pick = best.expect("unvisited config exists");
        used[pick] = true;
        order.push(pick);
        prev = Some(pick);
    }

    let path_cost = |order: &[usize]| -> R {
        let mut total = R::zero();
        let mut prev = None;
        for &node in order {
            total += edge(prev, node);
            prev = Some(node);
        }
        total
    };
    let nn_cost = path_cost(&order);

    // local search: 2-opt segment reversals plus or-opt relocations of short
    // segments, until neither improves; the start stays fixed
    let mut total = nn_cost;
    let eps = R::from_f64(1e-9) * (R::one() + total.abs());
    let mut improved = true;
    while improved {
        improved = false;
        // 2-opt: reverse order[i..=j]
        for i in 0..l {
            for j in (i + 1)..l {
                let prev = if i == 0 { None } else { Some(order[i - 1]) };
                let before = edge(prev, order[i])
                    + if j + 1 < l {
                        between[order[j]][order[j + 1]]
                    } else {
                        R::zero()
                    };
                let after = edge(prev, order[j])
                    + if j + 1 < l {
                        between[order[i]][order[j + 1]]
                    } else {
                        R::zero()
                    };
                if after + eps < before {
                    order[i..=j].reverse();
                    total = total - before + after;
                    improved = true;
                }
            }
        }
        // or-opt: relocate a segment of 1..=3 nodes to a better slot
        for seg_len in 1..=3usize.min(l) {
            let mut i = 0;
            while i + seg_len <= l {
                let j = i + seg_len - 1;
                let seg: Vec<usize> = order[i..=j].to_vec();
                let mut rest: Vec<usize> = Vec::with_capacity(l - seg_len);
                rest.extend_from_slice(&order[..i]);
                rest.extend_from_slice(&order[j + 1..]);
                let base_cost = path_cost(&order);
                let mut applied = false;
                for slot in 0..=rest.len() {
                    if slot == i {
                        continue; // same position
                    }
                    let mut candidate = Vec::with_capacity(l);
                    candidate.extend_from_slice(&rest[..slot]);
                    candidate.extend_from_slice(&seg);
                    candidate.extend_from_slice(&rest[slot..]);
                    let cost = path_cost(&candidate);
                    if cost + eps < base_cost {
                        order = candidate;
                        total = cost;
                        improved = true;
                        applied = true;
                        break;
                    }
                }
                if !applied {
                    i += 1;
                }
            }
        }
    }
    debug_assert!((path_cost(&order) - total).abs() <= eps * R::from_usize(l.max(1)));
    debug_assert!(total <= nn_cost + eps);

    // assemble the plan along the chosen order
    let mut plan_configs = Vec::with_capacity(l);
    let mut assignments = Vec::with_capacity(l);
    let mut per_cost = Vec::with_capacity(l);
    let mut covered = PairSet::new();
    let mut cursor = start.clone();
    let mut exact_total = R::zero();
    for &node in &order {
        let next = configs[node].clone();
        let (c, perm) = transition_cost(&cursor, &next, travel)?;
        exact_total += c;
        per_cost.push(c);
        assignments.push(perm);
        covered.union_with(&next.pairs_of());
        plan_configs.push(next.clone());
        cursor = next;
    }
    Ok(Plan {
        start: start.clone(),
        configs: plan_configs,
        assignments,
        per_transition_cost: per_cost,
        total_cost: exact_total,
        covered_pairs: covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(ids: &[usize], m: usize) -> Configuration {
        Configuration::new(ids.to_vec(), m).unwrap()
    }

    fn symmetric_travel(m: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { 0.0 } else { f(i.min(j), i.max(j)) })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn single_config_plan() {
        let travel = symmetric_travel(4, |i, j| (i + j) as f64);
        let start = config(&[0, 1], 4);
        let c = config(&[2, 3], 4);
        let plan = order_configs_tsp(vec![c.clone()], &start, &travel).unwrap();
        assert_eq!(plan.configs, vec![c.clone()]);
        let (expected, _) = transition_cost(&start, &c, &travel).unwrap();
        assert_eq!(plan.total_cost, expected);
        assert_eq!(plan.transition_count(), 1);
    }

    #[test]
    fn three_configs_match_exhaustive_optimum() {
        // regions on a line; costs are distances, so order matters
        let m = 8;
        let travel = symmetric_travel(m, |i, j| (j - i) as f64 * 10.0);
        let start = config(&[0, 1], m);
        let configs = vec![
            config(&[6, 7], m),
            config(&[2, 3], m),
            config(&[4, 5], m),
        ];
        let plan = order_configs_tsp(configs.clone(), &start, &travel).unwrap();

        // brute force over the 3! orders
        let mut best = f64::INFINITY;
        let idx = [0, 1, 2];
        let orders = [
            [idx[0], idx[1], idx[2]],
            [idx[0], idx[2], idx[1]],
            [idx[1], idx[0], idx[2]],
            [idx[1], idx[2], idx[0]],
            [idx[2], idx[0], idx[1]],
            [idx[2], idx[1], idx[0]],
        ];
        for ord in orders {
            let mut cur = start.clone();
            let mut total = 0.0;
            for &k in &ord {
                total += transition_cost(&cur, &configs[k], &travel).unwrap().0;
                cur = configs[k].clone();
            }
            best = best.min(total);
        }
        assert_eq!(plan.total_cost, best);
    }

    #[test]
    fn empty_config_list_gives_empty_plan() {
        let travel = symmetric_travel(4, |_, _| 1.0);
        let start = config(&[0, 1], 4);
        let plan: Plan<f64> = order_configs_tsp(vec![], &start, &travel).unwrap();
        assert!(plan.configs.is_empty());
        assert_eq!(plan.total_cost, 0.0);
    }

    #[test]
    fn covered_pairs_are_unioned() {
        let travel = symmetric_travel(6, |i, j| (i + j) as f64);
        let start = config(&[0, 1], 6);
        let plan =
            order_configs_tsp(vec![config(&[2, 3], 6), config(&[4, 5], 6)], &start, &travel)
                .unwrap();
        assert!(plan.covered_pairs.contains(2, 3));
        assert!(plan.covered_pairs.contains(4, 5));
        assert!(!plan.covered_pairs.contains(0, 1));
    }
}
