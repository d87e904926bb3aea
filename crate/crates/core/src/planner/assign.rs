//! Minimum-cost perfect matching between two team configurations.

use super::{Configuration, PlanError};
use crate::scalar::Real;

/// Stand-in for unreachable travel entries inside the matching solver;
/// keeps the duals finite while preserving "avoid if at all possible".
fn cap<R: Real>(x: R) -> R {
    if x.is_finite() {
        x
    } else {
        R::from_f64(1e12)
    }
}

/// Minimum-cost assignment moving the team from `a` to `b`.
///
/// Returns the total travel cost and the permutation `perm` with
/// `perm[p] = q` meaning the robot at `a.regions()[p]` moves to
/// `b.regions()[q]`. The cost is re-summed from the travel matrix so it is
/// bit-identical to evaluating the same permutation by hand.
pub fn transition_cost<R: Real>(
    a: &Configuration,
    b: &Configuration,
    travel: &[Vec<R>],
) -> Result<(R, Vec<usize>), PlanError> {
    if a.len() != b.len() {
        return Err(PlanError::SizeMismatch(a.len(), b.len()));
    }
    let n = a.len();
    let m = travel.len();
    for &r in a.regions().iter().chain(b.regions()) {
        if r >= m {
            return Err(PlanError::PairOutOfRange(r, r, m));
        }
    }
    let cost = |p: usize, q: usize| cap(travel[a.regions()[p]][b.regions()[q]]);
    let perm = hungarian(n, &cost);
    let mut total = R::zero();
    for (p, &q) in perm.iter().enumerate() {
        total += travel[a.regions()[p]][b.regions()[q]];
    }
    Ok((total, perm))
}

/// O(n^3) Hungarian algorithm (shortest augmenting path with potentials).
/// Returns `perm[row] = col` for the minimum-cost perfect matching.
fn hungarian<R: Real>(n: usize, cost: &dyn Fn(usize, usize) -> R) -> Vec<usize> {
    // 1-indexed arrays; p[j] is the row matched to column j, p[0] the row
    // currently being placed.
    let inf = R::infinity();
    let mut u = vec![R::zero(); n + 1];
    let mut v = vec![R::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}
