//! Greedy set cover over team configurations: repeatedly build the n-subset
//! of regions covering the most remaining pairs, by greedy region-by-region
//! growth, until every pending pair is covered.

use super::{Configuration, PairSet, PlanError};

/// Bitmask adjacency over region ids; the planner caps at 128 regions.
pub(super) const MAX_REGIONS: usize = 128;

pub(super) struct PairAdjacency {
    pub rows: Vec<u128>,
    pub m: usize,
}

impl PairAdjacency {
    pub fn from_pairs(u: &PairSet, m: usize) -> Result<Self, PlanError> {
        if m > MAX_REGIONS {
            return Err(PlanError::TooManyRegions { m, max: MAX_REGIONS });
        }
        let mut rows = vec![0u128; m];
        for (a, b) in u.iter() {
            if a >= m || b >= m {
                return Err(PlanError::PairOutOfRange(a, b, m));
            }
            rows[a] |= 1u128 << b;
            rows[b] |= 1u128 << a;
        }
        Ok(Self { rows, m })
    }

    pub fn degree(&self, r: usize) -> u32 {
        self.rows[r].count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn remove_pairs_within(&mut self, mask: u128) {
        for r in 0..self.m {
            if mask >> r & 1 == 1 {
                self.rows[r] &= !mask;
            }
        }
    }
}

/// Builds configurations covering `u`.
///
/// Each round starts from the region incident to the most remaining pairs
/// and grows by the region adding the most newly covered pairs (ties to the
/// lowest id), padding with the lowest free ids once nothing new can be
/// covered; the round's pairs are then removed and rounds repeat until `u`
/// is exhausted.
pub fn greedy_set_cover(
    u: &PairSet,
    m: usize,
    n: usize,
) -> Result<Vec<Configuration>, PlanError> {
    if n < 2 || n > m {
        return Err(PlanError::BadRobotCount {
            n,
            reason: format!("need 2 <= n <= m = {m}"),
        });
    }
    if let Some(max) = u.max_region() {
        if max >= m {
            return Err(PlanError::PairOutOfRange(max, max, m));
        }
    }
    let mut adj = PairAdjacency::from_pairs(u, m)?;
    let mut configs = Vec::new();
    while !adj.is_empty() {
        let mut subset: Vec<usize> = Vec::with_capacity(n);
        let mut mask = 0u128;
        // start: highest remaining degree, lowest id on ties
        let mut start = 0;
        for r in 1..m {
            if adj.degree(r) > adj.degree(start) {
                start = r;
            }
        }
        subset.push(start);
        mask |= 1 << start;
        while subset.len() < n {
            let mut best = usize::MAX;
            let mut best_new = 0u32;
            for r in 0..m {
                if mask >> r & 1 == 1 {
                    continue;
                }
                let newly = (adj.rows[r] & mask).count_ones();
                if best == usize::MAX || newly > best_new {
                    best = r;
                    best_new = newly;
                }
            }
            subset.push(best);
            mask |= 1 << best;
        }
        subset.sort_unstable();
        adj.remove_pairs_within(mask);
        configs.push(Configuration::new(subset, m)?);
    }
    Ok(configs)
}
