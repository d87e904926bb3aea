//! Scalable data-collection planning: the collection state matrix, greedy
//! set cover over team configurations, optimal-assignment transition costs,
//! open-path TSP ordering, and the per-step greedy comparison baseline.

mod assign;
mod baseline;
mod cover;
mod travel;
mod tsp;

pub use assign::transition_cost;
pub use baseline::{baseline_greedy, BaselineOptions, BaselineOutcome};
pub use cover::greedy_set_cover;
pub use travel::travel_cost_matrix;
pub use tsp::order_configs_tsp;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub type RegionId = usize;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("need at least 2 regions, got {0}")]
    BadRegionCount(usize),
    #[error("invalid configuration: {0}")]
    BadConfiguration(String),
    #[error("region pair ({0}, {1}) is out of range for {2} regions")]
    PairOutOfRange(usize, usize, usize),
    #[error("cannot mark the diagonal entry ({0}, {0})")]
    DiagonalMark(usize),
    #[error("pair ({0}, {1}) already terminal at {2}, cannot overwrite with {3}")]
    TerminalConflict(usize, usize, i8, i8),
    #[error("robot count {n} not supported here: {reason}")]
    BadRobotCount { n: usize, reason: String },
    #[error("configuration sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("planner supports at most {max} regions, got {m}")]
    TooManyRegions { m: usize, max: usize },
    #[error("region {0} has no waypoints")]
    NoWaypoints(usize),
}

/// The set of regions simultaneously occupied by the robot team;
/// robot `p` occupies `regions()[p]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(Vec<RegionId>);

impl Configuration {
    /// At least two distinct region ids, all below `m`.
    pub fn new(regions: Vec<RegionId>, m: usize) -> Result<Self, PlanError> {
        if regions.len() < 2 {
            return Err(PlanError::BadConfiguration(format!(
                "configuration needs >= 2 regions, got {}",
                regions.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &r in &regions {
            if r >= m {
                return Err(PlanError::BadConfiguration(format!(
                    "region id {r} out of range for {m} regions"
                )));
            }
            if !seen.insert(r) {
                return Err(PlanError::BadConfiguration(format!(
                    "region id {r} appears twice"
                )));
            }
        }
        Ok(Self(regions))
    }

    pub fn regions(&self) -> &[RegionId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All C(n,2) unordered pairs of occupied regions.
    pub fn pairs_of(&self) -> PairSet {
        let mut pairs = BTreeSet::new();
        for (i, &a) in self.0.iter().enumerate() {
            for &b in &self.0[i + 1..] {
                pairs.insert(canonical_pair(a, b));
            }
        }
        PairSet { pairs }
    }
}

fn canonical_pair(a: RegionId, b: RegionId) -> (RegionId, RegionId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Unordered region pairs in canonical `(lo, hi)` form, no self-pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairSet {
    pairs: BTreeSet<(RegionId, RegionId)>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: RegionId, b: RegionId) -> bool {
        assert_ne!(a, b, "self-pairs are not representable");
        self.pairs.insert(canonical_pair(a, b))
    }

    pub fn contains(&self, a: RegionId, b: RegionId) -> bool {
        self.pairs.contains(&canonical_pair(a, b))
    }

    pub fn remove(&mut self, a: RegionId, b: RegionId) -> bool {
        self.pairs.remove(&canonical_pair(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RegionId, RegionId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn union_with(&mut self, other: &PairSet) {
        self.pairs.extend(other.pairs.iter().copied());
    }

    pub fn is_superset(&self, other: &PairSet) -> bool {
        self.pairs.is_superset(&other.pairs)
    }

    pub fn max_region(&self) -> Option<RegionId> {
        self.pairs.iter().map(|&(_, b)| b).max()
    }
}

impl FromIterator<(RegionId, RegionId)> for PairSet {
    fn from_iter<T: IntoIterator<Item = (RegionId, RegionId)>>(iter: T) -> Self {
        let mut s = PairSet::new();
        for (a, b) in iter {
            s.insert(a, b);
        }
        s
    }
}

/// Symmetric region-by-region collection state: 1 collected, 0 pending,
/// -1 infeasible. The diagonal is fixed at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectionMatrix {
    m: usize,
    state: Vec<i8>,
}

impl CollectionMatrix {
    /// Fresh matrix: diagonal 1, everything else pending.
    pub fn new(m: usize) -> Result<Self, PlanError> {
        if m < 2 {
            return Err(PlanError::BadRegionCount(m));
        }
        let mut state = vec![0i8; m * m];
        for i in 0..m {
            state[i * m + i] = 1;
        }
        Ok(Self { m, state })
    }

    pub fn region_count(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: RegionId, j: RegionId) -> i8 {
        self.state[i * self.m + j]
    }

    /// Sets both symmetric entries. 1 and -1 are terminal: re-marking with
    /// the same value is a no-op, switching between terminals is an error.
    pub fn mark(&mut self, pair: (RegionId, RegionId), value: i8) -> Result<(), PlanError> {
        let (i, j) = pair;
        assert!(value == 1 || value == -1, "mark value must be 1 or -1");
        if i >= self.m || j >= self.m {
            return Err(PlanError::PairOutOfRange(i, j, self.m));
        }
        if i == j {
            return Err(PlanError::DiagonalMark(i));
        }
        let existing = self.get(i, j);
        if existing != 0 && existing != value {
            return Err(PlanError::TerminalConflict(i, j, existing, value));
        }
        self.state[i * self.m + j] = value;
        self.state[j * self.m + i] = value;
        Ok(())
    }

    /// Pending (zero) entries above the diagonal.
    pub fn zero_pairs(&self) -> PairSet {
        let mut u = PairSet::new();
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                if self.get(i, j) == 0 {
                    u.insert(i, j);
                }
            }
        }
        u
    }

    pub fn has_zeros(&self) -> bool {
        !self.zero_pairs().is_empty()
    }

    /// Integer-grid view for serialization.
    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        (0..self.m)
            .map(|i| self.state[i * self.m..(i + 1) * self.m].to_vec())
            .collect()
    }

    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self, PlanError> {
        let m = rows.len();
        if m < 2 {
            return Err(PlanError::BadRegionCount(m));
        }
        let mut state = Vec::with_capacity(m * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(PlanError::SizeMismatch(row.len(), m));
            }
            state.extend_from_slice(row);
            if rows[i][i] != 1 {
                return Err(PlanError::BadConfiguration(format!(
                    "diagonal entry ({i},{i}) must be 1"
                )));
            }
        }
        for i in 0..m {
            for j in 0..m {
                if state[i * m + j] != state[j * m + i] {
                    return Err(PlanError::BadConfiguration(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { m, state })
    }
}

/// An ordered configuration sequence with per-transition optimal assignments.
/// `configs` excludes the start configuration; the first transition moves the
/// team from `start` to `configs[0]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Plan<R> {
    pub start: Configuration,
    pub configs: Vec<Configuration>,
    /// Per transition, `assignments[t][p]` is the index into the target
    /// configuration that the robot occupying source slot `p` moves to.
    pub assignments: Vec<Vec<usize>>,
    pub per_transition_cost: Vec<R>,
    pub total_cost: R,
    pub covered_pairs: PairSet,
}

impl<R: Real> Plan<R> {
    /// A plan with nothing to do.
    pub fn empty(start: Configuration) -> Self {
        Self {
            start,
            configs: Vec::new(),
            assignments: Vec::new(),
            per_transition_cost: Vec::new(),
            total_cost: R::zero(),
            covered_pairs: PairSet::new(),
        }
    }

    /// Number of inter-configuration moves (the start is not counted).
    pub fn transition_count(&self) -> usize {
        self.configs.len()
    }
}

/// Case 1 planning (n = 2): every pending pair is itself a configuration;
/// order them as an open-path TSP from the start configuration.
pub fn plan_two_robots<R: Real>(
    matrix: &CollectionMatrix,
    start: &Configuration,
    travel: &[Vec<R>],
) -> Result<Plan<R>, PlanError> {
    let m = matrix.region_count();
    let zeros = matrix.zero_pairs();
    if zeros.is_empty() {
        return Ok(Plan::empty(start.clone()));
    }
    let configs: Vec<Configuration> = zeros
        .iter()
        .map(|(i, j)| Configuration::new(vec![i, j], m))
        .collect::<Result<_, _>>()?;
    order_configs_tsp(configs, start, travel)
}

/// Case 2 planning (n > 2): greedy set cover chooses the configurations,
/// then TSP orders them.
pub fn plan_multi<R: Real>(
    matrix: &CollectionMatrix,
    n: usize,
    start: &Configuration,
    travel: &[Vec<R>],
) -> Result<Plan<R>, PlanError> {
    if n <= 2 {
        return Err(PlanError::BadRobotCount {
            n,
            reason: "plan_multi requires n > 2; use plan_two_robots".into(),
        });
    }
    let m = matrix.region_count();
    let zeros = matrix.zero_pairs();
    if zeros.is_empty() {
        return Ok(Plan::empty(start.clone()));
    }
    let configs = greedy_set_cover(&zeros, m, n)?;
    order_configs_tsp(configs, start, travel)
}

/// Re-solves from the current configuration over whatever is still pending.
pub fn replan_on_failure<R: Real>(
    matrix: &CollectionMatrix,
    previous: &Configuration,
    n: usize,
    travel: &[Vec<R>],
) -> Result<Plan<R>, PlanError> {
    if n == 2 {
        plan_two_robots(matrix, previous, travel)
    } else {
        plan_multi(matrix, n, previous, travel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_matrix_shape() {
        let m = CollectionMatrix::new(2).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, 0], vec![0, 1]]);
        let m3 = CollectionMatrix::new(3).unwrap();
        assert_eq!(m3.zero_pairs().len(), 3);
        let m22 = CollectionMatrix::new(22).unwrap();
        assert_eq!(m22.zero_pairs().len(), 231);
    }

    #[test]
    fn matrix_rejects_tiny() {
        assert!(matches!(
            CollectionMatrix::new(1),
            Err(PlanError::BadRegionCount(1))
        ));
    }

    #[test]
    fn pairs_of_configurations() {
        let m = 10;
        let c = Configuration::new(vec![0, 1], m).unwrap();
        assert_eq!(c.pairs_of().iter().collect::<Vec<_>>(), vec![(0, 1)]);
        let c = Configuration::new(vec![2, 5, 7], m).unwrap();
        assert_eq!(
            c.pairs_of().iter().collect::<Vec<_>>(),
            vec![(2, 5), (2, 7), (5, 7)]
        );
        let c = Configuration::new((0..9).collect(), m).unwrap();
        assert_eq!(c.pairs_of().len(), 36);
    }

    #[test]
    fn configuration_rejects_duplicates_and_range() {
        assert!(Configuration::new(vec![1, 1], 5).is_err());
        assert!(Configuration::new(vec![1], 5).is_err());
        assert!(Configuration::new(vec![1, 5], 5).is_err());
    }

    #[test]
    fn mark_updates_symmetrically() {
        let mut m = CollectionMatrix::new(4).unwrap();
        m.mark((0, 1), 1).unwrap();
        assert_eq!(m.get(0, 1), 1);
        assert_eq!(m.get(1, 0), 1);
    }

    #[test]
    fn mark_diagonal_is_error() {
        let mut m = CollectionMatrix::new(4).unwrap();
        assert!(matches!(m.mark((2, 2), 1), Err(PlanError::DiagonalMark(2))));
    }

    #[test]
    fn terminal_states_cannot_flip() {
        let mut m = CollectionMatrix::new(4).unwrap();
        m.mark((0, 1), -1).unwrap();
        assert!(matches!(
            m.mark((0, 1), 1),
            Err(PlanError::TerminalConflict(0, 1, -1, 1))
        ));
        // re-marking with the same terminal is idempotent
        m.mark((1, 0), -1).unwrap();
    }

    #[test]
    fn matrix_row_roundtrip() {
        let mut m = CollectionMatrix::new(3).unwrap();
        m.mark((0, 2), 1).unwrap();
        m.mark((1, 2), -1).unwrap();
        let rows = m.to_rows();
        let back = CollectionMatrix::from_rows(rows).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let rows = vec![vec![1, 0, 1], vec![0, 1, 0], vec![0, 0, 1]];
        assert!(CollectionMatrix::from_rows(rows).is_err());
    }
}
