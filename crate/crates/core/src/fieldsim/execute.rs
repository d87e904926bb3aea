//! Plan execution: walk the configuration sequence, collect oracle
//! measurements between every robot pair at waypoint pairs, update the
//! collection matrix, and replan when a pair turns out infeasible.

use std::collections::{BTreeSet, VecDeque};

use super::{oracle_rssi, Dataset, DatasetMeta, Measurement, OracleParams, SimError};
use crate::geom::Vec3;
use crate::partition::PartitionDoc;
use crate::planner::{
    replan_on_failure, transition_cost, CollectionMatrix, Plan,
};
use crate::scalar::Real;
use crate::scene::OccupancyGrid;

#[derive(Debug, Clone)]
pub struct ExecOptions<R> {
    /// Measurement pose spacing; region waypoints are thinned to roughly
    /// this spacing when it exceeds the partition's own.
    pub spacing: R,
    /// Region pairs forced to read the noise floor (injected link failures).
    pub blocked_pairs: BTreeSet<(usize, usize)>,
}

impl<R: Real> Default for ExecOptions<R> {
    fn default() -> Self {
        Self {
            spacing: R::one(),
            blocked_pairs: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExecutionResult<R> {
    pub dataset: Dataset<R>,
    pub matrix: CollectionMatrix,
    pub total_travel: R,
    /// Number of replanning events (triggered by -1 marks or residual
    /// pending pairs after the plan ran out).
    pub replans: usize,
    pub skipped_waypoints: usize,
}

/// Nearest-neighbor visiting order length over a region's waypoints,
/// starting from the one closest to the region center.
fn tour_length<R: Real>(waypoints: &[Vec3<R>], center: Vec3<R>) -> R {
    if waypoints.len() < 2 {
        return R::zero();
    }
    let mut visited = vec![false; waypoints.len()];
    let mut at = 0;
    for (i, w) in waypoints.iter().enumerate() {
        if w.dist(center) < waypoints[at].dist(center) {
            at = i;
        }
    }
    visited[at] = true;
    let mut total = R::zero();
    for _ in 1..waypoints.len() {
        let mut best: Option<usize> = None;
        for (i, w) in waypoints.iter().enumerate() {
            if visited[i] {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => w.dist(waypoints[at]) < waypoints[b].dist(waypoints[at]),
            };
            if better {
                best = Some(i);
            }
        }
        let next = best.expect("unvisited waypoint");
        total += waypoints[at].dist(waypoints[next]);
        visited[next] = true;
        at = next;
    }
    total
}

/// Executes a plan against the oracle.
///
/// Per configuration: every robot pair in distinct regions with the pair
/// still pending measures the full waypoint-pair product; a pair whose every
/// sample sits at the noise floor is marked -1 and triggers replanning from
/// the current configuration, otherwise it is marked 1. Travel accumulates
/// optimal-assignment transition costs plus intra-region tour lengths of the
/// regions that actually measured.
pub fn execute_plan<R: Real + serde::Serialize>(
    plan: &Plan<R>,
    partition: &PartitionDoc<R>,
    grid: &OccupancyGrid<R>,
    travel: &[Vec<R>],
    oracle: &OracleParams<R>,
    opts: &ExecOptions<R>,
) -> Result<ExecutionResult<R>, SimError> {
    let m = partition.regions.len();
    let mut matrix = CollectionMatrix::new(m)?;
    let floor = oracle.noise_floor_dbm;
    let floor_eps = R::from_f64(1e-6);

    // thin waypoints to the requested spacing, dropping any that are not in
    // free space (never abort on a bad pose)
    let mut skipped = 0usize;
    let stride = {
        let ratio = (opts.spacing / partition.waypoint_spacing).to_f64_lossy();
        ratio.round().max(1.0) as usize
    };
    let waypoints: Vec<Vec<Vec3<R>>> = partition
        .regions
        .iter()
        .map(|r| {
            let kept: Vec<Vec3<R>> = r
                .waypoints
                .iter()
                .step_by(stride)
                .filter(|w| {
                    let ok = grid.is_free_point(**w);
                    if !ok {
                        skipped += 1;
                        log::warn!("skipping waypoint {:?} in region {}: occupied", w, r.id);
                    }
                    ok
                })
                .copied()
                .collect();
            if kept.is_empty() && !r.waypoints.is_empty() {
                // keep at least one pose per region
                vec![r.waypoints[0]]
            } else {
                kept
            }
        })
        .collect();

    let mut measurements: Vec<Measurement<R>> = Vec::new();
    let mut total_travel = R::zero();
    let mut replans = 0usize;
    let mut executed_any = false;
    let mut current = plan.start.clone();
    let mut queue: VecDeque<_> = plan.configs.iter().cloned().collect();
    let guard_limit = m * m + 16;
    let mut steps = 0usize;

    loop {
        while let Some(next) = queue.pop_front() {
            steps += 1;
            if steps > guard_limit {
                log::warn!("execution step guard hit after {steps} configurations");
                queue.clear();
                break;
            }
            executed_any = true;
            let (cost, _) = transition_cost(&current, &next, travel)?;
            total_travel += cost;
            current = next;

            let regs = current.regions();
            let mut participating: BTreeSet<usize> = BTreeSet::new();
            for (i, &a) in regs.iter().enumerate() {
                for &b in &regs[i + 1..] {
                    if matrix.get(a, b) == 0 {
                        participating.insert(a);
                        participating.insert(b);
                    }
                }
            }
            for &r in &participating {
                total_travel += tour_length(&waypoints[r], partition.regions[r].center);
            }

            let mut minus_event = false;
            for (i, &a) in regs.iter().enumerate() {
                for &b in &regs[i + 1..] {
                    if matrix.get(a, b) != 0 {
                        continue;
                    }
                    let pair = (a.min(b), a.max(b));
                    let blocked = opts.blocked_pairs.contains(&pair);
                    let mut all_floor = true;
                    for &wa in &waypoints[pair.0] {
                        for &wb in &waypoints[pair.1] {
                            let rssi = if blocked {
                                floor
                            } else {
                                oracle_rssi(grid, oracle, wa, wb)?
                            };
                            if rssi > floor + floor_eps {
                                all_floor = false;
                            }
                            measurements.push(Measurement {
                                tx: wa,
                                rx: wb,
                                rssi_dbm: rssi,
                                region_pair: Some(pair),
                            });
                        }
                    }
                    let value = if all_floor { -1 } else { 1 };
                    matrix.mark(pair, value)?;
                    if all_floor {
                        minus_event = true;
                    }
                }
            }
            if minus_event && matrix.has_zeros() {
                replans += 1;
                let next_plan = replan_on_failure(&matrix, &current, current.len(), travel)?;
                queue = next_plan.configs.into_iter().collect();
            }
        }
        if executed_any && matrix.has_zeros() {
            // the plan ran out while pairs are still pending
            replans += 1;
            let next_plan = replan_on_failure(&matrix, &current, current.len(), travel)?;
            if next_plan.configs.is_empty() {
                break;
            }
            queue = next_plan.configs.into_iter().collect();
        } else {
            break;
        }
    }

    Ok(ExecutionResult {
        dataset: Dataset {
            meta: DatasetMeta::new(oracle, "execute_plan"),
            measurements,
        },
        matrix,
        total_travel,
        replans,
        skipped_waypoints: skipped,
    })
}
