//! Inter-region travel costs: shortest free-space grid paths (26-connected,
//! Euclidean step weights) between each region's waypoint nearest its center.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::PlanError;
use crate::partition::PartitionDoc;
use crate::scalar::Real;
use crate::scene::OccupancyGrid;

struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap: reversed on distance, ties by node for determinism
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then(other.node.cmp(&self.node))
    }
}

/// Builds the m-by-m symmetric travel cost matrix between region anchor
/// waypoints. Disconnected region pairs get the infinity sentinel.
pub fn travel_cost_matrix<R: Real>(
    partition: &PartitionDoc<R>,
    grid: &OccupancyGrid<R>,
) -> Result<Vec<Vec<R>>, PlanError> {
    let m = partition.regions.len();
    let mut sources = Vec::with_capacity(m);
    for region in &partition.regions {
        if region.waypoints.is_empty() {
            return Err(PlanError::NoWaypoints(region.id));
        }
        let anchor = region
            .waypoints
            .iter()
            .min_by(|a, b| {
                a.dist(region.center)
                    .partial_cmp(&b.dist(region.center))
                    .unwrap_or(Ordering::Equal)
            })
            .copied()
            .expect("nonempty waypoints");
        let voxel = grid
            .voxel_of(anchor)
            .ok_or(PlanError::NoWaypoints(region.id))?;
        sources.push(grid.linear_index(voxel));
    }

    let mut cost = vec![vec![R::infinity(); m]; m];
    for i in 0..m {
        let dist = dijkstra_free_space(grid, sources[i]);
        for j in 0..m {
            let d = dist[sources[j]];
            if d.is_finite() {
                cost[i][j] = R::from_f64(d);
            }
        }
        cost[i][i] = R::zero();
    }
    // enforce exact symmetry
    for i in 0..m {
        for j in (i + 1)..m {
            let v = cost[i][j].min(cost[j][i]);
            cost[i][j] = v;
            cost[j][i] = v;
        }
    }
    Ok(cost)
}

/// Single-source shortest paths over free voxels with 26-connectivity.
fn dijkstra_free_space<R: Real>(grid: &OccupancyGrid<R>, source: usize) -> Vec<f64> {
    let [nx, ny, nz] = grid.dims();
    let total = nx * ny * nz;
    let res = grid.resolution().to_f64_lossy();
    let occupancy = grid.occupancy();
    let mut dist = vec![f64::INFINITY; total];
    if occupancy[source] {
        return dist;
    }

    // 26 neighbor offsets with Euclidean step lengths
    let mut steps = Vec::with_capacity(26);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let w = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * res;
                steps.push((dx, dy, dz, w));
            }
        }
    }

    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        dist: 0.0,
        node: source,
    });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        let ix = (node % nx) as i64;
        let iy = ((node / nx) % ny) as i64;
        let iz = (node / (nx * ny)) as i64;
        for &(dx, dy, dz, w) in &steps {
            let (jx, jy, jz) = (ix + dx, iy + dy, iz + dz);
            if jx < 0
                || jy < 0
                || jz < 0
                || jx >= nx as i64
                || jy >= ny as i64
                || jz >= nz as i64
            {
                continue;
            }
            let next = jx as usize + nx * (jy as usize + ny * jz as usize);
            if occupancy[next] {
                continue;
            }
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(HeapEntry {
                    dist: nd,
                    node: next,
                });
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::partition::RegionDoc;
    use crate::scene::synth;

    fn doc_with_waypoints(
        grid: &OccupancyGrid<f64>,
        waypoints: Vec<Vec<Vec3<f64>>>,
    ) -> PartitionDoc<f64> {
        PartitionDoc {
            resolution: grid.resolution(),
            max_extent: 4.0,
            cluster_radius: 8.0,
            seed: 0,
            waypoint_spacing: 1.0,
            regions: waypoints
                .into_iter()
                .enumerate()
                .map(|(id, wps)| RegionDoc {
                    id,
                    center: wps[0],
                    representatives: vec![wps[0]],
                    waypoints: wps,
                })
                .collect(),
        }
    }

    #[test]
    fn diagonal_is_zero_and_straight_line_is_exact() {
        let g = synth::closed_room::<f64>([10.0, 4.0, 3.0], 0.25);
        let a = Vec3::new(2.0, 2.0, 1.0);
        let b = Vec3::new(7.0, 2.0, 1.0);
        let doc = doc_with_waypoints(&g, vec![vec![a], vec![b]]);
        let cost = travel_cost_matrix(&doc, &g).unwrap();
        assert_eq!(cost[0][0], 0.0);
        assert_eq!(cost[1][1], 0.0);
        let slack = 0.25 * 3.0f64.sqrt();
        assert!(
            (cost[0][1] - 5.0).abs() <= slack,
            "expected ~5 m, got {}",
            cost[0][1]
        );
        assert_eq!(cost[0][1], cost[1][0]);
    }

    #[test]
    fn walled_off_region_gets_sentinel() {
        let mut b = synth::SceneBuilder::<f64>::shell([10.0, 4.0, 3.0], 0.25);
        b.wall(0, 5.0, 0.25);
        let g = b.build();
        let a = Vec3::new(2.0, 2.0, 1.0);
        let c = Vec3::new(8.0, 2.0, 1.0);
        let doc = doc_with_waypoints(&g, vec![vec![a], vec![c]]);
        let cost = travel_cost_matrix(&doc, &g).unwrap();
        assert!(cost[0][1].is_infinite());
        assert_eq!(cost[0][0], 0.0);
    }

    #[test]
    fn missing_waypoints_is_an_error() {
        let g = synth::closed_room::<f64>([4.0, 4.0, 3.0], 0.5);
        let doc = PartitionDoc {
            resolution: 0.5,
            max_extent: 4.0,
            cluster_radius: 8.0,
            seed: 0,
            waypoint_spacing: 1.0,
            regions: vec![RegionDoc {
                id: 0,
                center: Vec3::new(2.0, 2.0, 1.0),
                representatives: vec![],
                waypoints: vec![],
            }],
        };
        assert!(matches!(
            travel_cost_matrix(&doc, &g),
            Err(PlanError::NoWaypoints(0))
        ));
    }
}
