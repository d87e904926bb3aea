//! Visibility-based scene partitioning: segment surface voxels into patches,
//! pick representative points, and cluster representatives into regions whose
//! members are pairwise mutually visible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::scalar::Real;
use crate::scene::{OccupancyGrid, SceneError, VoxelIdx};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("no surface voxels to partition")]
    EmptyScene,
    #[error("max_extent must exceed the grid resolution")]
    BadMaxExtent,
    #[error("cluster radius must be positive")]
    BadClusterRadius,
    #[error("region {0} has no reachable free space")]
    EmptyRegion(usize),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// A 6-connected piece of surface with bounded principal extent.
#[derive(Debug, Clone)]
pub struct SurfacePatch<R> {
    pub voxels: Vec<VoxelIdx>,
    /// Arithmetic mean of member voxel centers.
    pub representative: Vec3<R>,
}

/// A cluster of patches whose representatives are pairwise mutually visible.
#[derive(Debug, Clone)]
pub struct Region<R> {
    pub id: usize,
    pub patches: Vec<SurfacePatch<R>>,
    /// Mean of member representatives.
    pub center: Vec3<R>,
}

/// The full partition of a scene's surface into regions.
#[derive(Debug, Clone)]
pub struct Partition<R> {
    pub regions: Vec<Region<R>>,
    pub cluster_radius: R,
}

/// Serializable view of a partition: per region, its id, center,
/// representative points, and measurement waypoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionDoc<R> {
    pub resolution: R,
    pub max_extent: R,
    pub cluster_radius: R,
    pub seed: u64,
    pub waypoint_spacing: R,
    pub regions: Vec<RegionDoc<R>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionDoc<R> {
    pub id: usize,
    pub center: Vec3<R>,
    pub representatives: Vec<Vec3<R>>,
    pub waypoints: Vec<Vec3<R>>,
}

impl<R: Real> Region<R> {
    pub fn representatives(&self) -> impl Iterator<Item = Vec3<R>> + '_ {
        self.patches.iter().map(|p| p.representative)
    }
}

fn mean_of<R: Real>(points: impl Iterator<Item = Vec3<R>>) -> Vec3<R> {
    let mut sum = Vec3::zero();
    let mut n = 0usize;
    for p in points {
        sum = sum + p;
        n += 1;
    }
    sum / R::from_usize(n.max(1))
}

/// Splits the surface voxel set into 6-connected components and recursively
/// divides any component whose spread along its principal axis exceeds
/// `max_extent`, cutting at the centroid plane orthogonal to the largest
/// covariance eigenvector.
pub fn segment_surfaces<R: Real>(
    surface: &[VoxelIdx],
    grid: &OccupancyGrid<R>,
    max_extent: R,
) -> Result<Vec<SurfacePatch<R>>, PartitionError> {
    if max_extent <= grid.resolution() {
        return Err(PartitionError::BadMaxExtent);
    }
    if surface.is_empty() {
        return Err(PartitionError::EmptyScene);
    }
    let mut patches = Vec::new();
    for component in connected_components(surface) {
        split_recursive(component, grid, max_extent, &mut patches);
    }
    Ok(patches)
}

fn connected_components(voxels: &[VoxelIdx]) -> Vec<Vec<VoxelIdx>> {
    use std::collections::{HashSet, VecDeque};
    let set: HashSet<VoxelIdx> = voxels.iter().copied().collect();
    let mut seen: HashSet<VoxelIdx> = HashSet::new();
    let mut components = Vec::new();
    for &start in voxels {
        if seen.contains(&start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for axis in 0..3 {
                for sign in [1i64, -1] {
                    let mut nb = [v[0] as i64, v[1] as i64, v[2] as i64];
                    nb[axis] += sign;
                    if nb[axis] < 0 {
                        continue;
                    }
                    let nb = [nb[0] as usize, nb[1] as usize, nb[2] as usize];
                    if set.contains(&nb) && seen.insert(nb) {
                        queue.push_back(nb);
                    }
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

fn split_recursive<R: Real>(
    voxels: Vec<VoxelIdx>,
    grid: &OccupancyGrid<R>,
    max_extent: R,
    out: &mut Vec<SurfacePatch<R>>,
) {
    let centers: Vec<Vec3<R>> = voxels.iter().map(|&v| grid.voxel_center(v)).collect();
    let centroid = mean_of(centers.iter().copied());
    let axis = principal_axis(&centers, centroid)
        .or_else(|| longest_extent_axis(&centers))
        .unwrap_or(Vec3::new(R::one(), R::zero(), R::zero()));
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for c in &centers {
        let t = (*c - centroid).dot(axis);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if hi - lo <= max_extent || voxels.len() < 2 {
        out.push(SurfacePatch {
            voxels,
            representative: centroid,
        });
        return;
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (v, c) in voxels.iter().zip(&centers) {
        if (*c - centroid).dot(axis) <= R::zero() {
            left.push(*v);
        } else {
            right.push(*v);
        }
    }
    if left.is_empty() || right.is_empty() {
        // numerically one-sided; cut along the longest axis-aligned extent
        let axis_id = longest_axis_id(&centers);
        left.clear();
        right.clear();
        for (v, c) in voxels.iter().zip(&centers) {
            if c.axis(axis_id) <= centroid.axis(axis_id) {
                left.push(*v);
            } else {
                right.push(*v);
            }
        }
        if left.is_empty() || right.is_empty() {
            out.push(SurfacePatch {
                voxels,
                representative: centroid,
            });
            return;
        }
    }
    // plane cuts can disconnect a side; re-split into components first
    for half in [left, right] {
        for comp in connected_components(&half) {
            split_recursive(comp, grid, max_extent, out);
        }
    }
}

/// Largest-eigenvalue eigenvector of the position covariance by power
/// iteration from each axis start; `None` when the component is degenerate.
fn principal_axis<R: Real>(centers: &[Vec3<R>], centroid: Vec3<R>) -> Option<Vec3<R>> {
    let n = R::from_usize(centers.len());
    let mut cov = [[R::zero(); 3]; 3];
    for c in centers {
        let d = *c - centroid;
        let d = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for row in &mut cov {
        for x in row {
            *x /= n;
        }
    }
    let matvec = |v: Vec3<R>| {
        Vec3::new(
            cov[0][0] * v.x + cov[0][1] * v.y + cov[0][2] * v.z,
            cov[1][0] * v.x + cov[1][1] * v.y + cov[1][2] * v.z,
            cov[2][0] * v.x + cov[2][1] * v.y + cov[2][2] * v.z,
        )
    };
    let mut best: Option<(R, Vec3<R>)> = None;
    for start in [
        Vec3::new(R::one(), R::zero(), R::zero()),
        Vec3::new(R::zero(), R::one(), R::zero()),
        Vec3::new(R::zero(), R::zero(), R::one()),
    ] {
        let mut v = start;
        for _ in 0..48 {
            let w = matvec(v);
            match w.normalized() {
                Some(u) => v = u,
                None => break,
            }
        }
        let rq = v.dot(matvec(v));
        if rq.is_finite() {
            let better = match &best {
                None => true,
                Some((b, _)) => rq > *b,
            };
            if better {
                best = Some((rq, v));
            }
        }
    }
    let (rq, v) = best?;
    let tiny = R::from_f64(1e-12);
    if rq <= tiny {
        return None;
    }
    Some(v)
}

fn longest_axis_id<R: Real>(centers: &[Vec3<R>]) -> usize {
    let mut lo = centers[0];
    let mut hi = centers[0];
    for c in centers {
        lo = lo.min(*c);
        hi = hi.max(*c);
    }
    let span = hi - lo;
    let mut axis = 0;
    for a in 1..3 {
        if span.axis(a) > span.axis(axis) {
            axis = a;
        }
    }
    axis
}

fn longest_extent_axis<R: Real>(centers: &[Vec3<R>]) -> Option<Vec3<R>> {
    if centers.is_empty() {
        return None;
    }
    let mut v = Vec3::zero();
    v.set_axis(longest_axis_id(centers), R::one());
    Some(v)
}

/// Clusters patch representatives into regions. A candidate joins the current
/// cluster iff it is mutually visible with every member and within
/// `cluster_radius` of the running cluster center; candidates are always
/// tried nearest-to-center first. The first cluster starts from a seeded
/// pseudo-random representative, each later cluster from the unclustered
/// point nearest the previous cluster's center.
pub fn cluster_regions<R: Real>(
    patches: Vec<SurfacePatch<R>>,
    grid: &OccupancyGrid<R>,
    cluster_radius: R,
    seed: u64,
) -> Result<Partition<R>, PartitionError> {
    if patches.is_empty() {
        return Err(PartitionError::EmptyScene);
    }
    if cluster_radius <= R::zero() {
        return Err(PartitionError::BadClusterRadius);
    }
    let reps: Vec<Vec3<R>> = patches.iter().map(|p| p.representative).collect();
    let n = reps.len();
    let mut vis_cache: Vec<Option<bool>> = vec![None; n * n];
    let mut visible = |a: usize, b: usize, grid: &OccupancyGrid<R>| -> Result<bool, SceneError> {
        if let Some(v) = vis_cache[a * n + b] {
            return Ok(v);
        }
        let v = grid.mutually_visible(reps[a], reps[b])?;
        vis_cache[a * n + b] = Some(v);
        vis_cache[b * n + a] = Some(v);
        Ok(v)
    };

    let mut unclustered: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut prev_center: Option<Vec3<R>> = None;

    while !unclustered.is_empty() {
        let seed_pos = match prev_center {
            None => rng.gen_range(0..unclustered.len()),
            Some(c) => {
                let mut best = 0;
                for (k, &idx) in unclustered.iter().enumerate() {
                    if reps[idx].dist(c) < reps[unclustered[best]].dist(c) {
                        best = k;
                    }
                }
                best
            }
        };
        let seed_idx = unclustered.remove(seed_pos);
        let mut members = vec![seed_idx];
        let mut center = reps[seed_idx];
        loop {
            let mut order: Vec<usize> = (0..unclustered.len()).collect();
            order.sort_by(|&a, &b| {
                let da = reps[unclustered[a]].dist(center);
                let db = reps[unclustered[b]].dist(center);
                da.partial_cmp(&db)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(unclustered[a].cmp(&unclustered[b]))
            });
            let mut admitted = None;
            for k in order {
                let cand = unclustered[k];
                if reps[cand].dist(center) > cluster_radius {
                    // candidates are sorted by distance; the rest are farther
                    break;
                }
                let mut ok = true;
                for &m in &members {
                    if !visible(cand, m, grid)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    admitted = Some(k);
                    break;
                }
            }
            match admitted {
                Some(k) => {
                    let idx = unclustered.remove(k);
                    members.push(idx);
                    center = mean_of(members.iter().map(|&m| reps[m]));
                }
                None => break,
            }
        }
        prev_center = Some(center);
        clusters.push(members);
    }

    let mut patch_slots: Vec<Option<SurfacePatch<R>>> = patches.into_iter().map(Some).collect();
    let regions = clusters
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let center = mean_of(members.iter().map(|&m| reps[m]));
            let patches: Vec<SurfacePatch<R>> = members
                .into_iter()
                .map(|m| patch_slots[m].take().expect("patch used once"))
                .collect();
            Region {
                id,
                patches,
                center,
            }
        })
        .collect();
    Ok(Partition {
        regions,
        cluster_radius,
    })
}

impl<R: Real> Partition<R> {
    /// Free-space measurement poses for one region: a planar lattice at
    /// `spacing` and antenna height `height`, keeping points whose nearest
    /// surface patch belongs to the region and which see at least one of its
    /// representatives. Falls back to the free point nearest the region
    /// center when the lattice misses the region entirely.
    pub fn region_waypoints(
        &self,
        region_id: usize,
        grid: &OccupancyGrid<R>,
        spacing: R,
        height: R,
    ) -> Result<Vec<Vec3<R>>, PartitionError> {
        Ok(self.compute_waypoints(grid, spacing, height)?[region_id].clone())
    }

    /// Waypoints for every region in one pass.
    pub fn compute_waypoints(
        &self,
        grid: &OccupancyGrid<R>,
        spacing: R,
        height: R,
    ) -> Result<Vec<Vec<Vec3<R>>>, PartitionError> {
        assert!(spacing > R::zero(), "waypoint spacing must be positive");
        let mut out: Vec<Vec<Vec3<R>>> = vec![Vec::new(); self.regions.len()];
        for p in lattice_points(grid, spacing, height) {
            if !grid.is_free_point(p) {
                continue;
            }
            let Some(region_id) = self.nearest_region(grid, p) else {
                continue;
            };
            if self.sees_region_rep(grid, region_id, p)? {
                out[region_id].push(p);
            }
        }
        for (id, wps) in out.iter_mut().enumerate() {
            if !wps.is_empty() {
                continue;
            }
            match self.fallback_waypoint(grid, id)? {
                Some(p) => wps.push(p),
                None => return Err(PartitionError::EmptyRegion(id)),
            }
        }
        Ok(out)
    }

    /// Region owning the surface voxel nearest to `p`. Member voxels rather
    /// than representatives decide ownership so corners attribute correctly.
    fn nearest_region(&self, grid: &OccupancyGrid<R>, p: Vec3<R>) -> Option<usize> {
        let mut best: Option<(R, usize)> = None;
        for region in &self.regions {
            for patch in &region.patches {
                for &v in &patch.voxels {
                    let d = p - grid.voxel_center(v);
                    let d2 = d.dot(d);
                    let better = match best {
                        None => true,
                        Some((b, _)) => d2 < b,
                    };
                    if better {
                        best = Some((d2, region.id));
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }

    fn sees_region_rep(
        &self,
        grid: &OccupancyGrid<R>,
        region_id: usize,
        p: Vec3<R>,
    ) -> Result<bool, SceneError> {
        for rep in self.regions[region_id].representatives() {
            if grid.mutually_visible(p, rep)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn fallback_waypoint(
        &self,
        grid: &OccupancyGrid<R>,
        region_id: usize,
    ) -> Result<Option<Vec3<R>>, PartitionError> {
        let center = self.regions[region_id].center;
        let [nx, ny, nz] = grid.dims();
        let mut free: Vec<(R, VoxelIdx)> = Vec::new();
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    let v = [ix, iy, iz];
                    if grid.is_occupied(v) {
                        continue;
                    }
                    free.push((grid.voxel_center(v).dist(center), v));
                }
            }
        }
        free.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for (_, v) in free {
            let p = grid.voxel_center(v);
            if self.sees_region_rep(grid, region_id, p)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    /// Builds the serializable document, computing waypoints at `spacing`.
    pub fn to_doc(
        &self,
        grid: &OccupancyGrid<R>,
        max_extent: R,
        seed: u64,
        spacing: R,
        height: R,
    ) -> Result<PartitionDoc<R>, PartitionError> {
        let waypoints = self.compute_waypoints(grid, spacing, height)?;
        Ok(PartitionDoc {
            resolution: grid.resolution(),
            max_extent,
            cluster_radius: self.cluster_radius,
            seed,
            waypoint_spacing: spacing,
            regions: self
                .regions
                .iter()
                .zip(waypoints)
                .map(|(r, wps)| RegionDoc {
                    id: r.id,
                    center: r.center,
                    representatives: r.representatives().collect(),
                    waypoints: wps,
                })
                .collect(),
        })
    }
}

/// Runs the full partition pipeline on a grid.
pub fn partition_scene<R: Real>(
    grid: &OccupancyGrid<R>,
    max_extent: R,
    cluster_radius: R,
    seed: u64,
) -> Result<Partition<R>, PartitionError> {
    let surface = grid.extract_surface_voxels();
    let patches = segment_surfaces(&surface, grid, max_extent)?;
    cluster_regions(patches, grid, cluster_radius, seed)
}

/// Planar x/y lattice at the antenna height (robots measure at one pose
/// height), clamped into the grid's z extent.
fn lattice_points<R: Real>(grid: &OccupancyGrid<R>, spacing: R, height: R) -> Vec<Vec3<R>> {
    let lo = grid.origin();
    let hi = grid.max_corner();
    let half = spacing * R::from_f64(0.5);
    let eps = grid.resolution() * R::from_f64(1e-3);
    let z = (lo.z + height).max(lo.z + eps).min(hi.z - eps);
    let mut pts = Vec::new();
    let counts: Vec<usize> = (0..2)
        .map(|a| {
            let span = hi.axis(a) - lo.axis(a);
            (span / spacing).ceil().to_f64_lossy() as usize
        })
        .collect();
    for iy in 0..counts[1] {
        for ix in 0..counts[0] {
            let p = Vec3::new(
                lo.x + half + spacing * R::from_usize(ix),
                lo.y + half + spacing * R::from_usize(iy),
                z,
            );
            if grid.contains_point(p) {
                pts.push(p);
            }
        }
    }
    pts
}
