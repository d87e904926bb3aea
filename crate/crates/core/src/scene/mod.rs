//! Voxelized 3D scene: occupancy grid construction, exact-traversal
//! raycasting, point-to-point visibility, and surface extraction.
//!
//! The grid is immutable after construction; all queries are pure and safe
//! to call concurrently.

mod format;
pub mod synth;

pub use format::{load_scene, load_xyz_csv, SceneFormat};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::scalar::Real;

/// Voxel index triple `[ix, iy, iz]`.
pub type VoxelIdx = [usize; 3];

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed input in {path} at {location}: {message}")]
    MalformedInput {
        path: String,
        location: String,
        message: String,
    },
    #[error("structural error: {0}")]
    Structural(String),
    #[error("non-finite point at index {index}")]
    NonFinitePoint { index: usize },
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("point cloud is empty")]
    EmptyPointCloud,
    #[error("point [{0}, {1}, {2}] is outside grid bounds")]
    OutOfBounds(f64, f64, f64),
    #[error("direction must be a unit vector")]
    NotUnitDirection,
}

/// Dense voxel occupancy over an axis-aligned box.
///
/// Linear layout is x-fastest: `idx = ix + nx * (iy + ny * iz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<R> {
    dims: [usize; 3],
    resolution: R,
    origin: Vec3<R>,
    occupancy: Vec<bool>,
}

/// First intersection of a ray with the occupied set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit<R> {
    /// World-space entry point on the hit voxel (equals the ray origin when
    /// the origin voxel itself is occupied).
    pub point: Vec3<R>,
    /// Distance along the ray to `point`, meters.
    pub distance: R,
    /// Index of the occupied voxel.
    pub voxel: VoxelIdx,
    /// Outward face normal of the crossed face, one of ±e_x, ±e_y, ±e_z;
    /// all zeros when the origin voxel was already occupied.
    pub face_normal: [i32; 3],
}

impl<R: Real> OccupancyGrid<R> {
    /// Builds a grid from raw parts. `occupancy.len()` must equal
    /// `nx * ny * nz`.
    pub fn from_parts(
        dims: [usize; 3],
        resolution: R,
        origin: Vec3<R>,
        occupancy: Vec<bool>,
    ) -> Result<Self, SceneError> {
        if resolution <= R::zero() || !resolution.is_finite() {
            return Err(SceneError::BadResolution(resolution.to_f64_lossy()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(SceneError::Structural(
                "grid dims must all be >= 1".into(),
            ));
        }
        let expect = dims[0] * dims[1] * dims[2];
        if occupancy.len() != expect {
            return Err(SceneError::Structural(format!(
                "occupancy payload has {} voxels, dims {:?} require {}",
                occupancy.len(),
                dims,
                expect
            )));
        }
        Ok(Self {
            dims,
            resolution,
            origin,
            occupancy,
        })
    }

    /// All-free grid of the given shape.
    pub fn empty(dims: [usize; 3], resolution: R, origin: Vec3<R>) -> Self {
        Self::from_parts(dims, resolution, origin, vec![false; dims[0] * dims[1] * dims[2]])
            .expect("valid empty grid")
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn resolution(&self) -> R {
        self.resolution
    }

    pub fn origin(&self) -> Vec3<R> {
        self.origin
    }

    /// World-space maximum corner (exclusive bound).
    pub fn max_corner(&self) -> Vec3<R> {
        self.origin
            + Vec3::new(
                R::from_usize(self.dims[0]) * self.resolution,
                R::from_usize(self.dims[1]) * self.resolution,
                R::from_usize(self.dims[2]) * self.resolution,
            )
    }

    /// Length of the grid's space diagonal; an upper bound on any in-bounds
    /// ray segment.
    pub fn diagonal(&self) -> R {
        (self.max_corner() - self.origin).norm()
    }

    pub fn voxel_count(&self) -> usize {
        self.occupancy.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    #[inline]
    pub fn linear_index(&self, v: VoxelIdx) -> usize {
        v[0] + self.dims[0] * (v[1] + self.dims[1] * v[2])
    }

    #[inline]
    pub fn in_bounds_voxel(&self, v: [i64; 3]) -> bool {
        (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < self.dims[a])
    }

    #[inline]
    pub fn is_occupied(&self, v: VoxelIdx) -> bool {
        self.occupancy[self.linear_index(v)]
    }

    #[inline]
    pub fn set_occupied(&mut self, v: VoxelIdx, value: bool) {
        let i = self.linear_index(v);
        self.occupancy[i] = value;
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    /// Voxel containing the world point, or `None` if out of bounds.
    pub fn voxel_of(&self, p: Vec3<R>) -> Option<VoxelIdx> {
        let rel = (p - self.origin) / self.resolution;
        let v = [
            rel.x.floor().to_f64_lossy() as i64,
            rel.y.floor().to_f64_lossy() as i64,
            rel.z.floor().to_f64_lossy() as i64,
        ];
        if self.in_bounds_voxel(v) {
            Some([v[0] as usize, v[1] as usize, v[2] as usize])
        } else {
            None
        }
    }

    pub fn contains_point(&self, p: Vec3<R>) -> bool {
        self.voxel_of(p).is_some()
    }

    /// World-space center of a voxel.
    pub fn voxel_center(&self, v: VoxelIdx) -> Vec3<R> {
        let half = R::from_f64(0.5);
        self.origin
            + Vec3::new(
                (R::from_usize(v[0]) + half) * self.resolution,
                (R::from_usize(v[1]) + half) * self.resolution,
                (R::from_usize(v[2]) + half) * self.resolution,
            )
    }

    /// True if the world point lies in a free in-bounds voxel.
    pub fn is_free_point(&self, p: Vec3<R>) -> bool {
        match self.voxel_of(p) {
            Some(v) => !self.is_occupied(v),
            None => false,
        }
    }

    /// First occupied voxel along the parametric ray, by exact incremental
    /// grid stepping; `None` if the ray leaves the grid or travels farther
    /// than `max_dist` without a hit.
    pub fn raycast(
        &self,
        origin: Vec3<R>,
        dir: Vec3<R>,
        max_dist: R,
    ) -> Result<Option<Hit<R>>, SceneError> {
        let start = self.voxel_of(origin).ok_or_else(|| {
            let a = origin.to_f64_array();
            SceneError::OutOfBounds(a[0], a[1], a[2])
        })?;
        let norm = dir.norm();
        if ((norm - R::one()).abs()).to_f64_lossy() > 1e-6 {
            return Err(SceneError::NotUnitDirection);
        }

        if self.is_occupied(start) {
            return Ok(Some(Hit {
                point: origin,
                distance: R::zero(),
                voxel: start,
                face_normal: [0, 0, 0],
            }));
        }

        let mut voxel = [start[0] as i64, start[1] as i64, start[2] as i64];
        let mut step = [0i64; 3];
        let mut t_max = [R::infinity(); 3];
        let mut t_delta = [R::infinity(); 3];
        let dirs = [dir.x, dir.y, dir.z];
        let origins = [origin.x, origin.y, origin.z];
        let grid_min = [self.origin.x, self.origin.y, self.origin.z];
        for a in 0..3 {
            if dirs[a] > R::zero() {
                step[a] = 1;
                let boundary = grid_min[a] + R::from_usize(voxel[a] as usize + 1) * self.resolution;
                t_max[a] = (boundary - origins[a]) / dirs[a];
                t_delta[a] = self.resolution / dirs[a];
            } else if dirs[a] < R::zero() {
                step[a] = -1;
                let boundary = grid_min[a] + R::from_usize(voxel[a] as usize) * self.resolution;
                t_max[a] = (boundary - origins[a]) / dirs[a];
                t_delta[a] = -self.resolution / dirs[a];
            }
        }

        loop {
            // advance to the nearest voxel boundary
            let axis = if t_max[0] <= t_max[1] {
                if t_max[0] <= t_max[2] {
                    0
                } else {
                    2
                }
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            let t_enter = t_max[axis];
            if !t_enter.is_finite() || t_enter > max_dist {
                return Ok(None);
            }
            voxel[axis] += step[axis];
            if !self.in_bounds_voxel(voxel) {
                return Ok(None);
            }
            t_max[axis] += t_delta[axis];
            let v = [voxel[0] as usize, voxel[1] as usize, voxel[2] as usize];
            if self.is_occupied(v) {
                let mut normal = [0i32; 3];
                normal[axis] = -(step[axis] as i32);
                return Ok(Some(Hit {
                    point: origin + dir * t_enter,
                    distance: t_enter,
                    voxel: v,
                    face_normal: normal,
                }));
            }
        }
    }

    /// True iff the open segment between `a` and `b` crosses no occupied
    /// voxel. Endpoints lying on occupied voxels are offset half a voxel
    /// along their outward surface normal first, so surface points do not
    /// occlude themselves. Exactly symmetric in its arguments: the pair is
    /// canonically ordered before the cast.
    pub fn mutually_visible(&self, a: Vec3<R>, b: Vec3<R>) -> Result<bool, SceneError> {
        for p in [a, b] {
            if !self.contains_point(p) {
                let q = p.to_f64_array();
                return Err(SceneError::OutOfBounds(q[0], q[1], q[2]));
            }
        }
        let (a, b) = if a.lex_cmp(b) == std::cmp::Ordering::Greater {
            (b, a)
        } else {
            (a, b)
        };
        let slack = self.resolution * R::from_f64(1e-6);
        if a.dist(b) <= slack {
            return Ok(true);
        }
        let a_off = match self.offset_from_surface(a, b) {
            Some(p) => p,
            None => return Ok(false),
        };
        let b_off = match self.offset_from_surface(b, a) {
            Some(p) => p,
            None => return Ok(false),
        };
        let seg = b_off - a_off;
        let len = seg.norm();
        if len <= slack {
            return Ok(true);
        }
        let dir = seg / len;
        match self.raycast(a_off, dir, len - slack)? {
            Some(_) => Ok(false),
            None => Ok(true),
        }
    }

    /// Moves a point lying in an occupied voxel half a voxel along the free
    /// 6-neighbor direction best aligned with `toward`; free points pass
    /// through unchanged. `None` when the voxel has no free neighbor.
    fn offset_from_surface(&self, p: Vec3<R>, toward: Vec3<R>) -> Option<Vec3<R>> {
        let v = self.voxel_of(p)?;
        if !self.is_occupied(v) {
            return Some(p);
        }
        let want = (toward - p).normalized().unwrap_or(Vec3::zero());
        let mut best: Option<(R, usize, i64)> = None;
        for axis in 0..3 {
            for sign in [1i64, -1] {
                let mut nb = [v[0] as i64, v[1] as i64, v[2] as i64];
                nb[axis] += sign;
                if !self.in_bounds_voxel(nb) {
                    continue;
                }
                if self.is_occupied([nb[0] as usize, nb[1] as usize, nb[2] as usize]) {
                    continue;
                }
                let mut n = Vec3::zero();
                n.set_axis(axis, R::from_f64(sign as f64));
                let score = n.dot(want);
                let better = match best {
                    None => true,
                    Some((s, _, _)) => score > s,
                };
                if better {
                    best = Some((score, axis, sign));
                }
            }
        }
        let (_, axis, sign) = best?;
        let mut n = Vec3::zero();
        n.set_axis(axis, R::from_f64(sign as f64));
        let half = self.resolution * R::from_f64(0.5);
        let moved = p + n * half;
        if self.is_free_point(moved) {
            return Some(moved);
        }
        // point sat in the far half of its voxel; land on the neighbor center
        let mut nb = [v[0] as i64, v[1] as i64, v[2] as i64];
        nb[axis] += sign;
        Some(self.voxel_center([nb[0] as usize, nb[1] as usize, nb[2] as usize]))
    }

    /// Occupied voxels with at least one free in-bounds 6-neighbor, in
    /// ascending linear-index order.
    pub fn extract_surface_voxels(&self) -> Vec<VoxelIdx> {
        let [nx, ny, nz] = self.dims;
        let mut out = Vec::new();
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    let v = [ix, iy, iz];
                    if !self.is_occupied(v) {
                        continue;
                    }
                    if self.has_free_neighbor(v) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    fn has_free_neighbor(&self, v: VoxelIdx) -> bool {
        for axis in 0..3 {
            for sign in [1i64, -1] {
                let mut nb = [v[0] as i64, v[1] as i64, v[2] as i64];
                nb[axis] += sign;
                if self.in_bounds_voxel(nb)
                    && !self.is_occupied([nb[0] as usize, nb[1] as usize, nb[2] as usize])
                {
                    return true;
                }
            }
        }
        false
    }
}

/// Voxelizes a point cloud. The bounding box is padded by one voxel on every
/// side; a voxel is occupied iff at least one point falls inside it. Points
/// exactly on the maximum boundary are kept in the last interior cell.
pub fn voxelize_point_cloud<R: Real>(
    points: &[Vec3<R>],
    resolution: R,
) -> Result<OccupancyGrid<R>, SceneError> {
    if resolution <= R::zero() || !resolution.is_finite() {
        return Err(SceneError::BadResolution(resolution.to_f64_lossy()));
    }
    if points.is_empty() {
        return Err(SceneError::EmptyPointCloud);
    }
    for (i, p) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(SceneError::NonFinitePoint { index: i });
        }
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points[1..] {
        lo = lo.min(*p);
        hi = hi.max(*p);
    }
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let span = (hi.axis(a) - lo.axis(a)) / resolution;
        let cells = span.ceil().to_f64_lossy() as usize;
        dims[a] = cells.max(1) + 2;
    }
    let origin = lo - Vec3::splat(resolution);
    let mut grid = OccupancyGrid::empty(dims, resolution, origin);
    for p in points {
        let rel = (*p - lo) / resolution;
        let mut v = [0usize; 3];
        for a in 0..3 {
            let i = rel.axis(a).floor().to_f64_lossy() as i64;
            // interior cells span indices 1..=dims-2 after padding
            let clamped = i.clamp(0, dims[a] as i64 - 3) as usize;
            v[a] = clamped + 1;
        }
        grid.set_occupied(v, true);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Grid = OccupancyGrid<f64>;
    type V = Vec3<f64>;

    fn v(x: f64, y: f64, z: f64) -> V {
        Vec3::new(x, y, z)
    }

    #[test]
    fn voxelize_single_point() {
        let g = voxelize_point_cloud(&[v(0.0, 0.0, 0.0)], 1.0).unwrap();
        assert_eq!(g.dims(), [3, 3, 3]);
        assert_eq!(g.occupied_count(), 1);
        assert!(g.is_occupied([1, 1, 1]));
    }

    #[test]
    fn voxelize_two_points_ten_meters_apart() {
        let g = voxelize_point_cloud(&[v(0.0, 0.0, 0.0), v(10.0, 0.0, 0.0)], 1.0).unwrap();
        assert_eq!(g.dims()[0], 12);
        assert_eq!(g.occupied_count(), 2);
        assert!(g.is_occupied([1, 1, 1]));
        assert!(g.is_occupied([10, 1, 1]));
    }

    #[test]
    fn voxelize_colocated_points_share_voxel() {
        let g = voxelize_point_cloud(&[v(0.1, 0.0, 0.0), v(0.9, 0.0, 0.0)], 1.0).unwrap();
        assert_eq!(g.occupied_count(), 1);
    }

    #[test]
    fn voxelize_rejects_non_finite() {
        let err = voxelize_point_cloud(&[v(0.0, 0.0, 0.0), v(f64::NAN, 0.0, 0.0)], 1.0)
            .unwrap_err();
        match err {
            SceneError::NonFinitePoint { index } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn voxelize_unit_cube_corners() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(v(x, y, z));
                }
            }
        }
        let g = voxelize_point_cloud(&pts, 0.5).unwrap();
        assert_eq!(g.dims(), [4, 4, 4]);
        assert_eq!(g.occupied_count(), 8);
        // corners land on the inner 2x2x2 shell
        for ix in [1, 2] {
            for iy in [1, 2] {
                for iz in [1, 2] {
                    assert!(g.is_occupied([ix, iy, iz]));
                }
            }
        }
    }

    fn wall_grid() -> Grid {
        // 10x10x3 m at 0.5 m, full wall plane spanning x in [5.0, 5.5)
        let mut g = Grid::empty([20, 20, 6], 0.5, V::zero());
        for iy in 0..20 {
            for iz in 0..6 {
                g.set_occupied([10, iy, iz], true);
            }
        }
        g
    }

    #[test]
    fn raycast_hits_wall_at_analytic_distance() {
        let g = wall_grid();
        let hit = g
            .raycast(v(2.0, 2.0, 1.0), v(1.0, 0.0, 0.0), 100.0)
            .unwrap()
            .unwrap();
        assert!((hit.distance - 3.0).abs() < 1e-12);
        assert!(hit.point.x >= 5.0 && hit.point.x <= 5.5);
        assert_eq!(hit.voxel, [10, 4, 2]);
        assert_eq!(hit.face_normal, [-1, 0, 0]);
    }

    #[test]
    fn raycast_inside_occupied_returns_zero_distance() {
        let g = wall_grid();
        let hit = g
            .raycast(v(5.25, 2.0, 1.0), v(0.0, 1.0, 0.0), 100.0)
            .unwrap()
            .unwrap();
        assert_eq!(hit.distance, 0.0);
        assert_eq!(hit.voxel, [10, 4, 2]);
    }

    #[test]
    fn raycast_empty_grid_misses() {
        let g = Grid::empty([20, 20, 6], 0.5, V::zero());
        assert!(g
            .raycast(v(2.0, 2.0, 1.0), v(1.0, 0.0, 0.0), 100.0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn raycast_respects_max_dist() {
        let g = wall_grid();
        assert!(g
            .raycast(v(2.0, 2.0, 1.0), v(1.0, 0.0, 0.0), 2.5)
            .unwrap()
            .is_none());
    }

    #[test]
    fn raycast_out_of_bounds_origin_errors() {
        let g = wall_grid();
        assert!(matches!(
            g.raycast(v(-1.0, 2.0, 1.0), v(1.0, 0.0, 0.0), 10.0),
            Err(SceneError::OutOfBounds(..))
        ));
    }

    #[test]
    fn raycast_recast_near_hit_returns_same_voxel() {
        let g = wall_grid();
        let dir = v(1.0, 0.3, 0.1).normalized().unwrap();
        let hit = g.raycast(v(1.0, 3.0, 1.0), dir, 100.0).unwrap().unwrap();
        let just_before = hit.point - dir * 0.05;
        let again = g.raycast(just_before, dir, 100.0).unwrap().unwrap();
        assert_eq!(hit.voxel, again.voxel);
    }

    #[test]
    fn visibility_blocked_by_wall() {
        let g = wall_grid();
        let a = v(2.0, 5.0, 1.0);
        let b = v(8.0, 5.0, 1.0);
        assert!(!g.mutually_visible(a, b).unwrap());
        assert!(!g.mutually_visible(b, a).unwrap());
    }

    #[test]
    fn visibility_same_room() {
        let g = wall_grid();
        let a = v(1.0, 1.0, 1.0);
        let b = v(4.0, 8.0, 2.0);
        assert!(g.mutually_visible(a, b).unwrap());
        assert!(g.mutually_visible(b, a).unwrap());
    }

    #[test]
    fn visibility_identical_points() {
        let g = wall_grid();
        let a = v(3.0, 3.0, 1.0);
        assert!(g.mutually_visible(a, a).unwrap());
    }

    #[test]
    fn visibility_surface_points_on_same_wall_face() {
        let g = wall_grid();
        // centers of two wall voxels on the same plane; the half-voxel offset
        // keeps the connecting segment off the wall
        let a = g.voxel_center([10, 2, 1]);
        let b = g.voxel_center([10, 17, 4]);
        assert!(g.mutually_visible(a, b).unwrap());
    }

    #[test]
    fn surface_of_solid_block_excludes_center() {
        let mut g = Grid::empty([7, 7, 7], 1.0, V::zero());
        for ix in 2..5 {
            for iy in 2..5 {
                for iz in 2..5 {
                    g.set_occupied([ix, iy, iz], true);
                }
            }
        }
        let surf = g.extract_surface_voxels();
        assert_eq!(surf.len(), 26);
        assert!(!surf.contains(&[3, 3, 3]));
    }

    #[test]
    fn surface_of_free_grid_is_empty() {
        let g = Grid::empty([4, 4, 4], 1.0, V::zero());
        assert!(g.extract_surface_voxels().is_empty());
    }

    #[test]
    fn surface_of_single_voxel_is_itself() {
        let mut g = Grid::empty([4, 4, 4], 1.0, V::zero());
        g.set_occupied([2, 1, 3], true);
        assert_eq!(g.extract_surface_voxels(), vec![[2, 1, 3]]);
    }

    #[test]
    fn f32_grid_raycasts_too() {
        let mut g = OccupancyGrid::<f32>::empty([20, 20, 6], 0.5, Vec3::zero());
        for iy in 0..20 {
            for iz in 0..6 {
                g.set_occupied([10, iy, iz], true);
            }
        }
        let hit = g
            .raycast(
                Vec3::new(2.0f32, 2.0, 1.0),
                Vec3::new(1.0, 0.0, 0.0),
                100.0,
            )
            .unwrap()
            .unwrap();
        assert!((hit.distance - 3.0).abs() < 1e-5);
    }
}
