//! Synthetic indoor scenes for simulation and testing: closed boxes with
//! interior walls, doorways, and pillars, built directly on the voxel grid.

use crate::geom::Vec3;
use crate::scalar::Real;
use crate::scene::OccupancyGrid;

/// Builds occupancy grids from axis-aligned solid and carved boxes.
pub struct SceneBuilder<R: Real> {
    grid: OccupancyGrid<R>,
}

impl<R: Real> SceneBuilder<R> {
    /// A closed box of the given interior size (meters): every boundary voxel
    /// layer (walls, floor, ceiling) occupied, interior free. Grid origin is
    /// at world (0,0,0).
    pub fn shell(size_m: [f64; 3], resolution: R) -> Self {
        let res = resolution.to_f64_lossy();
        let dims = [
            (size_m[0] / res).round() as usize,
            (size_m[1] / res).round() as usize,
            (size_m[2] / res).round() as usize,
        ];
        let mut grid = OccupancyGrid::empty(dims, resolution, Vec3::zero());
        let [nx, ny, nz] = dims;
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    if ix == 0
                        || iy == 0
                        || iz == 0
                        || ix == nx - 1
                        || iy == ny - 1
                        || iz == nz - 1
                    {
                        grid.set_occupied([ix, iy, iz], true);
                    }
                }
            }
        }
        Self { grid }
    }

    fn set_box(&mut self, min: Vec3<R>, max: Vec3<R>, value: bool) {
        let [nx, ny, nz] = self.grid.dims();
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    let c = self.grid.voxel_center([ix, iy, iz]);
                    if c.x >= min.x
                        && c.x <= max.x
                        && c.y >= min.y
                        && c.y <= max.y
                        && c.z >= min.z
                        && c.z <= max.z
                    {
                        self.grid.set_occupied([ix, iy, iz], value);
                    }
                }
            }
        }
    }

    /// Occupies all voxels whose center falls inside the world-space box.
    pub fn fill_box(&mut self, min: Vec3<R>, max: Vec3<R>) -> &mut Self {
        self.set_box(min, max, true);
        self
    }

    /// Frees all voxels whose center falls inside the world-space box
    /// (cuts doorways).
    pub fn carve_box(&mut self, min: Vec3<R>, max: Vec3<R>) -> &mut Self {
        self.set_box(min, max, false);
        self
    }

    /// A full-height wall slab. `axis` is the wall's normal direction,
    /// `at..at+thickness` its extent along that axis.
    pub fn wall(&mut self, axis: usize, at: f64, thickness: f64) -> &mut Self {
        let lo = self.grid.origin();
        let hi = self.grid.max_corner();
        let mut min = lo;
        let mut max = hi;
        min.set_axis(axis, R::from_f64(at));
        max.set_axis(axis, R::from_f64(at + thickness));
        self.fill_box(min, max)
    }

    pub fn build(self) -> OccupancyGrid<R> {
        self.grid
    }
}

/// Interior wall thickness used by the stock scenes, meters.
const WALL: f64 = 0.25;

/// Closed empty room, `size_m` interior meters.
pub fn closed_room<R: Real>(size_m: [f64; 3], resolution: R) -> OccupancyGrid<R> {
    SceneBuilder::shell(size_m, resolution).build()
}

/// Two rooms joined by a central corridor, ~20 x 10 x 3 m. Doorways at
/// opposite ends keep most cross-room pairs out of line of sight.
pub fn two_room_corridor<R: Real>(resolution: R) -> OccupancyGrid<R> {
    let mut b = SceneBuilder::shell([20.0, 10.0, 3.0], resolution);
    // room A: y in (0, 4); corridor: y in (4, 6); room B: y in (6, 10)
    b.wall(1, 4.0 - WALL, WALL);
    b.wall(1, 6.0, WALL);
    // doorways at opposite ends of the corridor
    b.carve_box(
        Vec3::from_f64(3.5, 4.0 - WALL - 0.01, 0.0),
        Vec3::from_f64(5.0, 4.0 + 0.01, 2.2),
    );
    b.carve_box(
        Vec3::from_f64(15.0, 6.0 - 0.01, 0.0),
        Vec3::from_f64(16.5, 6.0 + WALL + 0.01, 2.2),
    );
    // partial partition inside room A
    let mut min = Vec3::from_f64(10.0, 0.0, 0.0);
    let mut max = Vec3::from_f64(10.0 + WALL, 2.5, 3.0);
    min.set_axis(2, R::zero());
    max.set_axis(2, R::from_f64(3.0));
    b.fill_box(min, max);
    b.build()
}

/// L-shaped corridor: free space forms an L of 4 m width inside a
/// 12 x 12 x 3 m box.
pub fn l_corridor<R: Real>(resolution: R) -> OccupancyGrid<R> {
    let mut b = SceneBuilder::shell([12.0, 12.0, 3.0], resolution);
    b.fill_box(Vec3::from_f64(4.0, 4.0, 0.0), Vec3::from_f64(12.0, 12.0, 3.0));
    b.build()
}

/// Four rooms in a 2x2 layout with offset doorways, 16 x 16 x 3 m.
pub fn four_rooms<R: Real>(resolution: R) -> OccupancyGrid<R> {
    let mut b = SceneBuilder::shell([16.0, 16.0, 3.0], resolution);
    b.wall(0, 8.0 - WALL / 2.0, WALL);
    b.wall(1, 8.0 - WALL / 2.0, WALL);
    // one doorway per wall segment, staggered
    b.carve_box(Vec3::from_f64(7.0, 2.0, 0.0), Vec3::from_f64(9.0, 3.5, 2.2));
    b.carve_box(Vec3::from_f64(7.0, 12.5, 0.0), Vec3::from_f64(9.0, 14.0, 2.2));
    b.carve_box(Vec3::from_f64(2.0, 7.0, 0.0), Vec3::from_f64(3.5, 9.0, 2.2));
    b.carve_box(Vec3::from_f64(12.5, 7.0, 0.0), Vec3::from_f64(14.0, 9.0, 2.2));
    b.build()
}

/// Open hall with floor-to-ceiling pillars, 14 x 10 x 3 m.
pub fn pillar_hall<R: Real>(resolution: R) -> OccupancyGrid<R> {
    let mut b = SceneBuilder::shell([14.0, 10.0, 3.0], resolution);
    for (px, py) in [(4.0, 3.0), (7.0, 7.0), (10.0, 4.0)] {
        b.fill_box(
            Vec3::from_f64(px, py, 0.0),
            Vec3::from_f64(px + 0.75, py + 0.75, 3.0),
        );
    }
    b.build()
}

/// The stock scene set used for partition soundness checks.
pub fn stock_scenes<R: Real>(resolution: R) -> Vec<(&'static str, OccupancyGrid<R>)> {
    vec![
        ("closed-room", closed_room([8.0, 6.0, 3.0], resolution)),
        ("two-room-corridor", two_room_corridor(resolution)),
        ("l-corridor", l_corridor(resolution)),
        ("four-rooms", four_rooms(resolution)),
        ("pillar-hall", pillar_hall(resolution)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_interior_is_free() {
        let g = closed_room::<f64>([4.0, 4.0, 3.0], 0.5);
        assert_eq!(g.dims(), [8, 8, 6]);
        assert!(g.is_occupied([0, 3, 3]));
        assert!(g.is_occupied([7, 3, 3]));
        assert!(!g.is_occupied([4, 4, 3]));
    }

    #[test]
    fn two_room_scene_blocks_cross_room_sight() {
        let g = two_room_corridor::<f64>(0.25);
        let a = Vec3::new(1.0, 2.0, 1.0); // room A
        let b = Vec3::new(1.0, 8.0, 1.0); // room B, same x
        assert!(!g.mutually_visible(a, b).unwrap());
        // but both see into the corridor through their own side
        let c = Vec3::new(4.2, 5.0, 1.0); // corridor by door A
        assert!(g.mutually_visible(Vec3::new(4.2, 2.0, 1.0), c).unwrap());
    }

    #[test]
    fn l_corridor_arm_ends_not_visible() {
        let g = l_corridor::<f64>(0.25);
        let arm_x = Vec3::new(11.0, 2.0, 1.0);
        let arm_y = Vec3::new(2.0, 11.0, 1.0);
        assert!(!g.mutually_visible(arm_x, arm_y).unwrap());
        let corner = Vec3::new(2.0, 2.0, 1.0);
        assert!(g.mutually_visible(arm_x, corner).unwrap());
        assert!(g.mutually_visible(arm_y, corner).unwrap());
    }

    #[test]
    fn stock_scenes_build_under_f32() {
        for (name, g) in stock_scenes::<f32>(0.25) {
            assert!(g.occupied_count() > 0, "{name} has no walls");
            assert!(
                g.occupied_count() < g.voxel_count(),
                "{name} has no free space"
            );
        }
    }
}
