//! Deterministic ray-launch ground truth: specular bounces off voxel faces,
//! capture-sphere reception, analytic direct path. Deliberately a different
//! propagation mechanism than the learned model renders, so the model cannot
//! trivially match its own assumptions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{OracleParams, SimError};
use crate::geom::{fibonacci_sphere, Vec3};
use crate::scalar::Real;
use crate::scene::OccupancyGrid;

fn dbm_to_mw<R: Real>(dbm: R) -> R {
    R::from_f64(10.0).powf(dbm / R::from_f64(10.0))
}

fn mw_to_dbm<R: Real>(mw: R) -> R {
    R::from_f64(10.0) * mw.log10()
}

/// Linear power of one path of the given length and bounce count.
fn path_power<R: Real>(params: &OracleParams<R>, len: R, bounces: usize) -> R {
    let len = len.max(R::from_f64(1e-6));
    let p_ref = dbm_to_mw(params.ref_power_dbm);
    let geo = (params.d0 / len).powf(params.path_loss_exp);
    let refl = params
        .reflection_coeff
        .powi(2 * bounces as i32);
    p_ref * geo * refl
}

/// Ground-truth RSSI between two free-space positions, dBm.
///
/// Casts `params.rays` uniformly distributed rays from the transmitter and
/// follows specular reflections up to `max_bounces`; a reflected ray
/// contributes once when its path first passes within `capture_radius` of
/// the receiver. The unobstructed direct path is added analytically (launch
/// captures before the first bounce are skipped so it is never counted
/// twice). The dBm total is clamped to the noise floor; optional Gaussian
/// noise is derived deterministically from the seed and both positions.
pub fn oracle_rssi<R: Real>(
    grid: &OccupancyGrid<R>,
    params: &OracleParams<R>,
    tx: Vec3<R>,
    rx: Vec3<R>,
) -> Result<R, SimError> {
    params.validate()?;
    for p in [tx, rx] {
        if !grid.is_free_point(p) {
            let a = p.to_f64_array();
            return Err(SimError::NotFreeSpace(a[0], a[1], a[2]));
        }
    }

    let mut total = R::zero();
    if grid.mutually_visible(tx, rx)? {
        total += path_power(params, tx.dist(rx), 0);
    }

    if params.max_bounces > 0 {
        let nudge = grid.resolution() * R::from_f64(1e-3);
        let max_seg = grid.diagonal() + R::one();
        for dir0 in fibonacci_sphere::<R>(params.rays) {
            let mut pos = tx;
            let mut dir = dir0;
            let mut bounces = 0usize;
            let mut path_len = R::zero();
            loop {
                let hit = grid.raycast(pos, dir, max_seg)?;
                let seg_len = match &hit {
                    Some(h) => h.distance,
                    None => max_seg,
                };
                if bounces >= 1 {
                    // closest approach of this segment to the receiver
                    let t = (rx - pos).dot(dir).max(R::zero()).min(seg_len);
                    let closest = pos + dir * t;
                    if closest.dist(rx) <= params.capture_radius {
                        total += path_power(params, path_len + t, bounces);
                        break;
                    }
                }
                let Some(h) = hit else {
                    break; // left the scene
                };
                if bounces + 1 > params.max_bounces {
                    break;
                }
                bounces += 1;
                path_len += h.distance;
                // specular: flip the direction component along the hit face
                let n = h.face_normal;
                let mut d = dir;
                for axis in 0..3 {
                    if n[axis] != 0 {
                        d.set_axis(axis, -d.axis(axis));
                    }
                }
                dir = d;
                let normal =
                    Vec3::new(R::from_f64(n[0] as f64), R::from_f64(n[1] as f64), R::from_f64(n[2] as f64));
                pos = h.point + normal * nudge;
                if !grid.is_free_point(pos) {
                    break; // corner case: nudged into another wall
                }
            }
        }
    }

    let mut dbm = if total > R::zero() {
        mw_to_dbm(total)
    } else {
        params.noise_floor_dbm
    };
    if params.noise_sigma_dbm > R::zero() {
        dbm += params.noise_sigma_dbm * standard_normal(params.seed, tx, rx);
    }
    Ok(dbm.max(params.noise_floor_dbm))
}

/// One deterministic standard-normal draw keyed by seed and both endpoints.
fn standard_normal<R: Real>(seed: u64, tx: Vec3<R>, rx: Vec3<R>) -> R {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in tx.to_f64_array().iter().chain(rx.to_f64_array().iter()) {
        h = h
            .rotate_left(23)
            .wrapping_mul(0x2545_f491_4f6c_dd1d)
            ^ v.to_bits();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    R::from_f64((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::synth;

    fn free_space_grid() -> OccupancyGrid<f64> {
        // large empty grid, no walls at all
        OccupancyGrid::empty([60, 60, 60], 0.5, Vec3::new(-15.0, -15.0, -15.0))
    }

    #[test]
    fn reference_distance_gives_reference_power() {
        let g = free_space_grid();
        let params = OracleParams::<f64>::default();
        let v = oracle_rssi(&g, &params, Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((v - params.ref_power_dbm).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn double_distance_costs_six_db() {
        let g = free_space_grid();
        let params = OracleParams::<f64>::default();
        let v = oracle_rssi(&g, &params, Vec3::zero(), Vec3::new(2.0, 0.0, 0.0)).unwrap();
        let expected = params.ref_power_dbm - 20.0 * 2.0f64.log10();
        assert!((v - expected).abs() < 1e-9, "got {v}, want {expected}");
    }

    #[test]
    fn fully_blocked_without_bounces_hits_floor() {
        let mut b = synth::SceneBuilder::<f64>::shell([10.0, 4.0, 3.0], 0.25);
        b.wall(0, 5.0, 0.25);
        let g = b.build();
        let params = OracleParams {
            max_bounces: 0,
            ..OracleParams::<f64>::default()
        };
        let v = oracle_rssi(
            &g,
            &params,
            Vec3::new(2.0, 2.0, 1.0),
            Vec3::new(8.0, 2.0, 1.0),
        )
        .unwrap();
        assert_eq!(v, params.noise_floor_dbm);
    }

    #[test]
    fn reflections_add_power_in_a_closed_room() {
        let g = synth::closed_room::<f64>([8.0, 6.0, 3.0], 0.25);
        let tx = Vec3::new(2.0, 3.0, 1.5);
        let rx = Vec3::new(6.0, 3.0, 1.5);
        let direct_only = OracleParams {
            max_bounces: 0,
            ..OracleParams::<f64>::default()
        };
        let with_bounces = OracleParams {
            max_bounces: 3,
            rays: 2048,
            ..OracleParams::<f64>::default()
        };
        let a = oracle_rssi(&g, &direct_only, tx, rx).unwrap();
        let b = oracle_rssi(&g, &with_bounces, tx, rx).unwrap();
        assert!(b >= a, "reflections must never reduce power: {b} < {a}");
        assert!(b > a, "closed room should capture at least one bounce path");
    }

    #[test]
    fn monotone_decreasing_with_distance_in_free_space() {
        let g = free_space_grid();
        let params = OracleParams::<f64>::default();
        let mut prev = f64::INFINITY;
        for d in [0.5, 1.0, 2.0, 4.0, 8.0, 12.0] {
            let v = oracle_rssi(&g, &params, Vec3::zero(), Vec3::new(d, 0.0, 0.0)).unwrap();
            assert!(v < prev, "rssi must strictly decrease: {v} at {d}");
            prev = v;
        }
    }

    #[test]
    fn occupied_endpoint_is_domain_error() {
        let g = synth::closed_room::<f64>([4.0, 4.0, 3.0], 0.5);
        let params = OracleParams::<f64>::default();
        let inside_wall = Vec3::new(0.1, 0.1, 0.1);
        assert!(matches!(
            oracle_rssi(&g, &params, inside_wall, Vec3::new(2.0, 2.0, 1.0)),
            Err(SimError::NotFreeSpace(..))
        ));
    }

    #[test]
    fn deterministic_with_noise() {
        let g = synth::closed_room::<f64>([6.0, 4.0, 3.0], 0.5);
        let params = OracleParams {
            noise_sigma_dbm: 2.0,
            seed: 77,
            rays: 512,
            ..OracleParams::<f64>::default()
        };
        let tx = Vec3::new(1.0, 1.0, 1.0);
        let rx = Vec3::new(4.0, 2.0, 1.5);
        let a = oracle_rssi(&g, &params, tx, rx).unwrap();
        let b = oracle_rssi(&g, &params, tx, rx).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let other_seed = OracleParams { seed: 78, ..params };
        let c = oracle_rssi(&g, &other_seed, tx, rx).unwrap();
        assert_ne!(a.to_bits(), c.to_bits());
    }
}
