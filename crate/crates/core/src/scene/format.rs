//! Scene file formats.
//!
//! occupancy-json is the canonical format:
//! `{"dims":[nx,ny,nz],"resolution":r,"origin":[x,y,z],"occupancy":"<base64>"}`
//! where the payload is a row-major bitset (x fastest, LSB-first within each
//! byte). xyz-csv point clouds (one `x,y,z` per line, header optional) are
//! converted on ingest via [`voxelize_point_cloud`].

use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{voxelize_point_cloud, OccupancyGrid, SceneError};
use crate::geom::Vec3;
use crate::scalar::Real;

/// Declared on-disk format of a scene file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneFormat<R> {
    OccupancyJson,
    /// Point-cloud ingestion voxelizes at this resolution.
    XyzCsv { resolution: R },
}

#[derive(Serialize, Deserialize)]
struct OccupancyJson {
    dims: [usize; 3],
    resolution: f64,
    origin: [f64; 3],
    occupancy: String,
}

/// Loads a scene file under the declared format.
pub fn load_scene<R: Real>(
    path: impl AsRef<Path>,
    format: SceneFormat<R>,
) -> Result<OccupancyGrid<R>, SceneError> {
    match format {
        SceneFormat::OccupancyJson => load_occupancy_json(path),
        SceneFormat::XyzCsv { resolution } => load_xyz_csv(path, resolution),
    }
}

fn read_to_string(path: &Path) -> Result<String, SceneError> {
    std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(super) fn load_occupancy_json<R: Real>(
    path: impl AsRef<Path>,
) -> Result<OccupancyGrid<R>, SceneError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let parsed: OccupancyJson =
        serde_json::from_str(&text).map_err(|e| SceneError::MalformedInput {
            path: path.display().to_string(),
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
    let bytes = BASE64
        .decode(parsed.occupancy.as_bytes())
        .map_err(|e| SceneError::MalformedInput {
            path: path.display().to_string(),
            location: "field `occupancy`".into(),
            message: format!("invalid base64: {e}"),
        })?;
    let n = parsed.dims[0] * parsed.dims[1] * parsed.dims[2];
    if bytes.len() != n.div_ceil(8) {
        return Err(SceneError::Structural(format!(
            "occupancy bitset holds {} bytes, dims {:?} require {}",
            bytes.len(),
            parsed.dims,
            n.div_ceil(8)
        )));
    }
    let occupancy = (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
    OccupancyGrid::from_parts(
        parsed.dims,
        R::from_f64(parsed.resolution),
        Vec3::from_f64(parsed.origin[0], parsed.origin[1], parsed.origin[2]),
        occupancy,
    )
}

/// Parses an xyz-csv point cloud and voxelizes it. A single non-numeric
/// leading line is treated as a header.
pub fn load_xyz_csv<R: Real>(
    path: impl AsRef<Path>,
    resolution: R,
) -> Result<OccupancyGrid<R>, SceneError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut points: Vec<Vec3<R>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str, field: &str| -> Result<R, SceneError> {
            s.parse::<f64>()
                .map(R::from_f64)
                .map_err(|_| SceneError::MalformedInput {
                    path: path.display().to_string(),
                    location: format!("line {}, field `{}`", lineno + 1, field),
                    message: format!("expected a number, got `{s}`"),
                })
        };
        if fields.len() != 3 {
            if lineno == 0 {
                continue; // header
            }
            return Err(SceneError::MalformedInput {
                path: path.display().to_string(),
                location: format!("line {}", lineno + 1),
                message: format!("expected 3 comma-separated values, got {}", fields.len()),
            });
        }
        match (
            parse(fields[0], "x"),
            parse(fields[1], "y"),
            parse(fields[2], "z"),
        ) {
            (Ok(x), Ok(y), Ok(z)) => points.push(Vec3::new(x, y, z)),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                if lineno == 0 {
                    continue; // header
                }
                return Err(e);
            }
        }
    }
    if points.is_empty() {
        return Err(SceneError::MalformedInput {
            path: path.display().to_string(),
            location: "line 1".into(),
            message: "file contains no points".into(),
        });
    }
    voxelize_point_cloud(&points, resolution)
}

impl<R: Real> OccupancyGrid<R> {
    /// Canonical occupancy-json encoding of this grid.
    pub fn to_occupancy_json(&self) -> String {
        let n = self.voxel_count();
        let mut bytes = vec![0u8; n.div_ceil(8)];
        for (i, &occ) in self.occupancy().iter().enumerate() {
            if occ {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        let doc = OccupancyJson {
            dims: self.dims(),
            resolution: self.resolution().to_f64_lossy(),
            origin: self.origin().to_f64_array(),
            occupancy: BASE64.encode(bytes),
        };
        serde_json::to_string(&doc).expect("occupancy json serialization")
    }

    /// Writes the canonical occupancy-json encoding to a file.
    pub fn save_occupancy_json(&self, path: impl AsRef<Path>) -> Result<(), SceneError> {
        std::fs::write(path.as_ref(), self.to_occupancy_json()).map_err(|source| SceneError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupancy_json_decodes_small_grid() {
        // dims (2,2,1), bits 1010 -> voxels 0 and 2 occupied
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let doc = format!(
            r#"{{"dims":[2,2,1],"resolution":0.5,"origin":[0,0,0],"occupancy":"{}"}}"#,
            BASE64.encode([0b0000_0101u8])
        );
        std::fs::write(&path, doc).unwrap();
        let g: OccupancyGrid<f64> = load_scene(&path, SceneFormat::OccupancyJson).unwrap();
        assert_eq!(g.occupied_count(), 2);
        assert!(g.is_occupied([0, 0, 0]));
        assert!(g.is_occupied([0, 1, 0]));
        assert!(!g.is_occupied([1, 0, 0]));
    }

    #[test]
    fn empty_file_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.json");
        std::fs::write(&path, "").unwrap();
        let err = load_scene::<f64>(&path, SceneFormat::OccupancyJson).unwrap_err();
        assert!(matches!(err, SceneError::MalformedInput { .. }));
    }

    #[test]
    fn bitset_length_mismatch_is_structural() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let doc = format!(
            r#"{{"dims":[4,4,4],"resolution":0.5,"origin":[0,0,0],"occupancy":"{}"}}"#,
            BASE64.encode([0u8])
        );
        std::fs::write(&path, doc).unwrap();
        let err = load_scene::<f64>(&path, SceneFormat::OccupancyJson).unwrap_err();
        assert!(matches!(err, SceneError::Structural(_)));
    }

    #[test]
    fn json_roundtrip_preserves_grid() {
        let mut g = OccupancyGrid::<f64>::empty([3, 4, 5], 0.25, Vec3::new(-1.0, 0.0, 2.0));
        g.set_occupied([1, 2, 3], true);
        g.set_occupied([2, 0, 4], true);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        g.save_occupancy_json(&path).unwrap();
        let back: OccupancyGrid<f64> = load_scene(&path, SceneFormat::OccupancyJson).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn xyz_csv_cube_matches_direct_voxelization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.csv");
        let mut text = String::from("x,y,z\n");
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    text.push_str(&format!("{x},{y},{z}\n"));
                    pts.push(Vec3::new(x, y, z));
                }
            }
        }
        std::fs::write(&path, text).unwrap();
        let g: OccupancyGrid<f64> =
            load_scene(&path, SceneFormat::XyzCsv { resolution: 0.5 }).unwrap();
        let direct = voxelize_point_cloud(&pts, 0.5).unwrap();
        assert_eq!(g, direct);
    }

    #[test]
    fn xyz_csv_bad_field_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "0,0,0\n1,oops,0\n").unwrap();
        let err = load_scene::<f64>(&path, SceneFormat::XyzCsv { resolution: 0.5 }).unwrap_err();
        match err {
            SceneError::MalformedInput { location, .. } => {
                assert!(location.contains("line 2"), "got {location}");
                assert!(location.contains("`y`"), "got {location}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
