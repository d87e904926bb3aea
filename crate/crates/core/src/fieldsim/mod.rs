//! Desk-scale stand-in for real data collection: a deterministic multipath
//! ground-truth oracle, plan execution with travel accounting and replanning,
//! and measurement preprocessing.

mod execute;
mod oracle;

pub use execute::{execute_plan, ExecOptions, ExecutionResult};
pub use oracle::oracle_rssi;

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("position [{0}, {1}, {2}] is not in free space")]
    NotFreeSpace(f64, f64, f64),
    #[error("oracle parameters invalid: {0}")]
    BadParams(String),
    #[error("dataset io failed for {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("dataset schema error in {path} at line {line}: {message}")]
    Schema {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),
}

/// Ground-truth simulator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleParams<R> {
    /// Received power at the reference distance, dBm.
    pub ref_power_dbm: R,
    /// Reference distance, meters.
    pub d0: R,
    /// Log-distance path loss exponent (2 = free space).
    pub path_loss_exp: R,
    /// Per-bounce amplitude factor in (0, 1]; power scales by its square.
    pub reflection_coeff: R,
    pub max_bounces: usize,
    pub noise_floor_dbm: R,
    /// Gaussian dBm noise; 0 disables it.
    pub noise_sigma_dbm: R,
    /// A launched ray contributes when it passes this close to the receiver.
    pub capture_radius: R,
    /// Launched ray count.
    pub rays: usize,
    pub seed: u64,
}

impl<R: Real> Default for OracleParams<R> {
    fn default() -> Self {
        Self {
            ref_power_dbm: R::from_f64(-30.0),
            d0: R::one(),
            path_loss_exp: R::from_f64(2.0),
            reflection_coeff: R::from_f64(0.6),
            max_bounces: 3,
            noise_floor_dbm: R::from_f64(-80.0),
            noise_sigma_dbm: R::zero(),
            capture_radius: R::from_f64(0.3),
            rays: 4096,
            seed: 0,
        }
    }
}

impl<R: Real> OracleParams<R> {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.ref_power_dbm <= self.noise_floor_dbm {
            return Err(SimError::BadParams(
                "ref_power_dbm must exceed noise_floor_dbm".into(),
            ));
        }
        if self.d0 <= R::zero() {
            return Err(SimError::BadParams("d0 must be positive".into()));
        }
        if self.reflection_coeff <= R::zero() || self.reflection_coeff > R::one() {
            return Err(SimError::BadParams(
                "reflection_coeff must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One received-signal-strength sample between a transmitter and receiver
/// pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement<R> {
    pub tx: Vec3<R>,
    pub rx: Vec3<R>,
    pub rssi_dbm: R,
    #[serde(rename = "pair")]
    pub region_pair: Option<(usize, usize)>,
}

/// Dataset provenance, written as the JSONL header line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema: String,
    pub seed: u64,
    pub oracle: serde_json::Value,
    pub scene: String,
}

pub const DATASET_SCHEMA: &str = "dataset-v1";

impl DatasetMeta {
    pub fn new<R: Real + Serialize>(params: &OracleParams<R>, scene: impl Into<String>) -> Self {
        Self {
            schema: DATASET_SCHEMA.to_string(),
            seed: params.seed,
            oracle: serde_json::to_value(params).expect("oracle params serialize"),
            scene: scene.into(),
        }
    }
}

/// Measurement collection with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset<R> {
    pub meta: DatasetMeta,
    pub measurements: Vec<Measurement<R>>,
}

impl<R: Real + Serialize + for<'de> Deserialize<'de>> Dataset<R> {
    /// JSONL: meta header line followed by one record per line.
    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&self.meta).expect("meta serialize"));
        out.push('\n');
        for m in &self.measurements {
            out.push_str(&serde_json::to_string(m).expect("measurement serialize"));
            out.push('\n');
        }
        f.write_all(out.as_bytes()).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = BufReader::new(f).lines().enumerate();
        let (_, meta_line) = lines.next().ok_or_else(|| SimError::Schema {
            path: path.display().to_string(),
            line: 1,
            message: "empty dataset file".into(),
        })?;
        let meta_line = meta_line.map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let meta: DatasetMeta =
            serde_json::from_str(&meta_line).map_err(|e| SimError::Schema {
                path: path.display().to_string(),
                line: 1,
                message: e.to_string(),
            })?;
        if meta.schema != DATASET_SCHEMA {
            return Err(SimError::Schema {
                path: path.display().to_string(),
                line: 1,
                message: format!("unsupported schema `{}`", meta.schema),
            });
        }
        let mut measurements = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|source| SimError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let m: Measurement<R> = serde_json::from_str(&line).map_err(|e| SimError::Schema {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            measurements.push(m);
        }
        Ok(Self { meta, measurements })
    }
}

/// A position pair to append at the noise floor (uncovered waypoint pairs).
#[derive(Debug, Clone)]
pub struct FillRequest<R> {
    pub tx: Vec3<R>,
    pub rx: Vec3<R>,
    pub region_pair: Option<(usize, usize)>,
}

/// Median-filters measurements against neighbors whose tx AND rx both lie
/// within `filter_radius`, collapses exact duplicate (tx, rx) records, and
/// appends the requested fill positions at the floor value. A zero radius
/// leaves values untouched.
pub fn preprocess<R: Real>(
    dataset: &Dataset<R>,
    filter_radius: R,
    floor_dbm: R,
    fills: &[FillRequest<R>],
) -> Dataset<R> {
    let ms = &dataset.measurements;
    let mut filtered: Vec<Measurement<R>> = Vec::with_capacity(ms.len());
    if filter_radius > R::zero() {
        for a in ms {
            let mut vals: Vec<R> = Vec::new();
            for b in ms {
                if a.tx.dist(b.tx) <= filter_radius && a.rx.dist(b.rx) <= filter_radius {
                    vals.push(b.rssi_dbm);
                }
            }
            vals.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            let mid = vals.len() / 2;
            let median = if vals.len() % 2 == 1 {
                vals[mid]
            } else {
                (vals[mid - 1] + vals[mid]) / (R::one() + R::one())
            };
            filtered.push(Measurement {
                rssi_dbm: median,
                ..a.clone()
            });
        }
    } else {
        filtered = ms.clone();
    }

    // collapse exact duplicate endpoint pairs, first record wins
    let mut seen = std::collections::HashSet::new();
    let mut out: Vec<Measurement<R>> = Vec::with_capacity(filtered.len());
    for m in filtered {
        let key = (
            m.tx.to_f64_array().map(f64::to_bits),
            m.rx.to_f64_array().map(f64::to_bits),
        );
        if seen.insert(key) {
            out.push(m);
        }
    }

    for fill in fills {
        out.push(Measurement {
            tx: fill.tx,
            rx: fill.rx,
            rssi_dbm: floor_dbm,
            region_pair: fill.region_pair,
        });
    }

    Dataset {
        meta: dataset.meta.clone(),
        measurements: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> DatasetMeta {
        DatasetMeta::new(&OracleParams::<f64>::default(), "test")
    }

    fn m(tx: [f64; 3], rx: [f64; 3], rssi: f64) -> Measurement<f64> {
        Measurement {
            tx: Vec3::new(tx[0], tx[1], tx[2]),
            rx: Vec3::new(rx[0], rx[1], rx[2]),
            rssi_dbm: rssi,
            region_pair: None,
        }
    }

    #[test]
    fn zero_radius_is_identity() {
        let ds = Dataset {
            meta: meta(),
            measurements: vec![m([0.0; 3], [1.0, 0.0, 0.0], -50.0)],
        };
        let out = preprocess(&ds, 0.0, -80.0, &[]);
        assert_eq!(out.measurements[0].rssi_dbm, -50.0);
    }

    #[test]
    fn colocalized_readings_take_the_median() {
        let ds = Dataset {
            meta: meta(),
            measurements: vec![
                m([0.0; 3], [1.0, 0.0, 0.0], -50.0),
                m([0.05, 0.0, 0.0], [1.0, 0.05, 0.0], -51.0),
                m([0.0, 0.05, 0.0], [1.05, 0.0, 0.0], -90.0),
            ],
        };
        let out = preprocess(&ds, 0.2, -80.0, &[]);
        for rec in &out.measurements {
            assert_eq!(rec.rssi_dbm, -51.0);
        }
    }

    #[test]
    fn fills_append_floor_records() {
        let ds = Dataset {
            meta: meta(),
            measurements: vec![m([0.0; 3], [1.0, 0.0, 0.0], -50.0)],
        };
        let fills = vec![FillRequest {
            tx: Vec3::new(2.0, 0.0, 0.0),
            rx: Vec3::new(3.0, 0.0, 0.0),
            region_pair: Some((0, 1)),
        }];
        let out = preprocess(&ds, 0.0, -80.0, &fills);
        assert_eq!(out.measurements.len(), 2);
        assert_eq!(out.measurements[1].rssi_dbm, -80.0);
        assert_eq!(out.measurements[1].region_pair, Some((0, 1)));
    }

    #[test]
    fn duplicates_collapse_to_first() {
        let ds = Dataset {
            meta: meta(),
            measurements: vec![
                m([0.0; 3], [1.0, 0.0, 0.0], -50.0),
                m([0.0; 3], [1.0, 0.0, 0.0], -60.0),
            ],
        };
        let out = preprocess(&ds, 0.0, -80.0, &[]);
        assert_eq!(out.measurements.len(), 1);
        assert_eq!(out.measurements[0].rssi_dbm, -50.0);
    }

    #[test]
    fn jsonl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        let ds = Dataset {
            meta: meta(),
            measurements: vec![
                m([0.0; 3], [1.0, 0.0, 0.0], -50.0),
                Measurement {
                    region_pair: Some((1, 2)),
                    ..m([0.5; 3], [2.0, 0.0, 0.0], -61.5)
                },
            ],
        };
        ds.save_jsonl(&path).unwrap();
        let back: Dataset<f64> = Dataset::load_jsonl(&path).unwrap();
        assert_eq!(back.measurements, ds.measurements);
        assert_eq!(back.meta.schema, DATASET_SCHEMA);
    }

    #[test]
    fn jsonl_rejects_garbage_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            format!(
                "{}\nnot json\n",
                serde_json::to_string(&meta()).unwrap()
            ),
        )
        .unwrap();
        let err = Dataset::<f64>::load_jsonl(&path).unwrap_err();
        assert!(matches!(err, SimError::Schema { line: 2, .. }));
    }
}
