//! Radio-mapping toolkit: a hybrid physics/neural signal-propagation model
//! for predicting received signal strength between arbitrary
//! transmitter-receiver positions in a voxelized 3D scene, plus scalable
//! multi-robot planning for autonomous measurement collection, exercised
//! against a built-in multipath ground-truth simulator.
//!
//! Numeric kernels are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); concrete aliases for the common instantiations live at
//! the crate root.

pub mod geom;
pub mod partition;
pub mod planner;
pub mod scalar;
pub mod scene;

pub use geom::Vec3;
pub use scalar::Real;
pub use scene::OccupancyGrid;

/// Single-precision position; matches the checkpoint storage width.
pub type Vec3f = Vec3<f32>;
/// Double-precision position; default for the pipeline.
pub type Vec3d = Vec3<f64>;
/// Grid instantiations for the two supported scalar widths.
pub type GridF = OccupancyGrid<f32>;
pub type GridD = OccupancyGrid<f64>;
