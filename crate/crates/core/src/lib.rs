//! Analytical area, timing, energy and bandwidth model for 3D-stacked DRAM,
//! with parallel design-space sweeps and analysis of the resulting tables.
//!
//! The usual entry point is [`engine::evaluate_detailed`] for one design, or
//! [`engine::run_sweep`] for a Cartesian sweep.

pub mod analysis;
pub mod capacity;
pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod floorplan;
pub mod routing;
pub mod technode;
pub mod timing;

pub use config::{derive_pumps, load_config, MemoryConfig, SweepSpec};
pub use engine::{classify_tier, evaluate, evaluate_detailed, run_sweep, DesignMetrics, Evaluation, Tier};
pub use error::{Error, Result};
pub use technode::{apply_scaling, load_node, load_scaling, scale_node, ScalingConfidence, TechnologyNode};
