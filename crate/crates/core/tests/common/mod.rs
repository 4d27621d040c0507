#![allow(dead_code)]

use std::path::PathBuf;

use stackdram::engine::Evaluation;
use stackdram::{apply_scaling, evaluate_detailed, load_config, load_node, load_scaling, MemoryConfig, SweepSpec, TechnologyNode};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn node(scaling: &str) -> TechnologyNode {
    let d = data_dir();
    let unscaled = load_node(d.join("nodes/2ynm.json")).unwrap();
    apply_scaling(&unscaled, &load_scaling(d.join("nodes").join(scaling)).unwrap()).unwrap()
}

pub fn node_1z() -> TechnologyNode {
    node("1znm-scaling.json")
}

pub fn baseline() -> MemoryConfig {
    load_config(data_dir().join("configs/hbm3_baseline.json")).unwrap()
}

pub fn sweep(name: &str) -> SweepSpec {
    SweepSpec::load(data_dir().join("sweeps").join(name), &baseline()).unwrap()
}

/// The first structurally valid, routable design at or after `seed` in the
/// full grid, wrapping around.
pub fn feasible(spec: &SweepSpec, node: &TechnologyNode, seed: u64) -> (MemoryConfig, Evaluation) {
    let n = spec.cartesian_size();
    let mut i = seed % n;
    loop {
        let c = spec.config_at(i);
        if c.validate().is_ok() {
            if let Ok(e) = evaluate_detailed(&c, node) {
                return (c, e);
            }
        }
        i = (i + 1) % n;
    }
}
