//! Timing parameters scaled from the node's baseline constants.

use serde::Serialize;

use crate::config::MemoryConfig;
use crate::floorplan::DieFloorplan;
use crate::routing::{wire_capacitance, BankWires};
use crate::technode::TechnologyNode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingResult {
    pub trp_ns: f64,
    pub trcd_ns: f64,
    pub tcl_ns: f64,
    pub bank_cycle_ns: f64,
    pub tccdl_ns: f64,
    pub tccds_ns: f64,
    pub miss_latency_ns: f64,
    pub core_frequency_mhz: f64,
    pub pumps: u32,
}

/// Capacitance a BLSA sees on one bitline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitlineLoad {
    pub c_cell_ff: f64,
    pub n_wl: u32,
    pub c_bl_per_wl_ff: f64,
    pub c_blsa_effective_ff: f64,
}

impl BitlineLoad {
    /// Load during sensing; an OCSA isolates the bitline from the sense node.
    pub fn sensing(config: &MemoryConfig, node: &TechnologyNode) -> Self {
        let mut load = Self::full(config, node);
        if config.subarray.ocsa_enabled {
            load.c_blsa_effective_ff = 0.0;
        }
        load
    }

    pub fn full(config: &MemoryConfig, node: &TechnologyNode) -> Self {
        BitlineLoad {
            c_cell_ff: node.c_cell_ff,
            n_wl: config.mat.wls_per_mat,
            c_bl_per_wl_ff: node.c_bl_per_wl_ff,
            c_blsa_effective_ff: node.c_blsa_ff,
        }
    }

    pub fn total_ff(&self) -> f64 {
        self.c_cell_ff + self.n_wl as f64 * self.c_bl_per_wl_ff + self.c_blsa_effective_ff
    }
}

fn split(base: f64, signal_fraction: f64, width_ratio: f64, load_ratio: f64) -> f64 {
    base * signal_fraction * width_ratio + base * (1.0 - signal_fraction) * load_ratio
}

/// Returns `(tRCD, tRP)`.
pub fn row_timing(config: &MemoryConfig, node: &TechnologyNode, fp: &DieFloorplan) -> (f64, f64) {
    let t = &node.timing;
    let r = &node.reference;
    let width_ratio = fp.bank_width_mm * 1000.0 / r.bank_width_um;
    let sense_ratio = BitlineLoad::sensing(config, node).total_ff() / r.bitline_load_ff;
    let restore_ratio = BitlineLoad::full(config, node).total_ff() / r.bitline_load_ff;
    let trcd = split(t.trcd_ns, t.trcd_signal_fraction, width_ratio, sense_ratio);
    let trp = split(t.trp_ns, t.trp_signal_fraction, width_ratio, restore_ratio);
    (trcd, trp)
}

/// Worst-case read path delay: base die edge up the TSVs to the top die,
/// across the die and back.
pub fn read_path_ns(dies: u32, node: &TechnologyNode, die_len_y_mm: f64) -> f64 {
    2.0 * dies as f64 * node.tsv.r_ohm * node.tsv.c_ff * 1e-6 + 2.0 * die_len_y_mm * node.die_traverse_ns_per_mm
}

pub fn read_latency(config: &MemoryConfig, node: &TechnologyNode, fp: &DieFloorplan) -> f64 {
    node.timing.tcl_ns * read_path_ns(config.dies(), node, fp.die_len_y_mm) / node.reference.tcl_path_ns
}

/// Minimum interval between column accesses to one bank.
pub fn bank_cycle_time(node: &TechnologyNode, wires: &BankWires) -> f64 {
    let t = &node.timing;
    let r = &node.reference;
    let csl = t.t_csl_ns * wire_capacitance(&wires.csl) / r.csl_cap_ff;
    let local = t.t_ldl_ns * wire_capacitance(&wires.local) / r.ldl_cap_ff;
    let mdl = t.t_mdl_ns * wire_capacitance(&wires.mdl) / r.mdl_cap_ff;
    csl + local + mdl * (1.0 + t.mdl_precharge_ratio) + node.t_drv_ns
}

/// Returns `(tCCDL, tCCDS)`.
pub fn column_timing(bank_cycle_ns: f64, pumps: u32, adl: bool) -> (f64, f64) {
    let tccdl = bank_cycle_ns * pumps as f64;
    let tccds = if adl { tccdl / 2.0 } else { tccdl };
    (tccdl, tccds)
}

pub fn compute_timing(
    config: &MemoryConfig,
    node: &TechnologyNode,
    fp: &DieFloorplan,
    wires: &BankWires,
    pumps: u32,
) -> TimingResult {
    let (trcd, trp) = row_timing(config, node, fp);
    let tcl = read_latency(config, node, fp);
    let cycle = bank_cycle_time(node, wires);
    let (tccdl, tccds) = column_timing(cycle, pumps, config.inter_bank.adl_enabled);
    TimingResult {
        trp_ns: trp,
        trcd_ns: trcd,
        tcl_ns: tcl,
        bank_cycle_ns: cycle,
        tccdl_ns: tccdl,
        tccds_ns: tccds,
        miss_latency_ns: trp + trcd + tcl,
        core_frequency_mhz: 1000.0 / cycle,
        pumps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::hbm3;
    use crate::config::derive_pumps;
    use crate::floorplan::die_floorplan_with_plan;
    use crate::routing::{bank_wires, plan_mat};
    use crate::technode::tests::node_1z;

    fn timing(c: &MemoryConfig) -> TimingResult {
        let node = node_1z();
        let plan = plan_mat(c, &node).unwrap();
        let fp = die_floorplan_with_plan(c, &node, &plan);
        let w = bank_wires(&plan, &node, &fp);
        compute_timing(c, &node, &fp, &w, derive_pumps(c))
    }

    #[test]
    fn column_timing_examples() {
        assert_eq!(column_timing(2.0, 1, true), (2.0, 1.0));
        assert_eq!(column_timing(2.0, 4, false), (8.0, 8.0));
        assert_eq!(column_timing(1.37, 1, false).0, 1.37);
    }

    #[test]
    fn baseline_reproduces_reference_timing() {
        let node = node_1z();
        let t = timing(&hbm3());
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(t.trcd_ns, node.timing.trcd_ns) < 1e-9, "{t:?}");
        assert!(rel(t.trp_ns, node.timing.trp_ns) < 1e-9);
        assert!(rel(t.tcl_ns, node.timing.tcl_ns) < 1e-9);
        let expected = node.timing.t_csl_ns
            + node.timing.t_ldl_ns
            + node.timing.t_mdl_ns * (1.0 + node.timing.mdl_precharge_ratio)
            + node.t_drv_ns;
        assert!(rel(t.bank_cycle_ns, expected) < 1e-9);
    }

    #[test]
    fn halving_wordlines_scales_bitline_portion() {
        let node = node_1z();
        let base = hbm3();
        let mut half = base.clone();
        half.mat.wls_per_mat = 512;
        let plan = plan_mat(&half, &node).unwrap();
        let fp = die_floorplan_with_plan(&half, &node, &plan);
        let (_, trp) = row_timing(&half, &node, &fp);
        let load = |n: f64| node.c_cell_ff + n * node.c_bl_per_wl_ff + node.c_blsa_ff;
        let t = &node.timing;
        let width_ratio = fp.bank_width_mm * 1000.0 / node.reference.bank_width_um;
        let oracle = t.trp_ns * t.trp_signal_fraction * width_ratio
            + t.trp_ns * (1.0 - t.trp_signal_fraction) * load(512.0) / load(1024.0);
        assert!((trp - oracle).abs() < 1e-9);
    }

    #[test]
    fn ocsa_lowers_trcd_only() {
        let base = hbm3();
        let mut ocsa = base.clone();
        ocsa.subarray.ocsa_enabled = true;
        let (a, b) = (timing(&base), timing(&ocsa));
        assert!(b.trcd_ns < a.trcd_ns);
    }

    #[test]
    fn tsv_term_is_linear_in_dies() {
        let node = node_1z();
        let tsv = |d| read_path_ns(d, &node, 0.0);
        assert!((tsv(16) - 2.0 * tsv(8)).abs() < 1e-12);
    }

    #[test]
    fn miss_latency_is_the_sum() {
        let t = timing(&hbm3());
        assert_eq!(t.miss_latency_ns, t.trp_ns + t.trcd_ns + t.tcl_ns);
    }
}
