//! Stack capacity and the bandwidth trace from MDLs to DQs.

use serde::{Deserialize, Serialize};

use crate::config::MemoryConfig;
use crate::technode::TechnologyNode;
use crate::timing::TimingResult;

const BITS_PER_GB: f64 = 8.0 * (1u64 << 30) as f64;

/// Addressable data bits in the stack. Repair, buffer and OD-ECC cells add
/// area but not capacity.
pub fn capacity_bits(config: &MemoryConfig) -> u64 {
    let ib = &config.inter_bank;
    [
        ib.ranks,
        ib.channels,
        ib.pseudo_channels_per_channel,
        ib.bank_groups(),
        ib.banks_per_bank_group,
        config.bank.subarrays_per_bank,
        config.bank.mats_per_subarray,
        config.mat.wls_per_mat,
        config.mat.bls_per_mat,
    ]
    .iter()
    .map(|&v| v as u64)
    .product()
}

/// Capacity in GB (2^30 bytes).
pub fn capacity(config: &MemoryConfig) -> f64 {
    capacity_bits(config) as f64 / BITS_PER_GB
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "MDL")]
    Mdl,
    #[serde(rename = "BGBUS")]
    Bgbus,
    #[serde(rename = "GBUS")]
    Gbus,
    #[serde(rename = "TSV")]
    Tsv,
    #[serde(rename = "DQ")]
    Dq,
}

/// One stage of the read datapath, summed over its parallel instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatapathStage {
    pub stage: Stage,
    /// Wires per instance.
    pub width: u32,
    /// Gb/s per wire.
    pub rate: f64,
    pub mux_ratio: u32,
    /// Concurrently streaming sources sharing one instance.
    pub concurrency: f64,
    pub instances: u32,
}

impl DatapathStage {
    /// Throughput in Gb/s.
    pub fn throughput_gbps(&self) -> f64 {
        self.width as f64 * self.rate * self.concurrency * self.instances as f64
    }
}

/// Stage trace for `config`. The MDL stage's rate is one column access per
/// tCCDL per bank, with up to tCCDL / tCCDS bank groups interleaved in a
/// pseudo channel.
pub fn datapath_stages(config: &MemoryConfig, node: &TechnologyNode, timing: &TimingResult) -> [DatapathStage; 5] {
    let ib = &config.inter_bank;
    let pcs = ib.channels * ib.pseudo_channels_per_channel;
    let interleave = (timing.tccdl_ns / timing.tccds_ns).min(ib.bank_groups() as f64);
    let column_bits = config.column_bits();
    let bus = column_bits / ib.bgbus_mux_ratio;
    let d = &node.datapath;
    [
        DatapathStage {
            stage: Stage::Mdl,
            width: column_bits,
            rate: 1.0 / timing.tccdl_ns,
            mux_ratio: 1,
            concurrency: interleave,
            instances: pcs,
        },
        DatapathStage {
            stage: Stage::Bgbus,
            width: bus,
            rate: d.bgbus_rate_gbps,
            mux_ratio: ib.bgbus_mux_ratio,
            concurrency: interleave,
            instances: pcs,
        },
        DatapathStage {
            stage: Stage::Gbus,
            width: bus,
            rate: d.gbus_rate_gbps,
            mux_ratio: ib.bgbus_mux_ratio,
            concurrency: 1.0,
            instances: pcs,
        },
        DatapathStage {
            stage: Stage::Tsv,
            width: ib.dq_per_channel() * node.tsv.per_dq,
            rate: d.tsv_rate_gbps,
            mux_ratio: 1,
            concurrency: 1.0,
            instances: ib.channels,
        },
        DatapathStage {
            stage: Stage::Dq,
            width: ib.dq_per_stack,
            rate: ib.dq_data_rate,
            mux_ratio: 1,
            concurrency: 1.0,
            instances: 1,
        },
    ]
}

/// Stack bandwidth in GB/s and the binding stage.
pub fn bandwidth_trace(config: &MemoryConfig, node: &TechnologyNode, timing: &TimingResult) -> (f64, Stage) {
    let stages = datapath_stages(config, node, timing);
    let mut best = (f64::INFINITY, Stage::Dq);
    for s in &stages {
        let t = s.throughput_gbps();
        if t < best.0 {
            best = (t, s.stage);
        }
    }
    (best.0 / 8.0, best.1)
}

pub fn bandwidth(config: &MemoryConfig, node: &TechnologyNode, timing: &TimingResult) -> f64 {
    bandwidth_trace(config, node, timing).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::hbm3;
    use crate::timing::column_timing;
    use crate::technode::tests::node_1z;

    fn timing(cycle: f64, adl: bool) -> TimingResult {
        let (l, s) = column_timing(cycle, 1, adl);
        TimingResult {
            trp_ns: 1.0,
            trcd_ns: 1.0,
            tcl_ns: 1.0,
            bank_cycle_ns: cycle,
            tccdl_ns: l,
            tccds_ns: s,
            miss_latency_ns: 3.0,
            core_frequency_mhz: 1000.0 / cycle,
            pumps: 1,
        }
    }

    #[test]
    fn baseline_capacity() {
        assert_eq!(capacity_bits(&hbm3()), 1 << 37);
        assert_eq!(capacity(&hbm3()), 16.0);
        let mut c = hbm3();
        c.inter_bank.ranks = 4;
        assert_eq!(capacity(&c), 32.0);
    }

    #[test]
    fn capacity_ignores_overheads() {
        let mut c = hbm3();
        c.bank.repair_subarrays = 3;
        c.mat.odecc_overhead = 0.125;
        assert_eq!(capacity(&c), 16.0);
    }

    #[test]
    fn dq_bound_baseline() {
        let node = node_1z();
        let (bw, stage) = bandwidth_trace(&hbm3(), &node, &timing(1.2, true));
        assert_eq!(stage, Stage::Dq);
        assert_eq!(bw, 1024.0);
    }

    #[test]
    fn halving_channels_halves_core_bound_bandwidth() {
        let node = node_1z();
        let c = hbm3();
        let mut half = c.clone();
        half.inter_bank.channels = 8;
        let t = timing(20.0, true);
        // Hand trace: 32 pseudo channels x 256 bits x 2 interleaved / 20 ns.
        let oracle = |pcs: f64| pcs * 256.0 * 2.0 / 20.0 / 8.0;
        let (bw, stage) = bandwidth_trace(&c, &node, &t);
        assert_eq!(stage, Stage::Mdl);
        assert!((bw - oracle(32.0)).abs() < 1e-9);
        assert!((bandwidth(&half, &node, &t) - oracle(16.0)).abs() < 1e-9);
    }

    #[test]
    fn no_adl_halves_interleave() {
        let node = node_1z();
        let c = hbm3();
        let a = bandwidth(&c, &node, &timing(20.0, true));
        let b = bandwidth(&c, &node, &timing(20.0, false));
        assert!((a - 2.0 * b).abs() < 1e-9);
    }
}
