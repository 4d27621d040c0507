//! Design evaluation, tier classification and parallel sweeps.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{bandwidth_trace, capacity, datapath_stages, DatapathStage, Stage};
use crate::config::{derive_pumps, MemoryConfig, SweepSpec};
use crate::energy::{access_energy, power, AccessEnergy};
use crate::error::{Error, Result};
use crate::floorplan::{die_floorplan_with_plan, total_area, DieFloorplan};
use crate::routing::{bank_wires, global_datapath, plan_mat, BankWires, MatRoutingPlan, WireRun};
use crate::technode::TechnologyNode;
use crate::timing::{compute_timing, TimingResult};

/// Schema tag written as the first line of every metrics CSV.
pub const CSV_SCHEMA: &str = "# stackdram-metrics v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    A,
    B,
    C,
    D,
    E,
}

impl Tier {
    pub const ALL: [Tier; 5] = [Tier::A, Tier::B, Tier::C, Tier::D, Tier::E];
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Lowest tier whose parameter set covers every field where `config`
/// departs from `baseline`.
pub fn classify_tier(config: &MemoryConfig, baseline: &MemoryConfig) -> Tier {
    let (c, b) = (&config.mat, &baseline.mat);
    if c.dlomat_enabled != b.dlomat_enabled {
        return Tier::E;
    }
    let mut c_rest = c.clone();
    c_rest.dlomat_enabled = b.dlomat_enabled;
    if c_rest != *b {
        return Tier::D;
    }
    if config.subarray != baseline.subarray {
        return Tier::C;
    }
    if config.bank != baseline.bank {
        return Tier::B;
    }
    Tier::A
}

/// Everything computed for one design.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub config: MemoryConfig,
    pub pumps: u32,
    pub plan: MatRoutingPlan,
    pub floorplan: DieFloorplan,
    pub bank_wires: BankWires,
    pub datapath: Vec<WireRun>,
    pub timing: TimingResult,
    pub energy: AccessEnergy,
    pub stages: [DatapathStage; 5],
    pub binding_stage: Stage,
    pub bandwidth_gbs: f64,
    pub capacity_gb: f64,
    pub total_area_mm2: f64,
    pub power_w: f64,
}

pub fn evaluate_detailed(config: &MemoryConfig, node: &TechnologyNode) -> Result<Evaluation> {
    let pumps = derive_pumps(config);
    let plan = plan_mat(config, node)?;
    let floorplan = die_floorplan_with_plan(config, node, &plan);
    let wires = bank_wires(&plan, node, &floorplan);
    let datapath = global_datapath(config, node, &floorplan);
    let timing = compute_timing(config, node, &floorplan, &wires, pumps);
    let energy = access_energy(config, node, &plan, &wires, &floorplan, &datapath, pumps);
    let stages = datapath_stages(config, node, &timing);
    let (bw, binding) = bandwidth_trace(config, node, &timing);
    Ok(Evaluation {
        config: config.clone(),
        pumps,
        plan,
        floorplan,
        bank_wires: wires,
        datapath,
        timing,
        stages,
        binding_stage: binding,
        bandwidth_gbs: bw,
        capacity_gb: capacity(config),
        total_area_mm2: total_area(&floorplan, config.dies()),
        power_w: power(bw, energy.closed_row_epb),
        energy,
    })
}

/// One row of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetrics {
    pub index: u64,
    pub config_id: String,
    pub tier: Tier,
    pub bandwidth_gbs: f64,
    pub capacity_gb: f64,
    pub epb_full_pj: f64,
    pub epb_closed_pj: f64,
    pub miss_latency_ns: f64,
    pub die_area_mm2: f64,
    pub total_area_mm2: f64,
    /// Bandwidth times closed-row energy per bit.
    pub power_w: f64,
    /// Closed-row energy per bit times miss latency, pJ ns / b.
    pub edp: f64,
    pub trp_ns: f64,
    pub trcd_ns: f64,
    pub tcl_ns: f64,
    pub bank_cycle_ns: f64,
    pub tccdl_ns: f64,
    pub tccds_ns: f64,
    pub core_frequency_mhz: f64,
    pub pumps: u32,
    pub dies: u32,
    pub die_len_x_mm: f64,
    pub die_len_y_mm: f64,
    pub binding_stage: Stage,
    pub ranks: u32,
    pub channels: u32,
    pub channels_per_die: u32,
    pub pseudo_channels_per_channel: u32,
    pub bank_groups_horizontal: u32,
    pub bank_groups_vertical: u32,
    pub banks_per_bank_group: u32,
    pub bgbus_mux_ratio: u32,
    pub adl_enabled: bool,
    pub dq_per_stack: u32,
    pub dq_data_rate: f64,
    pub subarrays_per_bank: u32,
    pub mats_per_subarray: u32,
    pub repair_subarrays: u32,
    pub salp_mode: String,
    pub partial_page: String,
    pub ocsa_enabled: bool,
    pub wls_per_mat: u32,
    pub bls_per_mat: u32,
    pub mdls_per_mat: u32,
    pub ldls_per_mat: u32,
    pub wl_isolation_overhead: f64,
    pub bl_isolation_overhead: f64,
    pub odecc_overhead: f64,
    pub dlomat_enabled: bool,
}

impl DesignMetrics {
    pub fn from_evaluation(e: &Evaluation, index: u64, tier: Tier) -> Self {
        let c = &e.config;
        let (ib, bk, sa, m) = (&c.inter_bank, &c.bank, &c.subarray, &c.mat);
        DesignMetrics {
            index,
            config_id: c.config_id(),
            tier,
            bandwidth_gbs: e.bandwidth_gbs,
            capacity_gb: e.capacity_gb,
            epb_full_pj: e.energy.full_row_epb,
            epb_closed_pj: e.energy.closed_row_epb,
            miss_latency_ns: e.timing.miss_latency_ns,
            die_area_mm2: e.floorplan.die_area_mm2,
            total_area_mm2: e.total_area_mm2,
            power_w: e.power_w,
            edp: e.energy.closed_row_epb * e.timing.miss_latency_ns,
            trp_ns: e.timing.trp_ns,
            trcd_ns: e.timing.trcd_ns,
            tcl_ns: e.timing.tcl_ns,
            bank_cycle_ns: e.timing.bank_cycle_ns,
            tccdl_ns: e.timing.tccdl_ns,
            tccds_ns: e.timing.tccds_ns,
            core_frequency_mhz: e.timing.core_frequency_mhz,
            pumps: e.pumps,
            dies: c.dies(),
            die_len_x_mm: e.floorplan.die_len_x_mm,
            die_len_y_mm: e.floorplan.die_len_y_mm,
            binding_stage: e.binding_stage,
            ranks: ib.ranks,
            channels: ib.channels,
            channels_per_die: ib.channels_per_die,
            pseudo_channels_per_channel: ib.pseudo_channels_per_channel,
            bank_groups_horizontal: ib.bank_groups_horizontal,
            bank_groups_vertical: ib.bank_groups_vertical,
            banks_per_bank_group: ib.banks_per_bank_group,
            bgbus_mux_ratio: ib.bgbus_mux_ratio,
            adl_enabled: ib.adl_enabled,
            dq_per_stack: ib.dq_per_stack,
            dq_data_rate: ib.dq_data_rate,
            subarrays_per_bank: bk.subarrays_per_bank,
            mats_per_subarray: bk.mats_per_subarray,
            repair_subarrays: bk.repair_subarrays,
            salp_mode: bk.salp_mode.to_string(),
            partial_page: sa.partial_page.to_string(),
            ocsa_enabled: sa.ocsa_enabled,
            wls_per_mat: m.wls_per_mat,
            bls_per_mat: m.bls_per_mat,
            mdls_per_mat: m.mdls_per_mat,
            ldls_per_mat: m.ldls_per_mat,
            wl_isolation_overhead: m.wl_isolation_overhead,
            bl_isolation_overhead: m.bl_isolation_overhead,
            odecc_overhead: m.odecc_overhead,
            dlomat_enabled: m.dlomat_enabled,
        }
    }
}

pub fn evaluate(config: &MemoryConfig, node: &TechnologyNode, baseline: &MemoryConfig) -> Result<DesignMetrics> {
    let e = evaluate_detailed(config, node)?;
    Ok(DesignMetrics::from_evaluation(&e, 0, classify_tier(config, baseline)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipKind {
    Invalid,
    TooManyDies,
    RoutingInfeasible,
    DieTooLarge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDesign {
    pub index: u64,
    pub kind: SkipKind,
    pub reason: String,
}

/// Row and skip tallies of one sweep; `emitted` plus every skip count equals
/// `cartesian`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SweepCounts {
    pub cartesian: u64,
    pub invalid: u64,
    pub too_many_dies: u64,
    pub routing_infeasible: u64,
    pub die_too_large: u64,
    pub emitted: u64,
}

impl SweepCounts {
    /// Designs that pass the structural checks, before any floorplan is built.
    pub fn structurally_valid(&self) -> u64 {
        self.cartesian - self.invalid
    }

    fn add_skip(&mut self, kind: SkipKind) {
        match kind {
            SkipKind::Invalid => self.invalid += 1,
            SkipKind::TooManyDies => self.too_many_dies += 1,
            SkipKind::RoutingInfeasible => self.routing_infeasible += 1,
            SkipKind::DieTooLarge => self.die_too_large += 1,
        }
    }
}

fn evaluate_index(
    spec: &SweepSpec,
    node: &TechnologyNode,
    baseline: &MemoryConfig,
    index: u64,
) -> std::result::Result<DesignMetrics, SkippedDesign> {
    let skip = |kind, reason: String| SkippedDesign { index, kind, reason };
    let config = match spec.candidate(index).outcome {
        Ok(c) => c,
        Err(e @ Error::Validation { .. }) if matches!(&e, Error::Validation { field, .. } if field == "filters.max_dies") => {
            return Err(skip(SkipKind::TooManyDies, e.to_string()))
        }
        Err(e) => return Err(skip(SkipKind::Invalid, e.to_string())),
    };
    let e = match evaluate_detailed(&config, node) {
        Ok(e) => e,
        Err(err) => return Err(skip(SkipKind::RoutingInfeasible, err.to_string())),
    };
    let f = &spec.filters;
    let fp = &e.floorplan;
    if fp.die_len_y_mm > f.max_die_len_mm || fp.die_len_x_mm > f.max_die_width_mm {
        return Err(skip(
            SkipKind::DieTooLarge,
            format!("die {:.3} x {:.3} mm exceeds the size limit", fp.die_len_x_mm, fp.die_len_y_mm),
        ));
    }
    Ok(DesignMetrics::from_evaluation(&e, index, classify_tier(&config, baseline)))
}

/// Indices evaluated per parallel batch; results are emitted in index order.
const BATCH: u64 = 1 << 15;

/// Evaluates every point of `spec`, handing rows and skips to the sinks in
/// index order whatever the thread count. `jobs == 0` uses all cores.
pub fn run_sweep_streaming(
    spec: &SweepSpec,
    node: &TechnologyNode,
    baseline: &MemoryConfig,
    jobs: usize,
    mut on_row: impl FnMut(DesignMetrics) -> Result<()>,
    mut on_skip: impl FnMut(SkippedDesign) -> Result<()>,
) -> Result<SweepCounts> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let total = spec.cartesian_size();
    let mut counts = SweepCounts {
        cartesian: total,
        ..SweepCounts::default()
    };
    let mut start = 0;
    while start < total {
        let end = (start + BATCH).min(total);
        let batch: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| evaluate_index(spec, node, baseline, i))
                .collect()
        });
        for r in batch {
            match r {
                Ok(row) => {
                    counts.emitted += 1;
                    on_row(row)?;
                }
                Err(s) => {
                    counts.add_skip(s.kind);
                    on_skip(s)?;
                }
            }
        }
        start = end;
    }
    Ok(counts)
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<DesignMetrics>,
    pub skipped: Vec<SkippedDesign>,
    pub counts: SweepCounts,
}

pub fn run_sweep(spec: &SweepSpec, node: &TechnologyNode, baseline: &MemoryConfig, jobs: usize) -> Result<SweepTable> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let counts = run_sweep_streaming(
        spec,
        node,
        baseline,
        jobs,
        |r| {
            rows.push(r);
            Ok(())
        },
        |s| {
            skipped.push(s);
            Ok(())
        },
    )?;
    Ok(SweepTable { rows, skipped, counts })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Opens a metrics CSV writer with the schema line in place.
pub fn metrics_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let mut w = create(path)?;
    writeln!(w, "{CSV_SCHEMA}").map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(w))
}

pub fn write_metrics_csv(path: &Path, rows: &[DesignMetrics]) -> Result<()> {
    let mut w = metrics_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<DesignMetrics>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Sidecar path for skipped designs: `<out>.skipped.csv`.
pub fn skipped_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".skipped.csv");
    s.into()
}

/// Runs a sweep straight to disk: the metrics CSV, the skipped-design
/// sidecar and, optionally, JSON lines.
pub fn write_sweep(
    spec: &SweepSpec,
    node: &TechnologyNode,
    baseline: &MemoryConfig,
    jobs: usize,
    out: &Path,
    jsonl: Option<&Path>,
) -> Result<SweepCounts> {
    let mut rows = metrics_writer(out)?;
    let skip_path = skipped_path(out);
    let mut skips = csv::Writer::from_writer(create(&skip_path)?);
    let mut json = jsonl.map(|p| create(p).map(|w| (p, w))).transpose()?;
    let counts = run_sweep_streaming(
        spec,
        node,
        baseline,
        jobs,
        |r| {
            if let Some((p, w)) = json.as_mut() {
                let line = serde_json::to_string(&r).expect("metrics serialize");
                writeln!(w, "{line}").map_err(|e| Error::io(*p, e))?;
            }
            rows.serialize(r)?;
            Ok(())
        },
        |s| Ok(skips.serialize(s)?),
    )?;
    rows.flush().map_err(|e| Error::io(out, e))?;
    skips.flush().map_err(|e| Error::io(&skip_path, e))?;
    if let Some((p, w)) = json.as_mut() {
        w.flush().map_err(|e| Error::io(*p, e))?;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::hbm3;
    use crate::config::{ParamLists, SalpMode, SweepFilters};
    use crate::technode::tests::node_1z;

    #[test]
    fn tier_examples() {
        let b = hbm3();
        assert_eq!(classify_tier(&b, &b), Tier::A);
        let mut c = b.clone();
        c.bank.salp_mode = SalpMode::All;
        assert_eq!(classify_tier(&c, &b), Tier::B);
        let mut c = b.clone();
        c.mat.dlomat_enabled = true;
        assert_eq!(classify_tier(&c, &b), Tier::E);
        let mut c = b.clone();
        c.inter_bank.channels = 32;
        c.mat.wls_per_mat = 512;
        assert_eq!(classify_tier(&c, &b), Tier::D);
    }

    #[test]
    fn singleton_sweep_has_one_row() {
        let b = hbm3();
        let t = run_sweep(&SweepSpec::singleton(&b), &node_1z(), &b, 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].tier, Tier::A);
    }

    #[test]
    fn thirty_two_dies_contribute_nothing() {
        let b = hbm3();
        let lists = ParamLists {
            ranks: Some(vec![2, 8]),
            ..ParamLists::default()
        };
        let spec = SweepSpec::resolve(lists, SweepFilters::default(), true, &b);
        let t = run_sweep(&spec, &node_1z(), &b, 2).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.counts.too_many_dies, 1);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let b = hbm3();
        let n = node_1z();
        assert_eq!(evaluate(&b, &n, &b).unwrap(), evaluate(&b, &n, &b).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let b = hbm3();
        let row = evaluate(&b, &node_1z(), &b).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_metrics_csv(&p, std::slice::from_ref(&row)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with(CSV_SCHEMA));
        assert_eq!(read_metrics_csv(&p).unwrap(), vec![row]);
    }
}
