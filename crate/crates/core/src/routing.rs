//! Wire planning for the MAT and the global datapath.
//!
//! A conventional MAT routes one-hot CSLs over the cell array, MDLs over the
//! local wordline driver (LWD) strip and LDLs along the BLSA strip. DLOMAT
//! swaps the first two: MDLs move over the cell array, a mostly binary CSL
//! bundle moves over the LWD strip, and the LDL tracks become local select
//! lines (LSLs) that carry the column selects down to the BLSAs.

use serde::Serialize;

use crate::config::{derive_pumps, MatParams, MemoryConfig};
use crate::error::{Error, Result};
use crate::floorplan::DieFloorplan;
use crate::technode::{TechnologyNode, WireClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WireRun {
    pub wire_class: WireClass,
    pub count: u32,
    /// Length of each wire in the run.
    pub length_um: f64,
    pub pitch_um: f64,
    pub cap_per_len_ff_per_um: f64,
    /// Capacitance of one wire of the run.
    pub total_cap_ff: f64,
}

impl WireRun {
    pub fn new(wire_class: WireClass, count: u32, length_um: f64, pitch_um: f64, cap_per_len: f64) -> Self {
        WireRun {
            wire_class,
            count,
            length_um,
            pitch_um,
            cap_per_len_ff_per_um: cap_per_len,
            total_cap_ff: length_um * cap_per_len,
        }
    }

    pub fn routed(node: &TechnologyNode, class: WireClass, count: u32, length_um: f64) -> Self {
        let w = node.wire(class);
        WireRun::new(class, count, length_um, w.pitch_um, w.cap_per_len_ff_per_um)
    }

    /// Width of routing track this run needs.
    pub fn track_demand_um(&self) -> f64 {
        self.count as f64 * self.pitch_um
    }
}

/// Capacitance of one wire of `run`.
pub fn wire_capacitance(run: &WireRun) -> f64 {
    run.length_um * run.cap_per_len_ff_per_um
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RoutingScheme {
    Conventional,
    Dlomat,
}

/// Tracks assigned to the three routing regions of one MAT. Run lengths are
/// the per-MAT segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatRoutingPlan {
    pub scheme: RoutingScheme,
    pub over_cell_array: Vec<WireRun>,
    pub over_lwd: Vec<WireRun>,
    pub over_blsa: Vec<WireRun>,
    pub csl_one_hot: u32,
    pub csl_binary: u32,
    /// Column groups addressable inside the MAT.
    pub csl_groups: u32,
}

fn demand(runs: &[WireRun]) -> f64 {
    runs.iter().map(WireRun::track_demand_um).sum()
}

impl MatRoutingPlan {
    pub fn cell_array_demand_um(&self) -> f64 {
        demand(&self.over_cell_array)
    }

    pub fn lwd_demand_um(&self) -> f64 {
        demand(&self.over_lwd)
    }

    pub fn blsa_demand_um(&self) -> f64 {
        demand(&self.over_blsa)
    }

    pub fn csl_wires(&self) -> u32 {
        self.csl_one_hot + self.csl_binary
    }
}

pub(crate) fn cell_array_width_um(mat: &MatParams, node: &TechnologyNode) -> f64 {
    mat.bls_per_mat as f64 * node.cell_width_um * (1.0 + mat.odecc_overhead)
}

pub(crate) fn cell_array_height_um(mat: &MatParams, node: &TechnologyNode) -> f64 {
    mat.wls_per_mat as f64 * node.cell_height_um
}

fn check_fit(region: &str, runs: &[WireRun], capacity_um: f64) -> Result<()> {
    let need = demand(runs);
    if need > capacity_um {
        return Err(Error::RoutingInfeasible {
            region: region.to_string(),
            demand_um: need,
            capacity_um,
        });
    }
    Ok(())
}

fn check_plan(plan: &MatRoutingPlan, mat: &MatParams, node: &TechnologyNode) -> Result<()> {
    check_fit("cell array", &plan.over_cell_array, cell_array_width_um(mat, node))?;
    check_fit("LWD strip", &plan.over_lwd, node.lwd_width_um * node.strip_expansion_limit)?;
    check_fit("BLSA strip", &plan.over_blsa, node.blsa_height_um * node.strip_expansion_limit)?;
    Ok(())
}

pub fn plan_conventional(mat: &MatParams, node: &TechnologyNode) -> Result<MatRoutingPlan> {
    if mat.dlomat_enabled {
        return Err(Error::InvalidArgument("conventional plan requested for a DLOMAT MAT".into()));
    }
    let cell_h = cell_array_height_um(mat, node);
    let cell_w = cell_array_width_um(mat, node);
    // Each one-hot CSL connects one BL per MDL.
    let csls = mat.bls_per_mat / mat.mdls_per_mat;
    let plan = MatRoutingPlan {
        scheme: RoutingScheme::Conventional,
        over_cell_array: vec![WireRun::routed(node, WireClass::Csl, csls, cell_h)],
        over_lwd: vec![WireRun::routed(node, WireClass::Mdl, mat.mdls_per_mat, cell_h)],
        over_blsa: vec![WireRun::routed(node, WireClass::Ldl, mat.ldls_per_mat, cell_w)],
        csl_one_hot: csls,
        csl_binary: 0,
        csl_groups: csls,
    };
    check_plan(&plan, mat, node)?;
    Ok(plan)
}

fn ceil_log2(v: u32) -> u32 {
    if v <= 1 {
        0
    } else {
        32 - (v - 1).leading_zeros()
    }
}

/// One-hot lines and binary lines needed to address `groups` column groups
/// when `pumps` one-hot lines fire back to back within one access.
pub fn csl_split(groups: u32, pumps: u32) -> (u32, u32) {
    (pumps, ceil_log2(groups.div_ceil(pumps)))
}

/// Wires raised for column group `group`: the one-hot line index and the
/// binary code held on the binary lines.
pub fn csl_decode(group: u32, pumps: u32) -> (u32, u32) {
    (group % pumps, group / pumps)
}

pub fn plan_dlomat(mat: &MatParams, pumps: u32, node: &TechnologyNode) -> Result<MatRoutingPlan> {
    if !mat.dlomat_enabled {
        return Err(Error::InvalidArgument("DLOMAT plan requested for a conventional MAT".into()));
    }
    let groups = mat.bls_per_mat / mat.mdls_per_mat;
    if pumps == 0 || groups < pumps {
        return Err(Error::validation(
            "mat.mdls_per_mat",
            format!("{groups} column groups cannot serve {pumps} pumps"),
        ));
    }
    let (one_hot, binary) = csl_split(groups, pumps);
    let cell_h = cell_array_height_um(mat, node);
    let cell_w = cell_array_width_um(mat, node);
    let plan = MatRoutingPlan {
        scheme: RoutingScheme::Dlomat,
        over_cell_array: vec![WireRun::routed(node, WireClass::Mdl, mat.mdls_per_mat, cell_h)],
        over_lwd: vec![WireRun::routed(node, WireClass::Csl, one_hot + binary, cell_h)],
        over_blsa: vec![WireRun::routed(node, WireClass::Lsl, one_hot + binary, cell_w)],
        csl_one_hot: one_hot,
        csl_binary: binary,
        csl_groups: groups,
    };
    check_plan(&plan, mat, node)?;
    Ok(plan)
}

/// Plans the MAT of `config`, with partial-page LDL doubling applied.
pub fn plan_mat(config: &MemoryConfig, node: &TechnologyNode) -> Result<MatRoutingPlan> {
    let mut mat = config.mat.clone();
    if mat.dlomat_enabled {
        plan_dlomat(&mat, derive_pumps(config), node)
    } else {
        mat.ldls_per_mat = config.effective_ldls_per_mat();
        plan_conventional(&mat, node)
    }
}

/// Bank-level column wires: one representative wire per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BankWires {
    pub csl: WireRun,
    /// LDL, or LSL under DLOMAT.
    pub local: WireRun,
    pub mdl: WireRun,
}

/// CSLs and MDLs span every physical subarray of the bank; local datalines
/// span one MAT.
pub fn bank_wires(plan: &MatRoutingPlan, node: &TechnologyNode, fp: &DieFloorplan) -> BankWires {
    let span = fp.bank_cell_stack_um;
    let csl = WireRun::routed(node, WireClass::Csl, plan.csl_wires(), span);
    let mdl_count = plan
        .over_cell_array
        .iter()
        .chain(&plan.over_lwd)
        .find(|r| r.wire_class == WireClass::Mdl)
        .map_or(0, |r| r.count);
    let mdl = WireRun::routed(node, WireClass::Mdl, mdl_count, span);
    let local = *plan.over_blsa.first().expect("plan has a BLSA run");
    let local = WireRun::routed(node, local.wire_class, local.count, fp.mat.width_um);
    BankWires { csl, local, mdl }
}

/// Bus lengths from bank-block coordinates.
///
/// Banks of a bank group sit in one half of the die and feed a mux at the
/// edge of the central TSV strip, so a BGBUS spans the half-height of the
/// bank block. The GBUS then runs along the TSV strip to the centre of the
/// channel's slice of the die.
pub(crate) fn bus_lengths_um(config: &MemoryConfig, rows_per_half: u32, bank_height_um: f64, die_x_um: f64) -> (f64, f64) {
    let bgbus = rows_per_half as f64 * bank_height_um;
    let gbus = die_x_um / (2.0 * config.inter_bank.channels_per_die as f64);
    (bgbus, gbus)
}

/// Global data wires from the bank to the stack's DQ pins.
pub fn global_datapath(config: &MemoryConfig, node: &TechnologyNode, fp: &DieFloorplan) -> Vec<WireRun> {
    let ib = &config.inter_bank;
    let bus_wires = config.column_bits() / ib.bgbus_mux_ratio;
    let dies = config.dies();
    vec![
        WireRun::routed(node, WireClass::Bgbus, bus_wires, fp.bgbus_length_um),
        WireRun::routed(node, WireClass::Gbus, bus_wires, fp.gbus_length_um),
        WireRun::new(
            WireClass::Tsv,
            ib.dq_per_channel() * node.tsv.per_dq,
            dies as f64 * node.tsv.height_um,
            node.tsv.pitch_um,
            node.tsv.c_ff / node.tsv.height_um,
        ),
        WireRun::routed(node, WireClass::Dq, ib.dq_per_stack, node.dq_length_um),
    ]
}
