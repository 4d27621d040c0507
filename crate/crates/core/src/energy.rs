//! Per-event wire energies and their roll-up into energy per bit and power.

use serde::Serialize;

use crate::config::MemoryConfig;
use crate::floorplan::DieFloorplan;
use crate::routing::{BankWires, MatRoutingPlan, RoutingScheme, WireRun};
use crate::technode::{TechnologyNode, WireClass};

/// One switching event: `n` wires of capacitance `cap_per_len * length`
/// swinging by `dv_internal` from the `v_external` supply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEvent {
    pub alpha: f64,
    pub n: f64,
    pub cap_per_len_ff_per_um: f64,
    pub length_um: f64,
    pub dv_internal: f64,
    pub v_external: f64,
}

/// Energy in pJ.
pub fn event_energy(e: &EnergyEvent) -> f64 {
    0.5 * e.alpha * e.n * (e.cap_per_len_ff_per_um * e.length_um) * e.dv_internal * e.v_external * 1e-3
}

/// A labelled event in an energy breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerm {
    pub phase: Phase,
    pub wire_class: WireClass,
    pub event: EnergyEvent,
    pub energy_pj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Activate,
    Precharge,
    Column,
    Datapath,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessEnergy {
    /// Per activation.
    pub act_energy_pj: f64,
    /// Per precharge.
    pub pre_energy_pj: f64,
    /// Per column access, all pumps included.
    pub column_energy_pj: f64,
    /// Per atom moved from the bank to the DQs.
    pub datapath_energy_pj: f64,
    pub full_row_epb: f64,
    pub closed_row_epb: f64,
    pub terms: Vec<EnergyTerm>,
}

struct Builder<'a> {
    node: &'a TechnologyNode,
    terms: Vec<EnergyTerm>,
}

impl Builder<'_> {
    fn push(&mut self, phase: Phase, class: WireClass, n: f64, cap_per_len: f64, length_um: f64, dv: f64, alpha: f64) {
        let event = EnergyEvent {
            alpha,
            n,
            cap_per_len_ff_per_um: cap_per_len,
            length_um,
            dv_internal: dv,
            v_external: self.node.v_external,
        };
        self.terms.push(EnergyTerm {
            phase,
            wire_class: class,
            event,
            energy_pj: event_energy(&event),
        });
    }

    fn wire(&mut self, phase: Phase, class: WireClass, n: f64, length_um: f64) {
        let w = *self.node.wire(class);
        self.push(phase, class, n, w.cap_per_len_ff_per_um, length_um, w.swing_v, w.activity);
    }

    fn run(&mut self, phase: Phase, run: &WireRun, n: f64) {
        self.wire(phase, run.wire_class, n, run.length_um);
    }

    fn sum(&self, phase: Phase) -> f64 {
        self.terms.iter().filter(|t| t.phase == phase).map(|t| t.energy_pj).sum()
    }
}

pub fn access_energy(
    config: &MemoryConfig,
    node: &TechnologyNode,
    plan: &MatRoutingPlan,
    wires: &BankWires,
    fp: &DieFloorplan,
    datapath: &[WireRun],
    pumps: u32,
) -> AccessEnergy {
    let mut b = Builder { node, terms: Vec::new() };
    let m = &config.mat;
    let active = config.active_mats() as f64;
    let mat_w = fp.mat.width_um;

    // Open bitline: both MATs sharing a BLSA row see a bitline swing.
    let bl_len = m.wls_per_mat as f64 * node.cell_height_um;
    let bl_cap = node.c_cell_ff + m.wls_per_mat as f64 * node.c_bl_per_wl_ff + node.c_blsa_ff;
    let bls = 2.0 * active * m.bls_per_mat as f64 * (1.0 + m.odecc_overhead);
    b.push(Phase::Activate, WireClass::Bl, bls, bl_cap / bl_len, bl_len, node.bitline.swing_v, node.bitline.activity);
    b.wire(Phase::Activate, WireClass::Wl, active, fp.mat.cell_array_width_um);
    b.wire(Phase::Activate, WireClass::Mwl, 1.0, active * mat_w);
    b.wire(Phase::Activate, WireClass::Lwlsel, 1.0, active * mat_w);
    b.wire(Phase::Precharge, WireClass::Wl, active, fp.mat.cell_array_width_um);
    b.wire(Phase::Precharge, WireClass::Mwl, 1.0, active * mat_w);
    b.wire(Phase::Precharge, WireClass::Lwlsel, 1.0, active * mat_w);

    let p = pumps as f64;
    let bits = config.mdl_bits_per_pump() as f64;
    b.run(Phase::Column, &wires.csl, p);
    match plan.scheme {
        RoutingScheme::Conventional => {
            b.run(Phase::Column, &wires.local, p * bits);
        }
        RoutingScheme::Dlomat => {
            // Binary lines hold the column address for the whole access.
            if plan.csl_binary > 0 {
                b.run(Phase::Column, &wires.csl, plan.csl_binary as f64);
            }
            b.run(Phase::Column, &wires.local, p * config.mdl_columns_per_access() as f64);
        }
    }
    b.run(Phase::Column, &wires.mdl, p * bits);

    let atom = config.atom_bits() as f64;
    for run in datapath {
        if run.wire_class == WireClass::Tsv {
            let t = &node.tsv;
            b.push(Phase::Datapath, WireClass::Tsv, atom, run.cap_per_len_ff_per_um, run.length_um, t.swing_v, t.activity);
        } else {
            b.run(Phase::Datapath, run, atom);
        }
    }

    let act = b.sum(Phase::Activate);
    let pre = b.sum(Phase::Precharge);
    let column = b.sum(Phase::Column);
    let data = b.sum(Phase::Datapath);
    let row_bits = (config.page_bits() as f64).max(atom);
    let column_bits = (pumps * config.mdl_bits_per_pump()).max(config.atom_bits()) as f64;
    AccessEnergy {
        act_energy_pj: act,
        pre_energy_pj: pre,
        column_energy_pj: column,
        datapath_energy_pj: data,
        full_row_epb: (act + pre) / row_bits + column / column_bits + data / atom,
        closed_row_epb: (act + pre + column + data) / atom,
        terms: b.terms,
    }
}

/// Power in W from bandwidth in GB/s and energy in pJ/b.
pub fn power(bandwidth_gbs: f64, epb_pj: f64) -> f64 {
    bandwidth_gbs * 8.0 * epb_pj * 1e-3
}
