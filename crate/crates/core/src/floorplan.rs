//! MAT, bank and die geometry.
//!
//! Banks are tiled in a grid split by a horizontal TSV strip: each bank
//! group column is cut in half, with half the rows above the strip and half
//! below. The fixed periphery (pads, control logic, channel logic) and the
//! global bus routing are spread along the die's x extent.

use serde::Serialize;

use crate::config::{MemoryConfig, PartialPage, SalpMode};
use crate::error::Result;
use crate::routing::{bus_lengths_um, cell_array_height_um, cell_array_width_um, plan_mat, MatRoutingPlan};
use crate::technode::{TechnologyNode, WireClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatGeometry {
    pub width_um: f64,
    pub height_um: f64,
    pub cell_array_width_um: f64,
    pub cell_array_height_um: f64,
    pub lwd_strip_width_um: f64,
    pub blsa_strip_height_um: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DieFloorplan {
    pub mat: MatGeometry,
    /// Height of the subarray stack, excluding the column decoder.
    pub bank_cell_stack_um: f64,
    pub bank_width_mm: f64,
    pub bank_height_mm: f64,
    pub banks_per_die: u32,
    pub bank_rows: u32,
    pub bank_cols: u32,
    pub bgbus_length_um: f64,
    pub gbus_length_um: f64,
    pub tsv_count: u32,
    pub tsv_region_area_mm2: f64,
    pub bus_routing_area_mm2: f64,
    pub peripheral_area_mm2: f64,
    pub die_len_x_mm: f64,
    pub die_len_y_mm: f64,
    pub die_area_mm2: f64,
}

/// Strip size after growing it, if needed, to fit `demand_um` of tracks.
pub fn resolve_overhead(base_um: f64, demand_um: f64) -> f64 {
    base_um.max(demand_um)
}

/// BLSA strip height: sense amplifiers, plus MDL drivers relocated into the
/// strip under DLOMAT.
fn blsa_base_um(config: &MemoryConfig, node: &TechnologyNode, cell_w: f64) -> f64 {
    let mut h = node.blsa_height_um;
    if config.subarray.ocsa_enabled {
        h *= node.ocsa_height_factor;
    }
    if config.mat.dlomat_enabled {
        h += config.mat.mdls_per_mat as f64 * node.mdl_driver_area_um2 / cell_w;
    }
    h
}

pub fn mat_geometry_for(config: &MemoryConfig, node: &TechnologyNode, plan: &MatRoutingPlan) -> MatGeometry {
    let m = &config.mat;
    let cell_w = cell_array_width_um(m, node);
    let cell_h = cell_array_height_um(m, node);
    let lwd = resolve_overhead(node.lwd_width_um, plan.lwd_demand_um());
    let blsa = resolve_overhead(blsa_base_um(config, node, cell_w), plan.blsa_demand_um());
    MatGeometry {
        width_um: cell_w * (1.0 + m.bl_isolation_overhead) + lwd,
        height_um: cell_h * (1.0 + m.wl_isolation_overhead) + blsa,
        cell_array_width_um: cell_w,
        cell_array_height_um: cell_h,
        lwd_strip_width_um: lwd,
        blsa_strip_height_um: blsa,
    }
}

pub fn mat_geometry(config: &MemoryConfig, node: &TechnologyNode) -> Result<MatGeometry> {
    let plan = plan_mat(config, node)?;
    Ok(mat_geometry_for(config, node, &plan))
}

fn row_decoder_width_um(config: &MemoryConfig, node: &TechnologyNode) -> f64 {
    let p = &node.periphery;
    let mut w = p.row_decoder_width_um;
    if config.bank.salp_mode != SalpMode::None {
        w *= 1.0 + p.salp_decoder_overhead;
    }
    if config.subarray.partial_page != PartialPage::FullPage {
        w *= 1.0 + p.partial_page_decoder_overhead;
    }
    w
}

pub fn die_floorplan_with_plan(config: &MemoryConfig, node: &TechnologyNode, plan: &MatRoutingPlan) -> DieFloorplan {
    let ib = &config.inter_bank;
    let mat = mat_geometry_for(config, node, plan);

    let stack_um = config.bank.physical_subarrays() as f64 * mat.height_um;
    let bank_h_um = stack_um + node.periphery.column_decoder_height_um;
    let bank_w_um = config.bank.mats_per_subarray as f64 * mat.width_um + row_decoder_width_um(config, node);

    let banks = ib.channels_per_die * ib.pseudo_channels_per_channel * ib.banks_per_pseudo_channel();
    let rows_per_half = (ib.bank_groups_vertical * ib.banks_per_bank_group).div_ceil(2);
    let rows = 2 * rows_per_half;
    let cols = banks.div_ceil(rows);
    let die_x_um = cols as f64 * bank_w_um;
    let (bgbus_um, gbus_um) = bus_lengths_um(config, rows_per_half, bank_h_um, die_x_um);

    let bus_wires = (config.column_bits() / ib.bgbus_mux_ratio) as f64;
    let groups_per_die = (ib.channels_per_die * ib.pseudo_channels_per_channel * ib.bank_groups()) as f64;
    let pcs_per_die = (ib.channels_per_die * ib.pseudo_channels_per_channel) as f64;
    let bus_area_um2 = groups_per_die * bus_wires * node.wire(WireClass::Bgbus).pitch_um * bgbus_um
        + pcs_per_die * bus_wires * node.wire(WireClass::Gbus).pitch_um * gbus_um;
    let bus_area = bus_area_um2 * 1e-6;

    // Every die carries the TSVs of every channel in the stack.
    let t = &node.tsv;
    let tsv_count = ib.channels * (ib.dq_per_channel() * t.per_dq + t.ca_per_channel) + t.power_per_die;
    let tsv_area = tsv_count as f64 * t.pitch_um * t.pitch_um * 1e-6;

    let periph = node.periphery.die_base_mm2 + ib.channels_per_die as f64 * node.periphery.per_channel_mm2 + bus_area;

    let die_x = die_x_um * 1e-3;
    let die_y = rows as f64 * bank_h_um * 1e-3 + (tsv_area + periph) / die_x;
    DieFloorplan {
        mat,
        bank_cell_stack_um: stack_um,
        bank_width_mm: bank_w_um * 1e-3,
        bank_height_mm: bank_h_um * 1e-3,
        banks_per_die: banks,
        bank_rows: rows,
        bank_cols: cols,
        bgbus_length_um: bgbus_um,
        gbus_length_um: gbus_um,
        tsv_count,
        tsv_region_area_mm2: tsv_area,
        bus_routing_area_mm2: bus_area,
        peripheral_area_mm2: periph,
        die_len_x_mm: die_x,
        die_len_y_mm: die_y,
        die_area_mm2: die_x * die_y,
    }
}

pub fn die_floorplan(config: &MemoryConfig, node: &TechnologyNode) -> Result<DieFloorplan> {
    let plan = plan_mat(config, node)?;
    Ok(die_floorplan_with_plan(config, node, &plan))
}

/// Silicon area of the whole stack.
pub fn total_area(fp: &DieFloorplan, dies: u32) -> f64 {
    fp.die_area_mm2 * dies as f64
}
