//! Technology nodes and node scaling.
//!
//! A node file carries the physical constants of one DRAM process: cell and
//! wire pitches, capacitances, voltages, strip and decoder dimensions, TSV
//! electricals, and the baseline timing constants together with the
//! reference geometry they were characterized at. A scaled node is derived
//! from an unscaled one with per-category confidence factors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Routed signal classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireClass {
    Wl,
    Mwl,
    Lwlsel,
    Bl,
    Csl,
    Lsl,
    Ldl,
    Mdl,
    Bgbus,
    Gbus,
    Tsv,
    Dq,
}

impl WireClass {
    /// Classes that need a pitch and capacitance entry in the node's wire table.
    pub const ROUTED: [WireClass; 10] = [
        WireClass::Wl,
        WireClass::Mwl,
        WireClass::Lwlsel,
        WireClass::Csl,
        WireClass::Lsl,
        WireClass::Ldl,
        WireClass::Mdl,
        WireClass::Bgbus,
        WireClass::Gbus,
        WireClass::Dq,
    ];
}

impl fmt::Display for WireClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WireClass::Wl => "WL",
            WireClass::Mwl => "MWL",
            WireClass::Lwlsel => "LWLsel",
            WireClass::Bl => "BL",
            WireClass::Csl => "CSL",
            WireClass::Lsl => "LSL",
            WireClass::Ldl => "LDL",
            WireClass::Mdl => "MDL",
            WireClass::Bgbus => "BGBUS",
            WireClass::Gbus => "GBUS",
            WireClass::Tsv => "TSV",
            WireClass::Dq => "DQ",
        };
        f.write_str(s)
    }
}

/// Pitch (width plus spacing), capacitance and signalling of one wire class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTech {
    pub pitch_um: f64,
    pub cap_per_len_ff_per_um: f64,
    /// Internal voltage swing in volts.
    pub swing_v: f64,
    /// Activity factor per access event.
    pub activity: f64,
}

/// Bitline signalling; bitline capacitance itself comes from the cell terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitlineTech {
    pub swing_v: f64,
    pub activity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsvTech {
    /// Effective resistance per die hop, driver included.
    pub r_ohm: f64,
    /// Capacitance per die hop.
    pub c_ff: f64,
    pub pitch_um: f64,
    /// Vertical length of one die hop.
    pub height_um: f64,
    pub swing_v: f64,
    pub activity: f64,
    pub per_dq: u32,
    pub ca_per_channel: u32,
    pub power_per_die: u32,
}

/// Timing constants measured at the reference geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineTiming {
    pub trp_ns: f64,
    pub trcd_ns: f64,
    pub tcl_ns: f64,
    /// Part of tRP spent on signal propagation across the bank.
    pub trp_signal_fraction: f64,
    pub trcd_signal_fraction: f64,
    pub t_csl_ns: f64,
    pub t_ldl_ns: f64,
    pub t_mdl_ns: f64,
    /// MDL precharge time as a multiple of the MDL term.
    pub mdl_precharge_ratio: f64,
}

/// Physical quantities of the geometry the baseline timing belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceGeometry {
    pub bank_width_um: f64,
    pub bitline_load_ff: f64,
    pub csl_cap_ff: f64,
    pub ldl_cap_ff: f64,
    pub mdl_cap_ff: f64,
    /// Value of the read-path expression (TSV RC plus die traversal) in ns.
    pub tcl_path_ns: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeripheryTech {
    pub die_base_mm2: f64,
    pub per_channel_mm2: f64,
    pub row_decoder_width_um: f64,
    pub column_decoder_height_um: f64,
    /// Row decoder growth for per-subarray address latches.
    pub salp_decoder_overhead: f64,
    /// Row decoder growth for partial-page decoding.
    pub partial_page_decoder_overhead: f64,
}

/// Maximum per-wire toggle rates of the global buses, in Gb/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatapathTech {
    pub bgbus_rate_gbps: f64,
    pub gbus_rate_gbps: f64,
    pub tsv_rate_gbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyNode {
    pub name: String,
    pub feature_nm: f64,
    /// Cell footprint; also the bitline and wordline pitches.
    pub cell_width_um: f64,
    pub cell_height_um: f64,
    pub c_cell_ff: f64,
    pub c_bl_per_wl_ff: f64,
    pub c_blsa_ff: f64,
    pub blsa_height_um: f64,
    pub ocsa_height_factor: f64,
    pub lwd_width_um: f64,
    /// Footprint of one relocated MDL driver inside the BLSA strip.
    pub mdl_driver_area_um2: f64,
    /// Largest factor by which a strip may grow to fit routing tracks.
    pub strip_expansion_limit: f64,
    pub wires: BTreeMap<WireClass, WireTech>,
    pub bitline: BitlineTech,
    pub tsv: TsvTech,
    pub dq_length_um: f64,
    pub v_external: f64,
    pub t_drv_ns: f64,
    pub die_traverse_ns_per_mm: f64,
    pub timing: BaselineTiming,
    pub reference: ReferenceGeometry,
    pub periphery: PeripheryTech,
    pub datapath: DatapathTech,
    /// Free-form notes on where each value comes from.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfidence {
    pub capacitances: f64,
    pub logic: f64,
    pub sense_amplifiers: f64,
    pub wordline_drivers: f64,
}

impl ScalingConfidence {
    pub const NONE: ScalingConfidence = ScalingConfidence {
        capacitances: 0.0,
        logic: 0.0,
        sense_amplifiers: 0.0,
        wordline_drivers: 0.0,
    };

    pub const FULL: ScalingConfidence = ScalingConfidence {
        capacitances: 1.0,
        logic: 1.0,
        sense_amplifiers: 1.0,
        wordline_drivers: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("capacitances", self.capacitances),
            ("logic", self.logic),
            ("sense_amplifiers", self.sense_amplifiers),
            ("wordline_drivers", self.wordline_drivers),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("confidence.{name}"), format!("{v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Voltage domains that replace the unscaled node's values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoltageOverrides {
    pub v_external: Option<f64>,
    pub bitline_swing_v: Option<f64>,
    pub tsv_swing_v: Option<f64>,
    #[serde(default)]
    pub wire_swing_v: BTreeMap<WireClass, f64>,
}

/// Contents of a node-scaling file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeScaling {
    pub name: String,
    pub feature_nm: f64,
    pub confidence: ScalingConfidence,
    #[serde(default)]
    pub voltages: VoltageOverrides,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} must be strictly positive")))
    }
}

fn unit_interval(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} is outside [0, 1]")))
    }
}

impl TechnologyNode {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("feature_nm", self.feature_nm),
            ("cell_width_um", self.cell_width_um),
            ("cell_height_um", self.cell_height_um),
            ("c_cell_ff", self.c_cell_ff),
            ("c_bl_per_wl_ff", self.c_bl_per_wl_ff),
            ("c_blsa_ff", self.c_blsa_ff),
            ("blsa_height_um", self.blsa_height_um),
            ("lwd_width_um", self.lwd_width_um),
            ("mdl_driver_area_um2", self.mdl_driver_area_um2),
            ("dq_length_um", self.dq_length_um),
            ("v_external", self.v_external),
            ("t_drv_ns", self.t_drv_ns),
            ("die_traverse_ns_per_mm", self.die_traverse_ns_per_mm),
            ("bitline.swing_v", self.bitline.swing_v),
            ("tsv.r_ohm", self.tsv.r_ohm),
            ("tsv.c_ff", self.tsv.c_ff),
            ("tsv.pitch_um", self.tsv.pitch_um),
            ("tsv.height_um", self.tsv.height_um),
            ("tsv.swing_v", self.tsv.swing_v),
            ("timing.trp_ns", self.timing.trp_ns),
            ("timing.trcd_ns", self.timing.trcd_ns),
            ("timing.tcl_ns", self.timing.tcl_ns),
            ("timing.t_csl_ns", self.timing.t_csl_ns),
            ("timing.t_ldl_ns", self.timing.t_ldl_ns),
            ("timing.t_mdl_ns", self.timing.t_mdl_ns),
            ("reference.bank_width_um", self.reference.bank_width_um),
            ("reference.bitline_load_ff", self.reference.bitline_load_ff),
            ("reference.csl_cap_ff", self.reference.csl_cap_ff),
            ("reference.ldl_cap_ff", self.reference.ldl_cap_ff),
            ("reference.mdl_cap_ff", self.reference.mdl_cap_ff),
            ("reference.tcl_path_ns", self.reference.tcl_path_ns),
            ("periphery.row_decoder_width_um", self.periphery.row_decoder_width_um),
            ("periphery.column_decoder_height_um", self.periphery.column_decoder_height_um),
            ("datapath.bgbus_rate_gbps", self.datapath.bgbus_rate_gbps),
            ("datapath.gbus_rate_gbps", self.datapath.gbus_rate_gbps),
            ("datapath.tsv_rate_gbps", self.datapath.tsv_rate_gbps),
        ] {
            positive(field, v)?;
        }
        if self.ocsa_height_factor < 1.0 || self.strip_expansion_limit < 1.0 {
            return Err(Error::validation("ocsa_height_factor/strip_expansion_limit", "must be at least 1"));
        }
        for (field, v) in [
            ("bitline.activity", self.bitline.activity),
            ("tsv.activity", self.tsv.activity),
            ("timing.trp_signal_fraction", self.timing.trp_signal_fraction),
            ("timing.trcd_signal_fraction", self.timing.trcd_signal_fraction),
        ] {
            unit_interval(field, v)?;
        }
        for (field, v) in [
            ("timing.mdl_precharge_ratio", self.timing.mdl_precharge_ratio),
            ("periphery.die_base_mm2", self.periphery.die_base_mm2),
            ("periphery.per_channel_mm2", self.periphery.per_channel_mm2),
            ("periphery.salp_decoder_overhead", self.periphery.salp_decoder_overhead),
            ("periphery.partial_page_decoder_overhead", self.periphery.partial_page_decoder_overhead),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(field, format!("{v} must be non-negative")));
            }
        }
        for class in WireClass::ROUTED {
            let Some(w) = self.wires.get(&class) else {
                return Err(Error::validation(format!("wires.{class}"), "missing wire class"));
            };
            positive(&format!("wires.{class}.pitch_um"), w.pitch_um)?;
            positive(&format!("wires.{class}.cap_per_len_ff_per_um"), w.cap_per_len_ff_per_um)?;
            positive(&format!("wires.{class}.swing_v"), w.swing_v)?;
            unit_interval(&format!("wires.{class}.activity"), w.activity)?;
        }
        Ok(())
    }

    pub fn wire(&self, class: WireClass) -> &WireTech {
        self.wires
            .get(&class)
            .unwrap_or_else(|| panic!("node `{}` has no {class} wire entry", self.name))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Replaces voltage domains, e.g. with a product's reported supplies.
    pub fn apply_voltages(&mut self, v: &VoltageOverrides) {
        if let Some(x) = v.v_external {
            self.v_external = x;
        }
        if let Some(x) = v.bitline_swing_v {
            self.bitline.swing_v = x;
        }
        if let Some(x) = v.tsv_swing_v {
            self.tsv.swing_v = x;
        }
        for (class, &swing) in &v.wire_swing_v {
            if let Some(w) = self.wires.get_mut(class) {
                w.swing_v = swing;
            }
        }
    }
}

/// Moves `value` from its unscaled size toward its ideally scaled size.
fn toward(value: f64, ideal_factor: f64, confidence: f64) -> f64 {
    value * (1.0 + confidence * (ideal_factor - 1.0))
}

/// Derives a node at `target_feature_ratio` (scaled / unscaled feature size).
///
/// Lengths scale ideally by the ratio, areas by its square and lumped
/// capacitances by the ratio; per-length wire capacitance is scale-invariant.
/// Cell and wire pitches always scale ideally. Capacitances, logic, sense
/// amplifiers and wordline drivers only move part of the way, as set by
/// their confidence. Voltages, timing constants and TSVs are unchanged.
pub fn scale_node(
    unscaled: &TechnologyNode,
    target_feature_ratio: f64,
    conf: &ScalingConfidence,
) -> Result<TechnologyNode> {
    if !(target_feature_ratio.is_finite() && target_feature_ratio > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "feature ratio must be positive, got {target_feature_ratio}"
        )));
    }
    conf.validate()?;
    let r = target_feature_ratio;
    let r2 = r * r;
    let mut n = unscaled.clone();
    n.feature_nm = unscaled.feature_nm * r;

    n.cell_width_um *= r;
    n.cell_height_um *= r;
    for w in n.wires.values_mut() {
        w.pitch_um *= r;
    }

    n.c_cell_ff = toward(n.c_cell_ff, r, conf.capacitances);
    n.c_bl_per_wl_ff = toward(n.c_bl_per_wl_ff, r, conf.capacitances);
    n.c_blsa_ff = toward(n.c_blsa_ff, r, conf.capacitances);

    n.blsa_height_um = toward(n.blsa_height_um, r, conf.sense_amplifiers);
    n.mdl_driver_area_um2 = toward(n.mdl_driver_area_um2, r2, conf.sense_amplifiers);

    n.lwd_width_um = toward(n.lwd_width_um, r, conf.wordline_drivers);

    let p = &mut n.periphery;
    p.die_base_mm2 = toward(p.die_base_mm2, r2, conf.logic);
    p.per_channel_mm2 = toward(p.per_channel_mm2, r2, conf.logic);
    p.row_decoder_width_um = toward(p.row_decoder_width_um, r, conf.logic);
    p.column_decoder_height_um = toward(p.column_decoder_height_um, r, conf.logic);
    n.t_drv_ns = toward(n.t_drv_ns, r, conf.logic);

    Ok(n)
}

pub fn load_node(path: impl AsRef<Path>) -> Result<TechnologyNode> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let node = TechnologyNode::from_json(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    node.validate()?;
    Ok(node)
}

pub fn load_scaling(path: impl AsRef<Path>) -> Result<NodeScaling> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let s: NodeScaling = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    s.confidence.validate()?;
    positive("feature_nm", s.feature_nm)?;
    Ok(s)
}

/// Applies a scaling file: feature ratio from the two feature sizes, then
/// any voltage overrides.
pub fn apply_scaling(unscaled: &TechnologyNode, scaling: &NodeScaling) -> Result<TechnologyNode> {
    let mut node = scale_node(unscaled, scaling.feature_nm / unscaled.feature_nm, &scaling.confidence)?;
    node.feature_nm = scaling.feature_nm;
    node.name = scaling.name.clone();
    node.apply_voltages(&scaling.voltages);
    node.validate()?;
    Ok(node)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn data_dir() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
    }

    pub(crate) fn unscaled() -> TechnologyNode {
        load_node(data_dir().join("nodes/2ynm.json")).unwrap()
    }

    pub(crate) fn node_1z() -> TechnologyNode {
        let s = load_scaling(data_dir().join("nodes/1znm-scaling.json")).unwrap();
        apply_scaling(&unscaled(), &s).unwrap()
    }

    #[test]
    fn zero_confidence_keeps_scaled_categories() {
        let n = unscaled();
        let s = scale_node(&n, 0.6, &ScalingConfidence::NONE).unwrap();
        assert_eq!(s.c_cell_ff, n.c_cell_ff);
        assert_eq!(s.blsa_height_um, n.blsa_height_um);
        assert_eq!(s.lwd_width_um, n.lwd_width_um);
        assert_eq!(s.periphery, n.periphery);
        assert_eq!(s.t_drv_ns, n.t_drv_ns);
    }

    #[test]
    fn zero_confidence_unit_ratio_is_identity() {
        let n = unscaled();
        let mut s = scale_node(&n, 1.0, &ScalingConfidence::NONE).unwrap();
        s.feature_nm = n.feature_nm;
        assert_eq!(s, n);
    }

    #[test]
    fn full_confidence_is_ideal() {
        let n = unscaled();
        let s = scale_node(&n, 0.5, &ScalingConfidence::FULL).unwrap();
        assert!((s.cell_width_um - n.cell_width_um * 0.5).abs() < 1e-15);
        assert!((s.blsa_height_um - n.blsa_height_um * 0.5).abs() < 1e-12);
        assert!((s.periphery.die_base_mm2 - n.periphery.die_base_mm2 * 0.25).abs() < 1e-12);
        assert!((s.mdl_driver_area_um2 - n.mdl_driver_area_um2 * 0.25).abs() < 1e-12);
        assert!((s.c_cell_ff - n.c_cell_ff * 0.5).abs() < 1e-12);
        let (a, b) = (s.wire(WireClass::Mdl), n.wire(WireClass::Mdl));
        assert!((a.pitch_um - b.pitch_um * 0.5).abs() < 1e-15);
        assert_eq!(a.cap_per_len_ff_per_um, b.cap_per_len_ff_per_um);
    }

    #[test]
    fn unit_ratio_is_identity_for_any_confidence() {
        let n = unscaled();
        let conf = ScalingConfidence {
            capacitances: 0.3,
            logic: 0.9,
            sense_amplifiers: 0.1,
            wordline_drivers: 0.7,
        };
        assert_eq!(scale_node(&n, 1.0, &conf).unwrap(), n);
    }

    #[test]
    fn rejects_bad_ratio() {
        let n = unscaled();
        assert!(scale_node(&n, 0.0, &ScalingConfidence::FULL).is_err());
        assert!(scale_node(&n, -1.0, &ScalingConfidence::FULL).is_err());
    }

    #[test]
    fn node_files_validate() {
        unscaled().validate().unwrap();
        node_1z().validate().unwrap();
    }

    #[test]
    fn missing_wire_class_fails_validation() {
        let mut n = unscaled();
        n.wires.remove(&WireClass::Lsl);
        assert!(n.validate().is_err());
    }
}
