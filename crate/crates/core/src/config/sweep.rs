//! Cartesian sweep descriptions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    check_fraction, is_pow2, is_pow2_or_triple, BankParams, InterBankParams, MatParams, MemoryConfig, PartialPage,
    SalpMode, SubarrayParams, ATOM_BYTES,
};
use crate::error::{Error, Result};

/// Declared parameter order; the last parameter varies fastest.
pub const PARAMETER_ORDER: [&str; 25] = [
    "ranks",
    "channels",
    "channels_per_die",
    "pseudo_channels_per_channel",
    "bank_groups_horizontal",
    "bank_groups_vertical",
    "banks_per_bank_group",
    "bgbus_mux_ratio",
    "adl_enabled",
    "dq_per_stack",
    "dq_data_rate",
    "subarrays_per_bank",
    "mats_per_subarray",
    "repair_subarrays",
    "salp_mode",
    "partial_page",
    "ocsa_enabled",
    "wls_per_mat",
    "bls_per_mat",
    "mdls_per_mat",
    "ldls_per_mat",
    "wl_isolation_overhead",
    "bl_isolation_overhead",
    "odecc_overhead",
    "dlomat_enabled",
];

/// Value lists as written in a sweep file. Missing lists fall back to the
/// baseline value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamLists {
    pub ranks: Option<Vec<u32>>,
    pub channels: Option<Vec<u32>>,
    pub channels_per_die: Option<Vec<u32>>,
    pub pseudo_channels_per_channel: Option<Vec<u32>>,
    pub bank_groups_horizontal: Option<Vec<u32>>,
    pub bank_groups_vertical: Option<Vec<u32>>,
    pub banks_per_bank_group: Option<Vec<u32>>,
    pub bgbus_mux_ratio: Option<Vec<u32>>,
    pub adl_enabled: Option<Vec<bool>>,
    pub dq_per_stack: Option<Vec<u32>>,
    pub dq_data_rate: Option<Vec<f64>>,
    pub subarrays_per_bank: Option<Vec<u32>>,
    pub mats_per_subarray: Option<Vec<u32>>,
    pub repair_subarrays: Option<Vec<u32>>,
    pub salp_mode: Option<Vec<SalpMode>>,
    pub partial_page: Option<Vec<PartialPage>>,
    pub ocsa_enabled: Option<Vec<bool>>,
    pub wls_per_mat: Option<Vec<u32>>,
    pub bls_per_mat: Option<Vec<u32>>,
    pub mdls_per_mat: Option<Vec<u32>>,
    pub ldls_per_mat: Option<Vec<u32>>,
    pub wl_isolation_overhead: Option<Vec<f64>>,
    pub bl_isolation_overhead: Option<Vec<f64>>,
    pub odecc_overhead: Option<Vec<f64>>,
    pub dlomat_enabled: Option<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFilters {
    #[serde(default = "default_max_dies")]
    pub max_dies: u32,
    #[serde(default = "default_max_die_mm")]
    pub max_die_len_mm: f64,
    #[serde(default = "default_max_die_mm")]
    pub max_die_width_mm: f64,
}

fn default_max_dies() -> u32 {
    16
}

fn default_max_die_mm() -> f64 {
    13.0
}

impl Default for SweepFilters {
    fn default() -> Self {
        SweepFilters {
            max_dies: default_max_dies(),
            max_die_len_mm: default_max_die_mm(),
            max_die_width_mm: default_max_die_mm(),
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    #[serde(default)]
    values: ParamLists,
    #[serde(default)]
    filters: SweepFilters,
    #[serde(default = "default_true")]
    link_ldls_to_mdls: bool,
}

/// A fully resolved sweep: one non-optional list per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ranks: Vec<u32>,
    pub channels: Vec<u32>,
    pub channels_per_die: Vec<u32>,
    pub pseudo_channels_per_channel: Vec<u32>,
    pub bank_groups_horizontal: Vec<u32>,
    pub bank_groups_vertical: Vec<u32>,
    pub banks_per_bank_group: Vec<u32>,
    pub bgbus_mux_ratio: Vec<u32>,
    pub adl_enabled: Vec<bool>,
    pub dq_per_stack: Vec<u32>,
    pub dq_data_rate: Vec<f64>,
    pub subarrays_per_bank: Vec<u32>,
    pub mats_per_subarray: Vec<u32>,
    pub repair_subarrays: Vec<u32>,
    pub salp_mode: Vec<SalpMode>,
    pub partial_page: Vec<PartialPage>,
    pub ocsa_enabled: Vec<bool>,
    pub wls_per_mat: Vec<u32>,
    pub bls_per_mat: Vec<u32>,
    pub mdls_per_mat: Vec<u32>,
    pub ldls_per_mat: Vec<u32>,
    pub wl_isolation_overhead: Vec<f64>,
    pub bl_isolation_overhead: Vec<f64>,
    pub odecc_overhead: Vec<f64>,
    pub dlomat_enabled: Vec<bool>,
    pub filters: SweepFilters,
    /// When set, each config's LDL count follows its MDL count and the
    /// `ldls_per_mat` list is ignored.
    pub link_ldls_to_mdls: bool,
}

fn check_list<T: Copy + std::fmt::Debug>(name: &str, values: &[T], ok: impl Fn(T) -> bool) -> Result<()> {
    for &v in values {
        if !ok(v) {
            return Err(Error::validation(format!("values.{name}"), format!("{v:?} violates the parameter's invariant")));
        }
    }
    Ok(())
}

impl SweepSpec {
    /// A sweep that yields only `baseline`.
    pub fn singleton(baseline: &MemoryConfig) -> Self {
        Self::resolve(ParamLists::default(), SweepFilters::default(), false, baseline)
    }

    pub fn resolve(lists: ParamLists, filters: SweepFilters, link_ldls_to_mdls: bool, base: &MemoryConfig) -> Self {
        let ib = &base.inter_bank;
        let bk = &base.bank;
        let mat = &base.mat;
        SweepSpec {
            ranks: lists.ranks.unwrap_or_else(|| vec![ib.ranks]),
            channels: lists.channels.unwrap_or_else(|| vec![ib.channels]),
            channels_per_die: lists.channels_per_die.unwrap_or_else(|| vec![ib.channels_per_die]),
            pseudo_channels_per_channel: lists
                .pseudo_channels_per_channel
                .unwrap_or_else(|| vec![ib.pseudo_channels_per_channel]),
            bank_groups_horizontal: lists.bank_groups_horizontal.unwrap_or_else(|| vec![ib.bank_groups_horizontal]),
            bank_groups_vertical: lists.bank_groups_vertical.unwrap_or_else(|| vec![ib.bank_groups_vertical]),
            banks_per_bank_group: lists.banks_per_bank_group.unwrap_or_else(|| vec![ib.banks_per_bank_group]),
            bgbus_mux_ratio: lists.bgbus_mux_ratio.unwrap_or_else(|| vec![ib.bgbus_mux_ratio]),
            adl_enabled: lists.adl_enabled.unwrap_or_else(|| vec![ib.adl_enabled]),
            dq_per_stack: lists.dq_per_stack.unwrap_or_else(|| vec![ib.dq_per_stack]),
            dq_data_rate: lists.dq_data_rate.unwrap_or_else(|| vec![ib.dq_data_rate]),
            subarrays_per_bank: lists.subarrays_per_bank.unwrap_or_else(|| vec![bk.subarrays_per_bank]),
            mats_per_subarray: lists.mats_per_subarray.unwrap_or_else(|| vec![bk.mats_per_subarray]),
            repair_subarrays: lists.repair_subarrays.unwrap_or_else(|| vec![bk.repair_subarrays]),
            salp_mode: lists.salp_mode.unwrap_or_else(|| vec![bk.salp_mode]),
            partial_page: lists.partial_page.unwrap_or_else(|| vec![base.subarray.partial_page]),
            ocsa_enabled: lists.ocsa_enabled.unwrap_or_else(|| vec![base.subarray.ocsa_enabled]),
            wls_per_mat: lists.wls_per_mat.unwrap_or_else(|| vec![mat.wls_per_mat]),
            bls_per_mat: lists.bls_per_mat.unwrap_or_else(|| vec![mat.bls_per_mat]),
            mdls_per_mat: lists.mdls_per_mat.unwrap_or_else(|| vec![mat.mdls_per_mat]),
            ldls_per_mat: lists.ldls_per_mat.unwrap_or_else(|| vec![mat.ldls_per_mat]),
            wl_isolation_overhead: lists.wl_isolation_overhead.unwrap_or_else(|| vec![mat.wl_isolation_overhead]),
            bl_isolation_overhead: lists.bl_isolation_overhead.unwrap_or_else(|| vec![mat.bl_isolation_overhead]),
            odecc_overhead: lists.odecc_overhead.unwrap_or_else(|| vec![mat.odecc_overhead]),
            dlomat_enabled: lists.dlomat_enabled.unwrap_or_else(|| vec![mat.dlomat_enabled]),
            filters,
            link_ldls_to_mdls,
        }
    }

    pub fn from_json(text: &str, baseline: &MemoryConfig) -> Result<Self> {
        let file: SweepFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<sweep>".into(),
            message: e.to_string(),
        })?;
        let spec = Self::resolve(file.values, file.filters, file.link_ldls_to_mdls, baseline);
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>, baseline: &MemoryConfig) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, baseline).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Per-value checks; cross-parameter invariants are checked per config.
    pub fn validate(&self) -> Result<()> {
        check_list("ranks", &self.ranks, is_pow2)?;
        check_list("channels", &self.channels, is_pow2_or_triple)?;
        check_list("channels_per_die", &self.channels_per_die, is_pow2_or_triple)?;
        check_list("pseudo_channels_per_channel", &self.pseudo_channels_per_channel, is_pow2)?;
        check_list("bank_groups_horizontal", &self.bank_groups_horizontal, is_pow2)?;
        check_list("bank_groups_vertical", &self.bank_groups_vertical, is_pow2)?;
        check_list("banks_per_bank_group", &self.banks_per_bank_group, is_pow2)?;
        check_list("bgbus_mux_ratio", &self.bgbus_mux_ratio, is_pow2)?;
        check_list("dq_per_stack", &self.dq_per_stack, is_pow2_or_triple)?;
        check_list("dq_data_rate", &self.dq_data_rate, |r| r.is_finite() && r > 0.0)?;
        check_list("subarrays_per_bank", &self.subarrays_per_bank, is_pow2_or_triple)?;
        check_list("mats_per_subarray", &self.mats_per_subarray, is_pow2)?;
        check_list("salp_mode", &self.salp_mode, |m| !matches!(m, SalpMode::Groups(0)))?;
        check_list("partial_page", &self.partial_page, |p| match p {
            PartialPage::Subchannels(n) => is_pow2(n),
            _ => true,
        })?;
        check_list("wls_per_mat", &self.wls_per_mat, is_pow2)?;
        check_list("bls_per_mat", &self.bls_per_mat, is_pow2)?;
        check_list("mdls_per_mat", &self.mdls_per_mat, is_pow2)?;
        check_list("ldls_per_mat", &self.ldls_per_mat, is_pow2)?;
        for (name, list) in [
            ("wl_isolation_overhead", &self.wl_isolation_overhead),
            ("bl_isolation_overhead", &self.bl_isolation_overhead),
            ("odecc_overhead", &self.odecc_overhead),
        ] {
            for &v in list {
                check_fraction(&format!("values.{name}"), v)?;
            }
        }
        if self.filters.max_dies == 0 || self.filters.max_die_len_mm <= 0.0 || self.filters.max_die_width_mm <= 0.0 {
            return Err(Error::validation("filters", "limits must be positive"));
        }
        Ok(())
    }

    fn radices(&self) -> [usize; 25] {
        [
            self.ranks.len(),
            self.channels.len(),
            self.channels_per_die.len(),
            self.pseudo_channels_per_channel.len(),
            self.bank_groups_horizontal.len(),
            self.bank_groups_vertical.len(),
            self.banks_per_bank_group.len(),
            self.bgbus_mux_ratio.len(),
            self.adl_enabled.len(),
            self.dq_per_stack.len(),
            self.dq_data_rate.len(),
            self.subarrays_per_bank.len(),
            self.mats_per_subarray.len(),
            self.repair_subarrays.len(),
            self.salp_mode.len(),
            self.partial_page.len(),
            self.ocsa_enabled.len(),
            self.wls_per_mat.len(),
            self.bls_per_mat.len(),
            self.mdls_per_mat.len(),
            if self.link_ldls_to_mdls { 1 } else { self.ldls_per_mat.len() },
            self.wl_isolation_overhead.len(),
            self.bl_isolation_overhead.len(),
            self.odecc_overhead.len(),
            self.dlomat_enabled.len(),
        ]
    }

    /// Size of the Cartesian product before any filtering.
    pub fn cartesian_size(&self) -> u64 {
        self.radices().iter().map(|&r| r as u64).product()
    }

    /// Builds the `index`-th point of the product, row-major over
    /// [`PARAMETER_ORDER`]. The result is not validated.
    pub fn config_at(&self, index: u64) -> MemoryConfig {
        let radices = self.radices();
        let mut digits = [0usize; 25];
        let mut rest = index;
        for (d, &r) in digits.iter_mut().zip(radices.iter()).rev() {
            *d = (rest % r as u64) as usize;
            rest /= r as u64;
        }
        let mdls = self.mdls_per_mat[digits[19]];
        MemoryConfig {
            inter_bank: InterBankParams {
                ranks: self.ranks[digits[0]],
                channels: self.channels[digits[1]],
                channels_per_die: self.channels_per_die[digits[2]],
                pseudo_channels_per_channel: self.pseudo_channels_per_channel[digits[3]],
                bank_groups_horizontal: self.bank_groups_horizontal[digits[4]],
                bank_groups_vertical: self.bank_groups_vertical[digits[5]],
                banks_per_bank_group: self.banks_per_bank_group[digits[6]],
                bgbus_mux_ratio: self.bgbus_mux_ratio[digits[7]],
                adl_enabled: self.adl_enabled[digits[8]],
                dq_per_stack: self.dq_per_stack[digits[9]],
                dq_data_rate: self.dq_data_rate[digits[10]],
            },
            bank: BankParams {
                subarrays_per_bank: self.subarrays_per_bank[digits[11]],
                mats_per_subarray: self.mats_per_subarray[digits[12]],
                repair_subarrays: self.repair_subarrays[digits[13]],
                salp_mode: self.salp_mode[digits[14]],
            },
            subarray: SubarrayParams {
                partial_page: self.partial_page[digits[15]],
                ocsa_enabled: self.ocsa_enabled[digits[16]],
            },
            mat: MatParams {
                wls_per_mat: self.wls_per_mat[digits[17]],
                bls_per_mat: self.bls_per_mat[digits[18]],
                mdls_per_mat: mdls,
                ldls_per_mat: if self.link_ldls_to_mdls { mdls } else { self.ldls_per_mat[digits[20]] },
                wl_isolation_overhead: self.wl_isolation_overhead[digits[21]],
                bl_isolation_overhead: self.bl_isolation_overhead[digits[22]],
                odecc_overhead: self.odecc_overhead[digits[23]],
                dlomat_enabled: self.dlomat_enabled[digits[24]],
            },
            atom_bytes: ATOM_BYTES,
        }
    }

    /// Structural check for the `index`-th point: invariants plus the
    /// stack-height filter. Die-size filters need a floorplan and are
    /// applied by the sweep engine.
    pub fn candidate(&self, index: u64) -> Candidate {
        let config = self.config_at(index);
        let outcome = config.validate().and_then(|()| {
            if config.dies() > self.filters.max_dies {
                Err(Error::validation(
                    "filters.max_dies",
                    format!("{} dies exceed the {}-die limit", config.dies(), self.filters.max_dies),
                ))
            } else {
                Ok(config)
            }
        });
        Candidate { index, outcome }
    }

    pub fn candidates(&self) -> SweepIter<'_> {
        SweepIter {
            spec: self,
            next: 0,
            end: self.cartesian_size(),
        }
    }
}

/// One point of the product with its structural verdict.
#[derive(Debug)]
pub struct Candidate {
    pub index: u64,
    pub outcome: Result<MemoryConfig>,
}

/// Iterator over every point of a sweep, accepted or not.
#[derive(Debug, Clone)]
pub struct SweepIter<'a> {
    spec: &'a SweepSpec,
    next: u64,
    end: u64,
}

impl Iterator for SweepIter<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        if self.next >= self.end {
            return None;
        }
        let c = self.spec.candidate(self.next);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// Structurally valid configs within the stack-height limit, in row-major order.
pub fn expand_sweep(spec: &SweepSpec) -> impl Iterator<Item = MemoryConfig> + '_ {
    spec.candidates().filter_map(|c| c.outcome.ok())
}
