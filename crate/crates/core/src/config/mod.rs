//! DRAM design configurations.
//!
//! A [`MemoryConfig`] describes one complete design point, split into the
//! four levels of the array hierarchy: inter-bank (channels, ranks, bank
//! groups), bank (subarrays, SALP), subarray (partial pages, OCSA) and MAT
//! (wordlines, bitlines, datalines, DLOMAT). Configs are plain values; they
//! are validated once on load and immutable afterwards.

mod sweep;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use sweep::{expand_sweep, Candidate, ParamLists, SweepFilters, SweepIter, SweepSpec, PARAMETER_ORDER};

/// Fixed channel transfer unit.
pub const ATOM_BYTES: u32 = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterBankParams {
    pub ranks: u32,
    pub channels: u32,
    pub channels_per_die: u32,
    pub pseudo_channels_per_channel: u32,
    pub bank_groups_horizontal: u32,
    pub bank_groups_vertical: u32,
    pub banks_per_bank_group: u32,
    pub bgbus_mux_ratio: u32,
    pub adl_enabled: bool,
    /// Data pins for the whole stack.
    pub dq_per_stack: u32,
    /// Per-pin data rate in Gb/s.
    pub dq_data_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SalpMode {
    None,
    /// Subarrays split into this many groups separated by buffer subarrays.
    Groups(u32),
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankParams {
    pub subarrays_per_bank: u32,
    pub mats_per_subarray: u32,
    pub repair_subarrays: u32,
    pub salp_mode: SalpMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialPage {
    FullPage,
    HalfPage { independent_mdls: bool },
    Subchannels(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubarrayParams {
    pub partial_page: PartialPage,
    pub ocsa_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatParams {
    pub wls_per_mat: u32,
    pub bls_per_mat: u32,
    pub mdls_per_mat: u32,
    pub ldls_per_mat: u32,
    pub wl_isolation_overhead: f64,
    pub bl_isolation_overhead: f64,
    pub odecc_overhead: f64,
    pub dlomat_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryConfig {
    pub inter_bank: InterBankParams,
    pub bank: BankParams,
    pub subarray: SubarrayParams,
    pub mat: MatParams,
    #[serde(default = "default_atom_bytes")]
    pub atom_bytes: u32,
}

fn default_atom_bytes() -> u32 {
    ATOM_BYTES
}

pub(crate) fn is_pow2(v: u32) -> bool {
    v != 0 && v.is_power_of_two()
}

/// `2^k` or `3 * 2^k`.
pub(crate) fn is_pow2_or_triple(v: u32) -> bool {
    is_pow2(v) || (v % 3 == 0 && is_pow2(v / 3))
}

fn check_pow2(field: &str, v: u32) -> Result<()> {
    if is_pow2(v) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} is not a power of two")))
    }
}

fn check_pow2_or_triple(field: &str, v: u32) -> Result<()> {
    if is_pow2_or_triple(v) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} is neither 2^k nor 3*2^k")))
    }
}

fn check_fraction(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} is outside [0, 1)")))
    }
}

impl InterBankParams {
    pub fn validate(&self) -> Result<()> {
        check_pow2("inter_bank.ranks", self.ranks)?;
        check_pow2_or_triple("inter_bank.channels", self.channels)?;
        check_pow2_or_triple("inter_bank.channels_per_die", self.channels_per_die)?;
        check_pow2("inter_bank.pseudo_channels_per_channel", self.pseudo_channels_per_channel)?;
        check_pow2("inter_bank.bank_groups_horizontal", self.bank_groups_horizontal)?;
        check_pow2("inter_bank.bank_groups_vertical", self.bank_groups_vertical)?;
        check_pow2("inter_bank.banks_per_bank_group", self.banks_per_bank_group)?;
        check_pow2("inter_bank.bgbus_mux_ratio", self.bgbus_mux_ratio)?;
        // Triples let the DQs split evenly over a 3 * 2^k channel count.
        check_pow2_or_triple("inter_bank.dq_per_stack", self.dq_per_stack)?;
        if self.channels % self.channels_per_die != 0 {
            return Err(Error::validation(
                "inter_bank.channels_per_die",
                format!("{} channels are not divisible by {} channels per die", self.channels, self.channels_per_die),
            ));
        }
        let pcs = self.channels * self.pseudo_channels_per_channel;
        if self.dq_per_stack % pcs != 0 {
            return Err(Error::validation(
                "inter_bank.dq_per_stack",
                format!("{} DQs cannot be split evenly over {pcs} pseudo channels", self.dq_per_stack),
            ));
        }
        if !(self.dq_data_rate.is_finite() && self.dq_data_rate > 0.0) {
            return Err(Error::validation("inter_bank.dq_data_rate", "must be a positive rate"));
        }
        Ok(())
    }

    pub fn bank_groups(&self) -> u32 {
        self.bank_groups_horizontal * self.bank_groups_vertical
    }

    /// Banks owned by one pseudo channel.
    pub fn banks_per_pseudo_channel(&self) -> u32 {
        self.bank_groups() * self.banks_per_bank_group
    }

    pub fn dq_per_channel(&self) -> u32 {
        self.dq_per_stack / self.channels
    }

    pub fn dq_per_pseudo_channel(&self) -> u32 {
        self.dq_per_channel() / self.pseudo_channels_per_channel
    }
}

impl BankParams {
    pub fn validate(&self) -> Result<()> {
        check_pow2_or_triple("bank.subarrays_per_bank", self.subarrays_per_bank)?;
        check_pow2("bank.mats_per_subarray", self.mats_per_subarray)?;
        if let SalpMode::Groups(g) = self.salp_mode {
            if g == 0 || self.subarrays_per_bank % g != 0 {
                return Err(Error::validation(
                    "bank.salp_mode",
                    format!("{g} groups do not divide {} subarrays", self.subarrays_per_bank),
                ));
            }
        }
        Ok(())
    }

    /// Buffer subarrays inserted between SALP groups.
    pub fn buffer_subarrays(&self) -> u32 {
        match self.salp_mode {
            SalpMode::Groups(g) if g >= 2 => g - 1,
            _ => 0,
        }
    }

    /// Subarrays that occupy area: data, repair and buffer.
    pub fn physical_subarrays(&self) -> u32 {
        self.subarrays_per_bank + self.repair_subarrays + self.buffer_subarrays()
    }
}

impl MatParams {
    pub fn validate(&self) -> Result<()> {
        check_pow2("mat.wls_per_mat", self.wls_per_mat)?;
        check_pow2("mat.bls_per_mat", self.bls_per_mat)?;
        check_pow2("mat.ldls_per_mat", self.ldls_per_mat)?;
        if self.mdls_per_mat == 0 || self.bls_per_mat % self.mdls_per_mat != 0 {
            return Err(Error::validation(
                "mat.mdls_per_mat",
                format!("{} does not divide {} bitlines", self.mdls_per_mat, self.bls_per_mat),
            ));
        }
        check_pow2("mat.mdls_per_mat", self.mdls_per_mat)?;
        if !self.dlomat_enabled && self.ldls_per_mat < self.mdls_per_mat {
            return Err(Error::validation(
                "mat.ldls_per_mat",
                format!("{} LDLs cannot feed {} MDLs", self.ldls_per_mat, self.mdls_per_mat),
            ));
        }
        check_fraction("mat.wl_isolation_overhead", self.wl_isolation_overhead)?;
        check_fraction("mat.bl_isolation_overhead", self.bl_isolation_overhead)?;
        check_fraction("mat.odecc_overhead", self.odecc_overhead)?;
        Ok(())
    }
}

impl MemoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atom_bytes != ATOM_BYTES {
            return Err(Error::validation("atom_bytes", format!("atoms are fixed at {ATOM_BYTES} bytes")));
        }
        self.inter_bank.validate()?;
        self.bank.validate()?;
        self.mat.validate()?;
        let mats = self.bank.mats_per_subarray;
        match self.subarray.partial_page {
            PartialPage::FullPage => {}
            PartialPage::HalfPage { .. } => {
                if mats < 2 {
                    return Err(Error::validation("subarray.partial_page", "half page needs at least 2 MATs"));
                }
            }
            PartialPage::Subchannels(n) => {
                if !is_pow2(n) || mats % n != 0 {
                    return Err(Error::validation(
                        "subarray.partial_page",
                        format!("{n} subchannels do not divide {mats} MATs"),
                    ));
                }
            }
        }
        let fired = self.mdl_bits_per_pump();
        let atom = self.atom_bits();
        if atom % fired != 0 && fired % atom != 0 {
            return Err(Error::validation(
                "mat.mdls_per_mat",
                format!("{fired} MDL bits per column cycle do not tile a {atom}-bit atom"),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn atom_bits(&self) -> u32 {
        self.atom_bytes * 8
    }

    /// Stack height: ranks stack vertically and share the channel TSVs.
    pub fn dies(&self) -> u32 {
        let ib = &self.inter_bank;
        ib.ranks * (ib.channels / ib.channels_per_die)
    }

    /// MATs opened by one activation.
    pub fn active_mats(&self) -> u32 {
        let mats = self.bank.mats_per_subarray;
        match self.subarray.partial_page {
            PartialPage::FullPage => mats,
            PartialPage::HalfPage { .. } => mats / 2,
            PartialPage::Subchannels(n) => mats / n,
        }
    }

    /// MAT columns whose MDLs a single column access can drive.
    ///
    /// A dependent half page doubles its LDLs so every MDL stays reachable.
    pub fn mdl_columns_per_access(&self) -> u32 {
        match self.subarray.partial_page {
            PartialPage::HalfPage { independent_mdls: false } => self.bank.mats_per_subarray,
            _ => self.active_mats(),
        }
    }

    /// LDLs per MAT after partial-page doubling.
    pub fn effective_ldls_per_mat(&self) -> u32 {
        match self.subarray.partial_page {
            PartialPage::HalfPage { independent_mdls: false } => 2 * self.mat.ldls_per_mat,
            _ => self.mat.ldls_per_mat,
        }
    }

    pub fn mdl_bits_per_pump(&self) -> u32 {
        self.mdl_columns_per_access() * self.mat.mdls_per_mat
    }

    /// Data bits (ECC excluded) sensed by one activation.
    pub fn page_bits(&self) -> u64 {
        self.active_mats() as u64 * self.mat.bls_per_mat as u64
    }

    /// Bits delivered by one column command: at least one atom.
    pub fn column_bits(&self) -> u32 {
        self.mdl_bits_per_pump().max(self.atom_bits())
    }

    /// Stable content hash of the canonical JSON form.
    pub fn config_id(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Column cycles needed to assemble one atom from the MDLs.
pub fn derive_pumps(config: &MemoryConfig) -> u32 {
    config.atom_bits().div_ceil(config.mdl_bits_per_pump()).max(1)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<MemoryConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = MemoryConfig::from_json(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

impl fmt::Display for SalpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SalpMode::None => write!(f, "none"),
            SalpMode::Groups(g) => write!(f, "groups{g}"),
            SalpMode::All => write!(f, "all"),
        }
    }
}

impl fmt::Display for PartialPage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialPage::FullPage => write!(f, "full"),
            PartialPage::HalfPage { independent_mdls: true } => write!(f, "half_indep"),
            PartialPage::HalfPage { independent_mdls: false } => write!(f, "half"),
            PartialPage::Subchannels(n) => write!(f, "sub{n}"),
        }
    }
}
