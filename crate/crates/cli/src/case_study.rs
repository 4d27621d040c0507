use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stackdram::analysis::{BestSurvivor, Constraint};
use stackdram::{Error, Result};

use crate::relative_to;

/// An iso-constraint study: a baseline, the sweep to search and the bounds
/// relative to the baseline. Paths are relative to the study file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudy {
    pub name: String,
    pub baseline: PathBuf,
    pub sweep: PathBuf,
    pub constraints: Vec<Constraint>,
}

impl CaseStudy {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s: CaseStudy = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        s.baseline = relative_to(path, &s.baseline);
        s.sweep = relative_to(path, &s.sweep);
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseStudyReport {
    pub name: String,
    pub baseline_config_id: String,
    pub designs: usize,
    pub survivors: usize,
    pub best: Vec<BestSurvivor>,
}
