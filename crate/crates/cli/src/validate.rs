//! Replays reference designs and compares them with expected metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stackdram::analysis::Metric;
use stackdram::{evaluate, load_config, load_node, load_scaling, apply_scaling, DesignMetrics, Error, Result};

use crate::relative_to;

/// One reference design. Paths are relative to the targets file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationTarget {
    pub name: String,
    pub config_path: PathBuf,
    pub node: PathBuf,
    pub node_scaling: Option<PathBuf>,
    /// Model values to reproduce.
    pub expected: BTreeMap<Metric, f64>,
    /// Relative tolerance per expected metric; a metric passes when its
    /// relative error is strictly below it.
    pub tolerances: BTreeMap<Metric, f64>,
    /// Measured values of the real part, reported for context only.
    #[serde(default)]
    pub real: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub targets: Vec<ValidationTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricCheck {
    pub target: String,
    pub metric: Metric,
    pub model: f64,
    pub expected: f64,
    pub error: f64,
    pub tolerance: f64,
    pub real: Option<f64>,
    pub error_vs_real: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<MetricCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<8} {:<16} {:>12} {:>12} {:>9} {:>9} {:>10} {:>9}  result",
            "target", "metric", "model", "expected", "error", "tol", "real", "vs real"
        );
        for c in &self.checks {
            let real = c.real.map_or("-".to_string(), |r| format!("{r:.2}"));
            let vs_real = c.error_vs_real.map_or("-".to_string(), |e| format!("{:+.1}%", e * 100.0));
            let _ = writeln!(
                s,
                "{:<8} {:<16} {:>12.4} {:>12.4} {:>+8.3}% {:>8.3}% {:>10} {:>9}  {}",
                c.target,
                c.metric.column(),
                c.model,
                c.expected,
                c.error * 100.0,
                c.tolerance * 100.0,
                real,
                vs_real,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

pub fn load_targets(path: &Path) -> Result<Vec<ValidationTarget>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: TargetFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut targets = file.targets;
    for t in &mut targets {
        if let Some(m) = t.expected.keys().find(|m| !t.tolerances.contains_key(m)) {
            return Err(Error::Validation {
                field: format!("{}.tolerances.{m}", t.name),
                reason: "every expected metric needs a tolerance".into(),
            });
        }
        if let Some((m, tol)) = t.tolerances.iter().find(|(_, &v)| !(v.is_finite() && v >= 0.0)) {
            return Err(Error::Validation {
                field: format!("{}.tolerances.{m}", t.name),
                reason: format!("{tol} is not a usable tolerance"),
            });
        }
        t.config_path = relative_to(path, &t.config_path);
        t.node = relative_to(path, &t.node);
        t.node_scaling = t.node_scaling.as_deref().map(|p| relative_to(path, p));
    }
    Ok(targets)
}

/// Evaluates a target's design on its own node.
pub fn evaluate_target(t: &ValidationTarget) -> Result<DesignMetrics> {
    let config = load_config(&t.config_path)?;
    let mut node = load_node(&t.node)?;
    if let Some(s) = &t.node_scaling {
        node = apply_scaling(&node, &load_scaling(s)?)?;
    }
    evaluate(&config, &node, &config)
}

pub fn check_target(t: &ValidationTarget) -> Result<Vec<MetricCheck>> {
    let row = evaluate_target(t)?;
    Ok(t.expected
        .iter()
        .map(|(&metric, &expected)| {
            let model = metric.value(&row);
            let error = (model - expected) / expected;
            let tolerance = t.tolerances[&metric];
            let real = t.real.get(&metric).copied();
            MetricCheck {
                target: t.name.clone(),
                metric,
                model,
                expected,
                error,
                tolerance,
                real,
                error_vs_real: real.map(|r| (model - r) / r),
                pass: error.abs() < tolerance,
            }
        })
        .collect())
}

pub fn run_validation(targets: &[ValidationTarget]) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for t in targets {
        checks.extend(check_target(t)?);
    }
    Ok(ValidationReport { checks })
}
