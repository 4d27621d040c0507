//! Post-processing of metrics tables.

mod hull;
mod pareto;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{DesignMetrics, Tier};
use crate::error::{Error, Result};

pub use hull::{affine_rank, hull_volume_fractions, in_convex_hull, nested_hits, ConvexHull, HullOptions, HullReport};
pub use pareto::{dominates, pareto_front, pareto_indices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Numeric columns of the metrics table that analyses can address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    BandwidthGbs,
    CapacityGb,
    EpbFullPj,
    EpbClosedPj,
    MissLatencyNs,
    DieAreaMm2,
    TotalAreaMm2,
    PowerW,
    Edp,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::BandwidthGbs,
        Metric::CapacityGb,
        Metric::EpbFullPj,
        Metric::EpbClosedPj,
        Metric::MissLatencyNs,
        Metric::DieAreaMm2,
        Metric::TotalAreaMm2,
        Metric::PowerW,
        Metric::Edp,
    ];

    /// The five axes of the design space.
    pub const SPACE: [Metric; 5] = [
        Metric::BandwidthGbs,
        Metric::CapacityGb,
        Metric::EpbClosedPj,
        Metric::MissLatencyNs,
        Metric::TotalAreaMm2,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Metric::BandwidthGbs => "bandwidth_gbs",
            Metric::CapacityGb => "capacity_gb",
            Metric::EpbFullPj => "epb_full_pj",
            Metric::EpbClosedPj => "epb_closed_pj",
            Metric::MissLatencyNs => "miss_latency_ns",
            Metric::DieAreaMm2 => "die_area_mm2",
            Metric::TotalAreaMm2 => "total_area_mm2",
            Metric::PowerW => "power_w",
            Metric::Edp => "edp",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::BandwidthGbs | Metric::CapacityGb => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    pub fn value(self, row: &DesignMetrics) -> f64 {
        match self {
            Metric::BandwidthGbs => row.bandwidth_gbs,
            Metric::CapacityGb => row.capacity_gb,
            Metric::EpbFullPj => row.epb_full_pj,
            Metric::EpbClosedPj => row.epb_closed_pj,
            Metric::MissLatencyNs => row.miss_latency_ns,
            Metric::DieAreaMm2 => row.die_area_mm2,
            Metric::TotalAreaMm2 => row.total_area_mm2,
            Metric::PowerW => row.power_w,
            Metric::Edp => row.edp,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Metric {
    type Err = Error;

    /// Accepts column names and their unit-less short forms.
    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "bandwidth_gbs" | "bandwidth" => Metric::BandwidthGbs,
            "capacity_gb" | "capacity" => Metric::CapacityGb,
            "epb_full_pj" | "epb_full" => Metric::EpbFullPj,
            "epb_closed_pj" | "epb_closed" | "energy" => Metric::EpbClosedPj,
            "miss_latency_ns" | "miss_latency" | "latency" => Metric::MissLatencyNs,
            "die_area_mm2" | "die_area" => Metric::DieAreaMm2,
            "total_area_mm2" | "total_area" | "area" => Metric::TotalAreaMm2,
            "power_w" | "power" => Metric::PowerW,
            "edp" => Metric::Edp,
            _ => return Err(Error::UnknownMetric(s.to_string())),
        };
        Ok(m)
    }
}

/// An objective: a metric and whether larger is better.
pub type Objective = (Metric, Direction);

pub fn objectives(metrics: &[Metric]) -> Vec<Objective> {
    metrics.iter().map(|&m| (m, m.direction())).collect()
}

/// Rows on the Pareto front of `objectives`, in table order.
pub fn pareto_rows<'a>(rows: &'a [DesignMetrics], objectives: &[Objective]) -> Result<Vec<&'a DesignMetrics>> {
    if objectives.len() < 2 {
        return Err(Error::InvalidArgument("a Pareto front needs at least two objectives".into()));
    }
    let points: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            objectives
                .iter()
                .map(|&(m, d)| match d {
                    Direction::Minimize => m.value(r),
                    Direction::Maximize => -m.value(r),
                })
                .collect()
        })
        .collect();
    Ok(pareto_indices(&points).into_iter().map(|i| &rows[i]).collect())
}

/// Rows of tier `tier` or below.
pub fn tier_rows(rows: &[DesignMetrics], tier: Tier) -> Vec<&DesignMetrics> {
    rows.iter().filter(|r| r.tier <= tier).collect()
}

/// One point of a 2D projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub config_id: String,
    pub tier: Tier,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<f64>,
}

pub fn project(rows: &[DesignMetrics], x: Metric, y: Metric, color: Option<Metric>) -> Result<Vec<ProjectedPoint>> {
    if x == y {
        return Err(Error::InvalidArgument(format!("cannot project {x} against itself")));
    }
    Ok(rows
        .iter()
        .map(|r| ProjectedPoint {
            config_id: r.config_id.clone(),
            tier: r.tier,
            x: x.value(r),
            y: y.value(r),
            color: color.map(|c| c.value(r)),
        })
        .collect())
}

/// Every unordered pair of the design-space axes.
pub fn projection_pairs() -> Vec<(Metric, Metric)> {
    let s = Metric::SPACE;
    let mut pairs = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            pairs.push((s[i], s[j]));
        }
    }
    pairs
}

pub fn write_projection(path: &Path, points: &[ProjectedPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidArgument(format!("{other:?}")),
    })?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A bound relative to the baseline: at least `factor` times the baseline
/// for maximized metrics, at most `factor` times it for minimized ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub metric: Metric,
    #[serde(default = "one")]
    pub factor: f64,
}

fn one() -> f64 {
    1.0
}

impl Constraint {
    pub fn holds(&self, row: &DesignMetrics, baseline: &DesignMetrics) -> bool {
        let v = self.metric.value(row);
        let bound = self.factor * self.metric.value(baseline);
        match self.metric.direction() {
            Direction::Maximize => v >= bound,
            Direction::Minimize => v <= bound,
        }
    }
}

/// Best survivor per metric, as a ratio to the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestSurvivor {
    pub metric: Metric,
    pub config_id: String,
    pub value: f64,
    pub ratio_to_baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoReport<'a> {
    #[serde(skip)]
    pub survivors: Vec<&'a DesignMetrics>,
    pub survivor_count: usize,
    pub best: Vec<BestSurvivor>,
}

pub fn iso_filter<'a>(
    rows: &'a [DesignMetrics],
    baseline: &DesignMetrics,
    constraints: &[Constraint],
) -> Result<IsoReport<'a>> {
    if let Some(c) = constraints.iter().find(|c| !c.holds(baseline, baseline)) {
        return Err(Error::InvalidArgument(format!(
            "baseline fails its own constraint on {} (factor {})",
            c.metric, c.factor
        )));
    }
    let survivors: Vec<&DesignMetrics> = rows.iter().filter(|r| constraints.iter().all(|c| c.holds(r, baseline))).collect();
    let mut best = Vec::new();
    for m in Metric::ALL {
        let pick = survivors.iter().copied().reduce(|a, b| {
            let better = match m.direction() {
                Direction::Maximize => m.value(b) > m.value(a),
                Direction::Minimize => m.value(b) < m.value(a),
            };
            if better {
                b
            } else {
                a
            }
        });
        if let Some(r) = pick {
            best.push(BestSurvivor {
                metric: m,
                config_id: r.config_id.clone(),
                value: m.value(r),
                ratio_to_baseline: m.value(r) / m.value(baseline),
            });
        }
    }
    Ok(IsoReport {
        survivor_count: survivors.len(),
        survivors,
        best,
    })
}
