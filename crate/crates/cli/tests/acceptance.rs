//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are pinned here, not read
//! from the data files.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackdram::analysis::{
    dominates, hull_volume_fractions, iso_filter, nested_hits, pareto_indices, ConvexHull, HullOptions, Metric,
};
use stackdram::capacity::capacity_bits;
use stackdram::energy::{event_energy, power, EnergyEvent};
use stackdram::engine::{run_sweep, SweepTable};
use stackdram::{
    apply_scaling, classify_tier, evaluate, evaluate_detailed, load_config, load_node, load_scaling, MemoryConfig,
    SweepSpec, TechnologyNode, Tier,
};
use stackdram_cli::case_study::CaseStudy;
use stackdram_cli::validate::{load_targets, run_validation, MetricCheck};

/// Criterion outcome: pass flag and a one-line summary.
type Outcome = (bool, String);

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn node_1z() -> TechnologyNode {
    let d = data();
    let n = load_node(d.join("nodes/2ynm.json")).unwrap();
    apply_scaling(&n, &load_scaling(d.join("nodes/1znm-scaling.json")).unwrap()).unwrap()
}

fn baseline() -> MemoryConfig {
    load_config(data().join("configs/hbm3_baseline.json")).unwrap()
}

fn rel_err(model: f64, expected: f64) -> f64 {
    (model - expected) / expected
}

struct Pinned {
    metric: Metric,
    expected: f64,
    tol: f64,
}

const EXACT: f64 = 1e-9;

const HBM3: [Pinned; 6] = [
    Pinned { metric: Metric::BandwidthGbs, expected: 1024.0, tol: EXACT },
    Pinned { metric: Metric::CapacityGb, expected: 16.0, tol: EXACT },
    Pinned { metric: Metric::DieAreaMm2, expected: 111.0, tol: 0.01 },
    Pinned { metric: Metric::MissLatencyNs, expected: 64.2, tol: 0.01 },
    Pinned { metric: Metric::EpbFullPj, expected: 0.98, tol: 0.05 },
    Pinned { metric: Metric::EpbClosedPj, expected: 3.01, tol: 0.05 },
];

const HBM2E: [Pinned; 6] = [
    Pinned { metric: Metric::BandwidthGbs, expected: 741.0, tol: 0.01 },
    Pinned { metric: Metric::CapacityGb, expected: 16.0, tol: EXACT },
    Pinned { metric: Metric::DieAreaMm2, expected: 109.3, tol: 0.01 },
    Pinned { metric: Metric::MissLatencyNs, expected: 61.1, tol: 0.01 },
    Pinned { metric: Metric::EpbFullPj, expected: 1.46, tol: 0.05 },
    Pinned { metric: Metric::EpbClosedPj, expected: 3.61, tol: 0.05 },
];

fn check_pinned(target: &str, pinned: &[Pinned], checks: &[MetricCheck]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in pinned {
        let Some(c) = checks.iter().find(|c| c.target == target && c.metric == p.metric) else {
            ok = false;
            parts.push(format!("{} missing", p.metric));
            continue;
        };
        let e = rel_err(c.model, p.expected);
        ok &= e.abs() <= p.tol;
        parts.push(format!("{}={:.4} ({:+.3}%)", p.metric.column(), c.model, e * 100.0));
    }
    (ok, parts.join(", "))
}

/// Runs the shipped `validate` command and times it.
fn validate_binary() -> (bool, Duration) {
    let t0 = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_stackdram"))
        .args(["--data-dir"])
        .arg(data())
        .arg("validate")
        .output()
        .expect("run stackdram validate");
    (status.status.success(), t0.elapsed())
}

fn criterion_1_and_2() -> (Outcome, Outcome) {
    let targets = load_targets(&data().join("targets/validation.json")).unwrap();
    let report = run_validation(&targets).unwrap();
    let (bin_ok, elapsed) = validate_binary();
    let (ok1, s1) = check_pinned("hbm3", &HBM3, &report.checks);
    let pass1 = ok1 && bin_ok && elapsed < Duration::from_secs(1);
    let (ok2, s2) = check_pinned("hbm2e", &HBM2E, &report.checks);
    let bw = report
        .checks
        .iter()
        .find(|c| c.target == "hbm2e" && c.metric == Metric::BandwidthGbs)
        .map(|c| c.model)
        .unwrap_or(f64::NAN);
    let vs_real = rel_err(bw, 640.0);
    (
        (pass1, format!("{s1}; validate exit ok={bin_ok} in {:.3}s", elapsed.as_secs_f64())),
        (ok2, format!("{s2}; bandwidth vs real 640: {:+.1}%", vs_real * 100.0)),
    )
}

fn criterion_3(node: &TechnologyNode) -> Outcome {
    let spec = SweepSpec::load(data().join("sweeps/full.json"), &baseline()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut found, mut tried, mut bad, mut adl) = (0, 0, 0, 0);
    while found < 1000 && tried < 1_000_000 {
        tried += 1;
        let mut c = spec.config_at(rng.gen_range(0..spec.cartesian_size()));
        c.inter_bank.adl_enabled = rng.gen_bool(0.5);
        if c.validate().is_err() {
            continue;
        }
        let Ok(e) = evaluate_detailed(&c, node) else { continue };
        found += 1;
        let t = e.timing;
        let mut ok = t.miss_latency_ns == t.trp_ns + t.trcd_ns + t.tcl_ns;
        ok &= t.tccdl_ns == t.bank_cycle_ns * t.pumps as f64;
        if c.inter_bank.adl_enabled {
            adl += 1;
            ok &= t.tccds_ns == t.tccdl_ns / 2.0;
        }
        bad += usize::from(!ok);
    }
    (found == 1000 && bad == 0, format!("{found} feasible configs ({adl} with ADL), {bad} violations"))
}

fn criterion_4(table: &SweepTable) -> Outcome {
    let worst = table
        .rows
        .iter()
        .map(|r| {
            // GB/s to b/s and pJ to J.
            let exact = (r.bandwidth_gbs * 8e9) * (r.epb_closed_pj * 1e-12);
            ((r.power_w - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    let same_fn = table.rows.iter().all(|r| r.power_w == power(r.bandwidth_gbs, r.epb_closed_pj));
    (
        same_fn && worst <= 4.0 * f64::EPSILON,
        format!("{} rows, worst relative deviation {worst:.2e}", table.rows.len()),
    )
}

fn criterion_5(spec: &SweepSpec, table: &SweepTable, sweep_time: Duration) -> Outcome {
    let t0 = Instant::now();
    let base = baseline();
    let mut ok = true;
    let mut counts = [0usize; 5];
    for r in &table.rows {
        ok &= classify_tier(&spec.config_at(r.index), &base) == r.tier;
        for (k, t) in Tier::ALL.iter().enumerate() {
            counts[k] += usize::from(r.tier <= *t);
        }
    }
    ok &= counts.windows(2).all(|w| w[0] <= w[1]) && counts[4] == table.rows.len();
    let opts = HullOptions { samples: 20_000, seed: 5, jobs: 0 };
    let report = hull_volume_fractions(&table.rows, &opts).unwrap();
    let fractions: Vec<f64> = report.iter().map(|h| h.volume_fraction).collect();
    ok &= fractions.windows(2).all(|w| w[0] <= w[1]);
    ok &= fractions.last() == Some(&1.0);
    let total = sweep_time + t0.elapsed();
    ok &= total < Duration::from_secs(300);
    let size_ok = (5_000..=50_000).contains(&table.rows.len());
    (
        ok && size_ok,
        format!(
            "{} designs, cumulative tier counts {counts:?}, hull fractions {:?}, {:.1}s",
            table.rows.len(),
            fractions.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>(),
            total.as_secs_f64()
        ),
    )
}

fn criterion_6(table: &SweepTable, node: &TechnologyNode) -> Outcome {
    let study = CaseStudy::load(&data().join("case_studies/server_gpu.json")).unwrap();
    let base = load_config(&study.baseline).unwrap();
    let base_row = evaluate(&base, node, &base).unwrap();
    let report = iso_filter(&table.rows, &base_row, &study.constraints).unwrap();
    let ratio = |m: Metric| report.best.iter().find(|b| b.metric == m).map_or(f64::NAN, |b| b.ratio_to_baseline);
    let (bw, cap, pw) = (ratio(Metric::BandwidthGbs), ratio(Metric::CapacityGb), ratio(Metric::PowerW));
    let ok = report.survivor_count > 0 && bw >= 1.5 && cap >= 2.0 && pw <= 0.6;
    (ok, format!("{} survivors, best bandwidth {bw:.3}x, capacity {cap:.3}x, power {pw:.3}x", report.survivor_count))
}

fn criterion_7(spec: &SweepSpec, table: &SweepTable) -> Outcome {
    let by_id: HashMap<&str, f64> = table.rows.iter().map(|r| (r.config_id.as_str(), r.bandwidth_gbs)).collect();
    let max_dl = table.rows.iter().filter(|r| r.dlomat_enabled).map(|r| r.bandwidth_gbs).fold(0.0, f64::max);
    // Non-DLOMAT twins of DLOMAT rows that also made it into the table.
    let max_twin = table
        .rows
        .iter()
        .filter(|r| r.dlomat_enabled)
        .filter_map(|r| {
            let mut c = spec.config_at(r.index);
            c.mat.dlomat_enabled = false;
            by_id.get(c.config_id().as_str()).copied()
        })
        .fold(0.0, f64::max);
    let max_plain = table.rows.iter().filter(|r| !r.dlomat_enabled).map(|r| r.bandwidth_gbs).fold(0.0, f64::max);
    let gain = max_dl / max_plain.max(max_twin);
    (
        gain >= 1.05,
        format!("DLOMAT max {max_dl:.1} GB/s, twin max {max_twin:.1}, non-DLOMAT max {max_plain:.1}, gain {:+.1}%", (gain - 1.0) * 100.0),
    )
}

fn odd_part(mut v: u64) -> u64 {
    while v > 0 && v % 2 == 0 {
        v /= 2;
    }
    v
}

fn criterion_8(spec: &SweepSpec, table: &SweepTable) -> Outcome {
    let mut bad = 0;
    let mut seen = std::collections::BTreeSet::new();
    for r in &table.rows {
        let bits = capacity_bits(&spec.config_at(r.index));
        let from_row = (r.capacity_gb * 8.0 * (1u64 << 30) as f64).round() as u64;
        let odd = odd_part(bits);
        seen.insert(odd);
        if from_row != bits || ![1, 3, 9].contains(&odd) {
            bad += 1;
        }
    }
    (bad == 0, format!("{} rows, odd factors seen {seen:?}, {bad} violations", table.rows.len()))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<Vec<f64>> = (0..1000)
        .map(|_| (0..3).map(|_| (rng.gen_range(0..40) as f64) / 4.0).collect())
        .collect();
    let brute: Vec<usize> = (0..pts.len()).filter(|&i| !pts.iter().any(|q| dominates(q, &pts[i]))).collect();
    let fast = pareto_indices(&pts);
    let pts2: Vec<Vec<f64>> = pts.iter().map(|p| p[..2].to_vec()).collect();
    let brute2: Vec<usize> = (0..pts2.len()).filter(|&i| !pts2.iter().any(|q| dominates(q, &pts2[i]))).collect();
    let fast2 = pareto_indices(&pts2);
    let pareto_ok = fast == brute && fast2 == brute2;

    let mut simplex = vec![vec![0.0; 5]];
    for i in 0..5 {
        let mut v = vec![0.0; 5];
        v[i] = 1.0;
        simplex.push(v);
    }
    let hull = ConvexHull::new(&simplex).unwrap();
    let opts = HullOptions { samples: 1_000_000, seed: 9, jobs: 0 };
    let hits = nested_hits(&[&hull], &[0.0; 5], &[1.0; 5], &opts).unwrap()[0];
    let frac = hits as f64 / opts.samples as f64;
    let err = rel_err(frac, 1.0 / 120.0);
    (
        pareto_ok && err.abs() <= 0.02,
        format!(
            "front sizes {}/{} match brute force: {pareto_ok}; simplex fraction {frac:.6} vs {:.6} ({:+.2}%)",
            fast.len(),
            fast2.len(),
            1.0 / 120.0,
            err * 100.0
        ),
    )
}

fn criterion_10() -> Outcome {
    let e = EnergyEvent {
        alpha: 1.0,
        n: 1.0,
        cap_per_len_ff_per_um: 0.2,
        length_um: 1000.0,
        dv_internal: 1.1,
        v_external: 1.1,
    };
    let example_err = rel_err(event_energy(&e), 0.121).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let base = EnergyEvent {
            alpha: rng.gen_range(0.01..1.0),
            n: rng.gen_range(1.0..1024.0),
            cap_per_len_ff_per_um: rng.gen_range(0.01..1.0),
            length_um: rng.gen_range(1.0..1e4),
            dv_internal: rng.gen_range(0.05..3.0),
            v_external: rng.gen_range(0.5..3.0),
        };
        let k: f64 = rng.gen_range(0.01..10.0);
        let mut s = base;
        match rng.gen_range(0..5) {
            0 => s.n *= k,
            1 => s.cap_per_len_ff_per_um *= k,
            2 => s.length_um *= k,
            3 => s.dv_internal *= k,
            _ => s.v_external *= k,
        }
        let expected = k * event_energy(&base);
        worst = worst.max(rel_err(event_energy(&s), expected).abs());
    }
    (
        example_err <= 1e-12 && worst <= 1e-12,
        format!("example {:.6} pJ (error {example_err:.1e}), worst linearity error {worst:.1e}", event_energy(&e)),
    )
}

fn main() -> ExitCode {
    let node = node_1z();
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |n: u32, o: Outcome| {
        println!("criterion {n:>2}: {} {}", if o.0 { "PASS" } else { "FAIL" }, o.1);
        results.push((n, o));
    };

    let (c1, c2) = criterion_1_and_2();
    report(1, c1);
    report(2, c2);
    report(3, criterion_3(&node));

    let spec = SweepSpec::load(data().join("sweeps/desk.json"), &baseline()).unwrap();
    let t0 = Instant::now();
    let table = run_sweep(&spec, &node, &baseline(), 0).unwrap();
    let sweep_time = t0.elapsed();
    report(4, criterion_4(&table));
    report(5, criterion_5(&spec, &table, sweep_time));
    report(6, criterion_6(&table, &node));
    report(7, criterion_7(&spec, &table));
    report(8, criterion_8(&spec, &table));
    report(9, criterion_9());
    report(10, criterion_10());

    let failed: Vec<u32> = results.iter().filter(|(_, o)| !o.0).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
