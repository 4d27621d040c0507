use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stackdram::analysis::{
    hull_volume_fractions, iso_filter, objectives, pareto_rows, project, projection_pairs, write_projection, HullOptions,
    Metric, ProjectedPoint,
};
use stackdram::engine::{read_metrics_csv, skipped_path, write_metrics_csv, write_sweep};
use stackdram::{evaluate, evaluate_detailed, load_config, run_sweep, DesignMetrics, MemoryConfig, SweepSpec, Tier};
use stackdram_cli::case_study::{CaseStudy, CaseStudyReport};
use stackdram_cli::nodes::resolve_node;
use stackdram_cli::validate::{load_targets, run_validation};
use stackdram_cli::{data_dir, DATA_DIR_ENV};

const EXIT_TOLERANCE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "stackdram", version, about = "Analytical model and design-space tools for 3D die-stacked DRAM")]
struct Cli {
    /// Directory holding the bundled configs, nodes, sweeps and targets.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one design.
    Evaluate(EvaluateArgs),
    /// Replay reference designs against expected metrics.
    Validate(ValidateArgs),
    /// Evaluate every design of a sweep into a metrics CSV.
    Sweep(SweepArgs),
    /// Pareto frontier over two metrics.
    Pareto(ParetoArgs),
    /// Convex-hull volume of each tier relative to the full space.
    Hull(HullArgs),
    /// Two-metric projections of a metrics table.
    Project(ProjectArgs),
    /// Iso-constraint search around a baseline.
    CaseStudy(CaseStudyArgs),
}

#[derive(Args)]
struct NodeArgs {
    /// Unscaled node, or a scaling file applied to the default unscaled node.
    #[arg(long)]
    node: Option<PathBuf>,
    /// Scaling file applied to the node [default: nodes/1znm-scaling.json].
    #[arg(long)]
    node_scaling: Option<PathBuf>,
    /// Use the node as written, without scaling.
    #[arg(long, conflicts_with = "node_scaling")]
    unscaled: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Design to evaluate [default: configs/hbm3_baseline.json].
    #[arg(long)]
    config: Option<PathBuf>,
    /// Baseline used for the tier label [default: the design itself].
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[command(flatten)]
    node: NodeArgs,
    /// Write the metrics record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write floorplan.json into --dump-dir.
    #[arg(long)]
    dump_floorplan: bool,
    /// Write routing.json into --dump-dir.
    #[arg(long)]
    dump_routing: bool,
    /// Write energy.json into --dump-dir.
    #[arg(long)]
    dump_energy: bool,
    #[arg(long, default_value = ".")]
    dump_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Targets file [default: targets/validation.json].
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    sweep: PathBuf,
    /// Baseline for tiers and unlisted parameters [default: configs/hbm3_baseline.json].
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    node: NodeArgs,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Also write JSON lines next to the CSV.
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args)]
struct ParetoArgs {
    /// Metrics table written by `sweep`.
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    x: Metric,
    #[arg(long)]
    y: Metric,
    #[arg(long)]
    color: Option<Metric>,
    /// One frontier per tier, each over that tier and the tiers below it.
    #[arg(long)]
    per_tier: bool,
    /// Output CSV, or a directory with --per-tier.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HullArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, required_unless_present = "all_pairs")]
    x: Option<Metric>,
    #[arg(long, required_unless_present = "all_pairs")]
    y: Option<Metric>,
    #[arg(long)]
    color: Option<Metric>,
    /// Every pair of the five design-space metrics.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    all_pairs: bool,
    /// Output CSV, or a directory with --all-pairs.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CaseStudyArgs {
    /// Study description [default: case_studies/server_gpu.json].
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Existing metrics table; the study's sweep is run when absent.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    node: NodeArgs,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write the survivors here as a metrics CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Tolerance,
    Input(String),
}

impl From<stackdram::Error> for Failure {
    fn from(e: stackdram::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let data = cli.data_dir.clone().unwrap_or_else(data_dir);
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&data, a),
        Command::Validate(a) => cmd_validate(&data, a),
        Command::Sweep(a) => cmd_sweep(&data, a),
        Command::Pareto(a) => cmd_pareto(a),
        Command::Hull(a) => cmd_hull(a),
        Command::Project(a) => cmd_project(a),
        Command::CaseStudy(a) => cmd_case_study(&data, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance) => ExitCode::from(EXIT_TOLERANCE),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn node_for(data: &Path, a: &NodeArgs) -> Result<stackdram::TechnologyNode, Failure> {
    Ok(resolve_node(data, a.node.as_deref(), a.node_scaling.as_deref(), a.unscaled)?)
}

fn baseline_config(data: &Path, path: Option<&Path>) -> Result<MemoryConfig, Failure> {
    Ok(load_config(path.map(Path::to_path_buf).unwrap_or_else(|| data.join("configs/hbm3_baseline.json")))?)
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => stdout(&(text + "\n")),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn stdout(text: &str) -> Outcome {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Input(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn cmd_evaluate(data: &Path, a: EvaluateArgs) -> Outcome {
    let config = baseline_config(data, a.config.as_deref())?;
    let baseline = match &a.baseline {
        Some(p) => load_config(p)?,
        None => config.clone(),
    };
    let node = node_for(data, &a.node)?;
    let row = evaluate(&config, &node, &baseline)?;
    if a.dump_floorplan || a.dump_routing || a.dump_energy {
        let e = evaluate_detailed(&config, &node)?;
        std::fs::create_dir_all(&a.dump_dir)
            .map_err(|err| Failure::Input(format!("cannot create {}: {err}", a.dump_dir.display())))?;
        if a.dump_floorplan {
            write_json(Some(&a.dump_dir.join("floorplan.json")), &e.floorplan)?;
        }
        if a.dump_routing {
            #[derive(Serialize)]
            struct Routing<'a> {
                plan: &'a stackdram::routing::MatRoutingPlan,
                bank_wires: &'a stackdram::routing::BankWires,
                datapath: &'a [stackdram::routing::WireRun],
            }
            let r = Routing {
                plan: &e.plan,
                bank_wires: &e.bank_wires,
                datapath: &e.datapath,
            };
            write_json(Some(&a.dump_dir.join("routing.json")), &r)?;
        }
        if a.dump_energy {
            write_json(Some(&a.dump_dir.join("energy.json")), &e.energy)?;
        }
    }
    write_json(a.out.as_deref(), &row)
}

fn cmd_validate(data: &Path, a: ValidateArgs) -> Outcome {
    let path = a.targets.unwrap_or_else(|| data.join("targets/validation.json"));
    let report = run_validation(&load_targets(&path)?)?;
    if a.json {
        write_json(None, &report)?;
    } else {
        stdout(&report.table())?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Tolerance)
    }
}

fn cmd_sweep(data: &Path, a: SweepArgs) -> Outcome {
    let baseline = baseline_config(data, a.config.as_deref())?;
    let node = node_for(data, &a.node)?;
    let spec = SweepSpec::load(&a.sweep, &baseline)?;
    let jsonl = a.jsonl.then(|| a.out.with_extension("jsonl"));
    let counts = write_sweep(&spec, &node, &baseline, a.jobs, &a.out, jsonl.as_deref())?;
    eprintln!(
        "{} of {} designs written to {}; skipped designs in {}",
        counts.emitted,
        counts.cartesian,
        a.out.display(),
        skipped_path(&a.out).display()
    );
    write_json(None, &counts)
}

fn read_table(path: &Path) -> Result<Vec<DesignMetrics>, Failure> {
    let rows = read_metrics_csv(path)?;
    if rows.is_empty() {
        return Err(Failure::Input(format!("{} has no design rows", path.display())));
    }
    Ok(rows)
}

fn frontier_points(rows: &[DesignMetrics], x: Metric, y: Metric, color: Option<Metric>) -> Result<Vec<ProjectedPoint>, Failure> {
    let front: Vec<DesignMetrics> = pareto_rows(rows, &objectives(&[x, y]))?.into_iter().cloned().collect();
    Ok(project(&front, x, y, color)?)
}

fn cmd_pareto(a: ParetoArgs) -> Outcome {
    let rows = read_table(&a.table)?;
    if !a.per_tier {
        let points = frontier_points(&rows, a.x, a.y, a.color)?;
        return Ok(write_projection(&a.out, &points)?);
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("cannot create {}: {e}", a.out.display())))?;
    for tier in Tier::ALL {
        let subset: Vec<DesignMetrics> = rows.iter().filter(|r| r.tier <= tier).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        let points = frontier_points(&subset, a.x, a.y, a.color)?;
        write_projection(&a.out.join(format!("pareto_{}_{}_tier{tier}.csv", a.x, a.y)), &points)?;
    }
    Ok(())
}

fn cmd_hull(a: HullArgs) -> Outcome {
    let rows = read_table(&a.table)?;
    let opts = HullOptions {
        samples: a.samples,
        seed: a.seed,
        jobs: a.jobs,
    };
    write_json(a.out.as_deref(), &hull_volume_fractions(&rows, &opts)?)
}

fn cmd_project(a: ProjectArgs) -> Outcome {
    let rows = read_table(&a.table)?;
    if a.all_pairs {
        std::fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("cannot create {}: {e}", a.out.display())))?;
        for (x, y) in projection_pairs() {
            write_projection(&a.out.join(format!("{x}__{y}.csv")), &project(&rows, x, y, a.color)?)?;
        }
        return Ok(());
    }
    let (x, y) = (a.x.expect("required by clap"), a.y.expect("required by clap"));
    Ok(write_projection(&a.out, &project(&rows, x, y, a.color)?)?)
}

fn cmd_case_study(data: &Path, a: CaseStudyArgs) -> Outcome {
    let path = a.constraints.unwrap_or_else(|| data.join("case_studies/server_gpu.json"));
    let study = CaseStudy::load(&path)?;
    let baseline = load_config(&study.baseline)?;
    let node = node_for(data, &a.node)?;
    let rows = match &a.table {
        Some(t) => read_table(t)?,
        None => run_sweep(&SweepSpec::load(&study.sweep, &baseline)?, &node, &baseline, a.jobs)?.rows,
    };
    let base_row = evaluate(&baseline, &node, &baseline)?;
    let iso = iso_filter(&rows, &base_row, &study.constraints)?;
    if let Some(out) = &a.out {
        let survivors: Vec<DesignMetrics> = iso.survivors.iter().map(|r| (*r).clone()).collect();
        write_metrics_csv(out, &survivors)?;
    }
    let report = CaseStudyReport {
        name: study.name,
        baseline_config_id: base_row.config_id,
        designs: rows.len(),
        survivors: iso.survivor_count,
        best: iso.best,
    };
    write_json(None, &report)
}
