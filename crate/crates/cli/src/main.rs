use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use quietpath::energy::EnergyError;
use quietpath::geometry::GeometryError;
use quietpath::graph::{build_base_graph, load_graph, save_graph, ChargeLabel, GraphError, SampledGraph};
use quietpath::harness::{
    box_plot_svg, generate_random_map, plan_svg, run_benchmark_with, BenchConfig, HarnessError, MapFile, MapGenConfig,
};
use quietpath::planner::{build_layer, solve_on_layer, PlanError, PlanKind, PlanResult};
use quietpath::{BatteryParams, Mode, Point2};

const EXIT_NO_PLAN: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(
    name = "quietpath",
    version,
    about = "Hybrid-powertrain path planning with quiet zones"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random map of convex zones.
    GenMap(GenMapArgs),
    /// Build and cache the base graph of a map.
    BuildGraph(BuildGraphArgs),
    /// Feasible plan (upper bound) for one query.
    Plan(PlanArgs),
    /// Certified lower bound for one query.
    LowerBound(LowerBoundArgs),
    /// Plan that avoids quiet zones entirely.
    Baseline(PlanArgs),
    /// Run a benchmark sweep and write the report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenMapArgs {
    #[arg(long)]
    zones: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000.0)]
    width: f64,
    #[arg(long, default_value_t = 2000.0)]
    height: f64,
    /// Probability that a zone is no-fly.
    #[arg(long, default_value_t = 0.0)]
    no_fly_fraction: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BatteryArgs {
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    qmin: f64,
    #[arg(long, default_value_t = 100.0)]
    qmax: f64,
    #[arg(long, default_value_t = 1.0)]
    cf: f64,
}

#[derive(Args)]
struct BuildGraphArgs {
    #[arg(long)]
    map: PathBuf,
    /// Boundary sampling interval.
    #[arg(long)]
    dl: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    battery: BatteryArgs,
}

#[derive(Args)]
struct QueryArgs {
    /// Cached base graph.
    #[arg(long)]
    graph: PathBuf,
    /// Start position as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    start: Point2,
    /// Goal position as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    goal: Point2,
    #[arg(long, default_value_t = 80.0)]
    qinit: f64,
    #[arg(long, default_value_t = 50.0)]
    qgoal: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Charge grid spacing.
    #[arg(long, default_value_t = 2.5)]
    dq: f64,
    /// Also draw the plan as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Map file for the drawing bounds; the zone extents are used otherwise.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Number of charge intervals per vertex.
    #[arg(long, default_value_t = 40)]
    nl: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON benchmark configuration; defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also draw gap box plots as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Override the number of scenarios per map.
    #[arg(long)]
    scenarios: Option<usize>,
}

fn parse_point(s: &str) -> std::result::Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad coordinate {v:?}: {e}"))
    };
    let p = Point2::new(parse(x)?, parse(y)?);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(format!("coordinates must be finite: {s:?}"))
    }
}

#[derive(Serialize)]
struct SegmentJson {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    mode: Mode,
    q_start: f64,
    q_end: f64,
    length: f64,
    path: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct StopJson {
    x: f64,
    y: f64,
    vertex: usize,
    q_lo: f64,
    q_hi: f64,
}

#[derive(Serialize)]
struct PlanJson {
    kind: PlanKind,
    cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory_cost: Option<f64>,
    segments: Vec<SegmentJson>,
    stops: Vec<StopJson>,
    valid: bool,
    diagnostics: Vec<String>,
}

impl PlanJson {
    fn new(plan: &PlanResult, params: &BatteryParams) -> Self {
        let segments = plan
            .trajectory
            .iter()
            .flat_map(|t| &t.segments)
            .map(|s| SegmentJson {
                x0: s.start().x,
                y0: s.start().y,
                x1: s.end().x,
                y1: s.end().y,
                mode: s.mode,
                q_start: s.q_start,
                q_end: s.q_end,
                length: s.length,
                path: s.points.iter().map(|p| [p.x, p.y]).collect(),
            })
            .collect();
        let stops = plan
            .stops
            .iter()
            .map(|s| {
                let (q_lo, q_hi) = match s.label {
                    ChargeLabel::Exact(q) => (q, q),
                    ChargeLabel::Interval { lo, hi } => (lo, hi),
                };
                StopJson {
                    x: s.position.x,
                    y: s.position.y,
                    vertex: s.vertex,
                    q_lo,
                    q_hi,
                }
            })
            .collect();
        let diagnostics = plan
            .audit
            .iter()
            .flat_map(|a| &a.violations)
            .map(ToString::to_string)
            .collect();
        Self {
            kind: plan.kind,
            cost: plan.cost,
            trajectory_cost: plan.trajectory_cost(params),
            segments,
            stops,
            valid: plan.is_valid(),
            diagnostics,
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn gen_map(args: &GenMapArgs) -> Result<()> {
    let cfg = MapGenConfig {
        bounds: (args.width, args.height),
        no_fly_fraction: args.no_fly_fraction,
        ..MapGenConfig::default()
    };
    let map = generate_random_map(args.zones, args.seed, &cfg)?;
    map.save(&args.out)?;
    println!("wrote {} zones to {}", map.zones.len(), args.out.display());
    Ok(())
}

fn build_graph(args: &BuildGraphArgs) -> Result<()> {
    let b = &args.battery;
    let params = BatteryParams::new(b.alpha, b.beta, b.qmin, b.qmax, b.cf)?;
    let map = MapFile::load(&args.map)?;
    let graph = build_base_graph(&map.zones, args.dl, &params)?;
    save_graph(&graph, &args.out)?;
    println!(
        "wrote {} vertices and {} edges to {}",
        graph.vertex_count(),
        graph.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn solve(query: &QueryArgs, kind: PlanKind, dq: f64, nl: usize) -> Result<(SampledGraph, PlanResult)> {
    let base = load_graph(&query.graph)?;
    let attached = Arc::new(base.attach_endpoints(query.start, query.goal)?);
    let layer = Arc::new(build_layer(&base, kind, dq, nl)?);
    let plan = solve_on_layer(&layer, &attached, query.qinit, query.qgoal)?;
    Ok((base, plan))
}

fn drawing_map(graph: &SampledGraph, args: &PlanArgs) -> Result<MapFile> {
    if let Some(path) = &args.map {
        return Ok(MapFile::load(path)?);
    }
    let points = graph
        .zones()
        .iter()
        .flat_map(|z| z.polygon.vertices().iter().copied())
        .chain([args.query.start, args.query.goal]);
    let (w, h) = points.fold((1.0_f64, 1.0_f64), |(w, h), p| (w.max(p.x), h.max(p.y)));
    Ok(MapFile::new("plan", (w * 1.05, h * 1.05), graph.zones().to_vec())?)
}

fn plan(args: &PlanArgs, kind: PlanKind) -> Result<()> {
    let (base, plan) = solve(&args.query, kind, args.dq, 1)?;
    let params = *base.params();
    write_json(&args.query.out, &PlanJson::new(&plan, &params))?;
    if let Some(svg) = &args.svg {
        let map = drawing_map(&base, args)?;
        let traj = plan.trajectory.clone().unwrap_or_default();
        std::fs::write(svg, plan_svg(&map, &traj, &params))
            .with_context(|| format!("cannot write {}", svg.display()))?;
    }
    println!("{kind} cost {:.6} ({} stops)", plan.cost, plan.stops.len());
    if !plan.is_valid() {
        anyhow::bail!(PlanError::Internal("trajectory failed its audit".into()));
    }
    Ok(())
}

fn lower_bound(args: &LowerBoundArgs) -> Result<()> {
    let (base, plan) = solve(&args.query, PlanKind::LowerBound, 1.0, args.nl)?;
    write_json(&args.query.out, &PlanJson::new(&plan, base.params()))?;
    println!("lower bound {:.6} ({} stops)", plan.cost, plan.stops.len());
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    if let Some(n) = args.scenarios {
        config.scenarios_per_map = n;
    }
    let report = run_benchmark_with(&config, |row| {
        if row.status != "ok" {
            eprintln!(
                "{} scenario {} at {}: {}",
                row.map, row.scenario, row.discretization, row.status
            );
        }
    })?;
    report.save_csv(&args.out)?;
    if let Some(svg) = &args.svg {
        std::fs::write(svg, box_plot_svg(&report)).with_context(|| format!("cannot write {}", svg.display()))?;
    }
    println!("discretization  rows  failures  mean_gap%  median_gap%  mean_savings%");
    for s in report.summary() {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"));
        println!(
            "{:>14}  {:>4}  {:>8}  {:>9}  {:>11}  {:>13}",
            s.discretization,
            s.rows,
            s.failures,
            fmt(s.gap.map(|g| g.mean)),
            fmt(s.gap.map(|g| g.median)),
            fmt(s.savings.map(|g| g.mean))
        );
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<PlanError>() {
            return match e {
                PlanError::NoFeasiblePlan(_) => EXIT_NO_PLAN,
                e if e.is_invalid_input() => EXIT_INVALID,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<HarnessError>() {
            return match e {
                HarnessError::Plan(PlanError::NoFeasiblePlan(_)) => EXIT_NO_PLAN,
                HarnessError::Placement(_) | HarnessError::InvariantViolation(_) => 1,
                HarnessError::Plan(e) if !e.is_invalid_input() => 1,
                _ => EXIT_INVALID,
            };
        }
        if cause.is::<GraphError>() || cause.is::<GeometryError>() || cause.is::<EnergyError>() {
            return EXIT_INVALID;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::GenMap(a) => gen_map(a),
        Command::BuildGraph(a) => build_graph(a),
        Command::Plan(a) => plan(a, PlanKind::UpperBound),
        Command::LowerBound(a) => lower_bound(a),
        Command::Baseline(a) => plan(a, PlanKind::Baseline),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
