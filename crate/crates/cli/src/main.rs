mod config;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use planar_dwell::cases_nondefective::{rr_schur_k, RRParams};
use planar_dwell::comparison::{compare_pair, BasisPolicy, TAU_GC_NOTE};
use planar_dwell::simulator::{verify_dwell, VerifyOptions};
use planar_dwell::{analyze_pair, AnalysisOptions, CaseId, Direction, DwellError, DwellReport};
use serde::Serialize;

use config::{ConfigError, JobConfig, Pair};

const EXIT_CONFIG: u8 = 1;
const EXIT_ITEM: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "planar-dwell", version, about = "Dwell-time bounds for bimodal planar switched linear systems")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Root-finder argument tolerance
    #[arg(long, global = true)]
    tol_arg: Option<f64>,
    /// Root-finder residual tolerance
    #[arg(long, global = true)]
    tol_res: Option<f64>,
    /// Basis normalization for the comparison bounds
    #[arg(long, global = true, value_parser = ["det1", "unitcols"])]
    basis_policy: Option<String>,
    /// Keep the canonical defective Jordan bases
    #[arg(long, global = true)]
    no_optimal_basis: bool,
    /// Worker threads over the pair list
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the CSV here instead of stdout (overrides [outputs])
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-pair wall time on stderr
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Case, thresholds, scalings and diagnostics per pair
    Analyze { config: PathBuf },
    /// Table of the comparison bounds next to the thresholds
    Compare { config: PathBuf },
    /// A function sampled on a (t, s) grid
    Contour {
        config: PathBuf,
        #[arg(long)]
        pair: String,
        /// rr_schur_k, cycle_norm_12, cycle_norm_21, log_cycle_norm_12, log_cycle_norm_21
        #[arg(long = "fn")]
        selector: String,
        /// t0,t1,nt,s0,s1,ns
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
    },
    /// Grid check and seeded trajectories per pair
    Simulate {
        config: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        margin: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    t0: f64,
    t1: f64,
    nt: usize,
    s0: f64,
    s1: f64,
    ns: usize,
}

impl Grid {
    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err("expected t0,t1,nt,s0,s1,ns".into());
    }
    let f = |i: usize| parts[i].parse::<f64>().map_err(|e| format!("`{}`: {e}", parts[i]));
    let n = |i: usize| parts[i].parse::<usize>().map_err(|e| format!("`{}`: {e}", parts[i]));
    let g = Grid {
        t0: f(0)?,
        t1: f(1)?,
        nt: n(2)?,
        s0: f(3)?,
        s1: f(4)?,
        ns: n(5)?,
    };
    if g.nt == 0 || g.ns == 0 || ![g.t0, g.t1, g.s0, g.s1].iter().all(|x| x.is_finite()) {
        return Err("grid needs finite bounds and at least one point per axis".into());
    }
    Ok(g)
}

/// Run `f` over the pairs on `jobs` threads; results keep the input order.
fn map_pairs<T, F>(pairs: &[Pair], jobs: usize, timings: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Pair) -> T + Sync,
{
    let timed = |p: &Pair| {
        let start = Instant::now();
        let out = f(p);
        if timings {
            eprintln!("{}: {:.3?}", p.name, start.elapsed());
        }
        out
    };
    let jobs = jobs.clamp(1, pairs.len().max(1));
    if jobs == 1 {
        return pairs.iter().map(timed).collect();
    }
    let chunk = pairs.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(chunk)
            .map(|c| scope.spawn(|| c.iter().map(&timed).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn case_name(r: &DwellReport) -> String {
    r.case_id.map(|c| c.to_string()).unwrap_or_else(|| "scalar".into())
}

#[derive(Debug, Serialize)]
struct AnalyzeRecord {
    pair: String,
    case: Option<String>,
    tau_12: Option<f64>,
    tau_21: Option<f64>,
    tau: Option<f64>,
    verdict: Option<String>,
    lambda1_12: Option<f64>,
    lambda2_12: Option<f64>,
    lambda1_21: Option<f64>,
    lambda2_21: Option<f64>,
    epsilon1: Option<f64>,
    epsilon2: Option<f64>,
    relabeled: Option<bool>,
    sub_case_12: Option<String>,
    sub_case_21: Option<String>,
    shortcut: Option<String>,
    near_boundary: Option<bool>,
    error: Option<String>,
}

impl AnalyzeRecord {
    fn new(name: &str, r: Result<DwellReport, DwellError>) -> AnalyzeRecord {
        match r {
            Ok(r) => AnalyzeRecord {
                pair: name.into(),
                case: Some(case_name(&r)),
                tau_12: Some(r.tau_12),
                tau_21: Some(r.tau_21),
                tau: Some(r.tau),
                verdict: Some(format!("{:?}", r.verdict)),
                lambda1_12: Some(r.scaling_12.0.lambda),
                lambda2_12: Some(r.scaling_12.1.lambda),
                lambda1_21: Some(r.scaling_21.0.lambda),
                lambda2_21: Some(r.scaling_21.1.lambda),
                epsilon1: r.basis_epsilons.map(|e| e.0),
                epsilon2: r.basis_epsilons.map(|e| e.1),
                relabeled: Some(r.relabeled),
                sub_case_12: Some(r.diagnostics.sub_case_12),
                sub_case_21: Some(r.diagnostics.sub_case_21),
                shortcut: r.diagnostics.shortcut,
                near_boundary: Some(r.diagnostics.near_boundary),
                error: None,
            },
            Err(e) => AnalyzeRecord {
                pair: name.into(),
                case: None,
                tau_12: None,
                tau_21: None,
                tau: None,
                verdict: None,
                lambda1_12: None,
                lambda2_12: None,
                lambda1_21: None,
                lambda2_21: None,
                epsilon1: None,
                epsilon2: None,
                relabeled: None,
                sub_case_12: None,
                sub_case_21: None,
                shortcut: None,
                near_boundary: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Serialize)]
struct CompareRecord {
    pair: String,
    case: Option<String>,
    tau_m: Option<f64>,
    tau_kar: Option<f64>,
    theta_star: Option<String>,
    tau_12: Option<f64>,
    tau_21: Option<f64>,
    tau: Option<f64>,
    tau_loop: Option<f64>,
    tau_0: Option<f64>,
    tau_gc: &'static str,
    policy: String,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct ContourRecord {
    t: f64,
    s: f64,
    value: f64,
}

#[derive(Debug, Serialize)]
struct SimulateRecord {
    pair: String,
    tau: Option<f64>,
    direction: Option<String>,
    margin: f64,
    trials: usize,
    seed: u64,
    grid_worst: Option<f64>,
    grid_pass: Option<bool>,
    max_cycle_factor: Option<f64>,
    cycle_pass: Option<bool>,
    max_growth: Option<f64>,
    eta_xi_bound: Option<f64>,
    trajectory_pass: Option<bool>,
    error: Option<String>,
}

enum Failure {
    Config(String),
    Item,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn csv_bytes<T: Serialize>(records: &[T], header: &[&str]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(true)
        .from_writer(vec![]);
    if records.is_empty() {
        w.write_record(header).expect("in-memory write");
    }
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, bytes).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Config(format!("stdout: {e}"))),
    }
}

struct Ctx {
    cfg: JobConfig,
    opts: AnalysisOptions,
    policy: BasisPolicy,
    jobs: usize,
    out: Option<PathBuf>,
    timings: bool,
}

impl Ctx {
    fn new(path: &Path, g: &GlobalArgs) -> Result<Ctx, Failure> {
        let cfg = JobConfig::load(path)?;
        let mut opts = cfg.analysis_options();
        if let Some(x) = g.tol_arg {
            opts.tol.arg_tol = x;
        }
        if let Some(x) = g.tol_res {
            opts.tol.res_tol = x;
        }
        if g.no_optimal_basis {
            opts.optimal_basis = false;
        }
        if !(opts.tol.arg_tol > 0.0 && opts.tol.res_tol > 0.0) {
            return Err(Failure::Config("tolerances must be positive".into()));
        }
        let policy = match &g.basis_policy {
            Some(p) => p.parse().map_err(|e: DwellError| Failure::Config(e.to_string()))?,
            None => cfg.basis_policy()?,
        };
        let jobs = g.jobs.or(cfg.options.jobs).unwrap_or(1);
        Ok(Ctx {
            opts,
            policy,
            jobs,
            out: g.out.clone(),
            timings: g.timings,
            cfg,
        })
    }

    fn out_path(&self, configured: &Option<PathBuf>) -> Option<PathBuf> {
        self.out.clone().or_else(|| configured.clone())
    }
}

fn run_analyze(ctx: &Ctx) -> Result<(), Failure> {
    let records = map_pairs(&ctx.cfg.pairs, ctx.jobs, ctx.timings, |p| {
        AnalyzeRecord::new(&p.name, analyze_pair(&p.a1, &p.a2, &ctx.opts))
    });
    let bytes = csv_bytes(&records, ANALYZE_HEADER);
    emit(&bytes, ctx.out_path(&ctx.cfg.outputs.analyze).as_deref())?;
    item_status(records.iter().any(|r| r.error.is_some()))
}

const ANALYZE_HEADER: &[&str] = &[
    "pair", "case", "tau_12", "tau_21", "tau", "verdict", "lambda1_12", "lambda2_12", "lambda1_21",
    "lambda2_21", "epsilon1", "epsilon2", "relabeled", "sub_case_12", "sub_case_21", "shortcut",
    "near_boundary", "error",
];

const COMPARE_HEADER: &[&str] = &[
    "pair", "case", "tau_m", "tau_kar", "theta_star", "tau_12", "tau_21", "tau", "tau_loop", "tau_0",
    "tau_gc", "policy", "error",
];

const SIMULATE_HEADER: &[&str] = &[
    "pair", "tau", "direction", "margin", "trials", "seed", "grid_worst", "grid_pass",
    "max_cycle_factor", "cycle_pass", "max_growth", "eta_xi_bound", "trajectory_pass", "error",
];

fn item_status(failed: bool) -> Result<(), Failure> {
    if failed {
        Err(Failure::Item)
    } else {
        Ok(())
    }
}

fn compare_one(p: &Pair, ctx: &Ctx) -> CompareRecord {
    let policy = ctx.policy.to_string();
    let result = analyze_pair(&p.a1, &p.a2, &ctx.opts).and_then(|r| {
        let c = compare_pair(&p.a1, &p.a2, &r, ctx.policy, ctx.opts.disc_tol, &ctx.opts.tol)?;
        Ok((r, c))
    });
    match result {
        Ok((r, c)) => CompareRecord {
            pair: p.name.clone(),
            case: Some(case_name(&r)),
            tau_m: Some(c.tau_m),
            tau_kar: Some(c.tau_kar),
            theta_star: c
                .theta_star
                .map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")),
            tau_12: Some(r.tau_12),
            tau_21: Some(r.tau_21),
            tau: Some(r.tau),
            tau_loop: c.tau_loop,
            tau_0: c.tau_0,
            tau_gc: "not computed",
            policy,
            error: None,
        },
        Err(e) => CompareRecord {
            pair: p.name.clone(),
            case: None,
            tau_m: None,
            tau_kar: None,
            theta_star: None,
            tau_12: None,
            tau_21: None,
            tau: None,
            tau_loop: None,
            tau_0: None,
            tau_gc: "not computed",
            policy,
            error: Some(e.to_string()),
        },
    }
}

fn compare_table(records: &[CompareRecord]) -> String {
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    let mut rows = vec![[
        "pair", "case", "τ_M", "τ_Kar", "θ*", "τ₁,₂", "τ₂,₁", "τ", "τ_loop", "τ₀",
    ]
    .map(String::from)];
    for r in records {
        if let Some(e) = &r.error {
            rows.push([
                r.pair.clone(),
                format!("error: {e}"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            continue;
        }
        let theta = r
            .theta_star
            .as_deref()
            .map(|s| {
                s.split(';')
                    .map(|x| x.parse::<f64>().map(|v| format!("{v:.4}")).unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .unwrap_or_else(|| "-".into());
        rows.push([
            r.pair.clone(),
            r.case.clone().unwrap_or_default(),
            cell(r.tau_m),
            cell(r.tau_kar),
            theta,
            cell(r.tau_12),
            cell(r.tau_21),
            cell(r.tau),
            cell(r.tau_loop),
            cell(r.tau_0),
        ]);
    }
    let widths: Vec<usize> = (0..10)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out.push_str(&format!("τ_GC: {TAU_GC_NOTE}\n"));
    out.push_str("homogeneous-polynomial Lyapunov bound (0.6073): absent\n");
    out
}

fn run_compare(ctx: &Ctx) -> Result<(), Failure> {
    let records = map_pairs(&ctx.cfg.pairs, ctx.jobs, ctx.timings, |p| compare_one(p, ctx));
    print!("{}", compare_table(&records));
    if let Some(path) = ctx.out_path(&ctx.cfg.outputs.compare) {
        emit(&csv_bytes(&records, COMPARE_HEADER), Some(&path))?;
    }
    item_status(records.iter().any(|r| r.error.is_some()))
}

type GridFn = Box<dyn Fn(f64, f64) -> Result<f64, DwellError>>;

fn contour_value(r: &DwellReport, selector: &str) -> Result<GridFn, DwellError> {
    let wrong = || DwellError::WrongCase {
        selector: selector.to_string(),
        case: case_name(r),
    };
    let cycle = |dir: Direction, log: bool| -> GridFn {
        let r = r.clone();
        Box::new(move |t, s| {
            let n = r.cycle_norm(dir, t, s)?;
            Ok(if log { n.ln() } else { n })
        })
    };
    match selector {
        "rr_schur_k" => {
            if r.case_id != Some(CaseId::RR) {
                return Err(wrong());
            }
            let f = &r.frame;
            let p = RRParams::new(&f.j1, &f.j2, &f.transition()?.m)?;
            Ok(Box::new(move |t, s| rr_schur_k(&p, t, s)))
        }
        "cycle_norm_12" => Ok(cycle(Direction::OneTwo, false)),
        "cycle_norm_21" => Ok(cycle(Direction::TwoOne, false)),
        "log_cycle_norm_12" => Ok(cycle(Direction::OneTwo, true)),
        "log_cycle_norm_21" => Ok(cycle(Direction::TwoOne, true)),
        _ => Err(DwellError::InvalidInput(format!("unknown selector `{selector}`"))),
    }
}

fn run_contour(ctx: &Ctx, pair: &str, selector: &str, grid: &Grid) -> Result<(), Failure> {
    let p = ctx.cfg.pair(pair)?;
    let computed = analyze_pair(&p.a1, &p.a2, &ctx.opts).and_then(|r| {
        let f = contour_value(&r, selector)?;
        let ts = Grid::axis(grid.t0, grid.t1, grid.nt);
        let mut records = Vec::with_capacity(grid.nt * grid.ns);
        for s in Grid::axis(grid.s0, grid.s1, grid.ns) {
            for &t in &ts {
                records.push(ContourRecord { t, s, value: f(t, s)? });
            }
        }
        Ok(records)
    });
    match computed {
        Ok(records) => emit(
            &csv_bytes(&records, &["t", "s", "value"]),
            ctx.out_path(&ctx.cfg.outputs.contour).as_deref(),
        ),
        Err(DwellError::InvalidInput(msg)) => Err(Failure::Config(msg)),
        Err(e) => {
            eprintln!("{pair}: {e}");
            Err(Failure::Item)
        }
    }
}

fn run_simulate(ctx: &Ctx, trials: Option<usize>, seed: Option<u64>, margin: Option<f64>) -> Result<(), Failure> {
    let o = &ctx.cfg.options;
    let vopts = VerifyOptions {
        trials: trials.or(o.trials).unwrap_or(20),
        seed: seed.or(o.seed).unwrap_or(0),
        margin: margin.or(o.margin).unwrap_or(1.05),
        ..VerifyOptions::default()
    };
    if !(vopts.margin >= 1.0 && vopts.margin.is_finite()) {
        return Err(Failure::Config("margin must be at least 1".into()));
    }
    let records = map_pairs(&ctx.cfg.pairs, ctx.jobs, ctx.timings, |p| {
        let base = SimulateRecord {
            pair: p.name.clone(),
            tau: None,
            direction: None,
            margin: vopts.margin,
            trials: vopts.trials,
            seed: vopts.seed,
            grid_worst: None,
            grid_pass: None,
            max_cycle_factor: None,
            cycle_pass: None,
            max_growth: None,
            eta_xi_bound: None,
            trajectory_pass: None,
            error: None,
        };
        let run = analyze_pair(&p.a1, &p.a2, &ctx.opts)
            .and_then(|r| Ok((r.tau, verify_dwell(&p.a1, &p.a2, &r, &vopts)?)));
        match run {
            Ok((tau, v)) => SimulateRecord {
                tau: Some(tau),
                direction: Some(v.direction.to_string()),
                grid_worst: Some(v.grid_worst),
                grid_pass: Some(v.grid_pass),
                max_cycle_factor: Some(v.max_cycle_factor),
                cycle_pass: Some(v.cycle_pass),
                max_growth: Some(v.max_growth),
                eta_xi_bound: Some(v.eta_xi_bound),
                trajectory_pass: Some(v.trajectory_pass),
                ..base
            },
            Err(e) => SimulateRecord {
                error: Some(e.to_string()),
                ..base
            },
        }
    });
    emit(
        &csv_bytes(&records, SIMULATE_HEADER),
        ctx.out_path(&ctx.cfg.outputs.simulate).as_deref(),
    )?;
    let failed = records.iter().any(|r| {
        r.error.is_some() || !(r.grid_pass == Some(true) && r.cycle_pass == Some(true) && r.trajectory_pass == Some(true))
    });
    item_status(failed)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Analyze { config } => run_analyze(&Ctx::new(config, &cli.global)?),
        Command::Compare { config } => run_compare(&Ctx::new(config, &cli.global)?),
        Command::Contour {
            config,
            pair,
            selector,
            grid,
        } => run_contour(&Ctx::new(config, &cli.global)?, pair, selector, grid),
        Command::Simulate {
            config,
            trials,
            seed,
            margin,
        } => run_simulate(&Ctx::new(config, &cli.global)?, *trials, *seed, *margin),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Item) => ExitCode::from(EXIT_ITEM),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0,1,11,0,6,61").unwrap();
        assert_eq!((g.nt, g.ns), (11, 61));
        assert!(parse_grid("0,1,0,0,6,3").is_err());
        assert!(parse_grid("0,1,3").is_err());
        assert_eq!(Grid::axis(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn empty_csv_has_header() {
        let b = csv_bytes::<ContourRecord>(&[], &["t", "s", "value"]);
        assert_eq!(b, b"t,s,value\n");
    }
}
