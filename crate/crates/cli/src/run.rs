//! The `check`, `simulate` and `verify` commands.

use std::path::{Path, PathBuf};

use pii_order_core::characteristics::decompose;
use pii_order_core::convex::{build_addon, build_addon_unchecked, ConvexSampler};
use pii_order_core::cut::{build_plan, CutSampler};
use pii_order_core::direct::DirectSimulator;
use pii_order_core::ito::ItoSampler;
use pii_order_core::order::{
    check_convex_majorization, check_cut, check_pst, kernel_order_defn_check, time_grid,
};
use pii_order_core::paths::PathPair;
use pii_order_core::rng::derive_seed;
use pii_order_core::verify::{
    interpolation_check, mc_order_test, mc_order_test_independent, small_time_rate, Design, InterpolationCheck,
    McOrderReport, SmallTimeReport, Z_THRESHOLD,
};
use pii_order_core::{
    CoupledPathSet, Grid, OrderKind, OrderReport, PairSampler, TestFunctionFamily, TruncationLadder, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Method};
use crate::output::{write_file, write_jumps, write_json, write_paired, write_paths, Header};

pub const EXIT_SATISFIED: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_UNCHECKED: i32 = 3;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_RUNTIME: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] pii_order_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core(_) => EXIT_RUNTIME,
            RunError::Io(_) => EXIT_IO,
        }
    }
}

/// Command-line options shared by all commands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub force: bool,
    pub timestamp: bool,
}

impl RunOptions {
    fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Satisfied => EXIT_SATISFIED,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

// ---------------------------------------------------------------------------
// check

#[derive(Debug, Clone, Serialize)]
pub struct Attempt {
    pub method: Method,
    pub report: OrderReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub order: OrderKind,
    pub requested: Method,
    pub verdict: Verdict,
    /// The first method whose conditions hold.
    pub method_used: Option<Method>,
    pub attempts: Vec<Attempt>,
}

pub fn check_grid(cfg: &ExperimentConfig) -> Result<Grid, RunError> {
    Ok(Grid::for_pair(
        &cfg.process_x,
        &cfg.process_y,
        cfg.horizon,
        cfg.grid_size,
        cfg.check.x_points,
        cfg.check.floor,
    )?)
}

fn ladder(cfg: &ExperimentConfig) -> Result<Option<TruncationLadder>, RunError> {
    match cfg.epsilon_jump {
        Some(e) if cfg.infinite_activity() => Ok(Some(TruncationLadder::geometric(e.max(1.0), 2.0, e)?)),
        _ => Ok(None),
    }
}

fn check_convex(cfg: &ExperimentConfig, grid: &Grid) -> Result<OrderReport, RunError> {
    let (x, y) = (&cfg.process_x, &cfg.process_y);
    if x.fixed_jumps != y.fixed_jumps {
        return Ok(OrderReport::inconclusive(
            "convex-majorization",
            "the convex coupling needs identical fixed-time jumps",
        ));
    }
    let (xq, _) = decompose(x)?;
    let (yq, _) = decompose(y)?;
    let mut r = check_convex_majorization(&xq, &yq, grid);
    if cfg.order == OrderKind::Cx && r.verdict == Verdict::Satisfied && r.equality != Some(true) {
        r.verdict = Verdict::Violated;
        r.reason = Some("the means differ, so the cx order fails".into());
    }
    Ok(r)
}

fn run_method(cfg: &ExperimentConfig, method: Method, grid: &Grid) -> Result<OrderReport, RunError> {
    let (x, y) = (&cfg.process_x, &cfg.process_y);
    Ok(match method {
        Method::Tails => check_pst(x, y, grid, ladder(cfg)?.as_ref()),
        Method::Cut => match cfg.cut {
            Some(c) => check_cut(x, y, c, grid),
            None => OrderReport::inconclusive("cut", "no cut point configured"),
        },
        Method::Convex => check_convex(cfg, grid)?,
        Method::KernelOrder => {
            let family = TestFunctionFamily::generate(
                cfg.family_class(),
                cfg.seed,
                cfg.verify.family.scale,
                cfg.verify.family.smoothing,
            )?;
            let (xa, ya) = pii_order_core::characteristics::align_pair(x, y);
            kernel_order_defn_check(&xa.kernel, &ya.kernel, &xa.time_measure, &family, &grid.times)?
        }
        Method::Auto => unreachable!("auto is expanded by the caller"),
    })
}

/// Methods tried by `auto`, from the strongest conclusion to the weakest.
fn auto_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    let mut v = Vec::new();
    if cfg.order != OrderKind::Cx {
        v.push(Method::Tails);
        if cfg.cut.is_some() {
            v.push(Method::Cut);
        }
    }
    if matches!(cfg.order, OrderKind::Icx | OrderKind::Cx) {
        v.push(Method::Convex);
    }
    v
}

/// Runs the requested checker. Under `auto` the first satisfied method wins;
/// otherwise any violation makes the verdict `violated`.
pub fn check(cfg: &ExperimentConfig) -> Result<CheckOutcome, RunError> {
    let grid = check_grid(cfg)?;
    let methods = match cfg.method {
        Method::Auto => auto_methods(cfg),
        m => vec![m],
    };
    let mut attempts = Vec::new();
    let mut verdict = Verdict::Satisfied;
    let mut method_used = None;
    for m in methods {
        let report = run_method(cfg, m, &grid)?;
        let v = report.verdict;
        attempts.push(Attempt { method: m, report });
        if v == Verdict::Satisfied {
            method_used = Some(m);
            break;
        }
        verdict = if verdict == Verdict::Satisfied { v } else { verdict.and(v) };
    }
    if method_used.is_some() {
        verdict = Verdict::Satisfied;
    }
    Ok(CheckOutcome {
        order: cfg.order,
        requested: cfg.method,
        verdict,
        method_used,
        attempts,
    })
}

pub fn cmd_check(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<i32, RunError> {
    let outcome = check(cfg)?;
    write_json(&opts.path(&cfg.outputs.report), &outcome)?;
    println!("verdict: {}", verdict_name(outcome.verdict));
    if let Some(m) = outcome.method_used {
        println!("method: {}", method_name(m));
    }
    for a in &outcome.attempts {
        if let Some(w) = a.report.witnesses.first() {
            println!(
                "{}: {} at t = {}{}: {} > {}",
                method_name(a.method),
                w.what,
                w.t,
                w.x.map_or(String::new(), |x| format!(", x = {x}")),
                w.lhs,
                w.rhs
            );
        } else if let Some(r) = &a.report.reason {
            println!("{}: {}", method_name(a.method), r);
        }
    }
    Ok(exit_code(outcome.verdict))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfied => "satisfied",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Auto => "auto",
        Method::Tails => "tails",
        Method::Cut => "cut",
        Method::Convex => "convex",
        Method::KernelOrder => "kernel-order",
    }
}

// ---------------------------------------------------------------------------
// simulate

/// Simulation grid: `grid_size` equal steps plus any extra times.
pub fn path_grid(cfg: &ExperimentConfig, extra: &[f64]) -> Vec<f64> {
    let mut g = time_grid(cfg.horizon, cfg.grid_size);
    g.extend_from_slice(extra);
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    g
}

/// Picks the coupling for a checked (or forced) configuration.
pub fn sampler(
    cfg: &ExperimentConfig,
    method_used: Option<Method>,
    grid: &[f64],
    seed: u64,
) -> Result<Box<dyn PairSampler>, RunError> {
    let (x, y) = (&cfg.process_x, &cfg.process_y);
    let eps = cfg.epsilon_jump;
    let monotone = matches!(cfg.order, OrderKind::St | OrderKind::Pst);
    let method = match method_used.or(match cfg.method {
        Method::Auto | Method::KernelOrder => None,
        m => Some(m),
    }) {
        Some(Method::Cut) => Method::Cut,
        Some(Method::Convex) => Method::Convex,
        Some(Method::Tails) => Method::Tails,
        _ if monotone => Method::Tails,
        _ => Method::Convex,
    };
    Ok(match method {
        Method::Cut => {
            let cut = cfg.cut.ok_or_else(|| ConfigError::new("cut", "required for the cut coupling"))?;
            let plan = build_plan(x, y, cut)?;
            Box::new(CutSampler::new(&plan, cfg.horizon, grid, eps, seed)?)
        }
        Method::Convex => {
            let addon = if method_used == Some(Method::Convex) {
                build_addon(x, y, &check_grid(cfg)?)?
            } else {
                build_addon_unchecked(x, y)?
            };
            Box::new(ConvexSampler::new(x, &addon, cfg.horizon, grid, eps, seed)?)
        }
        _ => Box::new(ItoSampler::new(x, y, cfg.horizon, grid, eps, seed)?),
    })
}

/// Draws paths `0..n` in parallel; the result does not depend on the thread count.
pub fn collect_parallel(s: &dyn PairSampler, n: usize) -> Result<CoupledPathSet, RunError> {
    let paths: Vec<PathPair> = (0..n as u64)
        .into_par_iter()
        .map(|i| s.sample_path(i))
        .collect::<Result<_, _>>()?;
    Ok(CoupledPathSet::assemble(s.info(), s.time_grid().to_vec(), paths))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub method: String,
    pub n_paths: usize,
    pub seed: u64,
    pub check_verdict: Verdict,
    pub forced: bool,
    /// Grid points with `X > Y + 1e-9`, for the monotone couplings.
    pub violations: Option<usize>,
    pub bias_bound: f64,
}

pub const VIOLATION_TOL: f64 = 1e-9;

pub fn cmd_simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<i32, RunError> {
    let outcome = check(cfg)?;
    if outcome.verdict != Verdict::Satisfied && !opts.force {
        eprintln!(
            "check {}: refusing to simulate without --force",
            verdict_name(outcome.verdict)
        );
        return Ok(EXIT_UNCHECKED);
    }
    let seed = opts.seed(cfg);
    let grid = path_grid(cfg, &[]);
    let s = sampler(cfg, outcome.method_used, &grid, seed)?;
    let paths = collect_parallel(s.as_ref(), cfg.n_paths)?;
    let header = Header::for_paths(&paths, opts.timestamp);
    write_file(&opts.path(&cfg.outputs.paths), |w| write_paths(w, &paths, &header))?;
    if let Some(name) = &cfg.outputs.jumps {
        write_file(&opts.path(name), |w| write_jumps(w, &paths, &header))?;
    }
    if let Some(name) = &cfg.outputs.paired {
        if paths.method == "cut" {
            write_file(&opts.path(name), |w| write_paired(w, &paths, &header))?;
        }
    }
    let violations = (paths.method != "convex").then(|| paths.violations(VIOLATION_TOL));
    let summary = SimulateSummary {
        method: paths.method.clone(),
        n_paths: paths.n_paths,
        seed,
        check_verdict: outcome.verdict,
        forced: outcome.verdict != Verdict::Satisfied,
        violations,
        bias_bound: paths.bias_bound,
    };
    write_json(&opts.path(&cfg.outputs.summary), &summary)?;
    match violations {
        Some(n) => println!("order violations: {n}"),
        None => println!("order violations: not applicable (convex coupling)"),
    }
    println!("bias bound: {}", paths.bias_bound);
    Ok(EXIT_SATISFIED)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationOutcome {
    #[serde(flatten)]
    pub check: InterpolationCheck,
    pub z: f64,
    /// `|z| <= 3`.
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallTimeOutcome {
    pub x: SmallTimeReport,
    pub y: SmallTimeReport,
    /// Extrapolated rate of Y minus that of X.
    pub difference: f64,
    pub standard_error: f64,
    pub z: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub design: Design,
    pub check_verdict: Verdict,
    pub mc: McOrderReport,
    /// Members with `z < -3`, as `name@t`.
    pub failing: Vec<String>,
    pub interpolation: Option<InterpolationOutcome>,
    pub small_time: Option<SmallTimeOutcome>,
    pub violation: bool,
}

fn z_of(d: f64, se: f64) -> f64 {
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

fn independent_terminals(
    c: &pii_order_core::PiiCharacteristics,
    t: f64,
    n: usize,
    eps: Option<f64>,
    seed: u64,
) -> Result<Vec<f64>, RunError> {
    let sim = DirectSimulator::new(c, t, &[0.0, t], eps, seed)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| sim.sample_path(i).map(|p| p.values[1]))
        .collect::<Result<_, _>>()?)
}

pub fn verify(cfg: &ExperimentConfig, seed: u64) -> Result<VerifyReport, RunError> {
    let family = TestFunctionFamily::generate(
        cfg.family_class(),
        seed,
        cfg.verify.family.scale,
        cfg.verify.family.smoothing,
    )?;
    let times = if cfg.verify.times.is_empty() {
        vec![cfg.horizon]
    } else {
        cfg.verify.times.clone()
    };
    let outcome = check(cfg)?;
    let coupled = if outcome.verdict == Verdict::Satisfied {
        let grid = path_grid(cfg, &times);
        let s = sampler(cfg, outcome.method_used, &grid, seed)?;
        Some(collect_parallel(s.as_ref(), cfg.n_paths)?)
    } else {
        None
    };
    let mc = match &coupled {
        Some(paths) => mc_order_test(paths, &family, &times)?,
        None => {
            let mut merged: Option<McOrderReport> = None;
            for (k, &t) in times.iter().enumerate() {
                let k = k as u64;
                let xs = independent_terminals(&cfg.process_x, t, cfg.n_paths, cfg.epsilon_jump, derive_seed(seed, 2 * k))?;
                let ys =
                    independent_terminals(&cfg.process_y, t, cfg.n_paths, cfg.epsilon_jump, derive_seed(seed, 2 * k + 1))?;
                let r = mc_order_test_independent(&xs, &ys, t, &family, seed)?;
                merged = Some(match merged {
                    None => r,
                    Some(mut m) => {
                        m.rows.extend(r.rows);
                        m.min_z = m.min_z.min(r.min_z);
                        m.violation |= r.violation;
                        if m.violation {
                            m.summary = r.summary.clone();
                        }
                        m
                    }
                });
            }
            merged.expect("at least one time")
        }
    };
    let failing = mc
        .rows
        .iter()
        .filter(|r| r.z < Z_THRESHOLD)
        .map(|r| format!("{}@{}", r.name, r.t))
        .collect();

    let (xa, ya) = pii_order_core::characteristics::align_pair(&cfg.process_x, &cfg.process_y);
    let interpolation = match &cfg.verify.interpolation {
        Some(i) => {
            let f = i.f.build("verify.interpolation.f")?;
            let c = interpolation_check(&xa.kernel, &ya.kernel, &xa.time_measure, &f, i.s, i.t, i.n, seed)?;
            let z = c.z();
            Some(InterpolationOutcome {
                check: c,
                z,
                consistent: z.abs() <= 3.0,
            })
        }
        None => None,
    };
    let small_time = match &cfg.verify.small_time {
        Some(s) => {
            let f = s.f.build("verify.small_time.f")?;
            let rx = small_time_rate(&cfg.process_x.kernel, &f, s.t0, s.n, derive_seed(seed, 0x5a))?;
            let ry = small_time_rate(&cfg.process_y.kernel, &f, s.t0, s.n, derive_seed(seed, 0x5b))?;
            let difference = ry.extrapolated - rx.extrapolated;
            let standard_error = rx.standard_error.hypot(ry.standard_error);
            let z = z_of(difference, standard_error);
            Some(SmallTimeOutcome {
                x: rx,
                y: ry,
                difference,
                standard_error,
                z,
                violation: z < Z_THRESHOLD,
            })
        }
        None => None,
    };
    let violation = mc.violation || small_time.as_ref().is_some_and(|s| s.violation);
    Ok(VerifyReport {
        design: if coupled.is_some() { Design::PairedCoupled } else { Design::Independent },
        check_verdict: outcome.verdict,
        mc,
        failing,
        interpolation,
        small_time,
        violation,
    })
}

pub fn cmd_verify(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<i32, RunError> {
    let report = verify(cfg, opts.seed(cfg))?;
    write_json(&opts.path(&cfg.outputs.report), &report)?;
    let design = match report.design {
        Design::PairedCoupled => "paired-coupled",
        Design::Independent => "independent",
    };
    println!("design: {design}");
    println!("{} (min z = {})", report.mc.summary, report.mc.min_z);
    for f in &report.failing {
        println!("failing: {f}");
    }
    if let Some(i) = &report.interpolation {
        println!("interpolation: lhs = {}, rhs = {}, z = {}", i.check.lhs, i.check.rhs, i.z);
    }
    if let Some(s) = &report.small_time {
        println!("small-time rate difference: {} (z = {})", s.difference, s.z);
    }
    Ok(if report.violation { EXIT_VIOLATED } else { EXIT_SATISFIED })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, RunError> {
    Ok(ExperimentConfig::load(path)?)
}
