//! Deterministic checkers for ordering conditions between two processes.
//!
//! Conditions that must hold "for all x" and "for almost every t" are
//! verified on finite grids. Kernels are piecewise constant in time, so each
//! distinct pair of kernel cells is evaluated once and the first grid time
//! that hits it is reported as the witness time. Tail comparisons are made at
//! every grid point, and additionally with open tails at atoms and kinks of
//! either kernel, which makes the checks exact for atomic kernels.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::characteristics::{
    align_pair, decompose, h_compensator, h_compensator_truncated, FixedJumpSchedule,
    PiiCharacteristics, TimeMeasure,
};
use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, LevyMeasure, Region, Side};
use crate::verify::TestFunctionFamily;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Violated dominates inconclusive, which dominates satisfied.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Satisfied,
        }
    }
}

/// The orders the checkers can decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OrderKind {
    St,
    Pst,
    Icx,
    Cx,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub t: f64,
    pub x: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSummary {
    pub n_times: usize,
    pub t_max: f64,
    pub n_x: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderReport {
    pub verdict: Verdict,
    pub theorem: String,
    pub witnesses: Vec<Witness>,
    pub violations: usize,
    pub grids_used: GridSummary,
    pub tolerance: f64,
    /// Smallest scaled margin `(rhs - lhs) / max(1, |lhs|, |rhs|)` seen.
    pub min_margin: f64,
    pub warnings: Vec<String>,
    pub reason: Option<String>,
    /// For the convex majorization check: the mean condition holds with
    /// equality, upgrading icx to cx.
    pub equality: Option<bool>,
    pub parts: Vec<OrderReport>,
}

impl OrderReport {
    pub fn inconclusive(theorem: &str, reason: impl Into<String>) -> Self {
        OrderReport {
            verdict: Verdict::Inconclusive,
            theorem: theorem.into(),
            witnesses: Vec::new(),
            violations: 0,
            grids_used: GridSummary::default(),
            tolerance: DEFAULT_TOLERANCE,
            min_margin: f64::INFINITY,
            warnings: Vec::new(),
            reason: Some(reason.into()),
            equality: None,
            parts: Vec::new(),
        }
    }

    /// Conjunction of several checks; witnesses are concatenated.
    pub fn all(theorem: &str, parts: Vec<OrderReport>) -> Self {
        let mut r = OrderReport {
            verdict: Verdict::Satisfied,
            theorem: theorem.into(),
            witnesses: Vec::new(),
            violations: 0,
            grids_used: GridSummary::default(),
            tolerance: DEFAULT_TOLERANCE,
            min_margin: f64::INFINITY,
            warnings: Vec::new(),
            reason: None,
            equality: None,
            parts: Vec::new(),
        };
        for p in &parts {
            r.verdict = r.verdict.and(p.verdict);
            r.witnesses.extend(p.witnesses.iter().cloned());
            r.violations += p.violations;
            r.min_margin = r.min_margin.min(p.min_margin);
            r.warnings.extend(p.warnings.iter().cloned());
            r.tolerance = r.tolerance.max(p.tolerance);
            if r.grids_used.n_times < p.grids_used.n_times || r.grids_used.n_x < p.grids_used.n_x {
                r.grids_used = p.grids_used.clone();
            }
            if p.reason.is_some() && r.reason.is_none() {
                r.reason = p.reason.clone();
            }
            if let Some(e) = p.equality {
                r.equality = Some(r.equality.unwrap_or(true) && e);
            }
        }
        r.witnesses.truncate(MAX_WITNESSES);
        r.parts = parts;
        r
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }
}

/// `epsilon_n` strictly decreasing to a positive floor; `G_n = {|x| > epsilon_n}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruncationLadder {
    epsilons: Vec<f64>,
}

impl TruncationLadder {
    pub fn new(epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::invalid("ladder", "need at least one level"));
        }
        if epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid("ladder", "levels must be positive"));
        }
        if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::invalid("ladder", "levels must be strictly decreasing"));
        }
        Ok(TruncationLadder { epsilons })
    }

    /// `start, start/ratio, ...` down to (at least) `floor`.
    pub fn geometric(start: f64, ratio: f64, floor: f64) -> Result<Self> {
        if !(ratio > 1.0) || !(floor > 0.0) || !(start >= floor) {
            return Err(Error::invalid("ladder", "need ratio > 1 and start >= floor > 0"));
        }
        let mut v = vec![start];
        while v[v.len() - 1] / ratio >= floor * (1.0 - 1e-12) {
            let e = v[v.len() - 1] / ratio;
            v.push(e);
        }
        Self::new(v)
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn floor(&self) -> f64 {
        self.epsilons[self.epsilons.len() - 1]
    }
}

/// Which side of the cut the point `k` itself belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CutSide {
    /// Upper region `[k, inf)`, lower region `(-inf, k)`.
    #[default]
    LeftClosed,
    /// Upper region `(k, inf)`, lower region `(-inf, k]`.
    RightClosed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutPoint {
    pub k: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub side: CutSide,
}

impl CutPoint {
    pub fn new(k: f64, side: CutSide) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::invalid("cut.k", "must be finite"));
        }
        Ok(CutPoint { k, side })
    }

    pub fn upper(&self) -> Region {
        Region::above(self.k, self.side == CutSide::LeftClosed)
    }

    pub fn lower(&self) -> Region {
        Region::below(self.k, self.side == CutSide::RightClosed)
    }

    /// The cut seen after `x -> -x`.
    pub fn reflected(&self) -> CutPoint {
        CutPoint {
            k: -self.k,
            side: match self.side {
                CutSide::LeftClosed => CutSide::RightClosed,
                CutSide::RightClosed => CutSide::LeftClosed,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Grids

/// Time and jump-size grids for a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub times: Vec<f64>,
    /// Signed, nonzero, sorted.
    pub xs: Vec<f64>,
    /// Signed atom and kink locations (a subset of `xs`); open tails are
    /// compared there too.
    pub marks: Vec<f64>,
    pub floor: f64,
}

impl Grid {
    pub fn new(mut times: Vec<f64>, mut xs: Vec<f64>, mut marks: Vec<f64>) -> Result<Self> {
        times.retain(|t| t.is_finite() && *t >= 0.0);
        xs.retain(|x| *x != 0.0 && x.is_finite());
        marks.retain(|x| *x != 0.0 && x.is_finite());
        xs.extend(marks.iter().copied());
        if times.is_empty() || xs.is_empty() {
            return Err(Error::DegenerateGrid);
        }
        sort_dedup(&mut times);
        sort_dedup(&mut xs);
        sort_dedup(&mut marks);
        let floor = xs.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        Ok(Grid {
            times,
            xs,
            marks,
            floor,
        })
    }

    /// Default grids for a pair: times on `[0, horizon]` refined to at
    /// least `n_times` points and containing every breakpoint; `per_sign`
    /// geometric x-points on `[floor, x_max]` where both tails drop below
    /// `1e-12`, plus all atoms and kinks.
    pub fn for_pair(
        x: &PiiCharacteristics,
        y: &PiiCharacteristics,
        horizon: f64,
        n_times: usize,
        per_sign: usize,
        floor: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0) || n_times < 1 || per_sign < 2 || !(floor > 0.0) {
            return Err(Error::DegenerateGrid);
        }
        let mut times = time_grid(horizon, n_times);
        times.extend(x.time_breakpoints(horizon));
        times.extend(y.time_breakpoints(horizon));
        let measures: Vec<&LevyMeasure> = x
            .kernel
            .cells()
            .iter()
            .chain(y.kernel.cells().iter())
            .map(|c| &c.measure)
            .collect();
        let (xs, marks) = x_grid(&measures, floor, per_sign)?;
        Grid::new(times, xs, marks)
    }

    pub fn for_kernels(
        kx: &JumpKernel,
        ky: &JumpKernel,
        a: &TimeMeasure,
        horizon: f64,
        n_times: usize,
        per_sign: usize,
        floor: f64,
    ) -> Result<Self> {
        let mut times = time_grid(horizon, n_times);
        times.extend(kx.breakpoints_before(horizon));
        times.extend(ky.breakpoints_before(horizon));
        times.extend(a.breakpoints().iter().copied().filter(|t| *t < horizon));
        let measures: Vec<&LevyMeasure> = kx
            .cells()
            .iter()
            .chain(ky.cells().iter())
            .map(|c| &c.measure)
            .collect();
        let (xs, marks) = x_grid(&measures, floor, per_sign)?;
        Grid::new(times, xs, marks)
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary {
            n_times: self.times.len(),
            t_max: self.times.last().copied().unwrap_or(0.0),
            n_x: self.xs.len(),
            x_min: self.xs.first().copied().unwrap_or(0.0),
            x_max: self.xs.last().copied().unwrap_or(0.0),
            floor: self.floor,
        }
    }

    fn is_mark(&self, x: f64) -> bool {
        self.marks.binary_search_by(|m| m.total_cmp(&x)).is_ok()
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup();
}

/// `n + 1` equally spaced points on `[0, horizon]`.
pub fn time_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| horizon * i as f64 / n as f64).collect()
}

fn x_grid(measures: &[&LevyMeasure], floor: f64, per_sign: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut marks = Vec::new();
    for m in measures {
        m.breakpoints(&mut marks);
    }
    for side in [Side::Pos, Side::Neg] {
        let mut hi = floor.max(1.0);
        'grow: for _ in 0..60 {
            let mut small = true;
            for m in measures {
                if m.tail(side, hi, true)? > 1e-12 {
                    small = false;
                    break;
                }
            }
            if small {
                break 'grow;
            }
            hi *= 2.0;
        }
        for v in marks.iter().filter(|v| Side::of(**v) == side) {
            hi = hi.max(v.abs());
        }
        let ratio = libm::pow(hi / floor, 1.0 / (per_sign - 1) as f64);
        for i in 0..per_sign {
            let r = floor * libm::pow(ratio, i as f64);
            xs.push(side.sign() * r.min(hi));
        }
    }
    Ok((xs, marks))
}

// ---------------------------------------------------------------------------
// Audit bookkeeping

struct Audit<'a> {
    theorem: &'a str,
    tol: f64,
    witnesses: Vec<Witness>,
    violations: usize,
    warnings: BTreeSet<String>,
    min_margin: f64,
    worst: Option<Witness>,
    failure: Option<String>,
}

impl<'a> Audit<'a> {
    fn new(theorem: &'a str) -> Self {
        Audit {
            theorem,
            tol: DEFAULT_TOLERANCE,
            witnesses: Vec::new(),
            violations: 0,
            warnings: BTreeSet::new(),
            min_margin: f64::INFINITY,
            worst: None,
            failure: None,
        }
    }

    /// Requires `lhs <= rhs` up to the scaled tolerance.
    fn le(&mut self, t: f64, x: Option<f64>, lhs: f64, rhs: f64, what: &str) {
        let scale = 1.0f64.max(lhs.abs()).max(rhs.abs());
        let margin = (rhs - lhs) / scale;
        if margin.is_nan() {
            self.fail(format!("non-finite comparison in {what} at t = {t}"));
            return;
        }
        let worst = margin < self.min_margin;
        self.min_margin = self.min_margin.min(margin);
        if margin < -self.tol {
            self.violations += 1;
            let w = Witness {
                t,
                x,
                lhs,
                rhs,
                what: what.to_string(),
            };
            if worst {
                self.worst = Some(w.clone());
            }
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        } else if margin < -1e-13 {
            self.warnings
                .insert(format!("{what}: violation {:.3e} below tolerance", -margin));
        }
    }

    fn fail(&mut self, reason: String) {
        if self.failure.is_none() {
            self.failure = Some(reason);
        }
    }

    fn finish(mut self, grid: GridSummary) -> OrderReport {
        if let Some(w) = self.worst.take() {
            if !self.witnesses.contains(&w) {
                self.witnesses.pop();
                self.witnesses.push(w);
            }
        }
        let verdict = if self.violations > 0 {
            Verdict::Violated
        } else if self.failure.is_some() {
            Verdict::Inconclusive
        } else {
            Verdict::Satisfied
        };
        OrderReport {
            verdict,
            theorem: self.theorem.into(),
            witnesses: self.witnesses,
            violations: self.violations,
            grids_used: grid,
            tolerance: self.tol,
            min_margin: self.min_margin,
            warnings: self.warnings.into_iter().collect(),
            reason: self.failure,
            equality: None,
            parts: Vec::new(),
        }
    }
}

/// Distinct pairs of kernel cells active on the time grid, with the first
/// time each one appears. Times where `A` is flat are skipped.
fn active_cell_pairs(kx: &JumpKernel, ky: &JumpKernel, a: &TimeMeasure, times: &[f64]) -> Vec<(f64, usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &t in times {
        if a.slope_at(t) == 0.0 {
            continue;
        }
        let key = (kx.cell_index(t), ky.cell_index(t));
        if seen.insert(key) {
            out.push((t, key.0, key.1));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Monotone order

fn tails_on(audit: &mut Audit, t: f64, mx: &LevyMeasure, my: &LevyMeasure, grid: &Grid, floor: f64) {
    for &x in &grid.xs {
        if x.abs() < floor {
            continue;
        }
        let side = Side::of(x);
        let opens: &[bool] = if grid.is_mark(x) { &[true, false] } else { &[true] };
        for &closed in opens {
            let tx = mx.tail(side, x.abs(), closed);
            let ty = my.tail(side, x.abs(), closed);
            match (tx, ty) {
                (Ok(tx), Ok(ty)) => match side {
                    Side::Pos => audit.le(t, Some(x), tx, ty, "upper tail"),
                    Side::Neg => audit.le(t, Some(x), ty, tx, "lower tail"),
                },
                (Err(e), _) | (_, Err(e)) => audit.fail(format!("tail at x = {x}: {e}")),
            }
        }
    }
}

/// `K^X(t,[x,inf)) <= K^Y(t,[x,inf))` for `x > 0` and
/// `K^Y(t,(-inf,x]) <= K^X(t,(-inf,x])` for `x < 0`.
pub fn check_st_tails(kx: &JumpKernel, ky: &JumpKernel, a: &TimeMeasure, grid: &Grid) -> OrderReport {
    let mut audit = Audit::new("st-tails");
    for (t, i, j) in active_cell_pairs(kx, ky, a, &grid.times) {
        tails_on(&mut audit, t, &kx.cells()[i].measure, &ky.cells()[j].measure, grid, 0.0);
    }
    audit.finish(grid.summary())
}

/// Tail order of the truncated kernels `1_{G_n} K` for every ladder level.
pub fn check_st_tails_ladder(
    kx: &JumpKernel,
    ky: &JumpKernel,
    a: &TimeMeasure,
    grid: &Grid,
    ladder: &TruncationLadder,
) -> OrderReport {
    let mut audit = Audit::new("st-tails-truncated");
    for (t, i, j) in active_cell_pairs(kx, ky, a, &grid.times) {
        let (mx, my) = (&kx.cells()[i].measure, &ky.cells()[j].measure);
        for &eps in ladder.epsilons() {
            tails_on(&mut audit, t, mx, my, grid, eps);
            // the truncated tails are flat on (0, eps]
            for side in [Side::Pos, Side::Neg] {
                match (mx.tail(side, eps, false), my.tail(side, eps, false)) {
                    (Ok(tx), Ok(ty)) => {
                        let x = Some(side.sign() * eps);
                        match side {
                            Side::Pos => audit.le(t, x, tx, ty, "upper tail at truncation level"),
                            Side::Neg => audit.le(t, x, ty, tx, "lower tail at truncation level"),
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
                }
            }
        }
    }
    audit.finish(grid.summary())
}

/// Both processes expressed against the same time measure and truncation.
pub(crate) fn common_basis(x: &PiiCharacteristics, y: &PiiCharacteristics) -> Result<(PiiCharacteristics, PiiCharacteristics)> {
    let (xa, ya) = align_pair(x, y);
    let ya = ya.with_truncation(xa.truncation)?;
    Ok((xa, ya))
}

/// `h * nu^Y_t - h * nu^X_t <= B^Y_t - B^X_t`, for the full `h` or for
/// `h 1_{G_n}` on every ladder level.
pub fn check_drift(
    x: &PiiCharacteristics,
    y: &PiiCharacteristics,
    ladder: Option<&TruncationLadder>,
    times: &[f64],
) -> OrderReport {
    let theorem = if ladder.is_some() { "drift-truncated" } else { "drift" };
    if times.is_empty() {
        return OrderReport::inconclusive(theorem, Error::DegenerateGrid.to_string());
    }
    let (x, y) = match common_basis(x, y) {
        Ok(p) => p,
        Err(e) => return OrderReport::inconclusive(theorem, e.to_string()),
    };
    let mut audit = Audit::new(theorem);
    let levels: Vec<f64> = match ladder {
        Some(l) => l.epsilons().to_vec(),
        None => vec![0.0],
    };
    for &t in times {
        let rhs = y.drift.eval(t) - x.drift.eval(t);
        for &eps in &levels {
            let hy = if eps > 0.0 { h_compensator_truncated(&y, t, eps) } else { h_compensator(&y, t) };
            let hx = if eps > 0.0 { h_compensator_truncated(&x, t, eps) } else { h_compensator(&x, t) };
            match (hx, hy) {
                (Ok(hx), Ok(hy)) => {
                    let what = if eps > 0.0 { "truncated drift" } else { "drift" };
                    audit.le(t, None, hy.value - hx.value, rhs, what)
                }
                (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
            }
        }
    }
    let summary = GridSummary {
        n_times: times.len(),
        t_max: times[times.len() - 1],
        ..GridSummary::default()
    };
    audit.finish(summary)
}

/// Fixed-time jumps: for `St`/`Pst`, `F^Y_s <= F^X_s` pointwise at every
/// fixed time; for `Icx`, ordered stop-loss transforms; for `Cx`, in
/// addition equal means.
pub fn check_fixed_jumps(sx: &FixedJumpSchedule, sy: &FixedJumpSchedule, order: OrderKind) -> OrderReport {
    use crate::characteristics::FixedJump;
    use crate::kernel::JumpLaw;
    let mut audit = Audit::new("fixed-jumps");
    let mut times: Vec<f64> = sx.times();
    times.extend(sy.times());
    sort_dedup(&mut times);
    let none = |t: f64| FixedJump {
        time: t,
        mass: 0.0,
        law: JumpLaw::Atoms(vec![(1.0, 1.0)]),
    };
    for &t in &times {
        let fx = sx.at(t).cloned().unwrap_or_else(|| none(t));
        let fy = sy.at(t).cloned().unwrap_or_else(|| none(t));
        let mut pts = Vec::new();
        fx.breakpoints(&mut pts);
        fy.breakpoints(&mut pts);
        let lo = pts.iter().fold(-1.0f64, |m, p| m.min(*p));
        let hi = pts.iter().fold(1.0f64, |m, p| m.max(*p));
        for i in 0..=256 {
            let w = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 256.0;
            pts.push(w);
        }
        for q in [1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9, 0.999, 0.999999] {
            pts.push(fx.quantile(q));
            pts.push(fy.quantile(q));
        }
        sort_dedup(&mut pts);
        let as_measure = |f: &FixedJump| LevyMeasure::CompoundPoisson {
            rate: f.mass,
            jumps: f.law.clone(),
        };
        let (mx, my) = (as_measure(&fx), as_measure(&fy));
        for &p in &pts {
            match order {
                OrderKind::St | OrderKind::Pst => {
                    audit.le(t, Some(p), fy.cdf(p), fx.cdf(p), "fixed-jump cdf");
                }
                OrderKind::Icx | OrderKind::Cx => {
                    // E(J - p)+ with the atom at 0: (0 - p)+ (1 - mass) + mass E(F - p)+
                    let sl = |m: &LevyMeasure, f: &FixedJump| -> Result<f64> {
                        Ok(m.stop_loss(p)? + (1.0 - f.mass) * (-p).max(0.0))
                    };
                    match (sl(&mx, &fx), sl(&my, &fy)) {
                        (Ok(a), Ok(b)) => audit.le(t, Some(p), a, b, "fixed-jump stop-loss"),
                        (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
                    }
                }
            }
        }
        if order == OrderKind::Cx {
            let (a, b) = (fx.mass * fx.law.mean(), fy.mass * fy.law.mean());
            audit.le(t, None, a, b, "fixed-jump mean");
            audit.le(t, None, b, a, "fixed-jump mean");
        }
    }
    audit.finish(GridSummary {
        n_times: times.len(),
        t_max: times.last().copied().unwrap_or(0.0),
        ..GridSummary::default()
    })
}

/// Sufficient condition for the pathwise order: tail order (optionally of
/// every truncated kernel), the drift condition for the continuous parts,
/// and ordered fixed-time jump laws.
pub fn check_pst(
    x: &PiiCharacteristics,
    y: &PiiCharacteristics,
    grid: &Grid,
    ladder: Option<&TruncationLadder>,
) -> OrderReport {
    let (xa, ya) = match common_basis(x, y) {
        Ok(p) => p,
        Err(e) => return OrderReport::inconclusive("pst", e.to_string()),
    };
    let (qx, fx) = match decompose(&xa) {
        Ok(p) => p,
        Err(e) => return OrderReport::inconclusive("pst", e.to_string()),
    };
    let (qy, fy) = match decompose(&ya) {
        Ok(p) => p,
        Err(e) => return OrderReport::inconclusive("pst", e.to_string()),
    };
    let tails = match ladder {
        Some(l) => check_st_tails_ladder(&qx.kernel, &qy.kernel, &qx.time_measure, grid, l),
        None => check_st_tails(&qx.kernel, &qy.kernel, &qx.time_measure, grid),
    };
    let drift = check_drift(&qx, &qy, ladder, &grid.times);
    let mut parts = vec![tails, drift];
    if !(fx.is_empty() && fy.is_empty()) {
        parts.push(check_fixed_jumps(&fx, &fy, OrderKind::Pst));
    }
    OrderReport::all("pst", parts)
}

// ---------------------------------------------------------------------------
// Convex orders on kernels

fn stop_loss_on(audit: &mut Audit, t: f64, mx: &LevyMeasure, my: &LevyMeasure, grid: &Grid) {
    for &x in &grid.xs {
        match (mx.centered_stop_loss(x), my.centered_stop_loss(x)) {
            (Ok(a), Ok(b)) => audit.le(t, Some(x), a.value, b.value, "stop-loss"),
            (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
        }
    }
}

/// `int f dK^X <= int f dK^Y` for every increasing convex Lipschitz `f`
/// with `f(0) = 0`: the centred stop-loss transforms
/// `int ((y - x)+ - (-x)+) K(dy)` are ordered at every grid `x`, and so
/// are the means.
pub fn check_icx(kx: &JumpKernel, ky: &JumpKernel, a: &TimeMeasure, grid: &Grid) -> OrderReport {
    let mut audit = Audit::new("icx-stop-loss");
    for (t, i, j) in active_cell_pairs(kx, ky, a, &grid.times) {
        let (mx, my) = (&kx.cells()[i].measure, &ky.cells()[j].measure);
        stop_loss_on(&mut audit, t, mx, my, grid);
        match (mx.mean(), my.mean()) {
            (Ok(a), Ok(b)) => audit.le(t, None, a.value, b.value, "mean"),
            (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
        }
    }
    audit.finish(grid.summary())
}

/// Convex kernel order: ordered centred stop-loss transforms and equal means.
pub fn check_cx(kx: &JumpKernel, ky: &JumpKernel, a: &TimeMeasure, grid: &Grid) -> OrderReport {
    let mut audit = Audit::new("cx-stop-loss");
    for (t, i, j) in active_cell_pairs(kx, ky, a, &grid.times) {
        let (mx, my) = (&kx.cells()[i].measure, &ky.cells()[j].measure);
        match (mx.mean(), my.mean()) {
            (Ok(a), Ok(b)) => {
                audit.le(t, None, a.value, b.value, "mean");
                audit.le(t, None, b.value, a.value, "mean");
            }
            (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
        }
        stop_loss_on(&mut audit, t, mx, my, grid);
    }
    audit.finish(grid.summary())
}

/// Requires `lo <= hi` as measures, compared on the cells of the grid,
/// on atoms, and on the tails beyond the grid.
fn measure_le_on(audit: &mut Audit, t: f64, lo: &LevyMeasure, hi: &LevyMeasure, grid: &Grid, region: Region, what: &str) {
    let mut edges: Vec<f64> = grid.xs.iter().copied().filter(|x| region.contains(*x)).collect();
    if edges.is_empty() {
        return;
    }
    for side in [Side::Pos, Side::Neg] {
        let pts: Vec<f64> = edges.iter().copied().filter(|x| Side::of(*x) == side).collect();
        if pts.is_empty() {
            continue;
        }
        let mut mags: Vec<f64> = pts.iter().map(|x| x.abs()).collect();
        sort_dedup(&mut mags);
        // cells (m_i, m_{i+1}] in magnitude and the tail beyond the last point
        for w in 0..mags.len() {
            let a = mags[w];
            let cell = if w + 1 < mags.len() {
                let b = mags[w + 1];
                match side {
                    Side::Pos => Region::new(a, false, b, true),
                    Side::Neg => Region::new(-b, true, -a, false),
                }
            } else {
                match side {
                    Side::Pos => Region::above(a, false),
                    Side::Neg => Region::below(-a, false),
                }
            };
            let cell = intersect(cell, region);
            let x = Some(side.sign() * a);
            match (lo.interval_mass(cell), hi.interval_mass(cell)) {
                (Ok(p), Ok(q)) => audit.le(t, x, p, q, what),
                (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
            }
        }
    }
    // atoms as point cells
    for &m in &grid.marks {
        if !region.contains(m) {
            continue;
        }
        let cell = Region::new(m, true, m, true);
        match (lo.interval_mass(cell), hi.interval_mass(cell)) {
            (Ok(p), Ok(q)) => audit.le(t, Some(m), p, q, what),
            (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
        }
    }
    edges.clear();
}

fn intersect(a: Region, b: Region) -> Region {
    let (lo, lo_closed) = if a.lo > b.lo {
        (a.lo, a.lo_closed)
    } else if b.lo > a.lo {
        (b.lo, b.lo_closed)
    } else {
        (a.lo, a.lo_closed && b.lo_closed)
    };
    let (hi, hi_closed) = if a.hi < b.hi {
        (a.hi, a.hi_closed)
    } else if b.hi < a.hi {
        (b.hi, b.hi_closed)
    } else {
        (a.hi, a.hi_closed && b.hi_closed)
    };
    Region::new(lo, lo_closed, hi, hi_closed)
}

// ---------------------------------------------------------------------------
// Cut criterion

/// Reflects a process through `x -> -x`.
pub fn reflect(c: &PiiCharacteristics) -> PiiCharacteristics {
    use crate::characteristics::{FixedJump, PiecewiseLinear};
    let mut r = c.clone();
    r.drift = PiecewiseLinear::zero().sub(&c.drift);
    r.kernel = c.kernel.map(|m| m.clone().reflected());
    r.fixed_jumps = FixedJumpSchedule::new(
        c.fixed_jumps
            .entries()
            .iter()
            .map(|e| FixedJump {
                time: e.time,
                mass: e.mass,
                law: e.law.reflected(),
            })
            .collect(),
    )
    .expect("reflection keeps a valid schedule");
    r
}

/// Single-crossing condition at the cut, mass compensation, finite extras
/// and the drift condition
/// `B^Y_t - B^X_t - h * (nu^Y - nu^X)_t >= 0`.
pub fn check_cut(x: &PiiCharacteristics, y: &PiiCharacteristics, cut: CutPoint, grid: &Grid) -> OrderReport {
    if cut.k < 0.0 {
        // X <= Y  iff  -Y <= -X, with the cut mirrored
        return check_cut(&reflect(y), &reflect(x), cut.reflected(), grid);
    }
    let (x, y) = match common_basis(x, y) {
        Ok(p) => p,
        Err(e) => return OrderReport::inconclusive("cut", e.to_string()),
    };
    if !(x.fixed_jumps.is_empty() && y.fixed_jumps.is_empty()) {
        return OrderReport::inconclusive("cut", "fixed-time jumps are not handled by the cut criterion");
    }
    let mut audit = Audit::new("cut");
    let (upper, lower) = (cut.upper(), cut.lower());
    let small = intersect(lower, Region::above(0.0, false));
    for (t, i, j) in active_cell_pairs(&x.kernel, &y.kernel, &x.time_measure, &grid.times) {
        let (mx, my) = (&x.kernel.cells()[i].measure, &y.kernel.cells()[j].measure);
        measure_le_on(&mut audit, t, mx, my, grid, upper, "density above cut");
        measure_le_on(&mut audit, t, my, mx, grid, lower, "density below cut");
        let x_extra = mx.clone().minus(my.clone()).restricted(lower);
        let y_extra = my.clone().minus(mx.clone()).restricted(upper);
        let masses = (
            x_extra.clone().restricted(small).total_mass(),
            y_extra.total_mass(),
            x_extra.total_mass(),
        );
        match masses {
            (Ok(m_small), Ok(m_y), Ok(m_x)) => {
                if !(m_x.is_finite() && m_y.is_finite()) {
                    audit.fail(format!("extra jump measures must have finite mass at t = {t}"));
                }
                if cut.k > 0.0 {
                    audit.le(t, Some(cut.k), m_small, m_y, "mass compensation");
                }
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => audit.fail(e.to_string()),
        }
    }
    let h = x.truncation;
    let x_extra_k = x.kernel.zip_with(&y.kernel, |a, b| a.clone().minus(b.clone()).restricted(lower));
    let y_extra_k = y.kernel.zip_with(&x.kernel, |a, b| a.clone().minus(b.clone()).restricted(upper));
    for &t in &grid.times {
        let rate = |k: &crate::kernel::JumpKernel| {
            let mut c = x.clone();
            c.kernel = k.clone();
            c.integrate_in_time(t, |m| h.integral(m, 0.0))
        };
        match (rate(&x_extra_k), rate(&y_extra_k)) {
            (Ok(ex), Ok(ey)) => {
                let lhs = ey.value - ex.value;
                let rhs = y.drift.eval(t) - x.drift.eval(t);
                audit.le(t, None, lhs, rhs, "drift");
            }
            (Err(e), _) | (_, Err(e)) => audit.fail(e.to_string()),
        }
    }
    audit.finish(grid.summary())
}

// ---------------------------------------------------------------------------
// Convex majorization

/// `C^Y - C^X` nondecreasing, `nu^Y - nu^X >= 0`, and
/// `B^X_t + (x - h) * nu^X_t <= B^Y_t + (x - h) * nu^Y_t`. Equality in the
/// last condition at every time sets `equality`, upgrading icx to cx.
pub fn check_convex_majorization(x: &PiiCharacteristics, y: &PiiCharacteristics, grid: &Grid) -> OrderReport {
    let (x, y) = match common_basis(x, y) {
        Ok(p) => p,
        Err(e) => return OrderReport::inconclusive("convex-majorization", e.to_string()),
    };
    if !(x.fixed_jumps.is_empty() && y.fixed_jumps.is_empty()) {
        return OrderReport::inconclusive(
            "convex-majorization",
            "fixed-time jumps: check them with check_fixed_jumps",
        );
    }
    let mut audit = Audit::new("convex-majorization");
    let dc = y.gaussian.sub(&x.gaussian);
    let mut ct: Vec<f64> = dc.breakpoints();
    ct.extend(grid.times.iter().copied());
    sort_dedup(&mut ct);
    for w in ct.windows(2) {
        audit.le(w[1], None, dc.eval(w[0]), dc.eval(w[1]), "gaussian increment");
    }
    for (t, i, j) in active_cell_pairs(&x.kernel, &y.kernel, &x.time_measure, &grid.times) {
        let (mx, my) = (&x.kernel.cells()[i].measure, &y.kernel.cells()[j].measure);
        measure_le_on(&mut audit, t, mx, my, grid, Region::ALL, "kernel difference");
    }
    let h = x.truncation;
    let mut equal = true;
    for &t in &grid.times {
        let ex = x.integrate_in_time(t, |m| h.excess_integral(m));
        let ey = y.integrate_in_time(t, |m| h.excess_integral(m));
        match (ex, ey) {
            (Ok(ex), Ok(ey)) => {
                let lhs = x.drift.eval(t) + ex.value;
                let rhs = y.drift.eval(t) + ey.value;
                audit.le(t, None, lhs, rhs, "mean");
                let scale = 1.0f64.max(lhs.abs()).max(rhs.abs());
                if (rhs - lhs).abs() > audit.tol * scale {
                    equal = false;
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                equal = false;
                audit.fail(e.to_string());
            }
        }
    }
    let mut r = audit.finish(grid.summary());
    r.equality = Some(equal && r.verdict == Verdict::Satisfied);
    r
}

// ---------------------------------------------------------------------------
// Definition-level check

/// `int f dK^X <= int f dK^Y` for each member of the family (all with
/// `f(0) = 0`), at every active pair of kernel cells.
pub fn kernel_order_defn_check(
    kx: &JumpKernel,
    ky: &JumpKernel,
    a: &TimeMeasure,
    family: &TestFunctionFamily,
    times: &[f64],
) -> Result<OrderReport> {
    if family.members.is_empty() {
        return Err(Error::DegenerateInput("empty test-function family".into()));
    }
    let mut audit = Audit::new("kernel-order");
    let pairs = active_cell_pairs(kx, ky, a, times);
    for f in &family.members {
        let (pos, neg) = match f.function.rays() {
            Ok(r) => r,
            Err(e) => {
                audit.fail(format!("{}: {e}", f.name));
                continue;
            }
        };
        for &(t, i, j) in &pairs {
            let ix = kx.cells()[i].measure.integrate_split(&pos, &neg);
            let iy = ky.cells()[j].measure.integrate_split(&pos, &neg);
            match (ix, iy) {
                (Ok(p), Ok(q)) => audit.le(t, None, p.value, q.value, &f.name),
                (Err(e), _) | (_, Err(e)) => audit.fail(format!("{}: {e}", f.name)),
            }
        }
    }
    Ok(audit.finish(GridSummary {
        n_times: times.len(),
        t_max: times.last().copied().unwrap_or(0.0),
        ..GridSummary::default()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::{PiecewiseLinear, TruncationFunction};
    use crate::kernel::JumpLaw;

    fn exp_cp(rate: f64) -> LevyMeasure {
        LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 }).unwrap()
    }

    fn point(rate: f64, at: f64) -> LevyMeasure {
        LevyMeasure::compound_poisson(rate, JumpLaw::point(at).unwrap()).unwrap()
    }

    fn levy(h: TruncationFunction, b: f64, s2: f64, m: LevyMeasure) -> PiiCharacteristics {
        PiiCharacteristics::levy(h, b, s2, m).unwrap()
    }

    fn grid_for(x: &PiiCharacteristics, y: &PiiCharacteristics) -> Grid {
        Grid::for_pair(x, y, 1.0, 100, 64, 1e-3).unwrap()
    }

    fn kernel_grid(kx: &JumpKernel, ky: &JumpKernel) -> Grid {
        Grid::for_kernels(kx, ky, &TimeMeasure::identity(), 1.0, 100, 64, 1e-3).unwrap()
    }

    #[test]
    fn st_tails_examples() {
        let a = TimeMeasure::identity();
        let k1 = JumpKernel::homogeneous(exp_cp(1.0));
        let k2 = JumpKernel::homogeneous(exp_cp(2.0));
        assert!(check_st_tails(&k1, &k1, &a, &kernel_grid(&k1, &k1)).is_satisfied());
        assert!(check_st_tails(&k1, &k2, &a, &kernel_grid(&k1, &k2)).is_satisfied());
        let cx = JumpKernel::homogeneous(LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap());
        let cy = JumpKernel::homogeneous(LevyMeasure::cgmy(1.0, 1.0, 2.0, 0.5).unwrap());
        let r = check_st_tails(&cx, &cy, &a, &kernel_grid(&cx, &cy));
        assert_eq!(r.verdict, Verdict::Violated);
        let g = Grid::new(vec![0.0, 1.0], vec![1.0], vec![]).unwrap();
        let r = check_st_tails(&cx, &cy, &a, &g);
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.witnesses.iter().any(|w| w.x == Some(1.0) && w.rhs < w.lhs));
        let empty = Grid::new(vec![], vec![1.0], vec![]);
        assert_eq!(empty, Err(Error::DegenerateGrid));
    }

    #[test]
    fn st_tails_exact_at_atoms() {
        let a = TimeMeasure::identity();
        // same total mass above 1.0 but X's sits further out: open tail at 1 differs
        let kx = JumpKernel::homogeneous(point(1.0, 2.0));
        let ky = JumpKernel::homogeneous(point(1.0, 1.0));
        let r = check_st_tails(&kx, &ky, &a, &kernel_grid(&kx, &ky));
        assert_eq!(r.verdict, Verdict::Violated);
        let r = check_st_tails(&ky, &kx, &a, &kernel_grid(&kx, &ky));
        assert!(r.is_satisfied());
    }

    #[test]
    fn drift_examples() {
        let h = TruncationFunction::indicator(1.0).unwrap();
        let x = levy(h, 0.0, 0.0, exp_cp(1.0));
        let times = time_grid(1.0, 10);
        assert!(check_drift(&x, &x, None, &times).is_satisfied());
        let y = levy(h, 0.3, 0.0, exp_cp(2.0));
        let r = check_drift(&x, &y, None, &times);
        assert!(r.is_satisfied(), "{r:?}");
        let y2 = levy(h, 0.2, 0.0, exp_cp(2.0));
        let r = check_drift(&x, &y2, None, &times);
        assert_eq!(r.verdict, Verdict::Violated);
        let w = r.witnesses.iter().find(|w| w.t == 1.0).unwrap();
        assert!((w.lhs - 0.264_241_117_657_115_4).abs() < 1e-9 && w.rhs == 0.2);
    }

    #[test]
    fn drift_needs_ladder_for_infinite_variation() {
        let h = TruncationFunction::default();
        let x = levy(h, 0.0, 0.0, LevyMeasure::cgmy(1.0, 1.0, 1.0, 1.5).unwrap());
        let times = time_grid(1.0, 4);
        let r = check_drift(&x, &x, None, &times);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let ladder = TruncationLadder::geometric(0.1, 2.0, 0.01).unwrap();
        assert!(check_drift(&x, &x, Some(&ladder), &times).is_satisfied());
    }

    #[test]
    fn icx_and_cx_examples() {
        let a = TimeMeasure::identity();
        let k1 = JumpKernel::homogeneous(exp_cp(1.0));
        let k2 = JumpKernel::homogeneous(exp_cp(2.0));
        assert!(check_icx(&k1, &k2, &a, &kernel_grid(&k1, &k2)).is_satisfied());
        assert!(check_icx(&k1, &k1, &a, &kernel_grid(&k1, &k1)).is_satisfied());
        let r = check_cx(&k1, &k2, &a, &kernel_grid(&k1, &k2));
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.witnesses.iter().any(|w| w.what == "mean"));

        let p2 = JumpKernel::homogeneous(point(1.0, 2.0));
        let p1 = JumpKernel::homogeneous(point(1.0, 1.0));
        assert_eq!(check_icx(&p2, &p1, &a, &kernel_grid(&p2, &p1)).verdict, Verdict::Violated);
        let g = Grid::new(vec![0.0], vec![1.5], vec![]).unwrap();
        let r = check_icx(&p2, &p1, &a, &g);
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.witnesses.iter().any(|w| w.x == Some(1.5) && w.lhs == 0.5 && w.rhs == 0.0));

        let kx = JumpKernel::homogeneous(point(2.0, 1.0));
        let ky = JumpKernel::homogeneous(point(1.0, 2.0));
        let r = check_cx(&kx, &ky, &a, &kernel_grid(&kx, &ky));
        assert!(r.is_satisfied(), "{r:?}");
        assert!(check_icx(&kx, &ky, &a, &kernel_grid(&kx, &ky)).is_satisfied());
    }

    #[test]
    fn cut_examples() {
        let h = TruncationFunction::default();
        // k = 0: X has extra negative jumps, Y extra positive ones
        // B^Y - B^X must cover h * (nu^Y - nu^X) = 2t
        let x = levy(h, 0.0, 0.0, point(1.0, -1.0));
        let y = levy(h, 2.0, 0.0, point(1.0, 1.0));
        let cut0 = CutPoint::new(0.0, CutSide::LeftClosed).unwrap();
        let r = check_cut(&x, &y, cut0, &grid_for(&x, &y));
        assert!(r.is_satisfied(), "{r:?}");
        // drifts that undo the ordering fail
        let y_bad = levy(h, 1.9, 0.0, point(1.0, 1.0));
        assert_eq!(check_cut(&x, &y_bad, cut0, &grid_for(&x, &y_bad)).verdict, Verdict::Violated);

        let k1 = CutPoint::new(1.0, CutSide::LeftClosed).unwrap();
        let kx = LevyMeasure::compound_poisson(0.3, JumpLaw::Uniform { lo: 0.2, hi: 0.8 }).unwrap();
        let ky = LevyMeasure::compound_poisson(0.5, JumpLaw::Uniform { lo: 1.5, hi: 3.0 }).unwrap();
        // B^Y - B^X >= h * (nu^Y - nu^X) = 0.5 - 0.3 * 0.5
        let x = levy(h, 0.0, 0.0, kx.clone());
        let y = levy(h, 0.35, 0.0, ky.clone());
        assert!(check_cut(&x, &y, k1, &grid_for(&x, &y)).is_satisfied());
        let kx_big = LevyMeasure::compound_poisson(0.8, JumpLaw::Uniform { lo: 0.2, hi: 0.8 }).unwrap();
        let x = levy(h, 0.0, 0.0, kx_big);
        let r = check_cut(&x, &y, k1, &grid_for(&x, &y));
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.witnesses.iter().any(|w| w.what == "mass compensation" && w.lhs == 0.8 && w.rhs == 0.5));
    }

    #[test]
    fn cut_reflection_for_negative_k() {
        let h = TruncationFunction::default();
        // mirror image of the k = 1 example
        let kx = LevyMeasure::compound_poisson(0.5, JumpLaw::Uniform { lo: -3.0, hi: -1.5 }).unwrap();
        let ky = LevyMeasure::compound_poisson(0.3, JumpLaw::Uniform { lo: -0.8, hi: -0.2 }).unwrap();
        let x = levy(h, -0.35, 0.0, kx);
        let y = levy(h, 0.0, 0.0, ky);
        let cut = CutPoint::new(-1.0, CutSide::RightClosed).unwrap();
        assert!(check_cut(&x, &y, cut, &grid_for(&x, &y)).is_satisfied());
    }

    #[test]
    fn convex_majorization_examples() {
        let h = TruncationFunction::default();
        let x = levy(h, 0.0, 1.0, exp_cp(1.0));
        let r = check_convex_majorization(&x, &x, &grid_for(&x, &x));
        assert!(r.is_satisfied());
        assert_eq!(r.equality, Some(true));

        let xk = point(1.0, 0.5);
        let yk = point(1.0, 0.5).sum(point(1.0, 1.0));
        let x = levy(h, 0.0, 1.0, xk.clone());
        let y = levy(h, 0.0, 2.0, yk);
        let r = check_convex_majorization(&x, &y, &grid_for(&x, &y));
        assert!(r.is_satisfied(), "{r:?}");
        assert_eq!(r.equality, Some(true));

        // X has an atom Y lacks
        let y = levy(h, 0.0, 2.0, point(1.0, 1.0));
        let r = check_convex_majorization(&x, &y, &grid_for(&x, &y));
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.witnesses.iter().any(|w| w.x == Some(0.5)));

        // shrinking variance increments are rejected
        let mut y = levy(h, 0.0, 0.0, xk);
        y.gaussian = PiecewiseLinear::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]).unwrap();
        let r = check_convex_majorization(&x, &y, &grid_for(&x, &y));
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn fixed_jump_st() {
        use crate::characteristics::FixedJump;
        let s = |m: f64, at: f64| {
            FixedJumpSchedule::new(vec![FixedJump { time: 1.0, mass: m, law: JumpLaw::point(at).unwrap() }]).unwrap()
        };
        assert!(check_fixed_jumps(&s(0.5, 1.0), &s(0.9, 1.0), OrderKind::St).is_satisfied());
        assert_eq!(check_fixed_jumps(&s(0.9, 1.0), &s(0.5, 1.0), OrderKind::St).verdict, Verdict::Violated);
        assert!(check_fixed_jumps(&s(1.0, 1.0), &s(1.0, 2.0), OrderKind::Icx).is_satisfied());
    }

    #[test]
    fn ladder_validation() {
        assert!(TruncationLadder::new(vec![0.1, 0.1]).is_err());
        let l = TruncationLadder::geometric(1.0, 2.0, 0.1).unwrap();
        assert_eq!(l.epsilons().len(), 4);
        assert_eq!(l.floor(), 0.125);
    }
}
