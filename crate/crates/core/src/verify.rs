//! Monte-Carlo and exact oracles: test-function families, expectation
//! estimates, paired order tests, the interpolation identity, small-time
//! rates, and brute-force enumeration for atomic compound Poisson pairs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::characteristics::{h_compensator, time_pieces, PiiCharacteristics, TimeMeasure};
use crate::direct::{mass_above, DirectSimulator, JumpSampler};
use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, JumpLaw, LevyMeasure, RayFunction, RayJump};
use crate::numeric::{gauss_legendre, ln_factorial};
use crate::paths::CoupledPathSet;
use crate::rng;

// ---------------------------------------------------------------------------
// Piecewise-linear functions on the real line

/// Piecewise-linear `f: R -> R` with linear extensions.
///
/// A repeated abscissa encodes a jump; the function is lower
/// semicontinuous there (it takes the smaller of the two values).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plf {
    knots: Vec<(f64, f64)>,
    left_slope: f64,
    right_slope: f64,
}

impl Plf {
    pub fn new(knots: Vec<(f64, f64)>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("plf", "need at least one knot"));
        }
        if knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return Err(Error::invalid("plf", "non-finite knot"));
        }
        if !left_slope.is_finite() || !right_slope.is_finite() {
            return Err(Error::invalid("plf", "non-finite slope"));
        }
        for w in knots.windows(3) {
            if w[0].0 == w[2].0 {
                return Err(Error::invalid("plf", "at most two knots per abscissa"));
            }
        }
        if knots.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::invalid("plf", "abscissae must be nondecreasing"));
        }
        Ok(Plf {
            knots,
            left_slope,
            right_slope,
        })
    }

    pub fn linear(slope: f64) -> Self {
        Plf {
            knots: vec![(0.0, 0.0)],
            left_slope: slope,
            right_slope: slope,
        }
    }

    pub fn zero() -> Self {
        Self::linear(0.0)
    }

    /// `(x - c)+`.
    pub fn hinge(c: f64) -> Self {
        Plf {
            knots: vec![(c, 0.0)],
            left_slope: 0.0,
            right_slope: 1.0,
        }
    }

    /// `(c - x)+`.
    pub fn put(c: f64) -> Self {
        Plf {
            knots: vec![(c, 0.0)],
            left_slope: -1.0,
            right_slope: 0.0,
        }
    }

    /// `-1{x <= c}`, lower semicontinuous.
    pub fn neg_step(c: f64) -> Self {
        Plf {
            knots: vec![(c, -1.0), (c, 0.0)],
            left_slope: 0.0,
            right_slope: 0.0,
        }
    }

    /// `1{x >= c}`, lower semicontinuous at `c` (value 0 there).
    pub fn step(c: f64) -> Self {
        Plf {
            knots: vec![(c, 0.0), (c, 1.0)],
            left_slope: 0.0,
            right_slope: 0.0,
        }
    }

    /// Convex function with value `v0` at `xs[0]` and slopes `slopes[i]` on
    /// `[xs[i], xs[i+1]]`; `slopes` has `xs.len() + 1` entries, the first and
    /// last being the extension slopes.
    pub fn from_slopes(xs: &[f64], v0: f64, slopes: &[f64]) -> Result<Self> {
        if xs.is_empty() || slopes.len() != xs.len() + 1 {
            return Err(Error::invalid("plf", "need len(slopes) = len(xs) + 1"));
        }
        let mut knots = vec![(xs[0], v0)];
        for i in 1..xs.len() {
            let prev = knots[i - 1].1;
            knots.push((xs[i], prev + slopes[i] * (xs[i] - xs[i - 1])));
        }
        Plf::new(knots, slopes[0], slopes[slopes.len() - 1])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn left_slope(&self) -> f64 {
        self.left_slope
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 < x);
        if i < k.len() && k[i].0 == x {
            let mut v = k[i].1;
            if i + 1 < k.len() && k[i + 1].0 == x {
                v = v.min(k[i + 1].1);
            }
            return v;
        }
        if i == 0 {
            return k[0].1 + self.left_slope * (x - k[0].0);
        }
        if i == k.len() {
            let (x0, v0) = k[k.len() - 1];
            return v0 + self.right_slope * (x - x0);
        }
        let (x0, v0) = k[i - 1];
        let (x1, v1) = k[i];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Adds a constant.
    pub fn shifted(&self, c: f64) -> Plf {
        Plf {
            knots: self.knots.iter().map(|&(x, v)| (x, v + c)).collect(),
            ..self.clone()
        }
    }

    /// `x -> f(x + z)`.
    pub fn translated(&self, z: f64) -> Plf {
        Plf {
            knots: self.knots.iter().map(|&(x, v)| (x - z, v)).collect(),
            ..self.clone()
        }
    }

    /// `f - f(0)`.
    pub fn centered(&self) -> Plf {
        self.shifted(-self.eval(0.0))
    }

    pub fn scaled(&self, a: f64) -> Plf {
        Plf {
            knots: self.knots.iter().map(|&(x, v)| (x, a * v)).collect(),
            left_slope: a * self.left_slope,
            right_slope: a * self.right_slope,
        }
    }

    fn segment_slopes(&self) -> Vec<f64> {
        let mut s = vec![self.left_slope];
        for w in self.knots.windows(2) {
            if w[1].0 > w[0].0 {
                s.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
            }
        }
        s.push(self.right_slope);
        s
    }

    pub fn has_jumps(&self) -> bool {
        self.knots.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 != w[1].1)
    }

    /// Largest absolute slope; infinite with jumps.
    pub fn lipschitz(&self) -> f64 {
        if self.has_jumps() {
            return f64::INFINITY;
        }
        self.segment_slopes().iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.segment_slopes().iter().all(|s| *s >= 0.0)
            && self.knots.windows(2).all(|w| w[1].1 >= w[0].1 || w[1].0 > w[0].0)
    }

    pub fn is_convex(&self) -> bool {
        !self.has_jumps() && self.segment_slopes().windows(2).all(|w| w[1] >= w[0] - 1e-12)
    }

    /// Restrictions `r -> f(r)` and `r -> f(-r)` to the half-lines, for
    /// integrating against a Lévy measure. Requires `f` continuous at 0 with
    /// `f(0) = 0`.
    pub fn rays(&self) -> Result<(RayFunction, RayFunction)> {
        let f0 = self.eval(0.0);
        let eps = 1e-300;
        if f0 != 0.0 || (self.eval(-eps) - f0).abs() > 1e-12 || (self.eval(eps) - f0).abs() > 1e-12 {
            return Err(Error::DegenerateInput("test function must vanish and be continuous at 0".into()));
        }
        let pos = half_line(&self.knots, self.right_slope);
        let mirrored: Vec<(f64, f64)> = self.knots.iter().rev().map(|&(x, v)| (-x, v)).collect();
        let neg = half_line(&mirrored, -self.left_slope);
        Ok((pos, neg))
    }
}

/// The part of a function on `(0, inf)` as a ray function, given knots sorted
/// increasingly (jumps as repeated abscissae, lower semicontinuous).
fn half_line(knots: &[(f64, f64)], right_slope: f64) -> RayFunction {
    let mut slopes = Vec::new();
    let mut jumps = Vec::new();
    let inner: Vec<(f64, f64)> = knots.iter().copied().filter(|k| k.0 > 0.0).collect();
    // value at 0+ is 0; walk the knots
    let mut prev_x = 0.0;
    let mut prev_v = 0.0;
    let mut i = 0;
    while i < inner.len() {
        let (x, v) = inner[i];
        let slope = (v - prev_v) / (x - prev_x);
        slopes.push((prev_x, slope));
        if i + 1 < inner.len() && inner[i + 1].0 == x {
            let v2 = inner[i + 1].1;
            if v2 != v {
                jumps.push(RayJump {
                    at: x,
                    size: v2 - v,
                    right_continuous: v2 < v,
                });
            }
            prev_v = v2;
            i += 2;
        } else {
            prev_v = v;
            i += 1;
        }
        prev_x = x;
    }
    slopes.push((prev_x, right_slope));
    RayFunction { slopes, jumps }
}

/// `f_n(x) = inf_z (f(z) + n |x - z|)`, in closed form.
pub fn inf_convolution(f: &Plf, n: f64) -> Result<Plf> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid("n", "must be positive"));
    }
    if f.left_slope > n || f.right_slope < -n {
        return Err(Error::Divergent(format!(
            "inf-convolution is -inf: extension slope exceeds n = {n}"
        )));
    }
    // distinct abscissae with (left value, right value, lsc value)
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for &(x, v) in &f.knots {
        match pts.last_mut() {
            Some(last) if last.0 == x => {
                last.2 = v;
            }
            _ => pts.push((x, v, v)),
        }
    }
    let m = pts.len();
    let mut val: Vec<f64> = pts.iter().map(|p| p.1.min(p.2)).collect();
    for i in 1..m {
        let c = val[i - 1] + n * (pts[i].0 - pts[i - 1].0);
        val[i] = val[i].min(c);
    }
    for i in (0..m - 1).rev() {
        let c = val[i + 1] + n * (pts[i + 1].0 - pts[i].0);
        val[i] = val[i].min(c);
    }

    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut push = |x: f64, v: f64| {
        if let Some(l) = out.last() {
            if l.0 == x {
                return;
            }
        }
        out.push((x, v));
    };

    // left extension: min(f0 + ls (x - z0), v0 + n (z0 - x))
    let (z0, f0, _) = pts[0];
    let ls = f.left_slope;
    let left_slope = if ls + n > 0.0 && f0 > val[0] {
        // lines meet at x* where f0 + ls (x - z0) = v0 + n (z0 - x)
        let xs = z0 - (f0 - val[0]) / (ls + n);
        push(xs, val[0] + n * (z0 - xs));
        ls
    } else if ls + n > 0.0 {
        ls
    } else {
        -n
    };
    push(z0, val[0]);

    for i in 0..m.saturating_sub(1) {
        let (a, _, fa) = pts[i];
        let (b, fb, _) = pts[i + 1];
        let s = (fb - fa) / (b - a);
        let lines = [(fa, s), (val[i], n), (val[i + 1] + n * (b - a), -n)];
        let line = |k: usize, x: f64| lines[k].0 + lines[k].1 * (x - a);
        let mut cand = vec![a, b];
        let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
        for p in 0..3 {
            for q in p + 1..3 {
                let ds = lines[p].1 - lines[q].1;
                if ds != 0.0 {
                    let x = a + (lines[q].0 - lines[p].0) / ds;
                    if x > a + tol && x < b - tol {
                        cand.push(x);
                    }
                }
            }
        }
        cand.sort_by(f64::total_cmp);
        cand.dedup();
        for &x in &cand[1..] {
            let v = (0..3).map(|k| line(k, x)).fold(f64::INFINITY, f64::min);
            let v = if x == b { val[i + 1] } else { v };
            push(x, v);
        }
    }

    // right extension
    let (zl, _, fl) = pts[m - 1];
    let rs = f.right_slope;
    let right_slope = if n - rs > 0.0 && fl > val[m - 1] {
        // f_l + rs (x - zl) = v_l + n (x - zl)
        let xs = zl + (fl - val[m - 1]) / (n - rs);
        push(xs, val[m - 1] + n * (xs - zl));
        rs
    } else if n - rs > 0.0 {
        rs
    } else {
        n
    };
    Plf::new(merge_collinear(out), left_slope, right_slope)
}

/// Drops interior knots whose two adjacent slopes agree up to rounding.
fn merge_collinear(knots: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if knots.len() < 3 {
        return knots;
    }
    let slope = |p: (f64, f64), q: (f64, f64)| (q.1 - p.1) / (q.0 - p.0);
    let mut out = vec![knots[0]];
    for i in 1..knots.len() - 1 {
        let (prev, k, next) = (out[out.len() - 1], knots[i], knots[i + 1]);
        if prev.0 == k.0 || k.0 == next.0 {
            out.push(k);
            continue;
        }
        let (a, b) = (slope(prev, k), slope(k, next));
        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
            out.push(k);
        }
    }
    out.push(knots[knots.len() - 1]);
    out
}

// ---------------------------------------------------------------------------
// Test-function families

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FamilyClass {
    St,
    Cx,
    Icx,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestFunction {
    pub name: String,
    pub function: Plf,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestFunctionFamily {
    pub class: FamilyClass,
    pub members: Vec<TestFunction>,
    pub smoothing: f64,
    pub seed: u64,
}

impl TestFunctionFamily {
    /// Twenty seeded members, all Lipschitz with `f(0) = 0`:
    ///
    /// * `st`: 8 smoothed steps (ramps), 8 hinges, 4 increasing convex;
    /// * `icx`: 8 `max(x, c)` with `c < 0`, 8 hinges with `c > 0`, 4 increasing convex;
    /// * `cx`: 8 puts `(c - x)+`, 8 hinges, 4 convex.
    ///
    /// Knots are drawn uniformly from `[-scale, scale]`; `smoothing` is the
    /// inf-convolution index used for the ramps.
    pub fn generate(class: FamilyClass, seed: u64, scale: f64, smoothing: f64) -> Result<Self> {
        if !(scale > 0.0) || !(smoothing > 0.0) {
            return Err(Error::invalid("family", "scale and smoothing must be positive"));
        }
        let mut r = rng::stream(seed, rng::purpose::FAMILY, class as u64);
        let mut unif = |lo: f64, hi: f64| lo + (hi - lo) * rng::open01(&mut r);
        let mut members = Vec::with_capacity(20);
        let mut add = |name: String, f: Plf| members.push(TestFunction { name, function: f.centered() });
        match class {
            FamilyClass::St => {
                for i in 0..8 {
                    let c = unif(-scale, scale);
                    let f = inf_convolution(&Plf::step(c), smoothing)?;
                    add(format!("ramp[{i}] c={c:.4}"), f);
                }
                for i in 0..8 {
                    let c = unif(-scale, scale);
                    add(format!("hinge[{i}] c={c:.4}"), Plf::hinge(c));
                }
            }
            FamilyClass::Icx => {
                for i in 0..8 {
                    let c = unif(-scale, 0.0);
                    add(format!("max[{i}] c={c:.4}"), Plf::hinge(c));
                }
                for i in 0..8 {
                    let c = unif(0.0, scale);
                    add(format!("hinge[{i}] c={c:.4}"), Plf::hinge(c));
                }
            }
            FamilyClass::Cx => {
                for i in 0..8 {
                    let c = unif(-scale, scale);
                    add(format!("put[{i}] c={c:.4}"), Plf::put(c));
                }
                for i in 0..8 {
                    let c = unif(-scale, scale);
                    add(format!("hinge[{i}] c={c:.4}"), Plf::hinge(c));
                }
            }
        }
        for i in 0..4 {
            let k = 3;
            let mut xs: Vec<f64> = (0..k).map(|_| unif(-scale, scale)).collect();
            xs.sort_by(f64::total_cmp);
            let lo = if class == FamilyClass::Cx { -1.0 } else { 0.0 };
            let mut slopes: Vec<f64> = (0..=k).map(|_| unif(lo, 1.0)).collect();
            slopes.sort_by(f64::total_cmp);
            let f = Plf::from_slopes(&xs, 0.0, &slopes)?;
            add(format!("convex[{i}]"), f);
        }
        Ok(TestFunctionFamily {
            class,
            members,
            smoothing,
            seed,
        })
    }

    pub fn from_functions(class: FamilyClass, fs: Vec<(String, Plf)>) -> Self {
        TestFunctionFamily {
            class,
            members: fs
                .into_iter()
                .map(|(name, function)| TestFunction { name, function })
                .collect(),
            smoothing: 0.0,
            seed: 0,
        }
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimates

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Design {
    PairedCoupled,
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MCResult {
    pub estimate: f64,
    pub standard_error: f64,
    pub n_samples: usize,
    /// Non-finite samples, excluded from the estimate.
    pub n_nonfinite: usize,
    pub design: Design,
    pub seed: u64,
}

impl MCResult {
    pub fn from_samples(samples: &[f64], design: Design, seed: u64) -> Result<Self> {
        let finite: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Err(Error::DegenerateInput("no finite samples".into()));
        }
        let (estimate, var) = mean_var(&finite);
        Ok(MCResult {
            estimate,
            standard_error: libm::sqrt(var / finite.len() as f64),
            n_samples: finite.len(),
            n_nonfinite: samples.len() - finite.len(),
            design,
            seed,
        })
    }

    /// `estimate / standard_error`, with `0/0 = 0`.
    pub fn z(&self) -> f64 {
        z_score(self.estimate, self.standard_error)
    }
}

fn z_score(d: f64, se: f64) -> f64 {
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d * f64::INFINITY
    }
}

/// Mean and unbiased variance; a constant sample has variance exactly 0.
fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.iter().all(|x| *x == v[0]) {
        return (v[0], 0.0);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var)
}

/// `E f(X_{t_1}, ..., X_{t_m})` from `n` direct simulations.
pub fn estimate(
    c: &PiiCharacteristics,
    f: &dyn Fn(&[f64]) -> f64,
    times: &[f64],
    n: usize,
    epsilon: Option<f64>,
    seed: u64,
) -> Result<MCResult> {
    if n == 0 {
        return Err(Error::invalid("n_paths", "must be at least 1"));
    }
    let horizon = times.last().copied().ok_or(Error::DegenerateGrid)?;
    let sim = DirectSimulator::new(c, horizon, times, epsilon, seed)?.with_stream(rng::purpose::ESTIMATE);
    let samples = (0..n as u64)
        .map(|i| sim.sample_path(i).map(|p| f(&p.values)))
        .collect::<Result<Vec<_>>>()?;
    MCResult::from_samples(&samples, Design::Independent, seed)
}

// ---------------------------------------------------------------------------
// Order tests on samples

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McOrderRow {
    pub name: String,
    pub t: f64,
    pub estimate_diff: f64,
    pub standard_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McOrderReport {
    pub design: Design,
    pub class: FamilyClass,
    pub rows: Vec<McOrderRow>,
    pub n_samples: usize,
    pub seed: u64,
    pub min_z: f64,
    /// Some `z < -3`.
    pub violation: bool,
    pub summary: String,
}

pub const Z_THRESHOLD: f64 = -3.0;

fn order_report(design: Design, family: &TestFunctionFamily, rows: Vec<McOrderRow>, n: usize, seed: u64) -> McOrderReport {
    let min_z = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.z));
    let violation = min_z < Z_THRESHOLD;
    McOrderReport {
        design,
        class: family.class,
        rows,
        n_samples: n,
        seed,
        min_z,
        violation,
        summary: if violation { "violation detected" } else { "no violation detected" }.into(),
    }
}

/// Paired differences `f(Y_t) - f(X_t)` on coupled paths, for every member
/// of the family and every requested grid time.
pub fn mc_order_test(paths: &CoupledPathSet, family: &TestFunctionFamily, times: &[f64]) -> Result<McOrderReport> {
    if family.members.is_empty() {
        return Err(Error::invalid("family", "must not be empty"));
    }
    if times.is_empty() {
        return Err(Error::DegenerateGrid);
    }
    let mut cols = Vec::with_capacity(times.len());
    for &t in times {
        let k = paths
            .time_grid
            .iter()
            .position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| Error::invalid("times", format!("t = {t} is not on the path grid")))?;
        cols.push((t, paths.column(k)));
    }
    let mut rows = Vec::new();
    for m in &family.members {
        for (t, (xs, ys)) in &cols {
            let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| m.function.eval(*y) - m.function.eval(*x)).collect();
            let r = MCResult::from_samples(&d, Design::PairedCoupled, paths.seed)?;
            rows.push(McOrderRow {
                name: m.name.clone(),
                t: *t,
                estimate_diff: r.estimate,
                standard_error: r.standard_error,
                z: r.z(),
            });
        }
    }
    Ok(order_report(Design::PairedCoupled, family, rows, paths.n_paths, paths.seed))
}

/// Same statistic from independent samples of `X_t` and `Y_t`.
pub fn mc_order_test_independent(
    xs: &[f64],
    ys: &[f64],
    t: f64,
    family: &TestFunctionFamily,
    seed: u64,
) -> Result<McOrderReport> {
    if family.members.is_empty() {
        return Err(Error::invalid("family", "must not be empty"));
    }
    let mut rows = Vec::new();
    for m in &family.members {
        let fx: Vec<f64> = xs.iter().map(|v| m.function.eval(*v)).collect();
        let fy: Vec<f64> = ys.iter().map(|v| m.function.eval(*v)).collect();
        let rx = MCResult::from_samples(&fx, Design::Independent, seed)?;
        let ry = MCResult::from_samples(&fy, Design::Independent, seed)?;
        let d = ry.estimate - rx.estimate;
        let se = libm::sqrt(rx.standard_error * rx.standard_error + ry.standard_error * ry.standard_error);
        rows.push(McOrderRow {
            name: m.name.clone(),
            t,
            estimate_diff: d,
            standard_error: se,
            z: z_score(d, se),
        });
    }
    Ok(order_report(Design::Independent, family, rows, xs.len().min(ys.len()), seed))
}

// ---------------------------------------------------------------------------
// Increments of finite-activity pure-jump processes

/// Sampler for `U_t - U_s` where `U` is the sum of its jumps.
struct Increments {
    lambda: f64,
    cumulative: Vec<f64>,
    samplers: Vec<JumpSampler>,
}

impl Increments {
    fn new(k: &JumpKernel, a: &TimeMeasure, s: f64, t: f64) -> Result<Self> {
        let mut lambda = 0.0;
        let mut cumulative = Vec::new();
        let mut samplers = Vec::new();
        for p in time_pieces(k, a, s, t) {
            let m = &k.cells()[p.cell].measure;
            let mass = mass_above(m, 0.0)?;
            if !mass.is_finite() {
                return Err(Error::Unsupported("infinite-activity kernel".into()));
            }
            let w = mass * p.d_a();
            if w > 0.0 {
                lambda += w;
                cumulative.push(lambda);
                samplers.push(JumpSampler::build(m, 0.0)?);
            }
        }
        Ok(Increments {
            lambda,
            cumulative,
            samplers,
        })
    }

    fn sample<R: RngCore>(&self, rng: &mut R) -> Result<f64> {
        let mut sum = 0.0;
        if self.lambda == 0.0 {
            return Ok(sum);
        }
        let mut clock = rng::exp1(rng);
        while clock < self.lambda {
            let u = rng::open01(rng) * self.lambda;
            let i = self.cumulative.partition_point(|c| *c < u).min(self.samplers.len() - 1);
            sum += self.samplers[i].sample(rng)?;
            clock += rng::exp1(rng);
        }
        Ok(sum)
    }

    fn draw(&self, n: usize, seed: u64, tag: u64) -> Result<Vec<f64>> {
        let mut r = rng::stream(seed, rng::purpose::INTERPOLATION, tag);
        (0..n).map(|_| self.sample(&mut r)).collect()
    }
}

fn check_first_moment(k: &JumpKernel) -> Result<()> {
    let id = RayFunction::identity();
    for c in k.cells() {
        if !mass_above(&c.measure, 0.0)?.is_finite() {
            return Err(Error::Unsupported("infinite-activity kernel".into()));
        }
        c.measure
            .integrate_split(&id, &id)
            .map_err(|_| Error::Hypothesis("kernel lacks a first moment".into()))?;
    }
    Ok(())
}

fn check_lipschitz(f: &Plf) -> Result<()> {
    if !f.lipschitz().is_finite() {
        return Err(Error::invalid("f", "must be Lipschitz"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Interpolation identity

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub discrepancy: f64,
    pub combined_se: f64,
}

impl InterpolationCheck {
    pub fn z(&self) -> f64 {
        z_score(self.discrepancy, self.combined_se)
    }
}

pub const INTERPOLATION_NODES: usize = 16;

/// Compares `E f(Y_t - Y_s) - E f(X_t - X_s)` for the pure-jump processes
/// with kernels `kx`, `ky` with the `alpha`-integral of the generator
/// difference along the interpolating process with kernel
/// `alpha K^Y + (1 - alpha) K^X`.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_check(
    kx: &JumpKernel,
    ky: &JumpKernel,
    a: &TimeMeasure,
    f: &Plf,
    s: f64,
    t: f64,
    n: usize,
    seed: u64,
) -> Result<InterpolationCheck> {
    if !(s >= 0.0 && t > s && t.is_finite()) {
        return Err(Error::invalid("times", "need 0 <= s < t"));
    }
    if n < 2 {
        return Err(Error::invalid("n_paths", "need at least 2 samples"));
    }
    check_lipschitz(f)?;
    check_first_moment(kx)?;
    check_first_moment(ky)?;
    let fx: Vec<f64> = Increments::new(kx, a, s, t)?.draw(n, seed, 0)?.iter().map(|v| f.eval(*v)).collect();
    let fy: Vec<f64> = Increments::new(ky, a, s, t)?.draw(n, seed, 1)?.iter().map(|v| f.eval(*v)).collect();
    let rx = MCResult::from_samples(&fx, Design::Independent, seed)?;
    let ry = MCResult::from_samples(&fy, Design::Independent, seed)?;
    let lhs = ry.estimate - rx.estimate;
    let lhs_se = libm::sqrt(rx.standard_error * rx.standard_error + ry.standard_error * ry.standard_error);

    let pair = ky.zip_with(kx, |b, c| LevyMeasure::Sum(vec![b.clone(), c.clone()]));
    let mut weights: Vec<(f64, LevyMeasure, LevyMeasure)> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for p in time_pieces(&pair, a, s, t) {
        match seen.iter().position(|c| *c == p.cell) {
            Some(i) => weights[i].0 += p.d_a(),
            None => {
                seen.push(p.cell);
                weights.push((p.d_a(), ky.at(p.start).clone(), kx.at(p.start).clone()));
            }
        }
    }
    let generator = |z: f64| -> Result<f64> {
        let g = f.translated(z).shifted(-f.eval(z));
        let (pos, neg) = g.rays()?;
        let mut v = 0.0;
        for (w, my, mx) in &weights {
            if *w != 0.0 {
                v += w * (my.integrate_split(&pos, &neg)?.value - mx.integrate_split(&pos, &neg)?.value);
            }
        }
        Ok(v)
    };
    let (nodes, gl) = gauss_legendre(INTERPOLATION_NODES);
    let mut rhs = 0.0;
    let mut var = 0.0;
    for (j, (&x, &w)) in nodes.iter().zip(&gl).enumerate() {
        let alpha = 0.5 * (x + 1.0);
        let w = 0.5 * w;
        let mix = ky.zip_with(kx, |b, c| {
            LevyMeasure::Sum(vec![b.clone().scaled(alpha), c.clone().scaled(1.0 - alpha)])
        });
        let zs = Increments::new(&mix, a, s, t)?.draw(n, seed, 2 + j as u64)?;
        let gs = zs.iter().map(|z| generator(*z)).collect::<Result<Vec<_>>>()?;
        let r = MCResult::from_samples(&gs, Design::Independent, seed)?;
        rhs += w * r.estimate;
        var += w * w * r.standard_error * r.standard_error;
    }
    let rhs_se = libm::sqrt(var);
    Ok(InterpolationCheck {
        lhs,
        lhs_se,
        rhs,
        rhs_se,
        discrepancy: lhs - rhs,
        combined_se: libm::sqrt(lhs_se * lhs_se + var),
    })
}

// ---------------------------------------------------------------------------
// Small-time rate

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LadderPoint {
    pub t: f64,
    pub estimate: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmallTimeReport {
    pub ladder: Vec<LadderPoint>,
    pub extrapolated: f64,
    pub standard_error: f64,
    /// `int f dK`.
    pub exact: f64,
    pub z: f64,
}

pub const SMALL_TIME_LEVELS: usize = 4;

/// `E f(X_t) / t` on `t = t0, t0/2, t0/4, t0/8` for the pure-jump Lévy
/// process with kernel `k`, Richardson-extrapolated to `t -> 0` and compared
/// with `int f dK`.
pub fn small_time_rate(k: &JumpKernel, f: &Plf, t0: f64, n: usize, seed: u64) -> Result<SmallTimeReport> {
    if k.cells().len() != 1 {
        return Err(Error::invalid("kernel", "must be time-homogeneous"));
    }
    if !(t0 > 0.0 && t0.is_finite()) || n < 2 {
        return Err(Error::invalid("ladder", "need t0 > 0 and at least 2 samples"));
    }
    check_lipschitz(f)?;
    check_first_moment(k)?;
    let (pos, neg) = f.rays()?;
    let exact = k.cells()[0].measure.integrate_split(&pos, &neg)?.value;
    let a = TimeMeasure::identity();
    let mut ladder = Vec::with_capacity(SMALL_TIME_LEVELS);
    for i in 0..SMALL_TIME_LEVELS {
        let t = t0 / (1u64 << i) as f64;
        let mut r = rng::stream(seed, rng::purpose::SMALL_TIME, i as u64);
        let inc = Increments::new(k, &a, 0.0, t)?;
        let v = (0..n).map(|_| inc.sample(&mut r).map(|x| f.eval(x) / t)).collect::<Result<Vec<_>>>()?;
        let m = MCResult::from_samples(&v, Design::Independent, seed)?;
        ladder.push(LadderPoint {
            t,
            estimate: m.estimate,
            standard_error: m.standard_error,
        });
    }
    // Richardson table on coefficient vectors, so the variance follows.
    let mut table: Vec<Vec<f64>> = (0..SMALL_TIME_LEVELS)
        .map(|i| {
            let mut e = vec![0.0; SMALL_TIME_LEVELS];
            e[i] = 1.0;
            e
        })
        .collect();
    for j in 1..SMALL_TIME_LEVELS {
        let d = (1u64 << j) as f64 - 1.0;
        for i in (j..SMALL_TIME_LEVELS).rev() {
            let next: Vec<f64> = table[i].iter().zip(&table[i - 1]).map(|(a, b)| a + (a - b) / d).collect();
            table[i] = next;
        }
    }
    let c = &table[SMALL_TIME_LEVELS - 1];
    let extrapolated: f64 = c.iter().zip(&ladder).map(|(c, p)| c * p.estimate).sum();
    let var: f64 = c.iter().zip(&ladder).map(|(c, p)| c * c * p.standard_error * p.standard_error).sum();
    let se = libm::sqrt(var);
    Ok(SmallTimeReport {
        ladder,
        extrapolated,
        standard_error: se,
        exact,
        z: z_score(extrapolated - exact, se),
    })
}

// ---------------------------------------------------------------------------
// Exact enumeration

pub const BRUTE_FORCE_TAIL: f64 = 1e-10;
const MAX_COMBINATIONS: f64 = 5e7;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BruteForce {
    pub ef_x: f64,
    pub ef_y: f64,
    /// Probability mass not enumerated, summed over both processes.
    pub tail_bound: f64,
}

fn atoms_of(m: &LevyMeasure, scale: f64, out: &mut Vec<(f64, f64)>) -> Result<()> {
    match m {
        LevyMeasure::Zero => {}
        LevyMeasure::CompoundPoisson {
            rate,
            jumps: JumpLaw::Atoms(a),
        } => out.extend(a.iter().map(|&(x, w)| (x, scale * rate * w))),
        LevyMeasure::Sum(v) => {
            for p in v {
                atoms_of(p, scale, out)?;
            }
        }
        LevyMeasure::Scaled(w, inner) => atoms_of(inner, scale * w, out)?,
        LevyMeasure::Reflected(inner) => {
            let mut v = Vec::new();
            atoms_of(inner, scale, &mut v)?;
            out.extend(v.into_iter().map(|(x, w)| (-x, w)));
        }
        LevyMeasure::Restricted(inner, region) => {
            let mut v = Vec::new();
            atoms_of(inner, scale, &mut v)?;
            out.extend(v.into_iter().filter(|(x, _)| region.contains(*x)));
        }
        _ => {
            return Err(Error::Unsupported(
                "exact enumeration needs atomic compound Poisson kernels".into(),
            ))
        }
    }
    Ok(())
}

fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(k as f64 * libm::log(lambda) - lambda - ln_factorial(k))
}

fn poisson_tail(lambda: f64, k_max: u64) -> f64 {
    let mut tail = 0.0;
    let mut k = k_max + 1;
    loop {
        let p = poisson_pmf(lambda, k);
        tail += p;
        if (k as f64 > lambda && p < 1e-20 * tail.max(1e-300)) || k > k_max + 10_000 {
            break;
        }
        k += 1;
    }
    tail
}

/// `E f(X_t)` for a process whose jumps are finitely many atoms, by
/// enumerating the Poisson count of each atom up to `k_max`. Returns the
/// value and the neglected probability.
pub fn brute_force_expectation(c: &PiiCharacteristics, f: &dyn Fn(f64) -> f64, t: f64, k_max: u64) -> Result<(f64, f64)> {
    if c.gaussian.eval(t) != 0.0 {
        return Err(Error::Unsupported("exact enumeration needs C = 0".into()));
    }
    if !c.fixed_jumps.is_empty() {
        return Err(Error::Unsupported("exact enumeration does not cover fixed-time jumps".into()));
    }
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for p in time_pieces(&c.kernel, &c.time_measure, 0.0, t) {
        let mut v = Vec::new();
        atoms_of(&c.kernel.cells()[p.cell].measure, p.d_a(), &mut v)?;
        atoms.extend(v);
    }
    atoms.retain(|a| a.1 > 0.0);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (x, w) in atoms {
        match merged.last_mut() {
            Some(l) if l.0 == x => l.1 += w,
            _ => merged.push((x, w)),
        }
    }
    if libm::pow(k_max as f64 + 1.0, merged.len() as f64) > MAX_COMBINATIONS {
        return Err(Error::Unsupported("too many atoms for exact enumeration".into()));
    }
    let tail: f64 = merged.iter().map(|a| poisson_tail(a.1, k_max)).sum();
    let base = c.drift.eval(t) - h_compensator(c, t)?.value;
    let pmfs: Vec<Vec<f64>> = merged.iter().map(|a| (0..=k_max).map(|k| poisson_pmf(a.1, k)).collect()).collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; merged.len()];
    loop {
        let mut p = 1.0;
        let mut x = base;
        for (i, &k) in idx.iter().enumerate() {
            p *= pmfs[i][k];
            x += k as f64 * merged[i].0;
        }
        if p > 0.0 {
            total += p * f(x);
        }
        let mut i = 0;
        while i < idx.len() {
            idx[i] += 1;
            if idx[i] as u64 <= k_max {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            break;
        }
    }
    Ok((total, tail))
}

/// Exact `(E f(X_t), E f(Y_t))` for two atomic compound Poisson processes.
/// Fails when more than `1e-10` of probability lies beyond `k_max` jumps of
/// some atom.
pub fn brute_force_oracle(
    x: &PiiCharacteristics,
    y: &PiiCharacteristics,
    f: &dyn Fn(f64) -> f64,
    t: f64,
    k_max: u64,
) -> Result<BruteForce> {
    let (ef_x, tx) = brute_force_expectation(x, f, t, k_max)?;
    let (ef_y, ty) = brute_force_expectation(y, f, t, k_max)?;
    let tail_bound = tx + ty;
    if tail_bound > BRUTE_FORCE_TAIL {
        return Err(Error::invalid(
            "k_max",
            format!("insufficient: neglected mass {tail_bound:e} above 1e-10"),
        ));
    }
    Ok(BruteForce { ef_x, ef_y, tail_bound })
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic critical value at the 1% level.
    pub critical: f64,
    pub reject: bool,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateInput("empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (nf, mf) = (n as f64, m as f64);
    let critical = 1.628 * libm::sqrt((nf + mf) / (nf * mf));
    Ok(KsResult {
        statistic: d,
        critical,
        reject: d > critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plf_eval_lsc() {
        let s = Plf::neg_step(-1.0);
        assert_eq!(s.eval(-2.0), -1.0);
        assert_eq!(s.eval(-1.0), -1.0);
        assert_eq!(s.eval(-0.5), 0.0);
        let h = Plf::hinge(1.0);
        assert_eq!(h.eval(3.0), 2.0);
        assert_eq!(h.eval(0.0), 0.0);
    }

    #[test]
    fn inf_convolution_of_parabola() {
        // piecewise-linear interpolant of x^2 on a fine grid
        let xs: Vec<f64> = (-400..=400).map(|i| i as f64 / 100.0).collect();
        let knots: Vec<(f64, f64)> = xs.iter().map(|&x| (x, x * x)).collect();
        let f = Plf::new(knots, -8.0, 8.0).unwrap();
        let g = inf_convolution(&f, 1.0).unwrap();
        for &x in &[-3.0f64, -1.0, -0.4, 0.0, 0.3, 0.5, 2.0] {
            let exact: f64 = if x.abs() <= 0.5 { x * x } else { x.abs() - 0.25 };
            assert!((g.eval(x) - exact).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn inf_convolution_of_step() {
        let x0 = -0.5;
        let f = Plf::neg_step(x0);
        for n in [1.0, 2.0, 4.0] {
            let g = inf_convolution(&f, n).unwrap();
            for &y in &[-2.0, -0.5, -0.4, -0.1, 0.0, 1.0] {
                let e: f64 = if y <= x0 { -1.0 } else { (-1.0 + n * (y - x0)).min(0.0) };
                assert_relative_eq!(g.eval(y), e, epsilon = 1e-12);
            }
        }
        assert_eq!(inf_convolution(&f, 2.0).unwrap().eval(0.0), 0.0);
    }

    #[test]
    fn inf_convolution_fixed_point_and_rejection() {
        let f = Plf::hinge(0.3);
        assert_eq!(inf_convolution(&f, 2.0).unwrap().eval(1.7), f.eval(1.7));
        let steep = Plf::linear(3.0);
        assert!(inf_convolution(&steep, 2.0).is_err());
        let put = Plf::put(0.0).scaled(5.0);
        let g = inf_convolution(&put, 2.0).unwrap();
        assert_relative_eq!(g.eval(-1.0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rays_reproduce_function() {
        let f = Plf::new(vec![(-1.0, 0.5), (0.0, 0.0), (0.5, 0.5), (0.5, 1.0), (2.0, 1.0)], -0.5, 0.0).unwrap();
        let (p, n) = f.rays().unwrap();
        for &r in &[0.25, 0.5, 0.75, 1.5, 3.0] {
            assert_relative_eq!(p.eval(r), f.eval(r), epsilon = 1e-12);
            assert_relative_eq!(n.eval(r), f.eval(-r), epsilon = 1e-12);
        }
        assert!(Plf::hinge(-1.0).rays().is_err());
        assert!(Plf::hinge(-1.0).centered().rays().is_ok());
    }

    #[test]
    fn families_have_expected_shape() {
        for class in [FamilyClass::St, FamilyClass::Icx, FamilyClass::Cx] {
            let fam = TestFunctionFamily::generate(class, 7, 2.0, 4.0).unwrap();
            assert_eq!(fam.members.len(), 20);
            for m in &fam.members {
                let f = &m.function;
                assert!(f.eval(0.0).abs() < 1e-12);
                assert!(f.lipschitz().is_finite());
                match class {
                    FamilyClass::St => assert!(f.is_nondecreasing(), "{}", m.name),
                    FamilyClass::Icx => assert!(f.is_nondecreasing() && f.is_convex()),
                    FamilyClass::Cx => assert!(f.is_convex()),
                }
            }
        }
    }

    use crate::characteristics::TruncationFunction;

    fn poisson_unit(rate: f64) -> PiiCharacteristics {
        let m = LevyMeasure::compound_poisson(rate, JumpLaw::point(1.0).unwrap()).unwrap();
        PiiCharacteristics::levy(TruncationFunction::default(), rate, 0.0, m).unwrap()
    }

    fn stop_loss_series(lambda: f64, c: f64) -> f64 {
        let mut p = libm::exp(-lambda);
        let mut total = 0.0;
        for k in 0..200u32 {
            if k > 0 {
                p *= lambda / k as f64;
            }
            total += p * (k as f64 - c).max(0.0);
        }
        total
    }

    #[test]
    fn estimate_constant_and_poisson_mean() {
        let x = poisson_unit(1.0);
        let c = estimate(&x, &|_| 2.5, &[1.0], 100, None, 1).unwrap();
        assert_eq!((c.estimate, c.standard_error), (2.5, 0.0));
        let m = estimate(&x, &|v| v[0], &[1.0], 20_000, None, 2).unwrap();
        assert!((m.estimate - 1.0).abs() < 3.0 * m.standard_error);
        let exact = stop_loss_series(1.0, 1.0);
        assert_relative_eq!(exact, libm::exp(-1.0), epsilon = 1e-12);
        let s = estimate(&x, &|v| (v[0] - 1.0).max(0.0), &[1.0], 20_000, None, 3).unwrap();
        assert!((s.estimate - exact).abs() < 3.0 * s.standard_error, "{s:?}");
    }

    #[test]
    fn non_finite_samples_are_flagged() {
        let r = MCResult::from_samples(&[1.0, f64::NAN, 3.0, f64::INFINITY], Design::Independent, 0).unwrap();
        assert_eq!((r.n_samples, r.n_nonfinite), (2, 2));
        assert_eq!(r.estimate, 2.0);
    }

    #[test]
    fn paired_order_test_on_ito_pairs() {
        let grid = [0.5, 1.0];
        let fam = TestFunctionFamily::generate(FamilyClass::St, 9, 3.0, 4.0).unwrap();
        let same = crate::ito::simulate_coupled(&poisson_unit(1.0), &poisson_unit(1.0), 1.0, &grid, 500, None, 4).unwrap();
        let r = mc_order_test(&same, &fam, &[1.0]).unwrap();
        assert!(r.rows.iter().all(|row| row.estimate_diff == 0.0 && row.z == 0.0));
        assert!(!r.violation);

        let up = crate::ito::simulate_coupled(&poisson_unit(1.0), &poisson_unit(2.0), 1.0, &grid, 2000, None, 5).unwrap();
        let r = mc_order_test(&up, &fam, &[0.5, 1.0]).unwrap();
        assert_eq!(r.rows.len(), 40);
        assert!(r.rows.iter().all(|row| row.estimate_diff >= 0.0 && row.z >= 0.0));
        assert_eq!(r.summary, "no violation detected");

        let down = crate::ito::simulate_coupled(&poisson_unit(2.0), &poisson_unit(1.0), 1.0, &grid, 2000, None, 6).unwrap();
        let id = TestFunctionFamily::from_functions(FamilyClass::St, vec![("x".into(), Plf::linear(1.0))]);
        let r = mc_order_test(&down, &id, &[1.0]).unwrap();
        assert!(r.violation && r.min_z <= -3.0);
        assert!(mc_order_test(&down, &id, &[0.75]).is_err());
    }

    #[test]
    fn interpolation_identity_for_poisson_rates() {
        let k = |rate: f64| JumpKernel::homogeneous(LevyMeasure::compound_poisson(rate, JumpLaw::point(1.0).unwrap()).unwrap());
        let a = TimeMeasure::identity();
        let zero = interpolation_check(&k(1.0), &k(1.0), &a, &Plf::linear(1.0), 0.0, 1.0, 2000, 1).unwrap();
        assert_eq!(zero.rhs, 0.0);
        assert!(zero.discrepancy.abs() <= 3.0 * zero.combined_se);

        let lin = interpolation_check(&k(1.0), &k(2.0), &a, &Plf::linear(1.0), 0.0, 1.0, 20_000, 2).unwrap();
        assert_relative_eq!(lin.rhs, 1.0, epsilon = 1e-12);
        assert!((lin.lhs - 1.0).abs() < 3.0 * lin.lhs_se);

        let hinge = interpolation_check(&k(1.0), &k(2.0), &a, &Plf::hinge(1.0), 0.0, 1.0, 20_000, 3).unwrap();
        let exact = stop_loss_series(2.0, 1.0) - stop_loss_series(1.0, 1.0);
        assert_relative_eq!(exact, 0.7674558, epsilon = 1e-7);
        assert!((hinge.lhs - exact).abs() < 3.0 * hinge.lhs_se, "{hinge:?}");
        assert!(hinge.discrepancy.abs() < 3.0 * hinge.combined_se, "{hinge:?}");
        assert!((hinge.rhs - exact).abs() < 3.0 * hinge.rhs_se + 1e-9, "{hinge:?}");
    }

    #[test]
    fn interpolation_rejects_infinite_activity() {
        let k = JumpKernel::homogeneous(LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap());
        let r = interpolation_check(&k, &k, &TimeMeasure::identity(), &Plf::linear(1.0), 0.0, 1.0, 10, 1);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn small_time_rates() {
        let k = JumpKernel::homogeneous(LevyMeasure::compound_poisson(1.5, JumpLaw::point(1.0).unwrap()).unwrap());
        let r = small_time_rate(&k, &Plf::linear(1.0), 0.1, 40_000, 1).unwrap();
        assert_eq!(r.exact, 1.5);
        for p in &r.ladder {
            assert!((p.estimate - 1.5).abs() < 3.0 * p.standard_error);
        }
        assert!(r.z.abs() < 3.0);
        let z = small_time_rate(&k, &Plf::zero(), 0.1, 100, 1).unwrap();
        assert_eq!((z.extrapolated, z.exact), (0.0, 0.0));

        let e = JumpKernel::homogeneous(LevyMeasure::compound_poisson(1.0, JumpLaw::Exponential { rate: 1.0 }).unwrap());
        let r = small_time_rate(&e, &Plf::hinge(0.5), 0.1, 100_000, 2).unwrap();
        assert_relative_eq!(r.exact, libm::exp(-0.5), epsilon = 1e-9);
        assert!(r.z.abs() < 3.0, "{r:?}");

        let two = JumpKernel::piecewise(vec![
            crate::kernel::KernelCell { start: 0.0, measure: LevyMeasure::Zero },
            crate::kernel::KernelCell { start: 1.0, measure: LevyMeasure::Zero },
        ])
        .unwrap();
        assert!(small_time_rate(&two, &Plf::linear(1.0), 0.1, 10, 1).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let id = |x: f64| x;
        let r = brute_force_oracle(&poisson_unit(1.0), &poisson_unit(2.0), &id, 1.0, 40).unwrap();
        assert_relative_eq!(r.ef_x, 1.0, epsilon = 1e-10);
        assert_relative_eq!(r.ef_y, 2.0, epsilon = 1e-10);
        let ind = |x: f64| if x >= 1.0 { 1.0 } else { 0.0 };
        let r = brute_force_oracle(&poisson_unit(1.0), &poisson_unit(2.0), &ind, 1.0, 40).unwrap();
        assert_relative_eq!(r.ef_x, 1.0 - libm::exp(-1.0), epsilon = 1e-10);
        assert_relative_eq!(r.ef_y, 1.0 - libm::exp(-2.0), epsilon = 1e-10);
        let h = TruncationFunction::default();
        let bx = PiiCharacteristics::levy(h, 0.5, 0.0, LevyMeasure::Zero).unwrap();
        let by = PiiCharacteristics::levy(h, -2.0, 0.0, LevyMeasure::Zero).unwrap();
        let sq = |x: f64| x * x;
        let r = brute_force_oracle(&bx, &by, &sq, 2.0, 5).unwrap();
        assert_eq!((r.ef_x, r.ef_y), (1.0, 16.0));
        assert!(brute_force_oracle(&poisson_unit(1.0), &poisson_unit(2.0), &id, 1.0, 5).is_err());
    }

    #[test]
    fn brute_force_agrees_with_estimate() {
        let m = LevyMeasure::compound_poisson(1.2, JumpLaw::atoms(vec![(-0.5, 0.25), (1.5, 0.75)]).unwrap()).unwrap();
        let x = PiiCharacteristics::levy(TruncationFunction::default(), 0.3, 0.0, m).unwrap();
        let f = |v: f64| (v - 0.5).max(0.0);
        let (exact, tail) = brute_force_expectation(&x, &f, 1.0, 40).unwrap();
        assert!(tail < 1e-10);
        let mc = estimate(&x, &|v| f(v[0]), &[1.0], 20_000, None, 8).unwrap();
        assert!((mc.estimate - exact).abs() < 3.0 * mc.standard_error, "{exact} {mc:?}");
    }

    #[test]
    fn ks_detects_shift() {
        let mut r = rng::stream(1, 99, 0);
        let a: Vec<f64> = (0..2000).map(|_| rng::normal(&mut r)).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng::normal(&mut r)).collect();
        let c: Vec<f64> = b.iter().map(|v| v + 0.3).collect();
        assert!(!ks_two_sample(&a, &b).unwrap().reject);
        assert!(ks_two_sample(&a, &c).unwrap().reject);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap().statistic, 0.0);
    }
}
