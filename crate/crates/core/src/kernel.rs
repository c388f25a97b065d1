//! Jump kernels `K(t, dx)` and their tail functionals.
//!
//! Every functional the checkers and samplers need is expressed through the
//! two one-sided tails of a measure,
//!
//! ```text
//! T+(r) = K([r, inf)),   T-(r) = K((-inf, -r]),   r > 0,
//! ```
//! and their integrals `int_a^b T(y) dy`. For a function `g` on `(0, inf)`
//! that is piecewise linear with `g(0+) = 0`,
//!
//! ```text
//! int_{(0,inf)} g dK = sum_j slope_j * int_{c_j}^{c_{j+1}} T+(y) dy + sum_d jump_d * T+(d)
//! ```
//! which covers stop-loss transforms, truncation functions, means and every
//! Lipschitz test function with `f(0) = 0` (see [`RayFunction`]).

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{
    integrate, integrate_exp_tail, integrate_power_origin, Estimate, MonotoneCubic, Tolerance,
};

/// Which half-line a tail refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pos,
    Neg,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Pos => 1.0,
            Side::Neg => -1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Pos => Side::Neg,
            Side::Neg => Side::Pos,
        }
    }

    pub fn of(x: f64) -> Side {
        if x > 0.0 {
            Side::Pos
        } else {
            Side::Neg
        }
    }
}

// ---------------------------------------------------------------------------
// Jump-size laws

/// Probability law of a single jump size. Never charges `0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum JumpLaw {
    /// Finitely many sizes `(location, weight)`; weights are normalised.
    Atoms(Vec<(f64, f64)>),
    /// Positive jumps with density `rate * exp(-rate x)`.
    Exponential { rate: f64 },
    /// Negative jumps, mirror image of `Exponential`.
    NegExponential { rate: f64 },
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl JumpLaw {
    pub fn atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atoms", "empty atom list"));
        }
        let mut total = 0.0;
        for &(x, w) in &atoms {
            if x == 0.0 || !x.is_finite() {
                return Err(Error::invalid("atoms", "jump law may not charge 0"));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid("atoms", "weights must be positive"));
            }
            total += w;
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        for a in atoms.iter_mut() {
            a.1 /= total;
        }
        Ok(JumpLaw::Atoms(atoms))
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::atoms(vec![(x, 1.0)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JumpLaw::Atoms(a) => {
                Self::atoms(a.clone())?;
            }
            JumpLaw::Exponential { rate } | JumpLaw::NegExponential { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("rate", "exponential rate must be positive"));
                }
            }
            JumpLaw::Uniform { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::invalid("uniform", "need finite lo < hi"));
                }
            }
        }
        Ok(())
    }

    /// `P(side * J >= r)` (closed) or `P(side * J > r)` (open), `r > 0`.
    pub fn tail(&self, side: Side, r: f64, closed: bool) -> f64 {
        let s = side.sign();
        match self {
            JumpLaw::Atoms(a) => a
                .iter()
                .filter(|(x, _)| {
                    let v = s * x;
                    if closed {
                        v >= r
                    } else {
                        v > r
                    }
                })
                .map(|(_, w)| w)
                .sum(),
            JumpLaw::Exponential { rate } => match side {
                Side::Pos => libm::exp(-rate * r),
                Side::Neg => 0.0,
            },
            JumpLaw::NegExponential { rate } => match side {
                Side::Pos => 0.0,
                Side::Neg => libm::exp(-rate * r),
            },
            JumpLaw::Uniform { lo, hi } => {
                let (l, h) = if s > 0.0 { (*lo, *hi) } else { (-*hi, -*lo) };
                ((h - r.max(l)) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }

    /// `P(side * J > 0)`.
    pub fn side_mass(&self, side: Side) -> f64 {
        self.tail(side, f64::MIN_POSITIVE, false)
            .max(self.tail(side, f64::MIN_POSITIVE, true))
    }

    /// `int_a^b P(side * J >= y) dy` for `0 <= a <= b <= inf`.
    pub fn tail_integral(&self, side: Side, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let s = side.sign();
        match self {
            JumpLaw::Atoms(atoms) => atoms
                .iter()
                .map(|&(x, w)| w * (((s * x).min(b)) - a).max(0.0))
                .sum(),
            JumpLaw::Exponential { rate } | JumpLaw::NegExponential { rate } => {
                let active = matches!(
                    (self, side),
                    (JumpLaw::Exponential { .. }, Side::Pos) | (JumpLaw::NegExponential { .. }, Side::Neg)
                );
                if !active {
                    return 0.0;
                }
                let eb = if b.is_finite() { libm::exp(-rate * b) } else { 0.0 };
                (libm::exp(-rate * a) - eb) / rate
            }
            JumpLaw::Uniform { lo, hi } => {
                let (l, h) = if s > 0.0 { (*lo, *hi) } else { (-*hi, -*lo) };
                let w = hi - lo;
                // survival: 1 on (-inf, l], (h - y)/w on [l, h], 0 after
                let flat = (b.min(l) - a).max(0.0);
                let (p, q) = (a.max(l), b.min(h));
                let slope_part = if q > p {
                    ((h - p) * (h - p) - (h - q) * (h - q)) / (2.0 * w)
                } else {
                    0.0
                };
                flat + slope_part
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpLaw::Atoms(a) => a.iter().map(|(x, w)| x * w).sum(),
            JumpLaw::Exponential { rate } => 1.0 / rate,
            JumpLaw::NegExponential { rate } => -1.0 / rate,
            JumpLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// `P(J <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            JumpLaw::Atoms(a) => a.iter().filter(|(y, _)| *y <= x).map(|(_, w)| w).sum(),
            JumpLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - libm::exp(-rate * x)
                }
            }
            JumpLaw::NegExponential { rate } => {
                if x >= 0.0 {
                    1.0
                } else {
                    libm::exp(rate * x)
                }
            }
            JumpLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Left limit `P(J < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            JumpLaw::Atoms(a) => a.iter().filter(|(y, _)| *y < x).map(|(_, w)| w).sum(),
            _ => self.cdf(x),
        }
    }

    /// Generalised inverse `inf { x : P(J <= x) >= u }`, `u` in `(0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            JumpLaw::Atoms(a) => {
                let mut acc = 0.0;
                for &(x, w) in a {
                    acc += w;
                    if acc >= u * (1.0 - 1e-15) {
                        return x;
                    }
                }
                a[a.len() - 1].0
            }
            JumpLaw::Exponential { rate } => -libm::log1p(-u.min(1.0 - 1e-300)) / rate,
            JumpLaw::NegExponential { rate } => libm::log(u.max(1e-300)) / rate,
            JumpLaw::Uniform { lo, hi } => lo + u * (hi - lo),
        }
    }

    /// Locations where the law has an atom or its density has a kink.
    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            JumpLaw::Atoms(a) => out.extend(a.iter().map(|p| p.0)),
            JumpLaw::Uniform { lo, hi } => {
                out.push(*lo);
                out.push(*hi);
            }
            _ => {}
        }
    }

    pub fn atoms_list(&self) -> Vec<f64> {
        match self {
            JumpLaw::Atoms(a) => a.iter().map(|p| p.0).collect(),
            _ => Vec::new(),
        }
    }

    pub fn reflected(&self) -> JumpLaw {
        match self {
            JumpLaw::Atoms(a) => {
                let mut b: Vec<(f64, f64)> = a.iter().map(|&(x, w)| (-x, w)).collect();
                b.sort_by(|p, q| p.0.total_cmp(&q.0));
                JumpLaw::Atoms(b)
            }
            JumpLaw::Exponential { rate } => JumpLaw::NegExponential { rate: *rate },
            JumpLaw::NegExponential { rate } => JumpLaw::Exponential { rate: *rate },
            JumpLaw::Uniform { lo, hi } => JumpLaw::Uniform { lo: -*hi, hi: -*lo },
        }
    }
}

// ---------------------------------------------------------------------------
// CGMY

/// Tempered-stable density `c e^{-m x} / x^{1+y}` (x > 0) and
/// `c e^{-g|x|} / |x|^{1+y}` (x < 0).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CgmyParams {
    pub c: f64,
    pub g: f64,
    pub m: f64,
    pub y: f64,
}

impl CgmyParams {
    pub fn new(c: f64, g: f64, m: f64, y: f64) -> Result<Self> {
        let p = CgmyParams { c, g, m, y };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::invalid("cgmy.c", "must be finite and >= 0"));
        }
        if !(self.g > 0.0 && self.m > 0.0 && self.g.is_finite() && self.m.is_finite()) {
            return Err(Error::invalid("cgmy.g/m", "tempering rates must be positive"));
        }
        if !(self.y < 2.0 && self.y.is_finite()) {
            return Err(Error::invalid("cgmy.y", "must satisfy y < 2"));
        }
        Ok(())
    }

    fn rate(&self, side: Side) -> f64 {
        match side {
            Side::Pos => self.m,
            Side::Neg => self.g,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let lam = self.rate(Side::of(x));
        let ax = x.abs();
        self.c * libm::exp(-lam * ax) * libm::pow(ax, -1.0 - self.y)
    }

    fn side_density(&self, side: Side, s: f64) -> f64 {
        self.c * libm::exp(-self.rate(side) * s) * libm::pow(s, -1.0 - self.y)
    }

    /// `int_x^inf k(s) ds`, `x > 0`.
    pub fn tail(&self, side: Side, x: f64) -> Result<f64> {
        if self.c == 0.0 {
            return Ok(0.0);
        }
        let lam = self.rate(side);
        let split = x.max(1.0 / lam);
        let tol = Tolerance::DEFAULT;
        let mut total = 0.0;
        if split > x {
            // s = x e^sigma
            let e = integrate(
                |sig: f64| {
                    let s = x * libm::exp(sig);
                    self.side_density(side, s) * s
                },
                0.0,
                libm::log(split / x),
                tol,
            )?;
            total += e.value;
        }
        let e = integrate_exp_tail(|s| self.side_density(side, s), split, lam, tol)?;
        Ok(total + e.value)
    }

    /// `int_a^b (s - a) k(s) ds` for `0 <= a < b <= inf`.
    fn shifted_moment(&self, side: Side, a: f64, b: f64) -> Result<Estimate> {
        let lam = self.rate(side);
        let split = a.max(1.0 / lam);
        let tol = Tolerance::DEFAULT;
        let f = |s: f64| (s - a) * self.side_density(side, s);
        let mut total = Estimate::ZERO;
        let left_end = b.min(split);
        if left_end > a {
            if a == 0.0 {
                total = total + integrate_power_origin(f, left_end, self.y, tol)?;
            } else {
                total = total
                    + integrate(
                        |sig: f64| {
                            let s = a * libm::exp(sig);
                            f(s) * s
                        },
                        0.0,
                        libm::log(left_end / a),
                        tol,
                    )?;
            }
        }
        if b > split {
            if b.is_finite() {
                total = total
                    + integrate(
                        |sig: f64| {
                            let s = split * libm::exp(sig);
                            f(s) * s
                        },
                        0.0,
                        libm::log(b / split),
                        tol,
                    )?;
            } else {
                total = total + integrate_exp_tail(f, split, lam, tol)?;
            }
        }
        Ok(total)
    }

    pub fn tail_integral(&self, side: Side, a: f64, b: f64) -> Result<Estimate> {
        if !(b > a) || self.c == 0.0 {
            return Ok(Estimate::ZERO);
        }
        if a == 0.0 && self.y >= 1.0 {
            return Err(Error::Divergent(format!(
                "first moment near the origin is infinite for y = {}",
                self.y
            )));
        }
        let mut e = self.shifted_moment(side, a, b)?;
        if b.is_finite() {
            e = e + Estimate::exact((b - a) * self.tail(side, b)?);
        }
        Ok(e)
    }

    pub fn side_mass(&self, side: Side) -> f64 {
        if self.c == 0.0 {
            0.0
        } else if self.y < 0.0 {
            self.c * libm::pow(self.rate(side), self.y) * libm::tgamma(-self.y)
        } else {
            f64::INFINITY
        }
    }
}

// ---------------------------------------------------------------------------
// Tabulated tails

/// Tails tabulated on a grid of jump magnitudes, interpolated by a monotone
/// cubic. Below the first grid point the tail is held constant (no jumps of
/// smaller magnitude); beyond the last point it drops to zero, which places
/// the remaining mass `T(x_max)` in an atom at `x_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailTable {
    pos: Option<MonotoneCubic>,
    neg: Option<MonotoneCubic>,
}

impl TailTable {
    /// `pos`/`neg`: `(magnitude > 0, tail value)` pairs, magnitudes strictly
    /// increasing, tail values nonnegative and nonincreasing.
    pub fn new(pos: Vec<(f64, f64)>, neg: Vec<(f64, f64)>) -> Result<Self> {
        Ok(TailTable {
            pos: Self::side(pos)?,
            neg: Self::side(neg)?,
        })
    }

    fn side(pts: Vec<(f64, f64)>) -> Result<Option<MonotoneCubic>> {
        if pts.is_empty() {
            return Ok(None);
        }
        if pts.iter().any(|p| !(p.0 > 0.0) || !(p.1 >= 0.0) || !p.1.is_finite()) {
            return Err(Error::invalid("tabulated", "grid must be positive and tails finite >= 0"));
        }
        if pts.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(Error::invalid("tabulated", "tail values must be nonincreasing"));
        }
        let (xs, ys) = pts.into_iter().unzip();
        Ok(Some(MonotoneCubic::new(xs, ys)?))
    }

    /// Samples the tails of `measure` at the given magnitudes.
    pub fn from_measure(measure: &LevyMeasure, pos: &[f64], neg: &[f64]) -> Result<Self> {
        let mut p = Vec::with_capacity(pos.len());
        for &x in pos {
            p.push((x, measure.tail(Side::Pos, x, true)?));
        }
        let mut n = Vec::with_capacity(neg.len());
        for &x in neg {
            n.push((x, measure.tail(Side::Neg, x, true)?));
        }
        Self::new(p, n)
    }

    fn get(&self, side: Side) -> Option<&MonotoneCubic> {
        match side {
            Side::Pos => self.pos.as_ref(),
            Side::Neg => self.neg.as_ref(),
        }
    }

    pub fn tail(&self, side: Side, r: f64, closed: bool) -> f64 {
        match self.get(side) {
            None => 0.0,
            Some(m) => {
                let xs = m.xs();
                let last = xs[xs.len() - 1];
                if r > last || (r == last && !closed) {
                    0.0
                } else {
                    m.eval(r)
                }
            }
        }
    }

    pub fn tail_integral(&self, side: Side, a: f64, b: f64) -> f64 {
        match self.get(side) {
            None => 0.0,
            Some(m) => {
                let xs = m.xs();
                let (first, last) = (xs[0], xs[xs.len() - 1]);
                let flat = (b.min(first) - a).max(0.0) * m.ys()[0];
                flat + m.integral(a.max(first), b.min(last))
            }
        }
    }

    pub fn side_mass(&self, side: Side) -> f64 {
        self.get(side).map_or(0.0, |m| m.ys()[0])
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        if let Some(m) = &self.pos {
            out.push(m.xs()[m.xs().len() - 1]);
        }
        if let Some(m) = &self.neg {
            out.push(-m.xs()[m.xs().len() - 1]);
        }
    }

    fn atoms(&self, out: &mut Vec<f64>) {
        self.breakpoints(out)
    }
}

// ---------------------------------------------------------------------------
// Regions

/// An interval of jump sizes with explicit endpoint closedness.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Region {
    pub const ALL: Region = Region {
        lo: f64::NEG_INFINITY,
        lo_closed: false,
        hi: f64::INFINITY,
        hi_closed: false,
    };

    pub fn new(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Self {
        Region {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }

    /// `[a, inf)` or `(a, inf)`.
    pub fn above(a: f64, closed: bool) -> Self {
        Region::new(a, closed, f64::INFINITY, false)
    }

    /// `(-inf, a]` or `(-inf, a)`.
    pub fn below(a: f64, closed: bool) -> Self {
        Region::new(f64::NEG_INFINITY, false, a, closed)
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let hi_ok = if self.hi_closed { x <= self.hi } else { x < self.hi };
        lo_ok && hi_ok
    }

    /// The part of the region on one side, as magnitudes `(lo, lo_closed, hi, hi_closed)`.
    fn side_part(&self, side: Side) -> Option<(f64, bool, f64, bool)> {
        let (lo, lc, hi, hc) = match side {
            Side::Pos => (self.lo, self.lo_closed, self.hi, self.hi_closed),
            Side::Neg => (-self.hi, self.hi_closed, -self.lo, self.lo_closed),
        };
        let (lo, lc) = if lo <= 0.0 { (0.0, false) } else { (lo, lc) };
        if hi < lo || (hi == lo && !(lc && hc)) || hi <= 0.0 {
            return None;
        }
        Some((lo, lc, hi, hc))
    }

    pub fn bounded_away_from_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

// ---------------------------------------------------------------------------
// Functions on a half-line

/// Jump discontinuity of a [`RayFunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayJump {
    pub at: f64,
    pub size: f64,
    /// `true` if the function already takes its new value at `at`.
    pub right_continuous: bool,
}

/// A piecewise-linear function `g` on `(0, inf)` with `g(0+) = 0`, possibly
/// with jumps. `slopes[i] = (start_i, slope_i)` holds on `[start_i, start_{i+1})`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RayFunction {
    pub slopes: Vec<(f64, f64)>,
    pub jumps: Vec<RayJump>,
}

impl RayFunction {
    pub fn zero() -> Self {
        RayFunction::default()
    }

    pub fn identity() -> Self {
        RayFunction {
            slopes: vec![(0.0, 1.0)],
            jumps: Vec::new(),
        }
    }

    /// `(r - x)+` for `x >= 0`.
    pub fn hinge(x: f64) -> Self {
        RayFunction {
            slopes: vec![(0.0, 0.0), (x.max(0.0), 1.0)],
            jumps: Vec::new(),
        }
    }

    /// `min(r, theta)`.
    pub fn clip(theta: f64) -> Self {
        RayFunction {
            slopes: vec![(0.0, 1.0), (theta, 0.0)],
            jumps: Vec::new(),
        }
    }

    /// `r * 1{r <= theta}`.
    pub fn cutoff(theta: f64) -> Self {
        RayFunction {
            slopes: vec![(0.0, 1.0), (theta, 0.0)],
            jumps: vec![RayJump {
                at: theta,
                size: -theta,
                right_continuous: false,
            }],
        }
    }

    /// `r * 1{r < eps}`.
    pub fn below(eps: f64) -> Self {
        RayFunction {
            slopes: vec![(0.0, 1.0), (eps, 0.0)],
            jumps: vec![RayJump {
                at: eps,
                size: -eps,
                right_continuous: true,
            }],
        }
    }

    /// `1{r > eps} * g(r)` for this `g`.
    pub fn restricted_above(&self, eps: f64) -> Self {
        if eps <= 0.0 {
            return self.clone();
        }
        let g_eps = self.eval(eps);
        let mut slopes = vec![(0.0, 0.0)];
        let mut started = false;
        for (i, &(s, k)) in self.slopes.iter().enumerate() {
            let end = self.slopes.get(i + 1).map_or(f64::INFINITY, |p| p.0);
            if end <= eps {
                continue;
            }
            if !started {
                slopes.push((eps, k));
                started = true;
            } else {
                slopes.push((s, k));
            }
        }
        let mut jumps = vec![RayJump {
            at: eps,
            size: g_eps,
            right_continuous: false,
        }];
        jumps.extend(self.jumps.iter().filter(|j| j.at > eps).copied());
        RayFunction { slopes, jumps }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &RayFunction, b: f64) -> RayFunction {
        let mut starts: Vec<f64> = self
            .slopes
            .iter()
            .chain(other.slopes.iter())
            .map(|p| p.0)
            .collect();
        starts.push(0.0);
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        let slopes = starts
            .into_iter()
            .map(|s| (s, a * self.slope_at(s) + b * other.slope_at(s)))
            .collect();
        let jumps = self
            .jumps
            .iter()
            .map(|j| RayJump { size: a * j.size, ..*j })
            .chain(other.jumps.iter().map(|j| RayJump { size: b * j.size, ..*j }))
            .filter(|j| j.size != 0.0)
            .collect();
        RayFunction { slopes, jumps }
    }

    /// Right-hand slope at `r`.
    pub fn slope_at(&self, r: f64) -> f64 {
        let i = self.slopes.partition_point(|p| p.0 <= r);
        if i == 0 {
            0.0
        } else {
            self.slopes[i - 1].1
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut v = 0.0;
        for (i, &(s, k)) in self.slopes.iter().enumerate() {
            let end = self.slopes.get(i + 1).map_or(f64::INFINITY, |p| p.0);
            if r <= s {
                break;
            }
            v += k * (r.min(end) - s);
        }
        for j in &self.jumps {
            if r > j.at || (r == j.at && j.right_continuous) {
                v += j.size;
            }
        }
        v
    }
}

// ---------------------------------------------------------------------------
// Levy measures

/// A Lévy measure on `R \ {0}` (one time cell of a kernel).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LevyMeasure {
    Zero,
    Cgmy(CgmyParams),
    CompoundPoisson { rate: f64, jumps: JumpLaw },
    Tabulated(TailTable),
    Sum(Vec<LevyMeasure>),
    Scaled(f64, Box<LevyMeasure>),
    /// `first - second`; only meaningful when nonnegative.
    Difference(Box<LevyMeasure>, Box<LevyMeasure>),
    Restricted(Box<LevyMeasure>, Region),
    Reflected(Box<LevyMeasure>),
}

impl LevyMeasure {
    pub fn compound_poisson(rate: f64, jumps: JumpLaw) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::invalid("rate", "must be finite and >= 0"));
        }
        jumps.validate()?;
        Ok(LevyMeasure::CompoundPoisson { rate, jumps })
    }

    pub fn cgmy(c: f64, g: f64, m: f64, y: f64) -> Result<Self> {
        Ok(LevyMeasure::Cgmy(CgmyParams::new(c, g, m, y)?))
    }

    pub fn sum(self, other: LevyMeasure) -> LevyMeasure {
        match (self, other) {
            (LevyMeasure::Zero, b) => b,
            (a, LevyMeasure::Zero) => a,
            (LevyMeasure::Sum(mut v), b) => {
                v.push(b);
                LevyMeasure::Sum(v)
            }
            (a, b) => LevyMeasure::Sum(vec![a, b]),
        }
    }

    pub fn scaled(self, w: f64) -> LevyMeasure {
        if w == 1.0 {
            self
        } else if w == 0.0 {
            LevyMeasure::Zero
        } else {
            LevyMeasure::Scaled(w, Box::new(self))
        }
    }

    pub fn minus(self, other: LevyMeasure) -> LevyMeasure {
        if other == LevyMeasure::Zero {
            return self;
        }
        LevyMeasure::Difference(Box::new(self), Box::new(other))
    }

    pub fn restricted(self, region: Region) -> LevyMeasure {
        if region == Region::ALL {
            return self;
        }
        LevyMeasure::Restricted(Box::new(self), region)
    }

    pub fn reflected(self) -> LevyMeasure {
        match self {
            LevyMeasure::Zero => LevyMeasure::Zero,
            LevyMeasure::Reflected(inner) => *inner,
            other => LevyMeasure::Reflected(Box::new(other)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LevyMeasure::Zero | LevyMeasure::Tabulated(_) => Ok(()),
            LevyMeasure::Cgmy(p) => p.validate(),
            LevyMeasure::CompoundPoisson { rate, jumps } => {
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("rate", "must be finite and >= 0"));
                }
                jumps.validate()
            }
            LevyMeasure::Sum(v) => v.iter().try_for_each(|m| m.validate()),
            LevyMeasure::Scaled(w, m) => {
                if !(*w >= 0.0 && w.is_finite()) {
                    return Err(Error::invalid("scale", "must be finite and >= 0"));
                }
                m.validate()
            }
            LevyMeasure::Difference(a, b) => {
                a.validate()?;
                b.validate()
            }
            LevyMeasure::Restricted(m, _) | LevyMeasure::Reflected(m) => m.validate(),
        }
    }

    /// `K([r, inf))` on `Pos` or `K((-inf, -r])` on `Neg` (closed), or the
    /// open versions. Requires `r > 0`.
    pub fn tail(&self, side: Side, r: f64, closed: bool) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::TailAtOrigin);
        }
        Ok(match self {
            LevyMeasure::Zero => 0.0,
            LevyMeasure::Cgmy(p) => p.tail(side, r)?,
            LevyMeasure::CompoundPoisson { rate, jumps } => rate * jumps.tail(side, r, closed),
            LevyMeasure::Tabulated(t) => t.tail(side, r, closed),
            LevyMeasure::Sum(v) => {
                let mut s = 0.0;
                for m in v {
                    s += m.tail(side, r, closed)?;
                }
                s
            }
            LevyMeasure::Scaled(w, m) => w * m.tail(side, r, closed)?,
            LevyMeasure::Difference(a, b) => a.tail(side, r, closed)? - b.tail(side, r, closed)?,
            LevyMeasure::Reflected(m) => m.tail(side.flip(), r, closed)?,
            LevyMeasure::Restricted(m, region) => match region.side_part(side) {
                None => 0.0,
                Some((lo, lc, hi, hc)) => {
                    // mass of [max(r, lo), hi] with the right closedness
                    let (start, start_closed) = if r > lo {
                        (r, closed)
                    } else if r == lo {
                        (r, closed && lc)
                    } else {
                        (lo, lc)
                    };
                    if start > hi || (start == hi && !(start_closed && hc)) {
                        0.0
                    } else {
                        let upper = m.tail(side, start, start_closed)?;
                        let beyond = if hi.is_finite() {
                            m.tail(side, hi, !hc)?
                        } else {
                            0.0
                        };
                        (upper - beyond).max(0.0)
                    }
                }
            },
        })
    }

    /// Total mass on one side (possibly infinite).
    pub fn side_mass(&self, side: Side) -> Result<f64> {
        Ok(match self {
            LevyMeasure::Zero => 0.0,
            LevyMeasure::Cgmy(p) => p.side_mass(side),
            LevyMeasure::CompoundPoisson { rate, jumps } => rate * jumps.side_mass(side),
            LevyMeasure::Tabulated(t) => t.side_mass(side),
            LevyMeasure::Sum(v) => {
                let mut s = 0.0;
                for m in v {
                    s += m.side_mass(side)?;
                }
                s
            }
            LevyMeasure::Scaled(w, m) => w * m.side_mass(side)?,
            LevyMeasure::Difference(a, b) => {
                let (ma, mb) = (a.side_mass(side)?, b.side_mass(side)?);
                if ma.is_infinite() && mb.is_infinite() {
                    return Err(Error::Divergent(
                        "mass of a difference of infinite-activity measures".into(),
                    ));
                }
                ma - mb
            }
            LevyMeasure::Reflected(m) => m.side_mass(side.flip())?,
            LevyMeasure::Restricted(m, region) => match region.side_part(side) {
                None => 0.0,
                Some((lo, lc, hi, hc)) => {
                    let upper = if lo > 0.0 {
                        m.tail(side, lo, lc)?
                    } else {
                        m.side_mass(side)?
                    };
                    let beyond = if hi.is_finite() {
                        m.tail(side, hi, !hc)?
                    } else {
                        0.0
                    };
                    if upper.is_infinite() {
                        f64::INFINITY
                    } else {
                        (upper - beyond).max(0.0)
                    }
                }
            },
        })
    }

    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.side_mass(Side::Pos)? + self.side_mass(Side::Neg)?)
    }

    pub fn is_finite_activity(&self) -> Result<bool> {
        Ok(self.total_mass()?.is_finite())
    }

    /// `int_a^b T(side, y) dy` for `0 <= a <= b <= inf`.
    pub fn tail_integral(&self, side: Side, a: f64, b: f64) -> Result<Estimate> {
        if !(b > a) {
            return Ok(Estimate::ZERO);
        }
        Ok(match self {
            LevyMeasure::Zero => Estimate::ZERO,
            LevyMeasure::Cgmy(p) => p.tail_integral(side, a, b)?,
            LevyMeasure::CompoundPoisson { rate, jumps } => {
                Estimate::exact(rate * jumps.tail_integral(side, a, b))
            }
            LevyMeasure::Tabulated(t) => Estimate::exact(t.tail_integral(side, a, b)),
            LevyMeasure::Sum(v) => {
                let mut s = Estimate::ZERO;
                for m in v {
                    s = s + m.tail_integral(side, a, b)?;
                }
                s
            }
            LevyMeasure::Scaled(w, m) => m.tail_integral(side, a, b)? * *w,
            LevyMeasure::Difference(x, y) => {
                x.tail_integral(side, a, b)? - y.tail_integral(side, a, b)?
            }
            LevyMeasure::Reflected(m) => m.tail_integral(side.flip(), a, b)?,
            LevyMeasure::Restricted(m, region) => match region.side_part(side) {
                None => Estimate::ZERO,
                Some((lo, lc, hi, hc)) => {
                    // T_R(y) = K_R(total) on [0, lo], T(y) - T_beyond on (lo, hi], 0 after
                    let beyond = if hi.is_finite() {
                        m.tail(side, hi, !hc)?
                    } else {
                        0.0
                    };
                    let mut e = Estimate::ZERO;
                    let flat_len = (b.min(lo) - a).max(0.0);
                    if flat_len > 0.0 {
                        let total = m.tail(side, lo, lc)? - beyond;
                        e = e + Estimate::exact(flat_len * total);
                    }
                    let (p, q) = (a.max(lo), b.min(hi));
                    if q > p {
                        e = e + m.tail_integral(side, p, q)?;
                        e = e - Estimate::exact((q - p) * beyond);
                    }
                    e
                }
            },
        })
    }

    /// Signed locations where a tail may jump (atoms).
    pub fn atoms(&self, out: &mut Vec<f64>) {
        match self {
            LevyMeasure::CompoundPoisson { jumps, .. } => out.extend(jumps.atoms_list()),
            LevyMeasure::Tabulated(t) => t.atoms(out),
            LevyMeasure::Sum(v) => v.iter().for_each(|m| m.atoms(out)),
            LevyMeasure::Scaled(_, m) => m.atoms(out),
            LevyMeasure::Difference(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
            LevyMeasure::Reflected(m) => {
                let start = out.len();
                m.atoms(out);
                for v in &mut out[start..] {
                    *v = -*v;
                }
            }
            LevyMeasure::Restricted(m, region) => {
                let start = out.len();
                m.atoms(out);
                let mut kept: Vec<f64> = out.drain(start..).filter(|x| region.contains(*x)).collect();
                out.append(&mut kept);
            }
            LevyMeasure::Zero | LevyMeasure::Cgmy(_) => {}
        }
    }

    /// Signed locations where tails may jump or have kinks.
    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            LevyMeasure::CompoundPoisson { jumps, .. } => jumps.breakpoints(out),
            LevyMeasure::Tabulated(t) => t.breakpoints(out),
            LevyMeasure::Sum(v) => v.iter().for_each(|m| m.breakpoints(out)),
            LevyMeasure::Scaled(_, m) => m.breakpoints(out),
            LevyMeasure::Difference(a, b) => {
                a.breakpoints(out);
                b.breakpoints(out);
            }
            LevyMeasure::Reflected(m) => {
                let start = out.len();
                m.breakpoints(out);
                for v in &mut out[start..] {
                    *v = -*v;
                }
            }
            LevyMeasure::Restricted(m, region) => {
                m.breakpoints(out);
                for b in [region.lo, region.hi] {
                    if b.is_finite() && b != 0.0 {
                        out.push(b);
                    }
                }
            }
            LevyMeasure::Zero | LevyMeasure::Cgmy(_) => {}
        }
    }

    /// True if evaluating a tail needs numerical quadrature.
    pub fn needs_quadrature(&self) -> bool {
        match self {
            LevyMeasure::Cgmy(p) => p.c != 0.0,
            LevyMeasure::Sum(v) => v.iter().any(|m| m.needs_quadrature()),
            LevyMeasure::Scaled(_, m) | LevyMeasure::Restricted(m, _) | LevyMeasure::Reflected(m) => {
                m.needs_quadrature()
            }
            LevyMeasure::Difference(a, b) => a.needs_quadrature() || b.needs_quadrature(),
            _ => false,
        }
    }

    /// Largest singularity order `y` of a CGMY component (density `~|x|^{-1-y}`),
    /// `None` if the measure has finite activity by construction.
    pub fn blumenthal_getoor(&self) -> Option<f64> {
        match self {
            LevyMeasure::Cgmy(p) if p.c > 0.0 && p.y >= 0.0 => Some(p.y),
            LevyMeasure::Sum(v) => v
                .iter()
                .filter_map(|m| m.blumenthal_getoor())
                .fold(None, |acc, y| Some(acc.map_or(y, |a: f64| a.max(y)))),
            LevyMeasure::Scaled(w, m) if *w > 0.0 => m.blumenthal_getoor(),
            LevyMeasure::Reflected(m) => m.blumenthal_getoor(),
            LevyMeasure::Difference(a, _) => a.blumenthal_getoor(),
            LevyMeasure::Restricted(m, r) => {
                if r.contains(0.0) || r.lo == 0.0 || r.hi == 0.0 {
                    m.blumenthal_getoor()
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    // -- derived functionals ------------------------------------------------

    /// `int g dK` over one side for a ray function `g` (in magnitude).
    pub fn integrate_ray(&self, side: Side, g: &RayFunction) -> Result<Estimate> {
        let mut e = Estimate::ZERO;
        for (i, &(s, k)) in g.slopes.iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            let end = g.slopes.get(i + 1).map_or(f64::INFINITY, |p| p.0);
            e = e + self.tail_integral(side, s, end)? * k;
        }
        for j in &g.jumps {
            if j.size != 0.0 && j.at > 0.0 {
                e = e + Estimate::exact(j.size * self.tail(side, j.at, j.right_continuous)?);
            }
        }
        if !e.value.is_finite() {
            return Err(Error::Divergent("integral of ray function".into()));
        }
        Ok(e)
    }

    /// `int f dK` for `f` given by its restrictions `f(r)` and `f(-r)` to the
    /// two half-lines as ray functions.
    pub fn integrate_split(&self, pos: &RayFunction, neg: &RayFunction) -> Result<Estimate> {
        Ok(self.integrate_ray(Side::Pos, pos)? + self.integrate_ray(Side::Neg, neg)?)
    }

    /// `K([x, inf))` for `x > 0`, `K((-inf, x])` for `x < 0`.
    pub fn signed_tail(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::TailAtOrigin);
        }
        self.tail(Side::of(x), x.abs(), true)
    }

    /// Stop-loss transform `int (y - x)+ K(dy)`.
    pub fn stop_loss(&self, x: f64) -> Result<f64> {
        let r = if x >= 0.0 {
            self.tail_integral(Side::Pos, x, f64::INFINITY)
        } else {
            // positive jumps contribute y + |x|, negative jumps in (x, 0) contribute y - x
            let pos_mass = self.side_mass(Side::Pos)?;
            let neg_mass = self.side_mass(Side::Neg)?;
            if !(pos_mass.is_finite() && neg_mass.is_finite()) {
                return Err(Error::NoFiniteStopLoss(x));
            }
            let a = -x;
            let upper = self.tail_integral(Side::Pos, 0.0, f64::INFINITY)?;
            let inner = self.tail_integral(Side::Neg, 0.0, a)?;
            // int_{(x,0)} (y - x) K(dy) = a * K((x,0)) - int_{(x,0)} |y| K(dy)
            let open_below = neg_mass - self.tail(Side::Neg, a, true)?;
            let abs_inner = inner.value - a * self.tail(Side::Neg, a, true)?;
            Ok(Estimate::exact(
                upper.value + a * pos_mass + a * open_below - abs_inner,
            ))
        };
        match r {
            Ok(e) if e.value.is_finite() => Ok(e.value.max(0.0)),
            _ => Err(Error::NoFiniteStopLoss(x)),
        }
    }

    /// Stop-loss normalised to vanish at the origin: `int ((y-x)+ - (-x)+) K(dy)`.
    ///
    /// Equals the stop-loss for `x >= 0` and `int max(y, x) K(dy)` for `x < 0`;
    /// finite whenever `int |y| 1{|y| <= 1} K(dy)` and the first moment are.
    pub fn centered_stop_loss(&self, x: f64) -> Result<Estimate> {
        if x >= 0.0 {
            return self
                .tail_integral(Side::Pos, x, f64::INFINITY)
                .map_err(|_| Error::NoFiniteStopLoss(x));
        }
        let upper = self.tail_integral(Side::Pos, 0.0, f64::INFINITY);
        let inner = self.tail_integral(Side::Neg, 0.0, -x);
        match (upper, inner) {
            (Ok(u), Ok(v)) => Ok(u - v),
            _ => Err(Error::NoFiniteStopLoss(x)),
        }
    }

    /// `int y K(dy)`.
    pub fn mean(&self) -> Result<Estimate> {
        Ok(self.tail_integral(Side::Pos, 0.0, f64::INFINITY)?
            - self.tail_integral(Side::Neg, 0.0, f64::INFINITY)?)
    }

    /// `int_{|y| < eps} |y| K(dy)`.
    pub fn small_jump_abs_moment(&self, eps: f64) -> Result<Estimate> {
        let g = RayFunction::below(eps);
        self.integrate_split(&g, &g)
    }

    /// `K(I)` for an interval bounded away from the origin, or containing it
    /// only if the measure has finite activity there.
    pub fn interval_mass(&self, region: Region) -> Result<f64> {
        let mut m = 0.0;
        for side in [Side::Pos, Side::Neg] {
            if let Some((lo, lc, hi, hc)) = region.side_part(side) {
                let upper = if lo > 0.0 {
                    self.tail(side, lo, lc)?
                } else {
                    self.side_mass(side)?
                };
                let beyond = if hi.is_finite() {
                    self.tail(side, hi, !hc)?
                } else {
                    0.0
                };
                m += upper - beyond;
            }
        }
        Ok(m)
    }

    /// Generalised inverse of the closed tail, `sup { r >= 0 : T(r) >= v }`
    /// with `sup {} = 0`, to absolute precision `1e-10`. Atoms are returned
    /// exactly.
    pub fn tail_inverse(&self, side: Side, v: f64) -> Result<f64> {
        if !(v > 0.0) {
            return Err(Error::invalid("tail level", "must be positive"));
        }
        match self.side_mass(side) {
            Ok(m) if m < v => return Ok(0.0),
            Ok(_) | Err(Error::Divergent(_)) => {}
            Err(e) => return Err(e),
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut guard = 0;
        while self.tail(side, hi, true)? >= v {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 1100 {
                return Err(Error::Quadrature("tail does not vanish at infinity".into()));
            }
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tail(side, mid, true)? >= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut atoms = Vec::new();
        self.atoms(&mut atoms);
        let mut best = lo;
        for a in atoms {
            let r = a.abs();
            if Side::of(a) == side && r >= lo && r <= hi && r > best && self.tail(side, r, true)? >= v {
                best = r;
            }
        }
        Ok(best)
    }
}

// ---------------------------------------------------------------------------
// Time-indexed kernels

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelCell {
    pub start: f64,
    pub measure: LevyMeasure,
}

/// `K(t, dx)`, piecewise constant in time. Cell `i` holds on
/// `[start_i, start_{i+1})`, the last cell forever.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpKernel {
    cells: Vec<KernelCell>,
}

impl JumpKernel {
    pub fn homogeneous(measure: LevyMeasure) -> Self {
        JumpKernel {
            cells: vec![KernelCell {
                start: 0.0,
                measure,
            }],
        }
    }

    pub fn zero() -> Self {
        Self::homogeneous(LevyMeasure::Zero)
    }

    pub fn piecewise(cells: Vec<KernelCell>) -> Result<Self> {
        if cells.is_empty() || cells[0].start != 0.0 {
            return Err(Error::invalid("kernel cells", "first cell must start at 0"));
        }
        if cells.windows(2).any(|w| !(w[1].start > w[0].start)) {
            return Err(Error::invalid("kernel cells", "starts must be strictly increasing"));
        }
        for c in &cells {
            c.measure.validate()?;
        }
        Ok(JumpKernel { cells })
    }

    pub fn cells(&self) -> &[KernelCell] {
        &self.cells
    }

    pub fn cell_index(&self, t: f64) -> usize {
        self.cells.partition_point(|c| c.start <= t).saturating_sub(1)
    }

    pub fn at(&self, t: f64) -> &LevyMeasure {
        &self.cells[self.cell_index(t)].measure
    }

    /// Cell boundaries strictly inside `(0, horizon)`.
    pub fn breakpoints_before(&self, horizon: f64) -> Vec<f64> {
        self.cells
            .iter()
            .skip(1)
            .map(|c| c.start)
            .filter(|&s| s < horizon)
            .collect()
    }

    /// Combines two kernels cell by cell on the union of their breakpoints.
    pub fn zip_with<F>(&self, other: &JumpKernel, mut f: F) -> JumpKernel
    where
        F: FnMut(&LevyMeasure, &LevyMeasure) -> LevyMeasure,
    {
        let mut starts: Vec<f64> = self
            .cells
            .iter()
            .chain(other.cells.iter())
            .map(|c| c.start)
            .collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        JumpKernel {
            cells: starts
                .into_iter()
                .map(|s| KernelCell {
                    start: s,
                    measure: f(self.at(s), other.at(s)),
                })
                .collect(),
        }
    }

    pub fn map<F: FnMut(&LevyMeasure) -> LevyMeasure>(&self, mut f: F) -> JumpKernel {
        JumpKernel {
            cells: self
                .cells
                .iter()
                .map(|c| KernelCell {
                    start: c.start,
                    measure: f(&c.measure),
                })
                .collect(),
        }
    }

    /// Multiplies the kernel by a piecewise-constant factor `w(t)` given as
    /// `(start, weight)` pairs starting at 0.
    pub fn reweighted(&self, weights: &[(f64, f64)]) -> JumpKernel {
        let mut starts: Vec<f64> = self
            .cells
            .iter()
            .map(|c| c.start)
            .chain(weights.iter().map(|w| w.0))
            .collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        JumpKernel {
            cells: starts
                .into_iter()
                .map(|s| {
                    let wi = weights.partition_point(|w| w.0 <= s).saturating_sub(1);
                    KernelCell {
                        start: s,
                        measure: self.at(s).clone().scaled(weights[wi].1),
                    }
                })
                .collect(),
        }
    }

    pub fn tail(&self, t: f64, x: f64) -> Result<f64> {
        self.at(t).signed_tail(x)
    }

    pub fn stop_loss(&self, t: f64, x: f64) -> Result<f64> {
        self.at(t).stop_loss(x)
    }

    pub fn is_finite_activity(&self) -> Result<bool> {
        for c in &self.cells {
            if !c.measure.is_finite_activity()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.cells.windows(2).all(|w| w[0].measure == w[1].measure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_cp(rate: f64) -> LevyMeasure {
        LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 }).unwrap()
    }

    fn point(rate: f64, at: f64) -> LevyMeasure {
        LevyMeasure::compound_poisson(rate, JumpLaw::point(at).unwrap()).unwrap()
    }

    /// Independent oracle: composite Simpson on a truncated, log-transformed range.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn cp_exponential_tail() {
        let k = exp_cp(2.0);
        assert_relative_eq!(k.signed_tail(1.0).unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert_eq!(k.signed_tail(-1.0).unwrap(), 0.0);
        assert!(k.signed_tail(1e6).unwrap() < 1e-300);
        assert_eq!(k.signed_tail(0.0), Err(Error::TailAtOrigin));
    }

    #[test]
    fn cgmy_tail_matches_quadrature_oracle() {
        let k = LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap();
        // oracle: s = e^u, int_0^50 e^{-e^u} e^{-0.5 u} du
        let oracle = simpson(|u: f64| (-(u.exp())).exp() * (-0.5 * u).exp(), 0.0, 6.0, 20000);
        let t = k.signed_tail(1.0).unwrap();
        assert_relative_eq!(t, oracle, max_relative = 1e-10);
        assert_relative_eq!(t, 0.178_147_711_781_560_7, max_relative = 1e-10);
        // mirror side uses g
        assert_relative_eq!(k.signed_tail(-1.0).unwrap(), t, max_relative = 1e-12);
    }

    #[test]
    fn cgmy_small_tail_and_integrals() {
        let p = CgmyParams::new(1.0, 2.0, 3.0, 0.5).unwrap();
        let k = LevyMeasure::Cgmy(p);
        // tail integral on [a,b] against direct Simpson of the tail
        let a = 0.2;
        let b = 1.5;
        let u = k.tail_integral(Side::Pos, a, b).unwrap().value;
        // mpmath double quadrature
        assert_relative_eq!(u, 0.124_045_810_003_947_53, max_relative = 1e-10);
        let _ = p;
        // y < 1: integral from 0 is finite, from 0 with y >= 1 diverges
        assert!(k.tail_integral(Side::Pos, 0.0, 1.0).is_ok());
        let k2 = LevyMeasure::cgmy(1.0, 1.0, 1.0, 1.2).unwrap();
        assert!(k2.tail_integral(Side::Pos, 0.0, 1.0).is_err());
    }

    #[test]
    fn cgmy_finite_activity_mass() {
        let k = LevyMeasure::cgmy(2.0, 1.0, 1.5, -0.5).unwrap();
        let m = k.side_mass(Side::Pos).unwrap();
        assert_relative_eq!(m, 2.894_405_018_233_070_6, max_relative = 1e-14);
        // the tail at 1e-12 misses int_0^{1e-12} 2 s^{-1/2} ds = 4e-6
        let tail = k.tail(Side::Pos, 1e-12, true).unwrap();
        assert_relative_eq!(m - tail, 4e-6, max_relative = 1e-5);
    }

    #[test]
    fn stop_loss_examples() {
        let k = exp_cp(1.0);
        assert_relative_eq!(k.stop_loss(0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(k.stop_loss(2.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-14);
        let p = point(3.0, 1.5);
        assert_eq!(p.stop_loss(1.5).unwrap(), 0.0);
        assert_eq!(p.stop_loss(4.0).unwrap(), 0.0);
        // negative x: int (y - x)+ = mean - x * mass for a positive kernel
        assert_relative_eq!(k.stop_loss(-1.0).unwrap(), 2.0, max_relative = 1e-14);
        let two_sided = point(1.0, -0.5).sum(point(1.0, 2.0));
        // (y+1)+ : atoms -0.5 -> 0.5, 2 -> 3
        assert_relative_eq!(two_sided.stop_loss(-1.0).unwrap(), 3.5, max_relative = 1e-14);
        assert_relative_eq!(two_sided.stop_loss(-0.25).unwrap(), 2.25, max_relative = 1e-14);
        let cg = LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap();
        assert!(matches!(cg.stop_loss(-0.5), Err(Error::NoFiniteStopLoss(_))));
        assert!(cg.stop_loss(0.5).is_ok());
    }

    #[test]
    fn centered_stop_loss_is_max_integral() {
        let k = point(1.0, -0.5).sum(point(2.0, 2.0));
        // x = -1: int max(y, -1) = -0.5 + 4
        assert_relative_eq!(k.centered_stop_loss(-1.0).unwrap().value, 3.5, max_relative = 1e-14);
        // x = -0.25: max(-0.5,-0.25) = -0.25, max(2,-.25)=2
        assert_relative_eq!(k.centered_stop_loss(-0.25).unwrap().value, -0.25 + 4.0, max_relative = 1e-14);
        assert_relative_eq!(k.mean().unwrap().value, 3.5, max_relative = 1e-14);
    }

    #[test]
    fn restricted_and_difference_tails() {
        let k = exp_cp(2.0);
        let r = k.clone().restricted(Region::new(0.5, true, 1.0, false));
        let exact = 2.0 * ((-0.5f64).exp() - (-1.0f64).exp());
        assert_relative_eq!(r.tail(Side::Pos, 0.1, true).unwrap(), exact, max_relative = 1e-14);
        assert_relative_eq!(r.side_mass(Side::Pos).unwrap(), exact, max_relative = 1e-14);
        assert_eq!(r.tail(Side::Pos, 1.0, true).unwrap(), 0.0);
        assert_relative_eq!(k.interval_mass(Region::new(0.5, true, 1.0, true)).unwrap(), exact, max_relative = 1e-14);
        // tail integral of the restriction vs Simpson oracle of its tail
        let u = r.tail_integral(Side::Pos, 0.0, 2.0).unwrap().value;
        let oracle = simpson(|y| r.tail(Side::Pos, y.max(1e-300), true).unwrap(), 1e-12, 2.0, 20000);
        assert_relative_eq!(u, oracle, max_relative = 1e-6);
        let d = exp_cp(3.0).minus(exp_cp(1.0));
        assert_relative_eq!(d.tail(Side::Pos, 1.0, true).unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        let refl = exp_cp(1.0).reflected();
        assert_relative_eq!(refl.signed_tail(-1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-14);
        assert_eq!(refl.signed_tail(1.0).unwrap(), 0.0);
    }

    #[test]
    fn ray_functions_give_h_integrals() {
        let k = exp_cp(1.0);
        let clip = k.integrate_ray(Side::Pos, &RayFunction::clip(1.0)).unwrap().value;
        assert_relative_eq!(clip, 1.0 - (-1.0f64).exp(), max_relative = 1e-14);
        let cut = k.integrate_ray(Side::Pos, &RayFunction::cutoff(1.0)).unwrap().value;
        assert_relative_eq!(cut, 1.0 - 2.0 * (-1.0f64).exp(), max_relative = 1e-13);
        // point mass exactly on the cutoff stays inside
        let p = point(1.0, 1.0);
        assert_relative_eq!(p.integrate_ray(Side::Pos, &RayFunction::cutoff(1.0)).unwrap().value, 1.0);
        // restriction above eps drops small jumps
        let g = RayFunction::identity().restricted_above(0.5);
        let v = k.integrate_ray(Side::Pos, &g).unwrap().value;
        assert_relative_eq!(v, 1.5 * (-0.5f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(g.eval(0.4), 0.0);
        assert_relative_eq!(g.eval(0.6), 0.6);
    }

    #[test]
    fn small_jump_moment_cgmy() {
        let k = LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap();
        let b = k.small_jump_abs_moment(0.01).unwrap().value;
        assert_relative_eq!(b, 0.398_670_657_161_345_4, max_relative = 1e-9);
    }

    #[test]
    fn tabulated_reproduces_parametric() {
        let k = LevyMeasure::cgmy(1.0, 2.0, 1.5, 0.3).unwrap();
        let grid: Vec<f64> = (0..60).map(|i| 0.01 * 1.1f64.powi(i)).collect();
        let t = TailTable::from_measure(&k, &grid, &grid).unwrap();
        let tab = LevyMeasure::Tabulated(t);
        for &x in &grid {
            let a = tab.tail(Side::Pos, x, true).unwrap();
            let b = k.tail(Side::Pos, x, true).unwrap();
            assert!((a - b).abs() <= 1e-6 * b.max(1.0));
        }
        assert!(TailTable::new(vec![(1.0, 1.0), (2.0, 2.0)], vec![]).is_err());
    }

    #[test]
    fn kernel_cells() {
        let k = JumpKernel::piecewise(vec![
            KernelCell { start: 0.0, measure: exp_cp(1.0) },
            KernelCell { start: 1.0, measure: exp_cp(2.0) },
        ])
        .unwrap();
        assert_eq!(k.cell_index(0.5), 0);
        assert_eq!(k.cell_index(1.0), 1);
        assert_relative_eq!(k.tail(1.5, 1.0).unwrap(), 2.0 * (-1.0f64).exp());
        let w = k.reweighted(&[(0.0, 0.5), (0.5, 1.0)]);
        assert_eq!(w.cells().len(), 3);
        assert_relative_eq!(w.tail(0.25, 1.0).unwrap(), 0.5 * (-1.0f64).exp());
    }
}
