//! Characteristic triplets `(B, C, nu)` with `nu(dt, dx) = K(t, dx) dA_t`,
//! plus jumps at fixed times.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, JumpLaw, LevyMeasure, RayFunction, Side};
use crate::numeric::Estimate;

// ---------------------------------------------------------------------------
// Truncation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TruncationKind {
    /// `h(x) = clamp(x, -theta, theta)`, continuous.
    #[default]
    Clip,
    /// `h(x) = x 1{|x| <= theta}`.
    Indicator,
}

/// Truncation function `h`, odd, equal to `x` near the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruncationFunction {
    pub threshold: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub kind: TruncationKind,
}

impl Default for TruncationFunction {
    fn default() -> Self {
        TruncationFunction {
            threshold: 1.0,
            kind: TruncationKind::Clip,
        }
    }
}

impl TruncationFunction {
    pub fn clip(threshold: f64) -> Result<Self> {
        Self::with_kind(threshold, TruncationKind::Clip)
    }

    pub fn indicator(threshold: f64) -> Result<Self> {
        Self::with_kind(threshold, TruncationKind::Indicator)
    }

    pub fn with_kind(threshold: f64, kind: TruncationKind) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::invalid("truncation.threshold", "must be positive and finite"));
        }
        Ok(TruncationFunction { threshold, kind })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = self.threshold;
        match self.kind {
            TruncationKind::Clip => x.clamp(-t, t),
            TruncationKind::Indicator => {
                if x.abs() <= t {
                    x
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == TruncationKind::Clip
    }

    /// `r -> h(r)` for `r > 0`; `h(-r) = -h(r)`.
    pub fn ray(&self) -> RayFunction {
        match self.kind {
            TruncationKind::Clip => RayFunction::clip(self.threshold),
            TruncationKind::Indicator => RayFunction::cutoff(self.threshold),
        }
    }

    /// `r -> r - h(r)` for `r > 0`.
    pub fn excess_ray(&self) -> RayFunction {
        RayFunction::identity().combine(1.0, &self.ray(), -1.0)
    }

    /// `int h 1{|x| > eps} dK`; `eps = 0` means no restriction.
    pub fn integral(&self, k: &LevyMeasure, eps: f64) -> Result<Estimate> {
        let g = self.ray().restricted_above(eps);
        let r = k.integrate_ray(Side::Pos, &g).and_then(|p| Ok(p - k.integrate_ray(Side::Neg, &g)?));
        r.map_err(|e| match e {
            Error::Divergent(_) => Error::InfiniteVariation,
            other => other,
        })
    }

    /// `int (x - h(x)) dK`.
    pub fn excess_integral(&self, k: &LevyMeasure) -> Result<Estimate> {
        let g = self.excess_ray();
        Ok(k.integrate_ray(Side::Pos, &g)? - k.integrate_ray(Side::Neg, &g)?)
    }

    /// `int |x - h(x)| dK`.
    pub fn abs_excess_integral(&self, k: &LevyMeasure) -> Result<Estimate> {
        let g = self.excess_ray();
        Ok(k.integrate_ray(Side::Pos, &g)? + k.integrate_ray(Side::Neg, &g)?)
    }

    /// `int (h_other - h) dK`, finite for every Lévy measure.
    pub fn change_integral(&self, other: &TruncationFunction, k: &LevyMeasure) -> Result<Estimate> {
        let g = other.ray().combine(1.0, &self.ray(), -1.0);
        Ok(k.integrate_ray(Side::Pos, &g)? - k.integrate_ray(Side::Neg, &g)?)
    }
}

// ---------------------------------------------------------------------------
// Piecewise-linear functions of time

/// A càdlàg piecewise-linear function of time given by knots `(t, v)`.
///
/// Repeated times encode jumps: the function takes the last value listed at
/// that time. Beyond the last knot the final slope is continued.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("knots", "need at least one knot"));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::invalid("knots", "first knot must be at t = 0"));
        }
        if knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return Err(Error::invalid("knots", "non-finite knot"));
        }
        if knots.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::invalid("knots", "times must be nondecreasing"));
        }
        Ok(PiecewiseLinear { knots })
    }

    pub fn zero() -> Self {
        PiecewiseLinear {
            knots: vec![(0.0, 0.0)],
        }
    }

    pub fn linear(slope: f64) -> Self {
        PiecewiseLinear {
            knots: vec![(0.0, 0.0), (1.0, slope)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn final_slope(&self) -> f64 {
        let k = &self.knots;
        let mut j = k.len() - 1;
        while j > 0 {
            if k[j].0 > k[j - 1].0 {
                return (k[j].1 - k[j - 1].1) / (k[j].0 - k[j - 1].0);
            }
            j -= 1;
        }
        0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 <= t);
        if i == 0 {
            return k[0].1;
        }
        let (t0, v0) = k[i - 1];
        if i == k.len() {
            return v0 + self.final_slope() * (t - t0);
        }
        let (t1, v1) = k[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Left limit at `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 < t);
        if i == 0 {
            return k[0].1;
        }
        let (t0, v0) = k[i - 1];
        if i == k.len() {
            return v0 + self.final_slope() * (t - t0);
        }
        let (t1, v1) = k[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn jump_at(&self, t: f64) -> f64 {
        self.eval(t) - self.eval_left(t)
    }

    /// Distinct knot times.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.knots.iter().map(|k| k.0).collect();
        v.dedup();
        v
    }

    pub fn is_continuous(&self) -> bool {
        self.knots.windows(2).all(|w| w[0].0 < w[1].0 || w[0].1 == w[1].1)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.knots.windows(2).all(|w| w[1].1 >= w[0].1) && self.final_slope() >= 0.0
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &PiecewiseLinear, b: f64) -> PiecewiseLinear {
        let mut times: Vec<f64> = self
            .knots
            .iter()
            .chain(other.knots.iter())
            .map(|k| k.0)
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut knots = Vec::with_capacity(times.len() + 2);
        for t in times {
            let left = a * self.eval_left(t) + b * other.eval_left(t);
            let right = a * self.eval(t) + b * other.eval(t);
            if left != right && t > 0.0 {
                knots.push((t, left));
            }
            knots.push((t, right));
        }
        // keep the extension slope when both inputs end early
        let last = knots[knots.len() - 1].0;
        let t_ext = last + 1.0;
        knots.push((t_ext, a * self.eval(t_ext) + b * other.eval(t_ext)));
        PiecewiseLinear { knots }
    }

    pub fn add(&self, other: &PiecewiseLinear) -> PiecewiseLinear {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &PiecewiseLinear) -> PiecewiseLinear {
        self.combine(1.0, other, -1.0)
    }

    /// Adds `size * 1{t >= at}`.
    pub fn with_step(&self, at: f64, size: f64) -> PiecewiseLinear {
        let step = PiecewiseLinear {
            knots: vec![(0.0, 0.0), (at, 0.0), (at, size), (at + 1.0, size)],
        };
        self.add(&step)
    }
}

// ---------------------------------------------------------------------------
// Time measure

/// Piecewise-linear, continuous, nondecreasing `A` with `A_0 = 0`.
/// `slopes[i]` holds on `[breakpoints[i], breakpoints[i+1])`, the last one forever.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeMeasure {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    values: Vec<f64>,
}

impl TimeMeasure {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != slopes.len() {
            return Err(Error::invalid("time_measure", "need one slope per breakpoint"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("time_measure", "first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("time_measure", "breakpoints must be strictly increasing"));
        }
        if slopes.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::invalid("time_measure", "slopes must be finite and >= 0"));
        }
        let mut values = vec![0.0];
        for i in 1..breakpoints.len() {
            let v = values[i - 1] + slopes[i - 1] * (breakpoints[i] - breakpoints[i - 1]);
            values.push(v);
        }
        Ok(TimeMeasure {
            breakpoints,
            slopes,
            values,
        })
    }

    /// `A_t = t`.
    pub fn identity() -> Self {
        Self::new(vec![0.0], vec![1.0]).expect("valid")
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0], vec![0.0]).expect("valid")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn segment(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|b| *b <= t).saturating_sub(1)
    }

    pub fn slope_at(&self, t: f64) -> f64 {
        self.slopes[self.segment(t)]
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.segment(t);
        self.values[i] + self.slopes[i] * (t - self.breakpoints[i])
    }

    /// `inf { t : A_t >= a }`; `None` if `A` never reaches `a`.
    pub fn inverse(&self, a: f64) -> Option<f64> {
        if a <= 0.0 {
            return Some(0.0);
        }
        let n = self.breakpoints.len();
        let i = self.values.partition_point(|v| *v < a);
        if i < n {
            // A reaches a inside segment i-1
            let j = i - 1;
            return Some(self.breakpoints[j] + (a - self.values[j]) / self.slopes[j]);
        }
        let s = self.slopes[n - 1];
        if s > 0.0 {
            Some(self.breakpoints[n - 1] + (a - self.values[n - 1]) / s)
        } else {
            None
        }
    }

    pub fn add(&self, other: &TimeMeasure) -> TimeMeasure {
        let mut b: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        let s = b.iter().map(|&t| self.slope_at(t) + other.slope_at(t)).collect();
        TimeMeasure::new(b, s).expect("sum of valid measures")
    }

    pub fn as_function(&self) -> PiecewiseLinear {
        let mut knots: Vec<(f64, f64)> = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .map(|(t, v)| (*t, *v))
            .collect();
        let last = knots[knots.len() - 1].0;
        knots.push((last + 1.0, self.value(last + 1.0)));
        PiecewiseLinear { knots }
    }
}

/// A piece `[start, end)` on which both the kernel cell and the slope of `A`
/// are constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePiece {
    pub start: f64,
    pub end: f64,
    pub cell: usize,
    pub slope: f64,
}

impl TimePiece {
    pub fn d_a(&self) -> f64 {
        self.slope * (self.end - self.start)
    }
}

/// Splits `[t0, t1)` into pieces with constant kernel cell and `A`-slope.
pub fn time_pieces(kernel: &JumpKernel, a: &TimeMeasure, t0: f64, t1: f64) -> Vec<TimePiece> {
    let mut cuts: Vec<f64> = vec![t0, t1];
    cuts.extend(kernel.cells().iter().map(|c| c.start).filter(|s| *s > t0 && *s < t1));
    cuts.extend(a.breakpoints().iter().copied().filter(|s| *s > t0 && *s < t1));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| TimePiece {
            start: w[0],
            end: w[1],
            cell: kernel.cell_index(w[0]),
            slope: a.slope_at(w[0]),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fixed times of discontinuity

/// A jump at a fixed time: with probability `mass` the size is drawn from
/// `law`, otherwise the process does not move.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixedJump {
    pub time: f64,
    pub mass: f64,
    pub law: JumpLaw,
}

impl FixedJump {
    /// CDF of the jump including the atom at 0.
    pub fn cdf(&self, x: f64) -> f64 {
        let zero = if x >= 0.0 { 1.0 - self.mass } else { 0.0 };
        self.mass * self.law.cdf(x) + zero
    }

    /// Generalised inverse of [`Self::cdf`], `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let p = self.mass;
        let below = p * self.law.cdf_left(0.0);
        if u <= below {
            return self.law.quantile(u / p);
        }
        if u <= below + (1.0 - p) {
            return 0.0;
        }
        self.law.quantile(((u - (1.0 - p)) / p).min(1.0))
    }

    /// `p * int h dF`.
    pub fn h_integral(&self, h: &TruncationFunction) -> Result<f64> {
        let m = LevyMeasure::compound_poisson(self.mass, self.law.clone())?;
        Ok(h.integral(&m, 0.0)?.value)
    }

    /// Candidate points where the CDF may jump or bend.
    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        out.push(0.0);
        self.law.breakpoints(out);
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixedJumpSchedule {
    entries: Vec<FixedJump>,
}

impl FixedJumpSchedule {
    pub fn new(entries: Vec<FixedJump>) -> Result<Self> {
        if entries.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::invalid("fixed_jumps", "times must be strictly increasing"));
        }
        for e in &entries {
            if !(e.time > 0.0 && e.time.is_finite()) {
                return Err(Error::invalid("fixed_jumps", "times must be positive"));
            }
            if !(0.0..=1.0).contains(&e.mass) {
                return Err(Error::invalid("fixed_jumps", "mass must lie in [0, 1]"));
            }
            e.law.validate()?;
        }
        Ok(FixedJumpSchedule { entries })
    }

    pub fn empty() -> Self {
        FixedJumpSchedule::default()
    }

    pub fn entries(&self) -> &[FixedJump] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn at(&self, t: f64) -> Option<&FixedJump> {
        self.entries.iter().find(|e| e.time == t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.time).collect()
    }
}

// ---------------------------------------------------------------------------
// Triplets

/// Full description of one process.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiiCharacteristics {
    pub truncation: TruncationFunction,
    pub drift: PiecewiseLinear,
    pub gaussian: PiecewiseLinear,
    pub kernel: JumpKernel,
    pub time_measure: TimeMeasure,
    pub fixed_jumps: FixedJumpSchedule,
}

impl PiiCharacteristics {
    pub fn new(
        truncation: TruncationFunction,
        drift: PiecewiseLinear,
        gaussian: PiecewiseLinear,
        kernel: JumpKernel,
        time_measure: TimeMeasure,
        fixed_jumps: FixedJumpSchedule,
    ) -> Result<Self> {
        let c = PiiCharacteristics {
            truncation,
            drift,
            gaussian,
            kernel,
            time_measure,
            fixed_jumps,
        };
        c.validate()?;
        Ok(c)
    }

    /// A Lévy process with `A_t = t`, drift `b t`, variance `sigma2 t`.
    pub fn levy(truncation: TruncationFunction, b: f64, sigma2: f64, measure: LevyMeasure) -> Result<Self> {
        Self::new(
            truncation,
            PiecewiseLinear::linear(b),
            PiecewiseLinear::linear(sigma2),
            JumpKernel::homogeneous(measure),
            TimeMeasure::identity(),
            FixedJumpSchedule::empty(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.drift.eval(0.0) != 0.0 {
            return Err(Error::invalid("drift", "B_0 must be 0"));
        }
        if self.gaussian.eval(0.0) != 0.0 {
            return Err(Error::invalid("gaussian", "C_0 must be 0"));
        }
        if !self.gaussian.is_nondecreasing() || !self.gaussian.is_continuous() {
            return Err(Error::invalid("gaussian", "C must be continuous and nondecreasing"));
        }
        for c in self.kernel.cells() {
            c.measure.validate()?;
        }
        Ok(())
    }

    /// Interesting times in `(0, horizon)`: kernel cells, `A`, drift and
    /// variance knots, fixed jump times.
    pub fn time_breakpoints(&self, horizon: f64) -> Vec<f64> {
        let mut v = self.kernel.breakpoints_before(horizon);
        v.extend(self.time_measure.breakpoints().iter().copied());
        v.extend(self.drift.breakpoints());
        v.extend(self.gaussian.breakpoints());
        v.extend(self.fixed_jumps.times());
        v.retain(|t| *t > 0.0 && *t < horizon);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `nu`-integral over `[0, t]` of a per-cell functional of the kernel,
    /// excluding fixed-time jumps.
    pub fn integrate_in_time<F>(&self, t: f64, mut f: F) -> Result<Estimate>
    where
        F: FnMut(&LevyMeasure) -> Result<Estimate>,
    {
        let mut cache: Vec<Option<Estimate>> = vec![None; self.kernel.cells().len()];
        let mut total = Estimate::ZERO;
        for p in time_pieces(&self.kernel, &self.time_measure, 0.0, t) {
            let da = p.d_a();
            if da == 0.0 {
                continue;
            }
            let v = match cache[p.cell] {
                Some(v) => v,
                None => {
                    let v = f(&self.kernel.cells()[p.cell].measure)?;
                    cache[p.cell] = Some(v);
                    v
                }
            };
            total = total + v * da;
        }
        Ok(total)
    }

    /// Same truncation expressed against another `h`: the drift changes by
    /// `(h' - h) * nu`, the law does not.
    pub fn with_truncation(&self, h: TruncationFunction) -> Result<Self> {
        if h == self.truncation {
            return Ok(self.clone());
        }
        let mut shift = PiecewiseLinear::zero();
        let mut times = self.time_breakpoints(f64::INFINITY);
        times.insert(0, 0.0);
        // per-piece constant rate; the final piece extends forever
        let mut acc = 0.0;
        let mut knots = vec![(0.0, 0.0)];
        for (i, &t0) in times.iter().enumerate() {
            let t1 = times.get(i + 1).copied().unwrap_or(t0 + 1.0);
            let cell = &self.kernel.at(t0);
            let rate = self.truncation.change_integral(&h, cell)?.value * self.time_measure.slope_at(t0);
            acc += rate * (t1 - t0);
            knots.push((t1, acc));
        }
        shift = shift.add(&PiecewiseLinear::new(knots)?);
        for e in self.fixed_jumps.entries() {
            let m = LevyMeasure::compound_poisson(e.mass, e.law.clone())?;
            let d = self.truncation.change_integral(&h, &m)?.value;
            shift = shift.with_step(e.time, d);
        }
        let mut c = self.clone();
        c.truncation = h;
        c.drift = self.drift.add(&shift);
        Ok(c)
    }
}

/// Splits a process into its quasi-left-continuous part and the fixed-time
/// jumps. The continuous part keeps kernel and `A`; its drift loses the
/// `h`-compensator of the fixed jumps.
pub fn decompose(c: &PiiCharacteristics) -> Result<(PiiCharacteristics, FixedJumpSchedule)> {
    let mut drift = c.drift.clone();
    for e in c.fixed_jumps.entries() {
        let hi = e.h_integral(&c.truncation)?;
        if !hi.is_finite() {
            return Err(Error::FtdIntegrability(format!("fixed jump at t = {}", e.time)));
        }
        if hi != 0.0 {
            drift = drift.with_step(e.time, -hi);
        }
    }
    let mut qlc = c.clone();
    qlc.drift = drift;
    qlc.fixed_jumps = FixedJumpSchedule::empty();
    Ok((qlc, c.fixed_jumps.clone()))
}

/// `h * nu_t`, including fixed-time jumps up to `t`.
pub fn h_compensator(c: &PiiCharacteristics, t: f64) -> Result<Estimate> {
    h_compensator_truncated(c, t, 0.0)
}

/// `(h 1{|x| > eps}) * nu_t`; `eps = 0` gives the full compensator.
pub fn h_compensator_truncated(c: &PiiCharacteristics, t: f64, eps: f64) -> Result<Estimate> {
    let h = c.truncation;
    let mut e = c.integrate_in_time(t, |m| h.integral(m, eps))?;
    for f in c.fixed_jumps.entries().iter().filter(|f| f.time <= t) {
        let m = LevyMeasure::compound_poisson(f.mass, f.law.clone())?;
        e = e + h.integral(&m, eps)?;
    }
    Ok(e)
}

/// Re-expresses both kernels against the common time measure
/// `A = A^X + A^Y` (the identity if both already share `A`).
pub fn align_pair(
    x: &PiiCharacteristics,
    y: &PiiCharacteristics,
) -> (PiiCharacteristics, PiiCharacteristics) {
    if x.time_measure == y.time_measure {
        return (x.clone(), y.clone());
    }
    let a = x.time_measure.add(&y.time_measure);
    let weights = |own: &TimeMeasure| -> Vec<(f64, f64)> {
        a.breakpoints()
            .iter()
            .map(|&t| {
                let total = a.slope_at(t);
                let w = if total > 0.0 { own.slope_at(t) / total } else { 0.0 };
                (t, w)
            })
            .collect()
    };
    let mut xa = x.clone();
    let mut ya = y.clone();
    xa.kernel = x.kernel.reweighted(&weights(&x.time_measure));
    ya.kernel = y.kernel.reweighted(&weights(&y.time_measure));
    xa.time_measure = a.clone();
    ya.time_measure = a;
    (xa, ya)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_cp(rate: f64) -> LevyMeasure {
        LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 }).unwrap()
    }

    #[test]
    fn truncation_shapes() {
        let h = TruncationFunction::default();
        assert_eq!(h.eval(0.5), 0.5);
        assert_eq!(h.eval(2.0), 1.0);
        assert_eq!(h.eval(-3.0), -1.0);
        let g = TruncationFunction::indicator(1.0).unwrap();
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(1.5), 0.0);
        assert!(TruncationFunction::clip(0.0).is_err());
    }

    #[test]
    fn piecewise_linear_eval_and_jumps() {
        let f = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 3.0), (2.0, 3.0)]).unwrap();
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(f.eval(1.0), 3.0);
        assert_eq!(f.eval_left(1.0), 1.0);
        assert_eq!(f.eval(5.0), 3.0);
        let g = PiecewiseLinear::linear(0.3);
        assert_relative_eq!(g.eval(2.0), 0.6);
        let s = f.add(&g);
        assert_relative_eq!(s.eval(1.0), 3.3);
        assert_relative_eq!(s.eval_left(1.0), 1.3);
        assert_relative_eq!(s.eval(10.0), 6.0, max_relative = 1e-14);
        assert!(PiecewiseLinear::new(vec![(0.5, 0.0)]).is_err());
    }

    #[test]
    fn time_measure_inverse() {
        let a = TimeMeasure::new(vec![0.0, 1.0, 2.0], vec![2.0, 0.0, 1.0]).unwrap();
        assert_eq!(a.value(1.5), 2.0);
        assert_eq!(a.value(3.0), 3.0);
        assert_eq!(a.inverse(1.0), Some(0.5));
        assert_eq!(a.inverse(2.0), Some(1.0));
        assert_eq!(a.inverse(2.5), Some(2.5));
        assert_eq!(TimeMeasure::zero().inverse(1.0), None);
    }

    #[test]
    fn decompose_examples() {
        let h = TruncationFunction::default();
        let c = PiiCharacteristics::levy(h, 0.0, 0.0, LevyMeasure::Zero).unwrap();
        let (q, f) = decompose(&c).unwrap();
        assert_eq!(q, c);
        assert!(f.is_empty());

        let mut c1 = c.clone();
        c1.fixed_jumps = FixedJumpSchedule::new(vec![FixedJump {
            time: 1.0,
            mass: 1.0,
            law: JumpLaw::point(0.5).unwrap(),
        }])
        .unwrap();
        let (q, _) = decompose(&c1).unwrap();
        assert_eq!(q.drift.eval(0.99), 0.0);
        assert_eq!(q.drift.eval(1.0), -0.5);

        let mut c2 = c.clone();
        c2.fixed_jumps = FixedJumpSchedule::new(vec![
            FixedJump { time: 1.0, mass: 0.7, law: JumpLaw::point(2.0).unwrap() },
            FixedJump { time: 2.0, mass: 1.0, law: JumpLaw::point(-0.25).unwrap() },
        ])
        .unwrap();
        let (q, _) = decompose(&c2).unwrap();
        assert_relative_eq!(q.drift.eval(1.5), -0.7);
        assert_relative_eq!(q.drift.eval(2.5), -0.45);
    }

    #[test]
    fn h_compensator_examples() {
        // indicator truncation reproduces int_0^1 y e^{-y} dy
        let c = PiiCharacteristics::levy(TruncationFunction::indicator(1.0).unwrap(), 0.0, 0.0, exp_cp(1.0)).unwrap();
        let e = h_compensator(&c, 1.0).unwrap();
        assert_relative_eq!(e.value, 1.0 - 2.0 * (-1.0f64).exp(), max_relative = 1e-12);
        // continuous clip: int min(y,1) e^{-y} dy
        let c = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, exp_cp(1.0)).unwrap();
        assert_relative_eq!(h_compensator(&c, 1.0).unwrap().value, 1.0 - (-1.0f64).exp(), max_relative = 1e-12);
        let z = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, LevyMeasure::Zero).unwrap();
        assert_eq!(h_compensator(&z, 3.0).unwrap().value, 0.0);
        let p = LevyMeasure::compound_poisson(2.0, JumpLaw::point(3.0).unwrap()).unwrap();
        let c = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, p).unwrap();
        assert_relative_eq!(h_compensator(&c, 2.0).unwrap().value, 4.0);
        let cg = LevyMeasure::cgmy(1.0, 1.0, 1.0, 1.5).unwrap();
        let c = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, cg).unwrap();
        assert_eq!(h_compensator(&c, 1.0), Err(Error::InfiniteVariation));
        assert!(h_compensator_truncated(&c, 1.0, 0.01).is_ok());
    }

    #[test]
    fn changing_truncation_moves_drift() {
        let c = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, exp_cp(1.0)).unwrap();
        let d = c.with_truncation(TruncationFunction::indicator(1.0).unwrap()).unwrap();
        // int (x 1{x<=1} - min(x,1)) e^{-x} dx = -e^{-1}
        assert_relative_eq!(d.drift.eval(2.0), -2.0 * (-1.0f64).exp(), max_relative = 1e-12);
        let back = d.with_truncation(TruncationFunction::default()).unwrap();
        assert!((back.drift.eval(3.0)).abs() < 1e-12);
    }

    #[test]
    fn aligning_time_measures() {
        let mut x = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, exp_cp(1.0)).unwrap();
        let y = x.clone();
        x.time_measure = TimeMeasure::new(vec![0.0], vec![3.0]).unwrap();
        let (xa, ya) = align_pair(&x, &y);
        assert_eq!(xa.time_measure, ya.time_measure);
        let tx = xa.kernel.tail(0.5, 1.0).unwrap() * xa.time_measure.slope_at(0.5);
        assert_relative_eq!(tx, 3.0 * (-1.0f64).exp(), max_relative = 1e-14);
        let ty = ya.kernel.tail(0.5, 1.0).unwrap() * ya.time_measure.slope_at(0.5);
        assert_relative_eq!(ty, (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn fixed_jump_quantiles() {
        let f = FixedJump { time: 1.0, mass: 0.5, law: JumpLaw::point(1.0).unwrap() };
        assert_eq!(f.quantile(0.3), 0.0);
        assert_eq!(f.quantile(0.7), 1.0);
        let g = FixedJump { time: 1.0, mass: 0.5, law: JumpLaw::point(-1.0).unwrap() };
        assert_eq!(g.quantile(0.3), -1.0);
        assert_eq!(g.quantile(0.7), 0.0);
    }
}
