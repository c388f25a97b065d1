//! Quadrature, monotone interpolation and root bracketing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A quadrature result with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        abs_err: 0.0,
    };

    pub fn exact(value: f64) -> Self {
        Estimate { value, abs_err: 0.0 }
    }
}

impl core::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
        }
    }
}

impl core::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value - rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
        }
    }
}

impl core::ops::Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, rhs: f64) -> Estimate {
        Estimate {
            value: self.value * rhs,
            abs_err: self.abs_err * rhs.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    /// Default used for kernel functionals.
    pub const DEFAULT: Tolerance = Tolerance {
        abs: 1e-13,
        rel: 1e-11,
    };
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Quadrature("non-finite integrand".into()));
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// Adaptive Gauss-Kronrod (7/15) integration over a finite interval.
///
/// The interval with the largest error estimate is bisected until the summed
/// error drops below `max(tol.abs, tol.rel * |I|)`. Integrable endpoint
/// singularities are tolerated since the rule never samples the endpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature("infinite bounds".into()));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi)?;
    let mut parts: Vec<(f64, f64, f64, f64)> = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    const MAX_PARTS: usize = 2000;
    while err > tol.abs.max(tol.rel * total.abs()) && parts.len() < MAX_PARTS {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (l, r, pv, pe) = parts.swap_remove(idx);
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            // interval exhausted at machine precision
            parts.push((l, r, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = gk15(&f, l, m)?;
        let (v2, e2) = gk15(&f, m, r)?;
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((l, m, v1, e1));
        parts.push((m, r, v2, e2));
    }
    // re-sum to limit cancellation drift
    let total: f64 = parts.iter().map(|p| p.2).sum();
    let err: f64 = parts.iter().map(|p| p.3).sum();
    Ok(Estimate {
        value: sign * total,
        abs_err: err,
    })
}

/// `int_a^inf f(x) dx` through the substitution `x = a - ln(u) / rate`.
///
/// Exact up to quadrature error when `f` decays like `exp(-rate x)`.
pub fn integrate_exp_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rate: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(rate > 0.0) {
        return Err(Error::Quadrature("exponential substitution needs rate > 0".into()));
    }
    integrate(
        |u: f64| {
            let x = a - libm::log(u) / rate;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (rate * u)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `int_0^b f(y) dy` for `f(y) ~ y^(-p)` near zero, `p < 1`.
///
/// Uses `y = b u^m` with `m = 1 / (1 - p)`, which makes the transformed
/// integrand bounded at the origin.
pub fn integrate_power_origin<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    p: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if p >= 1.0 {
        return Err(Error::Divergent("power singularity of order >= 1".into()));
    }
    if b <= 0.0 {
        return Ok(Estimate::ZERO);
    }
    let m = if p > 0.0 { 1.0 / (1.0 - p) } else { 1.0 };
    integrate(
        |u: f64| {
            let um1 = libm::pow(u, m - 1.0);
            let y = b * um1 * u;
            if y <= 0.0 {
                return 0.0;
            }
            f(y) * b * m * um1
        },
        0.0,
        1.0,
        tol,
    )
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson).
///
/// Monotone data stay monotone between knots; outside the knot range the
/// end values are held constant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::invalid("interpolation knots", "length mismatch or empty"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("interpolation knots", "x must be strictly increasing"));
        }
        let n = xs.len();
        let mut ds = vec![0.0; n];
        if n >= 2 {
            let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
            ds[0] = end_slope(h[0], h.get(1).copied(), delta[0], delta.get(1).copied());
            ds[n - 1] = end_slope(
                h[n - 2],
                if n >= 3 { Some(h[n - 3]) } else { None },
                delta[n - 2],
                if n >= 3 { Some(delta[n - 3]) } else { None },
            );
            for i in 1..n - 1 {
                let (d0, d1) = (delta[i - 1], delta[i]);
                if d0 * d1 <= 0.0 {
                    ds[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    ds[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
        }
        Ok(MonotoneCubic { xs, ys, ds })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        self.eval_segment(i, x)
    }

    fn eval_segment(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    /// Exact integral of the interpolant over `[a, b]` restricted to the knot
    /// range (two-point Gauss-Legendre is exact on each cubic piece).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let n = self.xs.len();
        let lo = a.max(self.xs[0]);
        let hi = b.min(self.xs[n - 1]);
        if !(hi > lo) {
            return 0.0;
        }
        let g = 0.5 / libm::sqrt(3.0);
        let mut sum = 0.0;
        let start = self.xs.partition_point(|&k| k <= lo).saturating_sub(1);
        for i in start..n - 1 {
            let l = self.xs[i].max(lo);
            let r = self.xs[i + 1].min(hi);
            if r <= l {
                if self.xs[i] >= hi {
                    break;
                }
                continue;
            }
            let c = 0.5 * (l + r);
            let w = r - l;
            sum += 0.5 * w * (self.eval_segment(i, c - g * w) + self.eval_segment(i, c + g * w));
        }
        sum
    }
}

fn end_slope(h0: f64, h1: Option<f64>, d0: f64, d1: Option<f64>) -> f64 {
    match (h1, d1) {
        (Some(h1), Some(d1)) => {
            let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if d * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                d
            }
        }
        _ => d0,
    }
}

/// Largest `y >= lo` with `pred(y)` true, for a predicate that is true on an
/// initial segment `[lo, y*]` and false after.
///
/// `lo` must satisfy the predicate. The upper bracket is found by doubling.
/// Returns a point within `tol` below `y*` (or `y*` itself if hit).
pub fn sup_of_initial_segment<P: Fn(f64) -> bool>(pred: P, lo: f64, tol: f64) -> Result<(f64, f64)> {
    let mut lo = lo;
    let mut step = 1.0f64.max(lo.abs());
    let mut hi = lo + step;
    let mut guard = 0;
    while pred(hi) {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        guard += 1;
        if guard > 1100 || !hi.is_finite() {
            return Err(Error::Quadrature("unbounded level set in bisection".into()));
        }
    }
    let mut iter = 0;
    while hi - lo > tol * 1f64.max(lo.abs()) && iter < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    Ok((lo, hi))
}

/// `ln(k!)` by direct summation for small `k` and Stirling series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 64 {
        let mut s = 0.0;
        for i in 2..=k {
            s += libm::log(i as f64);
        }
        s
    } else {
        libm::lgamma(k as f64 + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_polynomial_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::DEFAULT).unwrap();
        assert_relative_eq!(e.value, 0.0, epsilon = 1e-14);
        let e = integrate(|x| x * x, -1.0, 2.0, Tolerance::DEFAULT).unwrap();
        assert_relative_eq!(e.value, 3.0, epsilon = 1e-13);
    }

    #[test]
    fn exp_tail_substitution() {
        // int_1^inf y e^-y dy = 2/e
        let e = integrate_exp_tail(|y| y * (-y).exp(), 1.0, 1.0, Tolerance::DEFAULT).unwrap();
        assert_relative_eq!(e.value, 2.0 * (-1.0f64).exp(), max_relative = 1e-11);
    }

    #[test]
    fn power_singularity() {
        // int_0^1 y^-0.5 dy = 2
        let e = integrate_power_origin(|y| 1.0 / y.sqrt(), 1.0, 0.5, Tolerance::DEFAULT).unwrap();
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-11);
        assert!(integrate_power_origin(|y| 1.0 / y, 1.0, 1.0, Tolerance::DEFAULT).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_degree_31() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert_relative_eq!(s, 2.0 / 31.0, max_relative = 1e-12);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn monotone_cubic_stays_monotone() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys = vec![10.0, 9.0, 9.0, 8.9, 3.0, 2.9, 2.8, 0.1, 0.05, 0.0];
        let m = MonotoneCubic::new(xs, ys.clone()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=900 {
            let v = m.eval(k as f64 / 100.0);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        assert_eq!(m.eval(4.0), 3.0);
        // integral of a linear interpolant is exact
        let lin = MonotoneCubic::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(lin.integral(0.25, 1.5), (1.5f64.powi(2) - 0.0625) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn bisection_finds_level() {
        let (lo, hi) = sup_of_initial_segment(|y| 2.0 * (-y).exp() >= 0.5, 0.0, 1e-12).unwrap();
        assert!(hi - lo < 1e-11);
        assert_relative_eq!(lo, 4.0f64.ln(), epsilon = 1e-11);
    }
}
