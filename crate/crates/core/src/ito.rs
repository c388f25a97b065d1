//! Itô-map coupling: both processes are driven by one Poisson random measure
//! with intensity `dA_t dx / x^2` and one Brownian motion.
//!
//! A reference point `(tau, x)` becomes the jump `rho(tau, x)` where
//! `rho(t, x) = sup { y >= 0 : K(t, [y, inf)) >= 1/x }` for `x > 0` (and the
//! mirror image for `x < 0`). Ordered tails give ordered maps, so ordered
//! drifts give ordered paths.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::characteristics::{align_pair, time_pieces, PiiCharacteristics, TimeMeasure};
use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, LevyMeasure, Region, RayFunction, Side};
use crate::numeric::MonotoneCubic;
use crate::paths::{
    accumulate, check_grid, comonotone_fixed_jumps, drift_part, gaussian_on_grid, JumpRecord, JumpSource,
    PairSampler, PathPair, SamplerInfo, TruncationInfo, CoupledPathSet,
};
use crate::rng::{self, purpose};

/// Horizon and mark cut-offs of a reference point set. An infinite `delta`
/// means no points on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReferenceWindow {
    pub horizon: f64,
    pub delta_pos: f64,
    pub delta_neg: f64,
}

impl ReferenceWindow {
    /// Expected number of points per unit of `A`.
    pub fn rate(&self) -> f64 {
        1.0 / self.delta_pos + 1.0 / self.delta_neg
    }
}

/// Points `(tau, x)` of the reference measure restricted to `x >= delta_pos`
/// or `x <= -delta_neg`, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoints {
    pub points: Vec<(f64, f64)>,
    pub window: ReferenceWindow,
}

pub fn sample_reference<R: RngCore>(a: &TimeMeasure, window: &ReferenceWindow, rng: &mut R) -> Result<ReferencePoints> {
    let (dp, dn) = (window.delta_pos, window.delta_neg);
    if !(dp > 0.0 && dn > 0.0) {
        return Err(Error::ZeroTruncation);
    }
    let lambda = window.rate();
    let a_end = a.value(window.horizon);
    let mut points = Vec::new();
    if lambda > 0.0 && a_end > 0.0 {
        let p_pos = (1.0 / dp) / lambda;
        let mut s = 0.0;
        loop {
            s += rng::exp1(rng) / lambda;
            if s > a_end {
                break;
            }
            let tau = a.inverse(s).unwrap_or(window.horizon).min(window.horizon);
            let u = rng::open01(rng);
            let v = rng::open01(rng);
            let x = if u < p_pos { dp / v } else { -dn / v };
            points.push((tau, x));
        }
    }
    Ok(ReferencePoints { points, window: *window })
}

/// `rho(t, x)` evaluated directly on the tail.
pub fn ito_map(kernel: &JumpKernel, t: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let side = Side::of(x);
    Ok(side.sign() * kernel.at(t).tail_inverse(side, 1.0 / x.abs())?)
}

const TABLE_FLOOR: f64 = 1e-9;
const TABLE_PER_DECADE: f64 = 128.0;

/// `log y` as a function of `-log T(y)` on a geometric grid.
#[derive(Debug, Clone)]
struct InverseTable {
    curve: MonotoneCubic,
}

impl InverseTable {
    fn build(m: &LevyMeasure, side: Side) -> Result<Option<Self>> {
        let mut hi = 1.0;
        let t0 = m.tail(side, TABLE_FLOOR, true)?;
        if !(t0 > 0.0) {
            return Ok(None);
        }
        while m.tail(side, hi, true)? > 1e-13 * t0.min(1.0) && hi < 1e12 {
            hi *= 2.0;
        }
        let decades = libm::log10(hi / TABLE_FLOOR);
        let n = libm::ceil(decades * TABLE_PER_DECADE) as usize + 1;
        let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let y = TABLE_FLOOR * libm::pow(hi / TABLE_FLOOR, i as f64 / (n - 1) as f64);
            let t = m.tail(side, y, true)?;
            if !(t > 0.0) {
                break;
            }
            let key = -libm::log(t);
            if xs.last().is_some_and(|&k: &f64| key <= k) {
                continue;
            }
            xs.push(key);
            ys.push(libm::log(y));
        }
        if xs.len() < 4 {
            return Ok(None);
        }
        Ok(Some(InverseTable {
            curve: MonotoneCubic::new(xs, ys)?,
        }))
    }

    fn lookup(&self, v: f64) -> Option<f64> {
        let key = -libm::log(v);
        let xs = self.curve.xs();
        if key < xs[0] || key > xs[xs.len() - 1] {
            return None;
        }
        Some(libm::exp(self.curve.eval(key)))
    }
}

/// `rho` for every cell of a kernel. Cells whose tails need quadrature and
/// carry no atoms get an interpolated inverse table; everything else, and
/// every level outside a table, is inverted by bisection.
#[derive(Debug, Clone)]
pub struct ItoMap {
    kernel: JumpKernel,
    tables: Vec<[Option<InverseTable>; 2]>,
}

impl ItoMap {
    pub fn new(kernel: JumpKernel) -> Result<Self> {
        let mut tables = Vec::with_capacity(kernel.cells().len());
        for c in kernel.cells() {
            let m = &c.measure;
            let mut atoms = Vec::new();
            m.atoms(&mut atoms);
            if m.needs_quadrature() && atoms.is_empty() {
                tables.push([InverseTable::build(m, Side::Pos)?, InverseTable::build(m, Side::Neg)?]);
            } else {
                tables.push([None, None]);
            }
        }
        Ok(ItoMap { kernel, tables })
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let side = Side::of(x);
        let v = 1.0 / x.abs();
        let cell = self.kernel.cell_index(t);
        let slot = if side == Side::Pos { 0 } else { 1 };
        if let Some(r) = self.tables[cell][slot].as_ref().and_then(|tb| tb.lookup(v)) {
            return Ok(side.sign() * r);
        }
        Ok(side.sign() * self.kernel.cells()[cell].measure.tail_inverse(side, v)?)
    }
}

/// Reference cut-offs for dropping jumps of size at most `epsilon`, and the
/// mass `int int_{|y| <= eps} |y| K(t, dy) dA_t` of what is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpTruncation {
    pub delta_pos: f64,
    pub delta_neg: f64,
    pub bias_bound: f64,
}

pub fn truncation_for(kernel: &JumpKernel, a: &TimeMeasure, epsilon: f64, horizon: f64) -> Result<JumpTruncation> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon_jump", "must be positive"));
    }
    let small = RayFunction::identity().combine(1.0, &RayFunction::identity().restricted_above(epsilon), -1.0);
    let mut sup = [0.0f64; 2];
    let mut bias = 0.0;
    for p in time_pieces(kernel, a, 0.0, horizon) {
        if p.d_a() == 0.0 {
            continue;
        }
        let m = &kernel.cells()[p.cell].measure;
        for (i, side) in [Side::Pos, Side::Neg].into_iter().enumerate() {
            sup[i] = sup[i].max(m.tail(side, epsilon, true)?);
        }
        bias += match m.integrate_split(&small, &small) {
            Ok(e) => e.value * p.d_a(),
            Err(Error::Divergent(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
    }
    let delta = |s: f64| if s > 0.0 { 1.0 / s } else { f64::INFINITY };
    Ok(JumpTruncation {
        delta_pos: delta(sup[0]),
        delta_neg: delta(sup[1]),
        bias_bound: bias,
    })
}

/// Cut-offs that keep every jump of a finite-activity kernel.
fn full_window(kernel: &JumpKernel, a: &TimeMeasure, horizon: f64) -> Result<(f64, f64)> {
    let mut sup = [0.0f64; 2];
    for p in time_pieces(kernel, a, 0.0, horizon) {
        if p.d_a() == 0.0 {
            continue;
        }
        let m = &kernel.cells()[p.cell].measure;
        for (i, side) in [Side::Pos, Side::Neg].into_iter().enumerate() {
            let mass = m.side_mass(side)?;
            if !mass.is_finite() {
                let h = crate::characteristics::TruncationFunction::default();
                return Err(match h.integral(m, 0.0) {
                    Err(Error::InfiniteVariation) => Error::InfiniteVariation,
                    _ => Error::Unsupported("infinite-activity kernel needs epsilon_jump".into()),
                });
            }
            sup[i] = sup[i].max(mass);
        }
    }
    let delta = |s: f64| if s > 0.0 { 1.0 / s } else { f64::INFINITY };
    Ok((delta(sup[0]), delta(sup[1])))
}

fn same_gaussian(x: &PiiCharacteristics, y: &PiiCharacteristics, grid: &[f64], horizon: f64) -> bool {
    let mut ts = x.gaussian.breakpoints();
    ts.extend(y.gaussian.breakpoints());
    ts.extend_from_slice(grid);
    ts.push(horizon);
    ts.iter().all(|&t| {
        let (a, b) = (x.gaussian.eval(t), y.gaussian.eval(t));
        (a - b).abs() <= 1e-12 * 1f64.max(a.abs())
    })
}

/// Path-pair sampler for the Itô-map coupling.
#[derive(Debug, Clone)]
pub struct ItoSampler {
    x: PiiCharacteristics,
    y: PiiCharacteristics,
    grid: Vec<f64>,
    epsilon: Option<f64>,
    seed: u64,
    window: ReferenceWindow,
    map_x: ItoMap,
    map_y: ItoMap,
    base_x: Vec<f64>,
    base_y: Vec<f64>,
    bias_bound: f64,
}

impl ItoSampler {
    pub fn new(
        x: &PiiCharacteristics,
        y: &PiiCharacteristics,
        horizon: f64,
        grid: &[f64],
        epsilon: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        check_grid(grid, horizon)?;
        if !same_gaussian(x, y, grid, horizon) {
            return Err(Error::Hypothesis(
                "the Itô-map coupling needs a common Gaussian part C".into(),
            ));
        }
        let (x, y) = align_pair(x, y);
        let a = &x.time_measure;
        let (dp, dn, bias) = match epsilon {
            Some(eps) => {
                let tx = truncation_for(&x.kernel, a, eps, horizon)?;
                let ty = truncation_for(&y.kernel, a, eps, horizon)?;
                (
                    tx.delta_pos.min(ty.delta_pos),
                    tx.delta_neg.min(ty.delta_neg),
                    tx.bias_bound.max(ty.bias_bound),
                )
            }
            None => {
                let (xp, xn) = full_window(&x.kernel, a, horizon)?;
                let (yp, yn) = full_window(&y.kernel, a, horizon)?;
                (xp.min(yp), xn.min(yn), 0.0)
            }
        };
        let eps = epsilon.unwrap_or(0.0);
        let base_x = drift_part(&x, eps, grid)?;
        let base_y = drift_part(&y, eps, grid)?;
        Ok(ItoSampler {
            map_x: ItoMap::new(x.kernel.clone())?,
            map_y: ItoMap::new(y.kernel.clone())?,
            window: ReferenceWindow {
                horizon,
                delta_pos: dp,
                delta_neg: dn,
            },
            x,
            y,
            grid: grid.to_vec(),
            epsilon,
            seed,
            base_x,
            base_y,
            bias_bound: bias,
        })
    }

    pub fn window(&self) -> &ReferenceWindow {
        &self.window
    }
}

impl PairSampler for ItoSampler {
    fn time_grid(&self) -> &[f64] {
        &self.grid
    }

    fn info(&self) -> SamplerInfo {
        SamplerInfo {
            method: "ito".to_string(),
            seed: self.seed,
            truncation: Some(TruncationInfo {
                epsilon: self.epsilon,
                delta_pos: self.window.delta_pos,
                delta_neg: self.window.delta_neg,
            }),
            bias_bound: self.bias_bound,
        }
    }

    fn sample_path(&self, index: u64) -> Result<PathPair> {
        let mut r = rng::stream(self.seed, purpose::REFERENCE, index);
        let pts = sample_reference(&self.x.time_measure, &self.window, &mut r)?;
        let thr = self.epsilon.unwrap_or(0.0);
        let keep = |v: f64| if v.abs() > thr { v } else { 0.0 };
        let mut records = Vec::new();
        for &(tau, m) in &pts.points {
            let dx = keep(self.map_x.eval(tau, m)?);
            let dy = keep(self.map_y.eval(tau, m)?);
            if dx != 0.0 || dy != 0.0 {
                records.push(JumpRecord {
                    path: index,
                    tau,
                    mark: Some(m),
                    dx,
                    dy,
                    source: JumpSource::Reference,
                });
            }
        }
        let mut rf = rng::stream(self.seed, purpose::FIXED_JUMPS, index);
        for (tau, dx, dy) in comonotone_fixed_jumps(&self.x.fixed_jumps, &self.y.fixed_jumps, self.window.horizon, &mut rf) {
            records.push(JumpRecord {
                path: index,
                tau,
                mark: None,
                dx,
                dy,
                source: JumpSource::Fixed,
            });
        }
        let mut rw = rng::stream(self.seed, purpose::WIENER, index);
        let w = gaussian_on_grid(&self.x.gaussian, &self.grid, &mut rw);
        let bx: Vec<f64> = self.base_x.iter().zip(&w).map(|(a, b)| a + b).collect();
        let by: Vec<f64> = self.base_y.iter().zip(&w).map(|(a, b)| a + b).collect();
        let mut jx: Vec<(f64, f64)> = records.iter().map(|j| (j.tau, j.dx)).collect();
        let mut jy: Vec<(f64, f64)> = records.iter().map(|j| (j.tau, j.dy)).collect();
        Ok(PathPair {
            x: accumulate(&self.grid, &bx, &mut jx),
            y: accumulate(&self.grid, &by, &mut jy),
            jumps: records,
            paired: Vec::new(),
        })
    }
}

/// Itô-map coupling of `x` and `y` on `grid`. Without `epsilon` both kernels
/// must have finite activity; with it, jumps of size at most `epsilon` are
/// replaced by their compensator and the error is reported as a bias bound.
pub fn simulate_coupled(
    x: &PiiCharacteristics,
    y: &PiiCharacteristics,
    horizon: f64,
    grid: &[f64],
    n_paths: usize,
    epsilon: Option<f64>,
    seed: u64,
) -> Result<CoupledPathSet> {
    let s = ItoSampler::new(x, y, horizon, grid, epsilon, seed)?;
    crate::paths::collect(&s, n_paths)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PushforwardCheck {
    pub empirical: f64,
    pub exact: f64,
    pub standard_error: f64,
    pub z_score: f64,
}

/// Monte-Carlo estimate of the average rate `(1/A_T) int K(t, G) dA_t` from
/// `n_samples` reference points pushed through `map`.
pub fn pushforward_check(
    map: &ItoMap,
    a: &TimeMeasure,
    horizon: f64,
    g: Region,
    n_samples: usize,
    seed: u64,
) -> Result<PushforwardCheck> {
    if !g.bounded_away_from_zero() {
        return Err(Error::TouchesOrigin);
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let (side, r_min) = if g.lo > 0.0 { (Side::Pos, g.lo) } else { (Side::Neg, -g.hi) };
    let a_end = a.value(horizon);
    if !(a_end > 0.0) {
        return Err(Error::DegenerateInput("A vanishes on the window".into()));
    }
    let kernel = map.kernel();
    let mut exact = 0.0;
    let mut sup = 0.0f64;
    for p in time_pieces(kernel, a, 0.0, horizon) {
        if p.d_a() == 0.0 {
            continue;
        }
        let m = &kernel.cells()[p.cell].measure;
        exact += m.interval_mass(g)? * p.d_a();
        sup = sup.max(m.tail(side, r_min, true)?);
    }
    exact /= a_end;
    if sup == 0.0 {
        return Ok(PushforwardCheck {
            empirical: 0.0,
            exact,
            standard_error: 0.0,
            z_score: 0.0,
        });
    }
    let delta = 1.0 / sup;
    let mut r = rng::stream(seed, purpose::PUSHFORWARD, 0);
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let tau = a.inverse(rng::open01(&mut r) * a_end).unwrap_or(horizon).min(horizon);
        let x = side.sign() * delta / rng::open01(&mut r);
        if g.contains(map.eval(tau, x)?) {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    let empirical = sup * hits as f64 / n;
    let q = (exact / sup).clamp(0.0, 1.0);
    let mut se = sup * libm::sqrt(q * (1.0 - q) / n);
    if se == 0.0 {
        let p = hits as f64 / n;
        se = sup * libm::sqrt(p * (1.0 - p) / n);
    }
    let diff = empirical - exact;
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(PushforwardCheck {
        empirical,
        exact,
        standard_error: se,
        z_score: z,
    })
}

/// Checks `rho^X <= rho^Y` on a set of times and marks; returns the first
/// offending `(t, x, rho^X, rho^Y)`.
pub fn first_map_inversion(
    mx: &ItoMap,
    my: &ItoMap,
    times: &[f64],
    marks: &[f64],
) -> Result<Option<(f64, f64, f64, f64)>> {
    for &t in times {
        for &x in marks {
            let (a, b) = (mx.eval(t, x)?, my.eval(t, x)?);
            if a > b + 1e-9 * 1f64.max(a.abs()) {
                return Ok(Some((t, x, a, b)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::{PiecewiseLinear, TruncationFunction};
    use crate::kernel::JumpLaw;
    use approx::assert_relative_eq;

    fn exp_kernel(rate: f64) -> JumpKernel {
        JumpKernel::homogeneous(LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 }).unwrap())
    }

    fn exp_process(rate: f64, b: f64) -> PiiCharacteristics {
        PiiCharacteristics::levy(
            TruncationFunction::indicator(1.0).unwrap(),
            b,
            0.0,
            LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 }).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn closed_form_map() {
        let k = exp_kernel(2.0);
        assert!((ito_map(&k, 0.3, 2.0).unwrap() - libm::log(4.0)).abs() < 1e-9);
        assert_eq!(ito_map(&k, 0.3, 0.4).unwrap(), 0.0);
        assert_eq!(ito_map(&k, 0.3, 0.0).unwrap(), 0.0);
        assert_eq!(ito_map(&k, 0.3, -5.0).unwrap(), 0.0);
    }

    #[test]
    fn atoms_are_hit_exactly() {
        let k = JumpKernel::homogeneous(
            LevyMeasure::compound_poisson(1.0, JumpLaw::atoms(vec![(1.0, 0.5), (-2.0, 0.5)]).unwrap()).unwrap(),
        );
        assert_eq!(ito_map(&k, 0.0, 2.0).unwrap(), 1.0);
        assert_eq!(ito_map(&k, 0.0, 1.9).unwrap(), 0.0);
        assert_eq!(ito_map(&k, 0.0, -2.0).unwrap(), -2.0);
    }

    #[test]
    fn table_agrees_with_bisection() {
        let k = JumpKernel::homogeneous(LevyMeasure::cgmy(1.0, 1.0, 2.0, 0.5).unwrap());
        let map = ItoMap::new(k.clone()).unwrap();
        for &x in &[0.05, 0.3, 1.0, 4.0, 40.0, -0.05, -2.0, -30.0] {
            let a = map.eval(0.0, x).unwrap();
            let b = ito_map(&k, 0.0, x).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-6, epsilon = 1e-10);
        }
    }

    #[test]
    fn truncation_window() {
        let k = exp_kernel(2.0);
        let t = truncation_for(&k, &TimeMeasure::identity(), 0.5, 3.0).unwrap();
        assert_relative_eq!(t.delta_pos, 0.824360635350064, max_relative = 1e-12);
        assert!(t.delta_neg.is_infinite());
        let atom = JumpKernel::homogeneous(LevyMeasure::compound_poisson(1.0, JumpLaw::point(1.0).unwrap()).unwrap());
        assert_eq!(truncation_for(&atom, &TimeMeasure::identity(), 0.5, 1.0).unwrap().bias_bound, 0.0);
        assert!(truncation_for(&atom, &TimeMeasure::identity(), 0.0, 1.0).is_err());
    }

    #[test]
    fn cgmy_bias_bound() {
        let k = JumpKernel::homogeneous(LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap());
        let t = truncation_for(&k, &TimeMeasure::identity(), 0.01, 1.0).unwrap();
        assert_relative_eq!(t.bias_bound, 0.398_670_657_161_345_4, max_relative = 1e-8);
    }

    #[test]
    fn reference_counts() {
        let w = ReferenceWindow {
            horizon: 1.0,
            delta_pos: 0.1,
            delta_neg: 0.1,
        };
        let a = TimeMeasure::identity();
        let mut r = rng::stream(42, purpose::REFERENCE, 0);
        let mut total = 0;
        for _ in 0..2000 {
            let p = sample_reference(&a, &w, &mut r).unwrap();
            assert!(p.points.iter().all(|&(t, x)| t <= 1.0 && x.abs() >= 0.1));
            total += p.points.len();
        }
        let mean = total as f64 / 2000.0;
        assert!((mean - 20.0).abs() < 4.0 * (20.0f64 / 2000.0).sqrt());
        let empty = sample_reference(&TimeMeasure::zero(), &w, &mut r).unwrap();
        assert!(empty.points.is_empty());
        let again = |s| sample_reference(&a, &w, &mut rng::stream(s, purpose::REFERENCE, 3)).unwrap();
        assert_eq!(again(42), again(42));
        let zero = ReferenceWindow { delta_pos: 0.0, ..w };
        assert_eq!(sample_reference(&a, &zero, &mut r), Err(Error::ZeroTruncation));
    }

    #[test]
    fn pushforward_matches_tail() {
        let map = ItoMap::new(exp_kernel(2.0)).unwrap();
        let a = TimeMeasure::identity();
        let g = Region::above(libm::log(4.0), true);
        let c = pushforward_check(&map, &a, 1.0, g, 20_000, 5).unwrap();
        assert_relative_eq!(c.exact, 0.5, max_relative = 1e-12);
        assert!(c.z_score.abs() < 4.0);
        let far = pushforward_check(&map, &a, 1.0, Region::new(-3.0, true, -1.0, true), 100, 5).unwrap();
        assert_eq!((far.empirical, far.exact), (0.0, 0.0));
        assert_eq!(
            pushforward_check(&map, &a, 1.0, Region::new(0.0, false, 1.0, true), 100, 5),
            Err(Error::TouchesOrigin)
        );
    }

    #[test]
    fn ordered_tails_give_ordered_maps() {
        let (mx, my) = (ItoMap::new(exp_kernel(1.0)).unwrap(), ItoMap::new(exp_kernel(2.0)).unwrap());
        let marks: Vec<f64> = (1..400).map(|i| 0.01 * i as f64).collect();
        assert_eq!(first_map_inversion(&mx, &my, &[0.0, 0.5], &marks).unwrap(), None);
    }

    #[test]
    fn identical_processes_give_identical_paths() {
        let x = exp_process(1.5, 0.2);
        let grid = crate::order::time_grid(1.0, 20);
        let s = simulate_coupled(&x, &x, 1.0, &grid, 50, None, 9).unwrap();
        assert_eq!(s.x, s.y);
    }

    #[test]
    fn coupled_paths_are_ordered() {
        let x = exp_process(1.0, 0.0);
        let y = exp_process(2.0, 0.3);
        let grid = crate::order::time_grid(1.0, 50);
        let s = simulate_coupled(&x, &y, 1.0, &grid, 2000, None, 1).unwrap();
        assert_eq!(s.violations(1e-9), 0);
        let again = simulate_coupled(&x, &y, 1.0, &grid, 2000, None, 1).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn unequal_gaussian_rejected() {
        let x = exp_process(1.0, 0.0);
        let mut y = exp_process(1.0, 0.0);
        y.gaussian = PiecewiseLinear::linear(1.0);
        assert!(matches!(
            simulate_coupled(&x, &y, 1.0, &[0.0, 1.0], 1, None, 1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn infinite_variation_needs_epsilon() {
        let c = PiiCharacteristics::levy(TruncationFunction::default(), 0.0, 0.0, LevyMeasure::cgmy(1.0, 1.0, 1.0, 1.5).unwrap()).unwrap();
        assert_eq!(
            simulate_coupled(&c, &c, 1.0, &[0.0, 1.0], 1, None, 1).unwrap_err(),
            Error::InfiniteVariation
        );
        let s = simulate_coupled(&c, &c, 1.0, &[0.0, 0.5, 1.0], 5, Some(0.1), 1).unwrap();
        assert!(s.bias_bound.is_infinite());
        assert_eq!(s.x, s.y);
    }

    #[test]
    fn jump_count_matches_tail() {
        let x = exp_process(1.0, 0.0);
        let grid = [0.0, 1.0];
        let s = simulate_coupled(&x, &x, 1.0, &grid, 20_000, None, 77).unwrap();
        let big = s.jumps.iter().filter(|j| j.dx >= 1.0).count() as f64 / 20_000.0;
        let e = libm::exp(-1.0);
        assert!((big - e).abs() < 4.0 * libm::sqrt(e / 20_000.0));
    }
}
