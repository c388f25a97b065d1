//! Convex and increasing-convex coupling.
//!
//! If `Y` majorizes `X` in the convex sense, `Y` has the law of `X + Z` for a
//! process `Z` independent of `X` with triplet
//! `(B^Y - B^X, C^Y - C^X, nu^Y - nu^X)`. The sampler draws `X` and `Z` from
//! separate streams and reports `Y = X + Z`. Fixed-time jumps are coupled
//! comonotonically by [`couple_fixed_jumps`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::characteristics::{decompose, FixedJumpSchedule, PiecewiseLinear, PiiCharacteristics, TimeMeasure, TruncationFunction};
use crate::direct::DirectSimulator;
use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, LevyMeasure};
use crate::order::{check_convex_majorization, check_fixed_jumps, common_basis, Grid, OrderKind, OrderReport, Verdict};
use crate::paths::{
    accumulate, check_grid, collect, comonotone_fixed_jumps, CoupledPathSet, JumpRecord, JumpSource, PairSampler,
    PathPair, SamplerInfo, TruncationInfo,
};
use crate::rng::{self, purpose};

/// Triplet of the add-on `Z`, expressed against the time measure and
/// truncation of the aligned pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AddOnCharacteristics {
    pub drift: PiecewiseLinear,
    pub gaussian: PiecewiseLinear,
    pub kernel: JumpKernel,
    pub time_measure: TimeMeasure,
    pub truncation: TruncationFunction,
    /// Fixed-time jumps shared by X and Y; they stay with X.
    pub shared_fixed_jumps: FixedJumpSchedule,
    /// The add-on has mean zero (cx rather than icx).
    pub equality: bool,
}

impl AddOnCharacteristics {
    pub fn characteristics(&self) -> Result<PiiCharacteristics> {
        PiiCharacteristics::new(
            self.truncation,
            self.drift.clone(),
            self.gaussian.clone(),
            self.kernel.clone(),
            self.time_measure.clone(),
            FixedJumpSchedule::empty(),
        )
    }

    /// `E Z_t = B^Z_t + (x - h) * nu^Z_t`.
    pub fn mean(&self, t: f64) -> Result<f64> {
        let c = self.characteristics()?;
        let h = self.truncation;
        let e = c.integrate_in_time(t, |m| h.excess_integral(m))?;
        Ok(self.drift.eval(t) + e.value)
    }

    pub fn is_zero(&self) -> bool {
        self.drift.knots().iter().all(|k| k.1 == 0.0)
            && self.gaussian.knots().iter().all(|k| k.1 == 0.0)
            && self.kernel.cells().iter().all(|c| c.measure == LevyMeasure::Zero)
    }
}

/// `ky - kx`, cancelling `kx` exactly when `ky` is a sum containing it.
fn difference(ky: &LevyMeasure, kx: &LevyMeasure) -> LevyMeasure {
    if ky == kx || *kx == LevyMeasure::Zero && *ky == LevyMeasure::Zero {
        return LevyMeasure::Zero;
    }
    if *kx == LevyMeasure::Zero {
        return ky.clone();
    }
    if let LevyMeasure::Sum(parts) = ky {
        if let Some(i) = parts.iter().position(|p| p == kx) {
            let mut rest = parts.clone();
            rest.remove(i);
            return match rest.len() {
                0 => LevyMeasure::Zero,
                1 => rest.pop().unwrap_or(LevyMeasure::Zero),
                _ => LevyMeasure::Sum(rest),
            };
        }
    }
    ky.clone().minus(kx.clone())
}

pub(crate) fn describe_failure(r: &OrderReport) -> String {
    match (r.verdict, r.witnesses.first()) {
        (Verdict::Violated, Some(w)) => match w.x {
            Some(x) => format!("{} fails at t = {}, x = {}: {} > {}", w.what, w.t, x, w.lhs, w.rhs),
            None => format!("{} fails at t = {}: {} > {}", w.what, w.t, w.lhs, w.rhs),
        },
        (Verdict::Violated, None) => format!("{} violated", r.theorem),
        _ => format!(
            "{} inconclusive: {}",
            r.theorem,
            r.reason.clone().unwrap_or_else(|| "no reason given".to_string())
        ),
    }
}

/// Checks convex majorization on `grid` and returns the add-on triplet.
/// Fixed-time jumps must coincide in both processes.
pub fn build_addon(x: &PiiCharacteristics, y: &PiiCharacteristics, grid: &Grid) -> Result<AddOnCharacteristics> {
    let (xq, yq, fixed) = split_fixed(x, y)?;
    let report = check_convex_majorization(&xq, &yq, grid);
    if report.verdict != Verdict::Satisfied {
        return Err(Error::Hypothesis(describe_failure(&report)));
    }
    let mut addon = addon_of(&xq, &yq, fixed)?;
    addon.equality = report.equality == Some(true);
    Ok(addon)
}

/// Same as [`build_addon`] without the majorization check. The add-on must
/// still be a valid triplet (nondecreasing Gaussian part).
pub fn build_addon_unchecked(x: &PiiCharacteristics, y: &PiiCharacteristics) -> Result<AddOnCharacteristics> {
    let (xq, yq, fixed) = split_fixed(x, y)?;
    addon_of(&xq, &yq, fixed)
}

fn split_fixed(
    x: &PiiCharacteristics,
    y: &PiiCharacteristics,
) -> Result<(PiiCharacteristics, PiiCharacteristics, FixedJumpSchedule)> {
    if x.fixed_jumps != y.fixed_jumps {
        return Err(Error::Unsupported(
            "convex coupling of differing fixed-time jumps is not constructed".into(),
        ));
    }
    let (xq, fixed) = decompose(x)?;
    let (yq, _) = decompose(y)?;
    Ok((xq, yq, fixed))
}

fn addon_of(x: &PiiCharacteristics, y: &PiiCharacteristics, fixed: FixedJumpSchedule) -> Result<AddOnCharacteristics> {
    let (x, y) = common_basis(x, y)?;
    let gaussian = y.gaussian.sub(&x.gaussian);
    if !gaussian.is_nondecreasing() {
        return Err(Error::Hypothesis("C^Y - C^X is not nondecreasing".into()));
    }
    let addon = AddOnCharacteristics {
        drift: y.drift.sub(&x.drift),
        gaussian,
        kernel: y.kernel.zip_with(&x.kernel, difference),
        time_measure: x.time_measure.clone(),
        truncation: x.truncation,
        shared_fixed_jumps: fixed,
        equality: false,
    };
    addon.characteristics()?;
    Ok(addon)
}

/// `X` drawn directly, `Z` drawn independently, `Y = X + Z`.
#[derive(Debug, Clone)]
pub struct ConvexSampler {
    x: DirectSimulator,
    z: DirectSimulator,
    fixed_times: Vec<f64>,
    seed: u64,
    epsilon: Option<f64>,
    bias_bound: f64,
}

impl ConvexSampler {
    pub fn new(
        x: &PiiCharacteristics,
        addon: &AddOnCharacteristics,
        horizon: f64,
        grid: &[f64],
        epsilon: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        check_grid(grid, horizon)?;
        if x.fixed_jumps != addon.shared_fixed_jumps {
            return Err(Error::invalid("addon", "built for a different fixed-jump schedule"));
        }
        let zc = addon.characteristics()?;
        let bias_bound = match epsilon {
            Some(e) => {
                crate::ito::truncation_for(&x.kernel, &x.time_measure, e, horizon)?.bias_bound
                    + crate::ito::truncation_for(&zc.kernel, &zc.time_measure, e, horizon)?.bias_bound
            }
            None => 0.0,
        };
        Ok(ConvexSampler {
            x: DirectSimulator::new(x, horizon, grid, epsilon, seed)?,
            z: DirectSimulator::new(&zc, horizon, grid, epsilon, seed)?.with_stream(purpose::ADDON),
            fixed_times: x.fixed_jumps.times(),
            seed,
            epsilon,
            bias_bound,
        })
    }
}

impl PairSampler for ConvexSampler {
    fn time_grid(&self) -> &[f64] {
        self.x.time_grid()
    }

    fn info(&self) -> SamplerInfo {
        SamplerInfo {
            method: "convex".to_string(),
            seed: self.seed,
            truncation: self.epsilon.map(|e| TruncationInfo {
                epsilon: Some(e),
                delta_pos: f64::NAN,
                delta_neg: f64::NAN,
            }),
            bias_bound: self.bias_bound,
        }
    }

    fn sample_path(&self, index: u64) -> Result<PathPair> {
        let px = self.x.sample_path(index)?;
        let pz = self.z.sample_path(index)?;
        let y = px.values.iter().zip(&pz.values).map(|(a, b)| a + b).collect();
        let mut jumps: Vec<JumpRecord> = px
            .jumps
            .iter()
            .map(|&(tau, d)| JumpRecord {
                path: index,
                tau,
                mark: None,
                dx: d,
                dy: d,
                source: if self.fixed_times.contains(&tau) {
                    JumpSource::Fixed
                } else {
                    JumpSource::Common
                },
            })
            .collect();
        jumps.extend(pz.jumps.iter().map(|&(tau, d)| JumpRecord {
            path: index,
            tau,
            mark: None,
            dx: 0.0,
            dy: d,
            source: JumpSource::AddOn,
        }));
        jumps.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        Ok(PathPair {
            x: px.values,
            y,
            jumps,
            paired: Vec::new(),
        })
    }
}

pub fn simulate_convex_coupled(
    x: &PiiCharacteristics,
    addon: &AddOnCharacteristics,
    horizon: f64,
    grid: &[f64],
    n_paths: usize,
    epsilon: Option<f64>,
    seed: u64,
) -> Result<CoupledPathSet> {
    collect(&ConvexSampler::new(x, addon, horizon, grid, epsilon, seed)?, n_paths)
}

/// Pure fixed-time jump processes coupled through one shared uniform per
/// jump time.
#[derive(Debug, Clone)]
pub struct FixedJumpSampler {
    sx: FixedJumpSchedule,
    sy: FixedJumpSchedule,
    grid: Vec<f64>,
    seed: u64,
}

impl FixedJumpSampler {
    /// Fails unless the jump laws are ordered in the usual stochastic order
    /// at every fixed time.
    pub fn new(sx: &FixedJumpSchedule, sy: &FixedJumpSchedule, grid: &[f64], seed: u64) -> Result<Self> {
        let horizon = grid.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        check_grid(grid, horizon)?;
        let report = check_fixed_jumps(sx, sy, OrderKind::St);
        if report.verdict != Verdict::Satisfied {
            return Err(Error::Hypothesis(describe_failure(&report)));
        }
        Ok(FixedJumpSampler {
            sx: sx.clone(),
            sy: sy.clone(),
            grid: grid.to_vec(),
            seed,
        })
    }
}

impl PairSampler for FixedJumpSampler {
    fn time_grid(&self) -> &[f64] {
        &self.grid
    }

    fn info(&self) -> SamplerInfo {
        SamplerInfo {
            method: "fixed-jumps".to_string(),
            seed: self.seed,
            truncation: None,
            bias_bound: 0.0,
        }
    }

    fn sample_path(&self, index: u64) -> Result<PathPair> {
        let mut r = rng::stream(self.seed, purpose::FIXED_JUMPS, index);
        let horizon = self.grid[self.grid.len() - 1];
        let fixed = comonotone_fixed_jumps(&self.sx, &self.sy, horizon, &mut r);
        let zero = alloc::vec![0.0; self.grid.len()];
        let mut jx: Vec<(f64, f64)> = fixed.iter().map(|f| (f.0, f.1)).collect();
        let mut jy: Vec<(f64, f64)> = fixed.iter().map(|f| (f.0, f.2)).collect();
        let jumps = fixed
            .iter()
            .filter(|f| f.1 != 0.0 || f.2 != 0.0)
            .map(|&(tau, dx, dy)| JumpRecord {
                path: index,
                tau,
                mark: None,
                dx,
                dy,
                source: JumpSource::Fixed,
            })
            .collect();
        Ok(PathPair {
            x: accumulate(&self.grid, &zero, &mut jx),
            y: accumulate(&self.grid, &zero, &mut jy),
            jumps,
            paired: Vec::new(),
        })
    }
}

pub fn couple_fixed_jumps(
    sx: &FixedJumpSchedule,
    sy: &FixedJumpSchedule,
    seed: u64,
    n_paths: usize,
    grid: &[f64],
) -> Result<CoupledPathSet> {
    collect(&FixedJumpSampler::new(sx, sy, grid, seed)?, n_paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::FixedJump;
    use crate::kernel::JumpLaw;
    use crate::order::time_grid;

    fn exp_cp(rate: f64) -> LevyMeasure {
        LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 }).unwrap()
    }

    fn grid_for(x: &PiiCharacteristics, y: &PiiCharacteristics) -> Grid {
        Grid::for_pair(x, y, 1.0, 10, 40, 1e-3).unwrap()
    }

    fn mean_se(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn equal_processes_give_zero_addon() {
        let h = TruncationFunction::default();
        let x = PiiCharacteristics::levy(h, 0.2, 0.5, exp_cp(1.0)).unwrap();
        let a = build_addon(&x, &x, &grid_for(&x, &x)).unwrap();
        assert!(a.is_zero());
        assert!(a.equality);
        let g = time_grid(1.0, 4);
        let p = simulate_convex_coupled(&x, &a, 1.0, &g, 50, None, 3).unwrap();
        assert_eq!(p.x, p.y);
    }

    #[test]
    fn gaussian_addon_is_centred_wiener() {
        let h = TruncationFunction::default();
        let x = PiiCharacteristics::levy(h, 0.0, 1.0, LevyMeasure::Zero).unwrap();
        let y = PiiCharacteristics::levy(h, 0.0, 2.0, LevyMeasure::Zero).unwrap();
        let a = build_addon(&x, &y, &grid_for(&x, &y)).unwrap();
        assert_eq!(a.gaussian.eval(0.7), 0.7);
        assert!(a.equality);
        let g = time_grid(1.0, 2);
        let n = 20_000;
        let p = simulate_convex_coupled(&x, &a, 1.0, &g, n, None, 11).unwrap();
        let d: Vec<f64> = p.terminal_y().iter().zip(p.terminal_x()).map(|(y, x)| y - x).collect();
        let (m, se) = mean_se(&d);
        assert!(m.abs() < 3.0 * se, "{m} {se}");
        let var = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn atom_addon_has_mean_t() {
        let h = TruncationFunction::clip(1.0).unwrap();
        let kx = exp_cp(1.0);
        let ky = kx.clone().sum(LevyMeasure::compound_poisson(1.0, JumpLaw::point(2.0).unwrap()).unwrap());
        let x = PiiCharacteristics::levy(h, 0.0, 0.0, kx).unwrap();
        let y = PiiCharacteristics::levy(h, 0.0, 0.0, ky).unwrap();
        let a = build_addon(&x, &y, &grid_for(&x, &y)).unwrap();
        assert!(!a.equality);
        assert!((a.mean(1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((a.mean(0.5).unwrap() - 0.5).abs() < 1e-9);
        let g = time_grid(1.0, 4);
        let n = 100_000;
        let p = simulate_convex_coupled(&x, &a, 1.0, &g, n, None, 5).unwrap();
        let d: Vec<f64> = p.terminal_y().iter().zip(p.terminal_x()).map(|(y, x)| y - x).collect();
        let (m, se) = mean_se(&d);
        assert!((m - 1.0).abs() < 3.0 * se, "{m} {se}");
        assert!(p.jumps.iter().filter(|j| j.source == JumpSource::AddOn).all(|j| j.dy == 2.0));
    }

    #[test]
    fn smaller_kernel_is_rejected() {
        let h = TruncationFunction::default();
        let x = PiiCharacteristics::levy(h, 0.0, 0.0, exp_cp(2.0)).unwrap();
        let y = PiiCharacteristics::levy(h, 0.0, 0.0, exp_cp(1.0)).unwrap();
        match build_addon(&x, &y, &grid_for(&x, &y)) {
            Err(Error::Hypothesis(msg)) => assert!(msg.contains("fails at t")),
            other => panic!("{other:?}"),
        }
    }

    fn sched(mass: f64, at: f64) -> FixedJumpSchedule {
        FixedJumpSchedule::new(alloc::vec![FixedJump {
            time: 0.5,
            mass,
            law: JumpLaw::point(at).unwrap(),
        }])
        .unwrap()
    }

    #[test]
    fn identical_schedules_give_identical_jumps() {
        let s = sched(0.5, 1.0);
        let p = couple_fixed_jumps(&s, &s, 1, 200, &time_grid(1.0, 4)).unwrap();
        assert_eq!(p.x, p.y);
    }

    #[test]
    fn point_masses_one_and_two() {
        let p = couple_fixed_jumps(&sched(1.0, 1.0), &sched(1.0, 2.0), 2, 100, &time_grid(1.0, 4)).unwrap();
        assert!(p.jumps.iter().all(|j| j.dx == 1.0 && j.dy == 2.0));
        assert_eq!(p.violations(0.0), 0);
    }

    #[test]
    fn mixture_quantiles_are_ordered() {
        let p = couple_fixed_jumps(&sched(0.5, 1.0), &sched(0.9, 1.0), 4, 2000, &time_grid(1.0, 4)).unwrap();
        assert_eq!(p.violations(0.0), 0);
        let hits = p.terminal_y().iter().filter(|v| **v == 1.0).count() as f64 / 2000.0;
        assert!((hits - 0.9).abs() < 0.03);
    }

    #[test]
    fn crossing_cdfs_are_rejected() {
        assert!(matches!(
            couple_fixed_jumps(&sched(0.9, 1.0), &sched(0.5, 1.0), 4, 10, &time_grid(1.0, 4)),
            Err(Error::Hypothesis(_))
        ));
    }
}
