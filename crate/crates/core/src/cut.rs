//! Coupling under the cut criterion.
//!
//! Below the cut `k` the kernel of X dominates, above it the kernel of Y.
//! Both processes share a common part with kernel
//! `1_upper K^X + 1_lower K^Y`. X additionally gets the extra jumps of
//! `(K^X - K^Y) 1_lower`, Y those of `(K^Y - K^X) 1_upper`. For `k > 0` the
//! positive extra jumps of X (in `(0, k)`) are attached to big extra jumps of
//! Y and thinned: with `r = m_small / m_Y`, a Y-extra jump of size `y >= k`
//! at time `tau` brings an X-jump `x < k` exactly when `u <= r(tau)`.
//! Cuts at `k < 0` are handled by reflecting the pair.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::characteristics::{time_pieces, PiiCharacteristics};
use crate::direct::{mass_above, JumpSampler};
use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, LevyMeasure, Region};
use crate::order::{common_basis, reflect, CutPoint, CutSide};
use crate::paths::{
    accumulate, check_grid, compensator_on_grid, gaussian_on_grid, poisson_times, CoupledPathSet, JumpRecord,
    JumpSource, PairSampler, PairedJumpEvent, PathPair, SamplerInfo, TruncationInfo,
};
use crate::rng::{self, purpose};

/// Extra-jump masses and thinning ratio of one kernel cell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutCellPlan {
    pub start: f64,
    /// X-extra mass in `(0, k)`, paired with Y-extra jumps.
    pub x_small_mass: f64,
    /// X-extra mass on the negative half-line, simulated on its own.
    pub x_negative_mass: f64,
    pub y_extra_mass: f64,
    /// `x_small_mass / y_extra_mass`, with `0/0 = 1`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct CutCouplingPlan {
    cut: CutPoint,
    working: CutPoint,
    reflected: bool,
    x: PiiCharacteristics,
    y: PiiCharacteristics,
    pub common: JumpKernel,
    pub x_extra: JumpKernel,
    pub y_extra: JumpKernel,
    x_small: JumpKernel,
    x_negative: JumpKernel,
    pub cells: Vec<CutCellPlan>,
}

impl CutCouplingPlan {
    pub fn cut(&self) -> CutPoint {
        self.cut
    }

    /// True if the plan was built for the mirrored pair `(-Y, -X)`.
    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// Thinning ratio at time `t` (in the frame the plan was built in).
    pub fn ratio_at(&self, t: f64) -> f64 {
        self.cells[self.common.cell_index(t)].ratio
    }
}

fn nonneg(m: f64, what: &str, t: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::Hypothesis(alloc::format!(
            "{what} has infinite mass at t = {t}"
        )));
    }
    if m < -1e-12 {
        return Err(Error::Hypothesis(alloc::format!(
            "{what} is negative at t = {t}"
        )));
    }
    Ok(m.max(0.0))
}

/// Splits the kernels at the cut and tabulates the thinning ratio per cell.
pub fn build_plan(x: &PiiCharacteristics, y: &PiiCharacteristics, cut: CutPoint) -> Result<CutCouplingPlan> {
    if cut.k < 0.0 {
        let mut p = build_plan(&reflect(y), &reflect(x), cut.reflected())?;
        p.cut = cut;
        p.reflected = true;
        return Ok(p);
    }
    if !(x.fixed_jumps.is_empty() && y.fixed_jumps.is_empty()) {
        return Err(Error::Unsupported(
            "fixed-time jumps are not part of the cut coupling".into(),
        ));
    }
    let (x, y) = common_basis(x, y)?;
    let (upper, lower) = (cut.upper(), cut.lower());
    let small = Region::new(0.0, false, cut.k, cut.side == CutSide::RightClosed);
    let negative = Region::below(0.0, false);
    let common = x.kernel.zip_with(&y.kernel, |a, b| {
        a.clone().restricted(upper).sum(b.clone().restricted(lower))
    });
    let x_extra = x.kernel.zip_with(&y.kernel, |a, b| a.clone().minus(b.clone()).restricted(lower));
    let y_extra = y.kernel.zip_with(&x.kernel, |a, b| a.clone().minus(b.clone()).restricted(upper));
    let x_small = x_extra.map(|m| m.clone().restricted(small));
    let x_negative = x_extra.map(|m| m.clone().restricted(negative));
    let last = common.cells().last().map_or(0.0, |c| c.start);
    let active: Vec<usize> = time_pieces(&common, &x.time_measure, 0.0, last + 1.0)
        .iter()
        .filter(|p| p.slope > 0.0)
        .map(|p| p.cell)
        .collect();
    let mut cells = Vec::with_capacity(common.cells().len());
    for (i, c) in common.cells().iter().enumerate() {
        let t = c.start;
        let ms = if cut.k > 0.0 {
            nonneg(x_small.cells()[i].measure.total_mass()?, "X-extra kernel", t)?
        } else {
            0.0
        };
        let mn = nonneg(x_negative.cells()[i].measure.total_mass()?, "X-extra kernel", t)?;
        let my = nonneg(y_extra.cells()[i].measure.total_mass()?, "Y-extra kernel", t)?;
        let ratio = if my > 0.0 {
            ms / my
        } else if ms > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > 1.0 + 1e-12 && active.contains(&i) {
            return Err(Error::CompensationFails { t, lhs: ms, rhs: my });
        }
        cells.push(CutCellPlan {
            start: t,
            x_small_mass: ms,
            x_negative_mass: mn,
            y_extra_mass: my,
            ratio: ratio.min(1.0),
        });
    }
    Ok(CutCouplingPlan {
        cut,
        working: cut,
        reflected: false,
        x,
        y,
        common,
        x_extra,
        y_extra,
        x_small,
        x_negative,
        cells,
    })
}

fn samplers(k: &JumpKernel, eps: f64) -> Result<(Vec<f64>, Vec<Option<JumpSampler>>)> {
    let mut rates = Vec::new();
    let mut s = Vec::new();
    for c in k.cells() {
        let m = mass_above(&c.measure, eps)?;
        if !m.is_finite() {
            return Err(match c.measure.blumenthal_getoor() {
                Some(y) if y >= 1.0 => Error::InfiniteVariation,
                _ => Error::Unsupported("infinite-activity common part needs epsilon_jump".into()),
            });
        }
        rates.push(m);
        s.push(if m > 0.0 { Some(JumpSampler::build(&c.measure, eps)?) } else { None });
    }
    Ok((rates, s))
}

fn draw<R: rand_core::RngCore>(s: &[Option<JumpSampler>], cell: usize, rng: &mut R) -> Result<f64> {
    match &s[cell] {
        Some(s) => s.sample(rng),
        None => Ok(0.0),
    }
}

/// Path-pair sampler for a cut plan.
#[derive(Debug, Clone)]
pub struct CutSampler {
    plan: CutCouplingPlan,
    horizon: f64,
    grid: Vec<f64>,
    epsilon: Option<f64>,
    seed: u64,
    base_x: Vec<f64>,
    base_y: Vec<f64>,
    common: (Vec<f64>, Vec<Option<JumpSampler>>),
    x_small: (Vec<f64>, Vec<Option<JumpSampler>>),
    x_negative: (Vec<f64>, Vec<Option<JumpSampler>>),
    y_extra: (Vec<f64>, Vec<Option<JumpSampler>>),
    bias_bound: f64,
}

impl CutSampler {
    pub fn new(plan: &CutCouplingPlan, horizon: f64, grid: &[f64], epsilon: Option<f64>, seed: u64) -> Result<Self> {
        check_grid(grid, horizon)?;
        let (x, y) = (&plan.x, &plan.y);
        let mut ts = x.gaussian.breakpoints();
        ts.extend(y.gaussian.breakpoints());
        ts.extend_from_slice(grid);
        if ts.iter().any(|&t| (x.gaussian.eval(t) - y.gaussian.eval(t)).abs() > 1e-12 * 1f64.max(x.gaussian.eval(t).abs())) {
            return Err(Error::Hypothesis("the cut coupling needs a common Gaussian part C".into()));
        }
        let eps = epsilon.unwrap_or(0.0);
        if epsilon.is_some() && !(eps > 0.0) {
            return Err(Error::invalid("epsilon_jump", "must be positive"));
        }
        let a = &x.time_measure;
        let h = &x.truncation;
        let comp_common = compensator_on_grid(&plan.common, a, h, eps, grid)?;
        let comp_x = compensator_on_grid(&plan.x_extra, a, h, 0.0, grid)?;
        let comp_y = compensator_on_grid(&plan.y_extra, a, h, 0.0, grid)?;
        let base_x = grid
            .iter()
            .enumerate()
            .map(|(i, &t)| x.drift.eval(t) - comp_common[i] - comp_x[i])
            .collect();
        let base_y = grid
            .iter()
            .enumerate()
            .map(|(i, &t)| y.drift.eval(t) - comp_common[i] - comp_y[i])
            .collect();
        let bias_bound = match epsilon {
            Some(e) => crate::ito::truncation_for(&plan.common, a, e, horizon)?.bias_bound,
            None => 0.0,
        };
        Ok(CutSampler {
            common: samplers(&plan.common, eps)?,
            x_small: samplers(&plan.x_small, 0.0)?,
            x_negative: samplers(&plan.x_negative, 0.0)?,
            y_extra: samplers(&plan.y_extra, 0.0)?,
            plan: plan.clone(),
            horizon,
            grid: grid.to_vec(),
            epsilon,
            seed,
            base_x,
            base_y,
            bias_bound,
        })
    }

    fn sample_working(&self, index: u64) -> Result<PathPair> {
        let plan = &self.plan;
        let a = &plan.x.time_measure;
        let mut records = Vec::new();
        let mut paired = Vec::new();
        let mut rc = rng::stream(self.seed, purpose::REFERENCE, index);
        for (tau, cell) in poisson_times(&plan.common, a, self.horizon, |i| self.common.0[i], &mut rc) {
            let v = draw(&self.common.1, cell, &mut rc)?;
            records.push(JumpRecord { path: index, tau, mark: None, dx: v, dy: v, source: JumpSource::Common });
        }
        let mut re = rng::stream(self.seed, purpose::EXTRAS, index);
        for (tau, cell) in poisson_times(&plan.x_negative, a, self.horizon, |i| self.x_negative.0[i], &mut re) {
            let v = draw(&self.x_negative.1, cell, &mut re)?;
            records.push(JumpRecord { path: index, tau, mark: None, dx: v, dy: 0.0, source: JumpSource::ExtraX });
        }
        for (tau, cell) in poisson_times(&plan.y_extra, a, self.horizon, |i| self.y_extra.0[i], &mut re) {
            let yv = draw(&self.y_extra.1, cell, &mut re)?;
            if plan.working.k > 0.0 {
                let xv = draw(&self.x_small.1, cell, &mut re)?;
                let u = rng::open01(&mut re);
                let accepted = xv != 0.0 && u <= plan.cells[cell].ratio;
                paired.push(PairedJumpEvent { path: index, tau, y: yv, x: xv, u, accepted });
                records.push(JumpRecord {
                    path: index,
                    tau,
                    mark: None,
                    dx: if accepted { xv } else { 0.0 },
                    dy: yv,
                    source: JumpSource::Paired,
                });
            } else {
                records.push(JumpRecord { path: index, tau, mark: None, dx: 0.0, dy: yv, source: JumpSource::ExtraY });
            }
        }
        let mut rw = rng::stream(self.seed, purpose::WIENER, index);
        let w = gaussian_on_grid(&plan.x.gaussian, &self.grid, &mut rw);
        let bx: Vec<f64> = self.base_x.iter().zip(&w).map(|(p, q)| p + q).collect();
        let by: Vec<f64> = self.base_y.iter().zip(&w).map(|(p, q)| p + q).collect();
        let mut jx: Vec<(f64, f64)> = records.iter().filter(|j| j.dx != 0.0).map(|j| (j.tau, j.dx)).collect();
        let mut jy: Vec<(f64, f64)> = records.iter().filter(|j| j.dy != 0.0).map(|j| (j.tau, j.dy)).collect();
        records.sort_by(|p, q| p.tau.total_cmp(&q.tau));
        Ok(PathPair {
            x: accumulate(&self.grid, &bx, &mut jx),
            y: accumulate(&self.grid, &by, &mut jy),
            jumps: records,
            paired,
        })
    }
}

impl PairSampler for CutSampler {
    fn time_grid(&self) -> &[f64] {
        &self.grid
    }

    fn info(&self) -> SamplerInfo {
        SamplerInfo {
            method: "cut".to_string(),
            seed: self.seed,
            truncation: self.epsilon.map(|e| TruncationInfo {
                epsilon: Some(e),
                delta_pos: f64::NAN,
                delta_neg: f64::NAN,
            }),
            bias_bound: self.bias_bound,
        }
    }

    /// In the reflected case the pair `(X', Y') = (-Y, -X)` is simulated and
    /// mapped back; paired events stay in the simulated (mirrored) frame.
    fn sample_path(&self, index: u64) -> Result<PathPair> {
        let p = self.sample_working(index)?;
        if !self.plan.reflected {
            return Ok(p);
        }
        Ok(PathPair {
            x: p.y.iter().map(|v| -v).collect(),
            y: p.x.iter().map(|v| -v).collect(),
            jumps: p
                .jumps
                .into_iter()
                .map(|j| JumpRecord {
                    dx: -j.dy,
                    dy: -j.dx,
                    source: match j.source {
                        JumpSource::ExtraX => JumpSource::ExtraY,
                        JumpSource::ExtraY => JumpSource::ExtraX,
                        s => s,
                    },
                    ..j
                })
                .collect(),
            paired: p.paired,
        })
    }
}

pub fn simulate_cut_coupled(
    plan: &CutCouplingPlan,
    horizon: f64,
    grid: &[f64],
    n_paths: usize,
    epsilon: Option<f64>,
    seed: u64,
) -> Result<CoupledPathSet> {
    let s = CutSampler::new(plan, horizon, grid, epsilon, seed)?;
    crate::paths::collect(&s, n_paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Process {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountCheck {
    pub empirical: f64,
    pub exact: f64,
    pub standard_error: f64,
    pub z_score: f64,
}

fn z(empirical: f64, exact: f64, se: f64) -> f64 {
    let d = empirical - exact;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

/// Mean number of jumps of one process per path with time in `(t0, t1]`
/// and size in `sizes`, against `nu((t0, t1] x sizes)` of `c`. A size set
/// reaching the origin is accepted only where the kernel has finite mass.
pub fn empirical_compensator(
    paths: &CoupledPathSet,
    c: &PiiCharacteristics,
    process: Process,
    t0: f64,
    t1: f64,
    sizes: Region,
) -> Result<CountCheck> {
    if paths.n_paths == 0 {
        return Err(Error::DegenerateInput("no paths".into()));
    }
    let mut exact = 0.0;
    for p in time_pieces(&c.kernel, &c.time_measure, t0, t1) {
        if p.d_a() > 0.0 {
            exact += c.kernel.cells()[p.cell].measure.interval_mass(sizes)? * p.d_a();
        }
    }
    for e in c.fixed_jumps.entries().iter().filter(|e| e.time > t0 && e.time <= t1) {
        let m = LevyMeasure::compound_poisson(e.mass, e.law.clone())?;
        exact += m.interval_mass(sizes)?;
    }
    if !exact.is_finite() {
        return Err(Error::TouchesOrigin);
    }
    let mut counts = alloc::vec![0.0f64; paths.n_paths];
    for j in &paths.jumps {
        let v = match process {
            Process::X => j.dx,
            Process::Y => j.dy,
        };
        if j.tau > t0 && j.tau <= t1 && v != 0.0 && sizes.contains(v) {
            counts[j.path as usize] += 1.0;
        }
    }
    let n = paths.n_paths as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = if paths.n_paths > 1 {
        counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut se = libm::sqrt(var / n);
    if se == 0.0 {
        se = libm::sqrt(exact / n);
    }
    Ok(CountCheck {
        empirical: mean,
        exact,
        standard_error: se,
        z_score: z(mean, exact, se),
    })
}

/// Fraction of paired events that passed the thinning, against the mean
/// ratio `r(tau)` over the events.
pub fn thinning_check(paths: &CoupledPathSet, plan: &CutCouplingPlan) -> CountCheck {
    let n = paths.paired.len();
    if n == 0 {
        return CountCheck {
            empirical: 0.0,
            exact: 0.0,
            standard_error: 0.0,
            z_score: 0.0,
        };
    }
    let nf = n as f64;
    let acc = paths.paired.iter().filter(|e| e.accepted).count() as f64 / nf;
    let rs: Vec<f64> = paths
        .paired
        .iter()
        .map(|e| if e.x == 0.0 { 0.0 } else { plan.ratio_at(e.tau) })
        .collect();
    let expected = rs.iter().sum::<f64>() / nf;
    let var: f64 = rs.iter().map(|r| r * (1.0 - r)).sum::<f64>() / nf;
    let se = libm::sqrt(var / nf);
    CountCheck {
        empirical: acc,
        exact: expected,
        standard_error: se,
        z_score: z(acc, expected, se),
    }
}
