//! Storage for coupled path pairs and the pieces shared by every sampler.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::characteristics::{time_pieces, FixedJumpSchedule, PiecewiseLinear, PiiCharacteristics, TimeMeasure, TruncationFunction};
use crate::error::{Error, Result};
use crate::kernel::{JumpKernel, LevyMeasure};
use crate::rng;

/// Where a recorded jump came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum JumpSource {
    Reference,
    Fixed,
    Common,
    ExtraX,
    ExtraY,
    Paired,
    AddOn,
}

/// One jump time of a path pair. `dx` or `dy` is 0 when only one process moves.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpRecord {
    pub path: u64,
    pub tau: f64,
    pub mark: Option<f64>,
    pub dx: f64,
    pub dy: f64,
    pub source: JumpSource,
}

/// A big Y-jump paired with a thinned small X-jump.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairedJumpEvent {
    pub path: u64,
    pub tau: f64,
    pub y: f64,
    pub x: f64,
    pub u: f64,
    pub accepted: bool,
}

/// Marks below `delta_pos` / above `-delta_neg` were never simulated; jumps of
/// size at most `epsilon` were dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruncationInfo {
    pub epsilon: Option<f64>,
    pub delta_pos: f64,
    pub delta_neg: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    pub paired: Vec<PairedJumpEvent>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplerInfo {
    pub method: String,
    pub seed: u64,
    pub truncation: Option<TruncationInfo>,
    pub bias_bound: f64,
}

/// A coupling that can produce path pair `i` on its own.
pub trait PairSampler: Sync {
    fn time_grid(&self) -> &[f64];
    fn info(&self) -> SamplerInfo;
    fn sample_path(&self, index: u64) -> Result<PathPair>;
}

/// `n_paths` path pairs on a common grid, stored row by row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoupledPathSet {
    pub method: String,
    pub time_grid: Vec<f64>,
    pub n_paths: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    pub paired: Vec<PairedJumpEvent>,
    pub seed: u64,
    pub truncation: Option<TruncationInfo>,
    pub bias_bound: f64,
}

impl CoupledPathSet {
    pub fn assemble(info: SamplerInfo, time_grid: Vec<f64>, paths: Vec<PathPair>) -> Self {
        let n_times = time_grid.len();
        let n_paths = paths.len();
        let mut x = Vec::with_capacity(n_paths * n_times);
        let mut y = Vec::with_capacity(n_paths * n_times);
        let mut jumps = Vec::new();
        let mut paired = Vec::new();
        for p in paths {
            x.extend_from_slice(&p.x);
            y.extend_from_slice(&p.y);
            jumps.extend(p.jumps);
            paired.extend(p.paired);
        }
        CoupledPathSet {
            method: info.method,
            time_grid,
            n_paths,
            x,
            y,
            jumps,
            paired,
            seed: info.seed,
            truncation: info.truncation,
            bias_bound: info.bias_bound,
        }
    }

    pub fn n_times(&self) -> usize {
        self.time_grid.len()
    }

    pub fn x_path(&self, i: usize) -> &[f64] {
        let n = self.n_times();
        &self.x[i * n..(i + 1) * n]
    }

    pub fn y_path(&self, i: usize) -> &[f64] {
        let n = self.n_times();
        &self.y[i * n..(i + 1) * n]
    }

    pub fn terminal_x(&self) -> Vec<f64> {
        (0..self.n_paths).map(|i| *self.x_path(i).last().unwrap_or(&0.0)).collect()
    }

    pub fn terminal_y(&self) -> Vec<f64> {
        (0..self.n_paths).map(|i| *self.y_path(i).last().unwrap_or(&0.0)).collect()
    }

    /// Values of X and Y at grid index `k` across all paths.
    pub fn column(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_times();
        let xs = (0..self.n_paths).map(|i| self.x[i * n + k]).collect();
        let ys = (0..self.n_paths).map(|i| self.y[i * n + k]).collect();
        (xs, ys)
    }

    /// Number of paths with `X_t > Y_t + tol * max(1, |X_t|, |Y_t|)` at some grid time.
    pub fn violations(&self, tol: f64) -> usize {
        (0..self.n_paths)
            .filter(|&i| {
                self.x_path(i)
                    .iter()
                    .zip(self.y_path(i))
                    .any(|(&a, &b)| a - b > tol * 1f64.max(a.abs()).max(b.abs()))
            })
            .count()
    }
}

/// Runs a sampler for paths `0..n_paths` in order.
pub fn collect<S: PairSampler + ?Sized>(sampler: &S, n_paths: usize) -> Result<CoupledPathSet> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be at least 1"));
    }
    let paths = (0..n_paths as u64)
        .map(|i| sampler.sample_path(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoupledPathSet::assemble(sampler.info(), sampler.time_grid().to_vec(), paths))
}

pub(crate) fn check_grid(grid: &[f64], horizon: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::DegenerateGrid);
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be positive and finite"));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[grid.len() - 1] > horizon {
        return Err(Error::invalid("time_grid", "must be strictly increasing inside [0, horizon]"));
    }
    Ok(())
}

/// `(h 1{|x| > eps}) * nu_t` at each grid time, without fixed-time jumps.
pub(crate) fn compensator_on_grid(
    kernel: &JumpKernel,
    a: &TimeMeasure,
    h: &TruncationFunction,
    eps: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let mut rates: Vec<Option<f64>> = vec![None; kernel.cells().len()];
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        for p in time_pieces(kernel, a, prev, t) {
            let da = p.d_a();
            if da == 0.0 {
                continue;
            }
            let r = match rates[p.cell] {
                Some(r) => r,
                None => {
                    let r = h.integral(&kernel.cells()[p.cell].measure, eps)?.value;
                    rates[p.cell] = Some(r);
                    r
                }
            };
            acc += r * da;
        }
        prev = prev.max(t);
        out.push(acc);
    }
    Ok(out)
}

/// `B_t - (h 1{|x| > eps}) * nu_t`, fixed-time jumps included.
pub(crate) fn drift_part(c: &PiiCharacteristics, eps: f64, grid: &[f64]) -> Result<Vec<f64>> {
    let comp = compensator_on_grid(&c.kernel, &c.time_measure, &c.truncation, eps, grid)?;
    let mut fixed = Vec::new();
    for e in c.fixed_jumps.entries() {
        let m = LevyMeasure::compound_poisson(e.mass, e.law.clone())?;
        fixed.push((e.time, c.truncation.integral(&m, eps)?.value));
    }
    Ok(grid
        .iter()
        .zip(comp)
        .map(|(&t, k)| {
            let f: f64 = fixed.iter().filter(|(s, _)| *s <= t).map(|p| p.1).sum();
            c.drift.eval(t) - k - f
        })
        .collect())
}

/// Brownian motion time-changed by `c`, observed on the grid.
pub(crate) fn gaussian_on_grid<R: RngCore>(c: &PiecewiseLinear, grid: &[f64], rng: &mut R) -> Vec<f64> {
    let mut w = 0.0;
    let mut prev = 0.0;
    grid.iter()
        .map(|&t| {
            let var = c.eval(t) - c.eval(prev);
            if var > 0.0 {
                w += libm::sqrt(var) * rng::normal(rng);
            }
            prev = t;
            w
        })
        .collect()
}

/// Adds jumps `(tau, size)` to `base`, counting a jump at a grid time as
/// already happened there.
pub(crate) fn accumulate(grid: &[f64], base: &[f64], jumps: &mut [(f64, f64)]) -> Vec<f64> {
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0;
    let mut acc = 0.0;
    for (k, &t) in grid.iter().enumerate() {
        while j < jumps.len() && jumps[j].0 <= t {
            acc += jumps[j].1;
            j += 1;
        }
        out.push(base[k] + acc);
    }
    out
}

/// Event times of a Poisson process on `(0, horizon]` with intensity
/// `rate(cell) dA_t`, paired with the cell they fall in.
pub(crate) fn poisson_times<R, F>(
    kernel: &JumpKernel,
    a: &TimeMeasure,
    horizon: f64,
    mut rate: F,
    rng: &mut R,
) -> Vec<(f64, usize)>
where
    R: RngCore,
    F: FnMut(usize) -> f64,
{
    let mut out = Vec::new();
    for p in time_pieces(kernel, a, 0.0, horizon) {
        let lambda = rate(p.cell) * p.slope;
        if !(lambda > 0.0) {
            continue;
        }
        let mut t = p.start;
        loop {
            t += rng::exp1(rng) / lambda;
            if t >= p.end {
                break;
            }
            out.push((t, p.cell));
        }
    }
    out
}

/// Comonotone fixed-time jumps: one shared uniform per time in either schedule.
pub(crate) fn comonotone_fixed_jumps<R: RngCore>(
    sx: &FixedJumpSchedule,
    sy: &FixedJumpSchedule,
    horizon: f64,
    rng: &mut R,
) -> Vec<(f64, f64, f64)> {
    let mut times = sx.times();
    times.extend(sy.times());
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .filter(|t| *t <= horizon)
        .map(|t| {
            let u = rng::open01(rng);
            let dx = sx.at(t).map_or(0.0, |e| e.quantile(u));
            let dy = sy.at(t).map_or(0.0, |e| e.quantile(u));
            (t, dx, dy)
        })
        .collect()
}
