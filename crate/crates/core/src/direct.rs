//! Straightforward simulation of a single process: compound-Poisson jumps
//! drawn from the jump law itself (no reference measure), plus drift,
//! Gaussian part and fixed-time jumps. Used as the independent reference for
//! the marginals of the coupled samplers.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand_core::RngCore;
use rand_distr::{Distribution, Gamma};

use crate::characteristics::PiiCharacteristics;
use crate::error::{Error, Result};
use crate::kernel::{JumpLaw, LevyMeasure, Region, Side};
use crate::paths::{accumulate, check_grid, drift_part, gaussian_on_grid, poisson_times};
use crate::rng::{self, purpose};

const MAX_REJECTIONS: usize = 1_000_000;

/// `K(|y| > eps)`, or the full mass for `eps = 0`.
pub(crate) fn side_mass_above(m: &LevyMeasure, side: Side, eps: f64) -> Result<f64> {
    if eps > 0.0 {
        m.tail(side, eps, false)
    } else {
        m.side_mass(side)
    }
}

pub(crate) fn mass_above(m: &LevyMeasure, eps: f64) -> Result<f64> {
    Ok(side_mass_above(m, Side::Pos, eps)? + side_mass_above(m, Side::Neg, eps)?)
}

fn sample_law<R: RngCore>(law: &JumpLaw, rng: &mut R) -> f64 {
    match law {
        JumpLaw::Atoms(a) => {
            let u = rng::open01(rng);
            let mut acc = 0.0;
            for &(x, w) in a {
                acc += w;
                if u <= acc {
                    return x;
                }
            }
            a[a.len() - 1].0
        }
        JumpLaw::Exponential { rate } => rng::exp1(rng) / rate,
        JumpLaw::NegExponential { rate } => -rng::exp1(rng) / rate,
        JumpLaw::Uniform { lo, hi } => lo + (hi - lo) * rng::open01(rng),
    }
}

/// Differences can be signed on sets outside their intended support, so
/// they are never sampled by rejection from the unrestricted measure.
fn has_difference(m: &LevyMeasure) -> bool {
    match m {
        LevyMeasure::Difference(..) => true,
        LevyMeasure::Sum(v) => v.iter().any(has_difference),
        LevyMeasure::Scaled(_, i) | LevyMeasure::Reflected(i) | LevyMeasure::Restricted(i, _) => has_difference(i),
        _ => false,
    }
}

/// Draws from the normalised restriction of a measure to `|y| > eps`, with
/// all masses computed up front.
#[derive(Debug, Clone)]
pub(crate) enum JumpSampler {
    Law { law: JumpLaw, eps: f64, fallback: LevyMeasure },
    Cgmy { p_pos: f64, alpha: f64, m: f64, g: f64, eps: f64 },
    Mixture(Vec<(f64, JumpSampler)>),
    Reflect(Box<JumpSampler>),
    Restrict { inner: Box<JumpSampler>, region: Region, fallback: Box<JumpSampler> },
    Inverse { measure: LevyMeasure, pos: f64, neg: f64 },
}

impl JumpSampler {
    pub(crate) fn build(m: &LevyMeasure, eps: f64) -> Result<Self> {
        Ok(match m {
            LevyMeasure::CompoundPoisson { jumps, .. } => JumpSampler::Law {
                law: jumps.clone(),
                eps,
                fallback: m.clone(),
            },
            LevyMeasure::Cgmy(p) => {
                let pos = side_mass_above(m, Side::Pos, eps)?;
                let neg = side_mass_above(m, Side::Neg, eps)?;
                JumpSampler::Cgmy {
                    p_pos: pos / (pos + neg),
                    alpha: p.y,
                    m: p.m,
                    g: p.g,
                    eps,
                }
            }
            LevyMeasure::Sum(v) => {
                let mut parts = Vec::new();
                let mut acc = 0.0;
                for c in v {
                    let w = mass_above(c, eps)?;
                    if w > 0.0 {
                        acc += w;
                        parts.push((acc, JumpSampler::build(c, eps)?));
                    }
                }
                for p in &mut parts {
                    p.0 /= acc;
                }
                JumpSampler::Mixture(parts)
            }
            LevyMeasure::Scaled(_, inner) => JumpSampler::build(inner, eps)?,
            LevyMeasure::Reflected(inner) => JumpSampler::Reflect(Box::new(JumpSampler::build(inner, eps)?)),
            LevyMeasure::Restricted(inner, region) => {
                let fallback = Box::new(JumpSampler::Inverse {
                    measure: m.clone(),
                    pos: side_mass_above(m, Side::Pos, eps)?,
                    neg: side_mass_above(m, Side::Neg, eps)?,
                });
                let base = mass_above(inner, eps);
                let kept = mass_above(m, eps)?;
                match base {
                    Ok(b) if b.is_finite() && !has_difference(inner) && kept >= 0.05 * b => JumpSampler::Restrict {
                        inner: Box::new(JumpSampler::build(inner, eps)?),
                        region: *region,
                        fallback,
                    },
                    _ => *fallback,
                }
            }
            _ => JumpSampler::Inverse {
                measure: m.clone(),
                pos: side_mass_above(m, Side::Pos, eps)?,
                neg: side_mass_above(m, Side::Neg, eps)?,
            },
        })
    }

    pub(crate) fn sample<R: RngCore>(&self, rng: &mut R) -> Result<f64> {
        match self {
            JumpSampler::Law { law, eps, fallback } => {
                for _ in 0..MAX_REJECTIONS {
                    let y = sample_law(law, rng);
                    if y.abs() > *eps {
                        return Ok(y);
                    }
                }
                let pos = side_mass_above(fallback, Side::Pos, *eps)?;
                let neg = side_mass_above(fallback, Side::Neg, *eps)?;
                sample_inverse(fallback, pos, neg, rng)
            }
            JumpSampler::Cgmy { p_pos, alpha, m, g, eps } => {
                let (sign, rate) = if rng::open01(rng) < *p_pos { (1.0, *m) } else { (-1.0, *g) };
                Ok(sign * sample_cgmy_side(*alpha, rate, *eps, rng)?)
            }
            JumpSampler::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::DegenerateInput("no jump mass to sample from".into()));
                }
                let u = rng::open01(rng);
                let i = parts.partition_point(|p| p.0 < u).min(parts.len() - 1);
                parts[i].1.sample(rng)
            }
            JumpSampler::Reflect(inner) => Ok(-inner.sample(rng)?),
            JumpSampler::Restrict { inner, region, fallback } => {
                for _ in 0..10_000 {
                    let y = inner.sample(rng)?;
                    if region.contains(y) {
                        return Ok(y);
                    }
                }
                fallback.sample(rng)
            }
            JumpSampler::Inverse { measure, pos, neg } => sample_inverse(measure, *pos, *neg, rng),
        }
    }
}

/// Magnitude of a one-sided CGMY jump above `eps` with density
/// proportional to `e^{-rate y} y^{-1-alpha}`.
fn sample_cgmy_side<R: RngCore>(alpha: f64, rate: f64, eps: f64, rng: &mut R) -> Result<f64> {
    for _ in 0..MAX_REJECTIONS {
        let y = if alpha < 0.0 {
            let g = Gamma::new(-alpha, 1.0 / rate).map_err(|_| Error::invalid("cgmy", "bad gamma parameters"))?;
            g.sample(rng)
        } else if alpha > 0.0 {
            if !(eps > 0.0) {
                return Err(Error::Unsupported("infinite-activity CGMY needs epsilon_jump".into()));
            }
            let y = eps * libm::pow(rng::open01(rng), -1.0 / alpha);
            if rng::open01(rng) <= libm::exp(-rate * (y - eps)) {
                y
            } else {
                continue;
            }
        } else {
            if !(eps > 0.0) {
                return Err(Error::Unsupported("infinite-activity CGMY needs epsilon_jump".into()));
            }
            let y = eps + rng::exp1(rng) / rate;
            if rng::open01(rng) <= eps / y {
                y
            } else {
                continue;
            }
        };
        if y > eps {
            return Ok(y);
        }
    }
    Err(Error::Quadrature("CGMY rejection sampler did not accept".into()))
}

/// Inverse-tail draw for measures without a dedicated sampler.
fn sample_inverse<R: RngCore>(m: &LevyMeasure, pos: f64, neg: f64, rng: &mut R) -> Result<f64> {
    if !(pos + neg > 0.0) {
        return Err(Error::DegenerateInput("no jump mass to sample from".into()));
    }
    let (side, mass) = if rng::open01(rng) * (pos + neg) < pos {
        (Side::Pos, pos)
    } else {
        (Side::Neg, neg)
    };
    let v = rng::open01(rng) * mass;
    Ok(side.sign() * m.tail_inverse(side, v)?)
}

/// One simulated path on the grid together with its jumps `(tau, size)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSample {
    pub values: Vec<f64>,
    pub jumps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct DirectSimulator {
    c: PiiCharacteristics,
    horizon: f64,
    grid: Vec<f64>,
    seed: u64,
    stream: u64,
    base: Vec<f64>,
    rates: Vec<f64>,
    samplers: Vec<JumpSampler>,
}

impl DirectSimulator {
    /// Jumps of size at most `epsilon` are replaced by their compensator;
    /// without `epsilon` the kernel must have finite activity.
    pub fn new(c: &PiiCharacteristics, horizon: f64, grid: &[f64], epsilon: Option<f64>, seed: u64) -> Result<Self> {
        check_grid(grid, horizon)?;
        let eps = epsilon.unwrap_or(0.0);
        if epsilon.is_some() && !(eps > 0.0) {
            return Err(Error::invalid("epsilon_jump", "must be positive"));
        }
        let mut rates = Vec::with_capacity(c.kernel.cells().len());
        let mut samplers = Vec::with_capacity(c.kernel.cells().len());
        for cell in c.kernel.cells() {
            let m = mass_above(&cell.measure, eps)?;
            if !m.is_finite() {
                let h = c.truncation;
                return Err(match h.integral(&cell.measure, 0.0) {
                    Err(Error::InfiniteVariation) => Error::InfiniteVariation,
                    _ => Error::Unsupported("infinite-activity kernel needs epsilon_jump".into()),
                });
            }
            rates.push(m);
            samplers.push(if m > 0.0 {
                JumpSampler::build(&cell.measure, eps)?
            } else {
                JumpSampler::Mixture(Vec::new())
            });
        }
        Ok(DirectSimulator {
            base: drift_part(c, eps, grid)?,
            c: c.clone(),
            horizon,
            grid: grid.to_vec(),
            seed,
            stream: purpose::DIRECT,
            rates,
            samplers,
        })
    }

    /// Draws from a different stream family, so two simulators with the same
    /// seed stay independent.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sample_path(&self, index: u64) -> Result<PathSample> {
        let mut r = rng::stream(self.seed, self.stream, index);
        let times = poisson_times(&self.c.kernel, &self.c.time_measure, self.horizon, |i| self.rates[i], &mut r);
        let mut jumps = Vec::with_capacity(times.len());
        for (tau, cell) in times {
            let y = self.samplers[cell].sample(&mut r)?;
            jumps.push((tau, y));
        }
        for e in self.c.fixed_jumps.entries() {
            if e.time <= self.horizon {
                let y = e.quantile(rng::open01(&mut r));
                if y != 0.0 {
                    jumps.push((e.time, y));
                }
            }
        }
        let w = gaussian_on_grid(&self.c.gaussian, &self.grid, &mut r);
        let base: Vec<f64> = self.base.iter().zip(&w).map(|(a, b)| a + b).collect();
        let values = accumulate(&self.grid, &base, &mut jumps);
        Ok(PathSample { values, jumps })
    }

    /// Last grid value of paths `0..n`.
    pub fn terminal_values(&self, n: usize) -> Result<Vec<f64>> {
        (0..n as u64)
            .map(|i| self.sample_path(i).map(|p| *p.values.last().unwrap_or(&0.0)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::TruncationFunction;

    fn mean_sd(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, var.sqrt())
    }

    #[test]
    fn poisson_mean_and_variance() {
        let c = PiiCharacteristics::levy(
            TruncationFunction::default(),
            0.0,
            0.0,
            LevyMeasure::compound_poisson(2.0, JumpLaw::point(1.0).unwrap()).unwrap(),
        )
        .unwrap();
        let s = DirectSimulator::new(&c, 1.0, &[0.0, 1.0], None, 4).unwrap();
        let v = s.terminal_values(20_000).unwrap();
        let (m, sd) = mean_sd(&v);
        // h(1) = 1 is compensated by the drift, so X_1 = N_1 - 2 + 0
        assert!((m - 0.0).abs() < 4.0 * (2.0f64 / 20_000.0).sqrt());
        assert!((sd - 2f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn cgmy_truncated_jumps_have_the_right_mean() {
        // tempered stable with Y < 0 is finite activity: sizes are Gamma(-Y, M)
        let m = LevyMeasure::cgmy(1.0, 3.0, 2.0, -0.5).unwrap();
        let mut r = rng::stream(1, 1, 1);
        let mut pos = Vec::new();
        let sm = JumpSampler::build(&m, 0.0).unwrap();
        for _ in 0..40_000 {
            let y = sm.sample(&mut r).unwrap();
            if y > 0.0 {
                pos.push(y);
            }
        }
        let (mean, _) = mean_sd(&pos);
        assert!((mean - 0.25).abs() < 0.01);
        let trunc = LevyMeasure::cgmy(1.0, 1.0, 1.0, 0.5).unwrap();
        let mut above = 0;
        let n = 20_000;
        let st = JumpSampler::build(&trunc, 0.1).unwrap();
        for _ in 0..n {
            let y = st.sample(&mut r).unwrap();
            assert!(y.abs() > 0.1);
            if y > 0.5 {
                above += 1;
            }
        }
        let p = trunc.tail(Side::Pos, 0.5, true).unwrap() / mass_above(&trunc, 0.1).unwrap();
        let f = above as f64 / n as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn generic_inverse_sampler() {
        let a = LevyMeasure::compound_poisson(2.0, JumpLaw::Exponential { rate: 1.0 }).unwrap();
        let b = LevyMeasure::compound_poisson(1.0, JumpLaw::Exponential { rate: 1.0 }).unwrap();
        let d = a.minus(b);
        let mut r = rng::stream(2, 1, 1);
        let sd = JumpSampler::build(&d, 0.0).unwrap();
        let v: Vec<f64> = (0..20_000).map(|_| sd.sample(&mut r).unwrap()).collect();
        let (m, _) = mean_sd(&v);
        assert!((m - 1.0).abs() < 0.03);
    }

    #[test]
    fn reproducible() {
        let c = PiiCharacteristics::levy(
            TruncationFunction::default(),
            0.1,
            0.5,
            LevyMeasure::compound_poisson(1.0, JumpLaw::Uniform { lo: -1.0, hi: 2.0 }).unwrap(),
        )
        .unwrap();
        let s = DirectSimulator::new(&c, 1.0, &[0.0, 0.5, 1.0], None, 8).unwrap();
        assert_eq!(s.sample_path(3).unwrap(), s.sample_path(3).unwrap());
        assert_ne!(s.sample_path(3).unwrap(), s.sample_path(4).unwrap());
    }
}
