//! JSON description of one process.
//!
//! ```json
//! {
//!   "truncation": { "threshold": 1.0, "kind": "clip" },
//!   "drift": 0.3,
//!   "gaussian": [[0, 0], [1, 0.5]],
//!   "kernel": { "family": "compound_poisson", "rate": 2.0,
//!               "jumps": { "law": "exponential", "rate": 1.0 } },
//!   "time_measure": { "breakpoints": [0], "slopes": [1] },
//!   "fixed_jumps": [{ "time": 0.5, "mass": 0.5, "jumps": { "law": "point", "at": 1 } }]
//! }
//! ```
//!
//! Every key is optional. A number for `drift` or `gaussian` is a slope; a
//! list is `[t, value]` knots starting at `t = 0`.

use pii_order_core::kernel::KernelCell;
use pii_order_core::{
    FixedJump, FixedJumpSchedule, JumpKernel, JumpLaw, LevyMeasure, PiecewiseLinear, PiiCharacteristics,
    TailTable, TimeMeasure, TruncationFunction, TruncationKind,
};
use serde::Deserialize;

use crate::config::ConfigError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    #[serde(default)]
    pub truncation: Option<TruncationSpec>,
    #[serde(default)]
    pub drift: Option<FunctionSpec>,
    #[serde(default)]
    pub gaussian: Option<FunctionSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub time_measure: Option<TimeMeasureSpec>,
    #[serde(default)]
    pub fixed_jumps: Vec<FixedJumpSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    #[serde(default = "one")]
    pub threshold: f64,
    #[serde(default)]
    pub kind: TruncationKindSpec,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKindSpec {
    #[default]
    Clip,
    Indicator,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Slope(f64),
    Knots(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Zero {},
    Cgmy { c: f64, g: f64, m: f64, y: f64 },
    CompoundPoisson { rate: f64, jumps: LawSpec },
    /// Tail values `[x, K([x, inf))]` for `pos` and `[x, K((-inf, -x]))` for `neg`.
    Tabulated {
        #[serde(default)]
        pos: Vec<(f64, f64)>,
        #[serde(default)]
        neg: Vec<(f64, f64)>,
    },
    Sum { parts: Vec<KernelSpec> },
    Piecewise { cells: Vec<CellSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub start: f64,
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Atoms { atoms: Vec<(f64, f64)> },
    Point { at: f64 },
    Exponential { rate: f64 },
    NegExponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeMeasureSpec {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedJumpSpec {
    pub time: f64,
    pub mass: f64,
    pub jumps: LawSpec,
}

fn bad(key: impl Into<String>, e: impl ToString) -> ConfigError {
    ConfigError::new(key, e.to_string())
}

impl FunctionSpec {
    fn build(&self, key: &str) -> Result<PiecewiseLinear, ConfigError> {
        match self {
            FunctionSpec::Slope(s) if s.is_finite() => Ok(PiecewiseLinear::linear(*s)),
            FunctionSpec::Slope(_) => Err(bad(key, "slope must be finite")),
            FunctionSpec::Knots(k) => PiecewiseLinear::new(k.clone()).map_err(|e| bad(key, e)),
        }
    }
}

impl LawSpec {
    pub fn build(&self, key: &str) -> Result<JumpLaw, ConfigError> {
        let law = match self {
            LawSpec::Atoms { atoms } => return JumpLaw::atoms(atoms.clone()).map_err(|e| bad(key, e)),
            LawSpec::Point { at } => return JumpLaw::point(*at).map_err(|e| bad(key, e)),
            LawSpec::Exponential { rate } => JumpLaw::Exponential { rate: *rate },
            LawSpec::NegExponential { rate } => JumpLaw::NegExponential { rate: *rate },
            LawSpec::Uniform { lo, hi } => JumpLaw::Uniform { lo: *lo, hi: *hi },
        };
        law.validate().map_err(|e| bad(key, e))?;
        Ok(law)
    }
}

impl KernelSpec {
    fn measure(&self, key: &str) -> Result<LevyMeasure, ConfigError> {
        Ok(match self {
            KernelSpec::Zero {} => LevyMeasure::Zero,
            KernelSpec::Cgmy { c, g, m, y } => LevyMeasure::cgmy(*c, *g, *m, *y).map_err(|e| bad(key, e))?,
            KernelSpec::CompoundPoisson { rate, jumps } => {
                let law = jumps.build(&format!("{key}.jumps"))?;
                LevyMeasure::compound_poisson(*rate, law).map_err(|e| bad(format!("{key}.rate"), e))?
            }
            KernelSpec::Tabulated { pos, neg } => {
                LevyMeasure::Tabulated(TailTable::new(pos.clone(), neg.clone()).map_err(|e| bad(key, e))?)
            }
            KernelSpec::Sum { parts } => LevyMeasure::Sum(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.measure(&format!("{key}.parts[{i}]")))
                    .collect::<Result<_, _>>()?,
            ),
            KernelSpec::Piecewise { .. } => {
                return Err(bad(key, "piecewise kernels cannot be nested"));
            }
        })
    }

    pub fn build(&self, key: &str) -> Result<JumpKernel, ConfigError> {
        match self {
            KernelSpec::Piecewise { cells } => {
                let cells = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        Ok(KernelCell {
                            start: c.start,
                            measure: c.kernel.measure(&format!("{key}.cells[{i}].kernel"))?,
                        })
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                JumpKernel::piecewise(cells).map_err(|e| bad(format!("{key}.cells"), e))
            }
            other => Ok(JumpKernel::homogeneous(other.measure(key)?)),
        }
    }
}

impl ProcessSpec {
    /// Builds the triplet; error keys are prefixed with `key`.
    pub fn build(&self, key: &str) -> Result<PiiCharacteristics, ConfigError> {
        let truncation = match &self.truncation {
            None => TruncationFunction::default(),
            Some(t) => {
                let kind = match t.kind {
                    TruncationKindSpec::Clip => TruncationKind::Clip,
                    TruncationKindSpec::Indicator => TruncationKind::Indicator,
                };
                TruncationFunction::with_kind(t.threshold, kind).map_err(|e| bad(format!("{key}.truncation"), e))?
            }
        };
        let drift = match &self.drift {
            Some(f) => f.build(&format!("{key}.drift"))?,
            None => PiecewiseLinear::zero(),
        };
        let gaussian = match &self.gaussian {
            Some(f) => f.build(&format!("{key}.gaussian"))?,
            None => PiecewiseLinear::zero(),
        };
        let kernel = match &self.kernel {
            Some(k) => k.build(&format!("{key}.kernel"))?,
            None => JumpKernel::zero(),
        };
        let time_measure = match &self.time_measure {
            Some(a) => TimeMeasure::new(a.breakpoints.clone(), a.slopes.clone())
                .map_err(|e| bad(format!("{key}.time_measure"), e))?,
            None => TimeMeasure::identity(),
        };
        let fixed = self
            .fixed_jumps
            .iter()
            .enumerate()
            .map(|(i, f)| {
                Ok(FixedJump {
                    time: f.time,
                    mass: f.mass,
                    law: f.jumps.build(&format!("{key}.fixed_jumps[{i}].jumps"))?,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let fixed_jumps = FixedJumpSchedule::new(fixed).map_err(|e| bad(format!("{key}.fixed_jumps"), e))?;
        PiiCharacteristics::new(truncation, drift, gaussian, kernel, time_measure, fixed_jumps).map_err(|e| {
            let field = match &e {
                pii_order_core::Error::Invalid { field, .. } => format!("{key}.{field}"),
                _ => key.to_string(),
            };
            bad(field, e)
        })
    }
}
