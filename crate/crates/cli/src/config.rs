//! Experiment configuration files.

use std::fmt;
use std::path::Path;

use pii_order_core::verify::Plf;
use pii_order_core::{CutPoint, CutSide, FamilyClass, OrderKind, PiiCharacteristics};
use serde::{Deserialize, Serialize};

use crate::spec::ProcessSpec;

/// A malformed configuration. `key` is the dotted path of the offending entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Tails,
    Cut,
    Convex,
    KernelOrder,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutSpec {
    pub k: f64,
    #[serde(default)]
    pub side: CutSide,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSettings {
    /// Geometric jump-size points per sign.
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    /// Smallest |x| on the jump-size grid.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            x_points: default_x_points(),
            floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlfSpec {
    pub knots: Vec<(f64, f64)>,
    #[serde(default)]
    pub left_slope: f64,
    #[serde(default)]
    pub right_slope: f64,
}

impl PlfSpec {
    pub fn build(&self, key: &str) -> Result<Plf, ConfigError> {
        Plf::new(self.knots.clone(), self.left_slope, self.right_slope).map_err(|e| ConfigError::new(key, e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            scale: default_scale(),
            smoothing: default_smoothing(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolationSpec {
    pub f: PlfSpec,
    #[serde(default)]
    pub s: f64,
    pub t: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallTimeSpec {
    pub f: PlfSpec,
    pub t0: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default)]
    pub family: FamilySpec,
    /// Comparison times; defaults to the horizon.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub interpolation: Option<InterpolationSpec>,
    #[serde(default)]
    pub small_time: Option<SmallTimeSpec>,
}

/// Output file names, relative to `--out`. `null` disables an optional file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_paths")]
    pub paths: String,
    #[serde(default = "default_jumps")]
    pub jumps: Option<String>,
    #[serde(default = "default_paired")]
    pub paired: Option<String>,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            paths: default_paths(),
            jumps: default_jumps(),
            paired: default_paired(),
            report: default_report(),
            summary: default_summary(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "processX")]
    process_x: ProcessSpec,
    #[serde(alias = "processY")]
    process_y: ProcessSpec,
    order: OrderKind,
    #[serde(default = "default_method")]
    method: Method,
    #[serde(default)]
    cut: Option<CutSpec>,
    horizon: f64,
    #[serde(default = "default_grid_size")]
    grid_size: usize,
    #[serde(default = "default_n_paths")]
    n_paths: usize,
    #[serde(default)]
    epsilon_jump: Option<f64>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    check: CheckSettings,
    #[serde(default)]
    verify: VerifySettings,
    #[serde(default)]
    outputs: Outputs,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub process_x: PiiCharacteristics,
    pub process_y: PiiCharacteristics,
    pub order: OrderKind,
    pub method: Method,
    pub cut: Option<CutPoint>,
    pub horizon: f64,
    pub grid_size: usize,
    pub n_paths: usize,
    pub epsilon_jump: Option<f64>,
    pub seed: u64,
    pub check: CheckSettings,
    pub verify: VerifySettings,
    pub outputs: Outputs,
}

fn default_method() -> Method {
    Method::Auto
}
fn default_grid_size() -> usize {
    200
}
fn default_n_paths() -> usize {
    1000
}
fn default_x_points() -> usize {
    64
}
fn default_floor() -> f64 {
    1e-3
}
fn default_scale() -> f64 {
    3.0
}
fn default_smoothing() -> f64 {
    4.0
}
fn default_paths() -> String {
    "paths.csv".into()
}
fn default_jumps() -> Option<String> {
    Some("jumps.csv".into())
}
fn default_paired() -> Option<String> {
    Some("paired.csv".into())
}
fn default_report() -> String {
    "report.json".into()
}
fn default_summary() -> String {
    "summary.json".into()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { String::new() } else { key };
            ConfigError::new(key, e.into_inner().to_string())
        })?;
        raw.validate()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn family_class(&self) -> FamilyClass {
        match self.order {
            OrderKind::St | OrderKind::Pst => FamilyClass::St,
            OrderKind::Icx => FamilyClass::Icx,
            OrderKind::Cx => FamilyClass::Cx,
        }
    }

    pub fn infinite_activity(&self) -> bool {
        [&self.process_x, &self.process_y]
            .iter()
            .any(|c| !c.kernel.is_finite_activity().unwrap_or(false))
    }
}

impl RawConfig {
    fn validate(self) -> Result<ExperimentConfig, ConfigError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::new("horizon", "must be positive and finite"));
        }
        if self.n_paths < 1 {
            return Err(ConfigError::new("n_paths", "must be at least 1"));
        }
        if self.grid_size < 1 {
            return Err(ConfigError::new("grid_size", "must be at least 1"));
        }
        if let Some(e) = self.epsilon_jump {
            if !(e > 0.0 && e.is_finite()) {
                return Err(ConfigError::new("epsilon_jump", "must be positive"));
            }
        }
        if self.check.x_points < 2 {
            return Err(ConfigError::new("check.x_points", "must be at least 2"));
        }
        if !(self.check.floor > 0.0) {
            return Err(ConfigError::new("check.floor", "must be positive"));
        }
        if !(self.verify.family.scale > 0.0) {
            return Err(ConfigError::new("verify.family.scale", "must be positive"));
        }
        if !(self.verify.family.smoothing > 0.0) {
            return Err(ConfigError::new("verify.family.smoothing", "must be positive"));
        }
        if let Some(t) = self.verify.times.iter().find(|t| !(**t > 0.0 && **t <= self.horizon)) {
            return Err(ConfigError::new("verify.times", format!("{t} is outside (0, horizon]")));
        }
        if let Some(i) = &self.verify.interpolation {
            i.f.build("verify.interpolation.f")?;
            if !(i.s >= 0.0 && i.t > i.s) {
                return Err(ConfigError::new("verify.interpolation.t", "need 0 <= s < t"));
            }
            if i.n < 2 {
                return Err(ConfigError::new("verify.interpolation.n", "must be at least 2"));
            }
        }
        if let Some(s) = &self.verify.small_time {
            s.f.build("verify.small_time.f")?;
            if !(s.t0 > 0.0) {
                return Err(ConfigError::new("verify.small_time.t0", "must be positive"));
            }
            if s.n < 2 {
                return Err(ConfigError::new("verify.small_time.n", "must be at least 2"));
            }
        }
        let cut = match &self.cut {
            Some(c) => Some(CutPoint::new(c.k, c.side).map_err(|e| ConfigError::new("cut.k", e.to_string()))?),
            None => None,
        };
        if self.method == Method::Cut && cut.is_none() {
            return Err(ConfigError::new("cut", "required when method is cut"));
        }
        let cfg = ExperimentConfig {
            process_x: self.process_x.build("process_x")?,
            process_y: self.process_y.build("process_y")?,
            order: self.order,
            method: self.method,
            cut,
            horizon: self.horizon,
            grid_size: self.grid_size,
            n_paths: self.n_paths,
            epsilon_jump: self.epsilon_jump,
            seed: self.seed,
            check: self.check,
            verify: self.verify,
            outputs: self.outputs,
        };
        if cfg.epsilon_jump.is_none() && cfg.infinite_activity() {
            return Err(ConfigError::new(
                "epsilon_jump",
                "required when a kernel has infinite activity",
            ));
        }
        Ok(cfg)
    }
}
