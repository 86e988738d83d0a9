//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! replications = 200
//!
//! [instance]
//! family = "scaled_gap"
//! target_mean = 0.5
//! noise = 0.2
//! shape = [0.0, 1.0, 2.0, 3.0]
//! scale = 1.5
//!
//! [learner]
//! kind = "two_point"
//! delta = 0.05
//! horizon = 4096
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: u64,
    pub instance: InstanceConfig,
    pub learner: LearnerConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> u64 {
    1
}

fn default_delta() -> f64 {
    0.05
}

fn default_samples() -> usize {
    100_000
}

fn yes() -> bool {
    true
}

fn default_eps() -> Vec<f64> {
    vec![0.0]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    Shared,
    Independent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutName {
    #[default]
    Alternating,
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionName {
    #[default]
    Coupled,
    Independent,
    ConstantExperts,
}

/// Which member of the two-point Bernoulli pair to draw from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flip {
    /// Expert 0 is the better one.
    #[default]
    Minus,
    /// Expert 1 is the better one.
    Plus,
    /// Even replications use `minus`, odd ones `plus`.
    Alternate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceConfig {
    /// Experts with prescribed risks; see `make_gap_instance`.
    Gap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        target_mean: f64,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        coupling: Coupling,
        risks: Vec<f64>,
        #[serde(default)]
        layout: LayoutName,
        /// Row-major `K x K` distances; overrides `layout`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distances: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        seed: u64,
    },
    /// Centers `target_mean + scale * shape_i / sqrt(n)` where `n` is the
    /// horizon (or `budget / K`). Risk gaps shrink like `1/n`.
    ScaledGap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        target_mean: f64,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        coupling: Coupling,
        shape: Vec<f64>,
        scale: f64,
    },
    /// Two Bernoulli experts whose means differ by `epsilon`.
    Bernoulli {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default)]
        epsilon: f64,
        /// Use `epsilon = 1 / (2 sqrt(horizon))` instead of `epsilon`.
        #[serde(default)]
        epsilon_from_horizon: bool,
        #[serde(default)]
        construction: ConstructionName,
        #[serde(default)]
        flip: Flip,
    },
}

impl InstanceConfig {
    pub fn id(&self) -> String {
        let (id, family) = match self {
            InstanceConfig::Gap { id, .. } => (id, "gap"),
            InstanceConfig::ScaledGap { id, .. } => (id, "scaled_gap"),
            InstanceConfig::Bernoulli { id, .. } => (id, "bernoulli"),
        };
        id.clone().unwrap_or_else(|| family.to_string())
    }

    pub fn experts(&self) -> usize {
        match self {
            InstanceConfig::Gap { risks, .. } => risks.len(),
            InstanceConfig::ScaledGap { shape, .. } => shape.len(),
            InstanceConfig::Bernoulli { .. } => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    FullInfo,
    Budgeted,
    TwoPoint,
    MultiPoint,
    /// Round-robin single queries followed by empirical risk minimization.
    SingleQueryErm,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::FullInfo => "full_info",
            LearnerKind::Budgeted => "budgeted",
            LearnerKind::TwoPoint => "two_point",
            LearnerKind::MultiPoint => "multi_point",
            LearnerKind::SingleQueryErm => "single_query_erm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    ClosedForm,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationUnit {
    #[default]
    Absolute,
    /// Multiples of the Bernoulli instance's `epsilon`.
    Epsilon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    #[serde(default)]
    pub mode: EvalMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Report how often the excess risk reaches this level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    #[serde(default)]
    pub deviation_unit: DeviationUnit,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            mode: EvalMode::ClosedForm,
            samples: default_samples(),
            deviation: None,
            deviation_unit: DeviationUnit::Absolute,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Horizon,
    Budget,
    M,
    Epsilon,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Horizon => "horizon",
            SweepVariable::Budget => "budget",
            SweepVariable::M => "m",
            SweepVariable::Epsilon => "epsilon",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Check the concentration event after every round (costs `O(K^2)`).
    #[serde(default = "yes")]
    pub event_a: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { event_a: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { eps: default_eps() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Write elimination and pair-statistic traces of replication 0.
    #[serde(default)]
    pub trace: bool,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate().map_err(|(key, msg)| {
            let msg = format!("{key}: {msg}");
            match locate(text, key) {
                Some(line) => CliError::Config(format!("line {line}: {msg}")),
                None => CliError::Config(msg),
            }
        })?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// SHA-256 of the normalized configuration.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Checks every parameter against the preconditions of the learner and
    /// instance, returning the offending key on failure.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.replications == 0 {
            return Err(("replications", "must be at least 1".into()));
        }
        self.validate_instance()?;
        let k = self.instance.experts();
        let l = &self.learner;
        if !(l.delta > 0.0 && l.delta < 1.0) {
            return Err(("delta", format!("{} is outside (0, 1)", l.delta)));
        }
        let sweeping = |v: SweepVariable| self.sweep.as_ref().is_some_and(|s| s.variable == v);
        match l.kind {
            LearnerKind::Budgeted => {
                if l.budget.is_none() && !sweeping(SweepVariable::Budget) {
                    return Err(("budget", "the budgeted learner needs a budget".into()));
                }
                if let Some(c) = l.budget {
                    check_budget(c, k)?;
                }
            }
            _ => {
                if l.horizon.is_none() && !sweeping(SweepVariable::Horizon) {
                    return Err(("horizon", format!("the {} learner needs a horizon", l.kind.as_str())));
                }
                if l.horizon == Some(0) {
                    return Err(("horizon", "must be at least 1".into()));
                }
            }
        }
        if l.kind == LearnerKind::MultiPoint {
            match l.m {
                Some(m) => check_m(m, k)?,
                None if !sweeping(SweepVariable::M) => {
                    return Err(("m", "the multi_point learner needs m".into()));
                }
                None => {}
            }
        }
        if self.evaluation.mode == EvalMode::MonteCarlo && self.evaluation.samples < 2 {
            return Err(("samples", "Monte-Carlo evaluation needs at least 2 samples".into()));
        }
        if self.evaluation.deviation_unit == DeviationUnit::Epsilon
            && !matches!(self.instance, InstanceConfig::Bernoulli { .. })
        {
            return Err(("deviation_unit", "epsilon units need a bernoulli instance".into()));
        }
        if let Some(s) = &self.sweep {
            self.validate_sweep(s, k)?;
        }
        if self.analysis.eps.iter().any(|e| !(*e >= 0.0)) {
            return Err(("eps", "values must be nonnegative".into()));
        }
        Ok(())
    }

    fn validate_instance(&self) -> Result<(), (&'static str, String)> {
        match &self.instance {
            InstanceConfig::Gap { risks, distances, .. } => {
                if risks.is_empty() {
                    return Err(("risks", "need at least one expert".into()));
                }
                if let Some(d) = distances {
                    if d.len() != risks.len() || d.iter().any(|row| row.len() != risks.len()) {
                        return Err(("distances", format!("must be a {0} x {0} matrix", risks.len())));
                    }
                }
            }
            InstanceConfig::ScaledGap { shape, scale, .. } => {
                if shape.is_empty() {
                    return Err(("shape", "need at least one expert".into()));
                }
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(("scale", "must be finite and nonnegative".into()));
                }
            }
            InstanceConfig::Bernoulli {
                epsilon,
                epsilon_from_horizon,
                ..
            } => {
                let swept = self.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::Epsilon);
                if !epsilon_from_horizon && !swept && !(*epsilon > 0.0 && *epsilon < 1.0) {
                    return Err(("epsilon", format!("{epsilon} is outside (0, 1)")));
                }
            }
        }
        Ok(())
    }

    fn validate_sweep(&self, s: &SweepConfig, k: usize) -> Result<(), (&'static str, String)> {
        if s.values.len() < 3 {
            return Err(("values", "a sweep needs at least 3 values".into()));
        }
        let integral = |v: f64| v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64;
        for &v in &s.values {
            match s.variable {
                SweepVariable::Horizon | SweepVariable::Budget | SweepVariable::M if !integral(v) => {
                    return Err(("values", format!("{v} is not a positive integer")));
                }
                SweepVariable::Budget => check_budget(v as u64, k)?,
                SweepVariable::M => check_m(v as usize, k)?,
                SweepVariable::Epsilon if !(v > 0.0 && v < 1.0) => {
                    return Err(("values", format!("epsilon {v} is outside (0, 1)")));
                }
                _ => {}
            }
        }
        let expected = match s.variable {
            SweepVariable::Budget => Some(LearnerKind::Budgeted),
            SweepVariable::M => Some(LearnerKind::MultiPoint),
            _ => None,
        };
        if expected.is_some_and(|kind| kind != self.learner.kind) {
            return Err(("variable", format!("cannot sweep {} for this learner", s.variable.as_str())));
        }
        if s.variable == SweepVariable::Horizon && self.learner.kind == LearnerKind::Budgeted {
            return Err(("variable", "the budgeted learner has no horizon; sweep budget".into()));
        }
        if s.variable == SweepVariable::Epsilon && !matches!(self.instance, InstanceConfig::Bernoulli { .. }) {
            return Err(("variable", "epsilon sweeps need a bernoulli instance".into()));
        }
        Ok(())
    }
}

fn check_budget(c: u64, k: usize) -> Result<(), (&'static str, String)> {
    if c < k as u64 {
        return Err(("budget", format!("{c} cannot pay for one round of {k} experts")));
    }
    Ok(())
}

fn check_m(m: usize, k: usize) -> Result<(), (&'static str, String)> {
    if m < 2 || m > k {
        return Err(("m", format!("{m} is outside [2, {k}]")));
    }
    Ok(())
}

/// 1-based line of the first `key = ...` assignment.
fn locate(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let line = line.trim_start();
        line.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
replications = 4

[instance]
family = "gap"
target_mean = 0.5
risks = [0.25, 0.3]

[learner]
kind = "two_point"
horizon = 100
"#;

    #[test]
    fn parses_with_defaults() {
        let c = Config::from_toml_str(BASE).unwrap();
        assert_eq!(c.learner.delta, 0.05);
        assert_eq!(c.evaluation.mode, EvalMode::ClosedForm);
        assert!(c.audit.event_a);
        assert_eq!(c.instance.experts(), 2);
        assert_eq!(c.instance.id(), "gap");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("horizon = 100", "horizon = 100\nhorizn = 3");
        assert!(matches!(Config::from_toml_str(&text), Err(CliError::Config(_))));
        let text = BASE.replace("risks", "risks = [0.3]\nriskz");
        assert!(Config::from_toml_str(&text).is_err());
    }

    #[test]
    fn semantic_errors_name_the_line() {
        let text = BASE.replace("kind = \"two_point\"", "kind = \"multi_point\"\nm = 5");
        match Config::from_toml_str(&text) {
            Err(CliError::Config(msg)) => assert!(msg.starts_with("line 12: m:"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = Config::from_toml_str(BASE).unwrap();
        let b = Config::from_toml_str(&BASE.replace("seed = 3", "seed   =   3 # comment")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 4;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn sweeps_are_checked() {
        let text = format!("{BASE}\n[sweep]\nvariable = \"horizon\"\nvalues = [10.0, 20.0]\n");
        assert!(Config::from_toml_str(&text).is_err());
        let text = format!("{BASE}\n[sweep]\nvariable = \"horizon\"\nvalues = [10.0, 20.5, 40.0]\n");
        assert!(Config::from_toml_str(&text).is_err());
        let text = format!("{BASE}\n[sweep]\nvariable = \"budget\"\nvalues = [10.0, 20.0, 40.0]\n");
        assert!(Config::from_toml_str(&text).is_err());
        let text = format!("{BASE}\n[sweep]\nvariable = \"horizon\"\nvalues = [10.0, 20.0, 40.0]\n");
        assert!(Config::from_toml_str(&text).is_ok());
    }
}
