//! TOML job configuration.
//!
//! One file describes one job. The top level carries `kind`, `seed` and an
//! optional `out` directory; each kind reads its own section:
//!
//! | kind             | section        |
//! |------------------|----------------|
//! | `op-check`       | `[operator]`, optional `[op_check]` |
//! | `weight-check`   | `[weights]`    |
//! | `potential-eval` | `[potential]`  |
//! | `experiment`     | `[experiment]` |
//! | `report-merge`   | `[merge]`      |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    ball_indicator, divfree_family, make_bump, mollifier_family, random_bump_field, random_divfree, random_poly_bump,
    ClosedFormField,
};
use crate::lab::{GridPolicy, TrendPolicy};
use crate::opalg::OperatorSpec;
use crate::weights::{BallFamily, Regime, Truncation, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    OpCheck,
    WeightCheck,
    PotentialEval,
    Experiment,
    ReportMerge,
}

impl JobKind {
    pub const ALL: [JobKind; 5] = [
        JobKind::OpCheck,
        JobKind::WeightCheck,
        JobKind::PotentialEval,
        JobKind::Experiment,
        JobKind::ReportMerge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JobKind::OpCheck => "op-check",
            JobKind::WeightCheck => "weight-check",
            JobKind::PotentialEval => "potential-eval",
            JobKind::Experiment => "experiment",
            JobKind::ReportMerge => "report-merge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// CLI subcommand running this kind.
    pub fn subcommand(self) -> &'static str {
        match self {
            JobKind::OpCheck => "op",
            JobKind::WeightCheck => "weights",
            JobKind::PotentialEval => "potential",
            JobKind::Experiment => "experiment",
            JobKind::ReportMerge => "merge",
        }
    }
}

fn default_checks() -> Vec<String> {
    ["cocanceling", "canceling", "elliptic", "projection"]
        .map(String::from)
        .to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpCheckSpec {
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    /// Sampled directions for the canceling and ellipticity checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rank_tol")]
    pub tol: f64,
}

fn default_samples() -> usize {
    256
}

fn default_rank_tol() -> f64 {
    1e-10
}

impl Default for OpCheckSpec {
    fn default() -> Self {
        OpCheckSpec {
            checks: default_checks(),
            samples: default_samples(),
            tol: default_rank_tol(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    Admissibility,
    Pointwise,
    HardyW2,
    HardyW4,
    Tail,
    Sawyer,
    Bump,
    BallTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightJobSpec {
    pub condition: ConditionKind,
    pub dim: usize,
    pub u: Weight,
    #[serde(default)]
    pub v: Option<Weight>,
    #[serde(default)]
    pub ell: f64,
    #[serde(default = "one")]
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    /// `|y|` samples, Hardy radii or (for `tail`) the truncation grid.
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub truncation: Truncation,
    /// Exponent `r >= 1` of the bump condition.
    #[serde(default)]
    pub bump_r: Option<f64>,
    /// Ball family; the standard family when absent.
    #[serde(default)]
    pub balls: Option<BallFamily>,
    /// Admissibility regime; `p_gt1` or `p_eq1` from `p` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
}

fn one() -> f64 {
    1.0
}

/// Closed-form test field with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Bump {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        normalize: bool,
    },
    /// `φ_ε` of a bump.
    Mollifier {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
        normalize: bool,
        #[serde(default = "one")]
        eps: f64,
    },
    /// `(∂₂φ_ε, −∂₁φ_ε, 0, …)` of a bump.
    Divfree {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
        normalize: bool,
        #[serde(default = "one")]
        eps: f64,
    },
    RandomDivfree {
        #[serde(default = "one")]
        extent: f64,
    },
    RandomBumps {
        #[serde(default = "one_usize")]
        fiber: usize,
        #[serde(default = "one")]
        extent: f64,
    },
    RandomPolyBump {
        #[serde(default = "one_usize")]
        fiber: usize,
        #[serde(default = "two")]
        degree: u32,
        #[serde(default = "one")]
        extent: f64,
    },
    BallIndicator {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
    },
}

fn one_usize() -> usize {
    1
}

fn two() -> u32 {
    2
}

fn bump_at(dim: usize, center: &Option<Vec<f64>>, radius: f64, normalize: bool) -> Result<ClosedFormField> {
    let c = center.clone().unwrap_or_else(|| vec![0.0; dim]);
    make_bump(dim, &c, radius, normalize)
}

impl FamilySpec {
    pub fn build(&self, dim: usize, seed: u64) -> Result<ClosedFormField> {
        match self {
            FamilySpec::Bump {
                center,
                radius,
                normalize,
            } => bump_at(dim, center, *radius, *normalize),
            FamilySpec::Mollifier {
                center,
                radius,
                normalize,
                eps,
            } => mollifier_family(&bump_at(dim, center, *radius, *normalize)?, *eps),
            FamilySpec::Divfree {
                center,
                radius,
                normalize,
                eps,
            } => divfree_family(&bump_at(dim, center, *radius, *normalize)?, *eps),
            FamilySpec::RandomDivfree { extent } => {
                if dim < 2 {
                    return Err(Error::Config {
                        key: "family".into(),
                        message: "random_divfree needs dim >= 2".into(),
                    });
                }
                Ok(random_divfree(dim, *extent, seed))
            }
            FamilySpec::RandomBumps { fiber, extent } => Ok(random_bump_field(dim, *fiber, *extent, seed)),
            FamilySpec::RandomPolyBump { fiber, degree, extent } => {
                Ok(random_poly_bump(dim, *fiber, *degree, *extent, seed))
            }
            FamilySpec::BallIndicator { center, radius } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; dim]);
                Ok(ball_indicator(dim, &c, *radius))
            }
        }
    }

    /// The same family at scale `eps` (mollifier and divergence-free only).
    pub fn at_eps(&self, eps: f64) -> Result<FamilySpec> {
        let mut f = self.clone();
        match &mut f {
            FamilySpec::Mollifier { eps: e, .. } | FamilySpec::Divfree { eps: e, .. } => *e = eps,
            _ => {
                return Err(Error::Config {
                    key: "experiment.field.family".into(),
                    message: "eps sweeps need the mollifier or divfree family".into(),
                })
            }
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub dim: usize,
    pub ell: f64,
    pub field: FamilySpec,
    #[serde(default = "default_potential_n")]
    pub n: usize,
    /// Grid half-width; twice the support's outer radius when absent.
    #[serde(default)]
    pub half_width: Option<f64>,
    /// Extra points evaluated by direct summation.
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Seeded pairs for the kernel regularity check (0 skips it).
    #[serde(default)]
    pub regularity_pairs: usize,
}

fn default_potential_n() -> usize {
    128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Ratio,
    ScaleInvariance,
    CounterexampleScalar,
    ScalarEpsSweep,
    CounterexampleAlpha1,
    Necessity,
    ClaimConvergence,
    MollifierLimit,
    Lemma31,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub probe: ProbeKind,
    pub dim: usize,
    pub ell: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    /// Test field (`ratio`, `scale_invariance`).
    #[serde(default)]
    pub field: Option<FamilySpec>,
    /// Constraint operator for `ratio`, `scale_invariance`, `necessity`, `lemma31`.
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Inner radii of the annuli.
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Sample radii `|x|`.
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Unit-mass seed bump for the mollifier probes.
    #[serde(default)]
    pub normalize: Option<bool>,
    /// `a = kappa · eps` in the divergence-free probe.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Grid points per axis for grid-based quantities.
    #[serde(default)]
    pub n: Option<usize>,
    /// Number of seeded pairs (`lemma31`).
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub grid: GridPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSpec {
    /// Record files or directories searched for `record.json` / `summary.json`.
    pub inputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub kind: JobKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_check: Option<OpCheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightJobSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge: Option<MergeSpec>,
    #[serde(default)]
    pub trend: TrendPolicy,
}

/// Why a configuration was rejected.
#[derive(Debug)]
pub enum ConfigError {
    MissingFile(String),
    UnknownKind(String),
    Malformed { key: String, message: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::MissingFile(p) => write!(f, "config file not found: {p}"),
            ConfigError::UnknownKind(k) => write!(
                f,
                "unknown job kind `{k}` at key `kind` (expected one of {})",
                JobKind::ALL.map(|k| k.as_str()).join(", ")
            ),
            ConfigError::Malformed { key, message } => write!(f, "malformed config at `{key}`: {message}"),
        }
    }
}

fn malformed(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Malformed {
        key: key.into(),
        message: message.into(),
    }
}

impl JobConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| malformed("<document>", e.message().to_string()))?;
        let kind = match table.get("kind") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => return Err(malformed("kind", "expected a string")),
            None => return Err(malformed("kind", "missing")),
        };
        if JobKind::parse(&kind).is_none() {
            return Err(ConfigError::UnknownKind(kind));
        }
        let cfg: JobConfig = toml::from_str(text).map_err(|e| {
            let key = offending_key(text, &e).unwrap_or_else(|| "<document>".into());
            malformed(&key, e.message().to_string())
        })?;
        cfg.check_sections()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> std::result::Result<Self, ConfigError> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|_| ConfigError::MissingFile(p.display().to_string()))?;
        Self::parse(&text)
    }

    fn check_sections(&self) -> std::result::Result<(), ConfigError> {
        let need = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(malformed(
                    key,
                    format!("section required for kind `{}`", self.kind.as_str()),
                ))
            }
        };
        match self.kind {
            JobKind::OpCheck => need(self.operator.is_some(), "operator"),
            JobKind::WeightCheck => need(self.weights.is_some(), "weights"),
            JobKind::PotentialEval => need(self.potential.is_some(), "potential"),
            JobKind::Experiment => need(self.experiment.is_some(), "experiment"),
            JobKind::ReportMerge => need(self.merge.is_some(), "merge"),
        }
    }

    /// The configuration with every default filled in, as JSON with sorted keys.
    pub fn canonical_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("out");
        }
        v
    }
}

/// Dotted key the error span points at, using the enclosing `[section]`
/// header and the `key =` on the span's line.
fn offending_key(text: &str, err: &toml::de::Error) -> Option<String> {
    let span = err.span()?;
    let before = &text[..span.start.min(text.len())];
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[line_start..].find('\n').map_or(text.len(), |i| line_start + i);
    let line = text[line_start..line_end].trim();
    let section = before[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    let field = if line.starts_with('[') {
        // whole-table errors name the field in the message
        let m = err.message();
        m.split('`').nth(1).map(str::to_string)
    } else {
        line.split('=')
            .next()
            .map(|k| k.trim().to_string())
            .filter(|k| !k.is_empty())
    };
    let section = if line.starts_with('[') {
        Some(line.trim_matches(|c| c == '[' || c == ']').trim().to_string())
    } else {
        section
    };
    match (section, field) {
        (Some(s), Some(f)) => Some(format!("{s}.{f}")),
        (Some(s), None) => Some(s),
        (None, f) => f,
    }
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::MissingFile(p) => Error::Io {
                path: p,
                source: std::io::Error::from(std::io::ErrorKind::NotFound),
            },
            ConfigError::UnknownKind(k) => Error::Config {
                key: "kind".into(),
                message: format!("unknown job kind `{k}`"),
            },
            ConfigError::Malformed { key, message } => Error::Config { key, message },
        }
    }
}
