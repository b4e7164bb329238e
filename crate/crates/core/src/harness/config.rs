//! Experiment configuration: a TOML document (dotted keys such as
//! `domain.J = 10` are accepted as well as tables).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Domain;
use crate::spaces::SpaceSpec;
use crate::young::NFunction;

/// Largest resolution accepted by the harness.
pub const MAX_HARNESS_LEVEL: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Domination,
    Norm,
    Modular,
    Median,
    HpCompare,
    Weights,
    Young,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Domination,
        Self::Norm,
        Self::Modular,
        Self::Median,
        Self::HpCompare,
        Self::Weights,
        Self::Young,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Domination => "domination",
            Self::Norm => "norm",
            Self::Modular => "modular",
            Self::Median => "median",
            Self::HpCompare => "hp-compare",
            Self::Weights => "weights",
            Self::Young => "young",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "default_len")]
    pub len: f64,
    #[serde(rename = "J", default = "default_level")]
    pub level: u32,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            lo: 0.0,
            len: default_len(),
            level: default_level(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Self::One(v) => vec![*v],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Unit,
    Power,
    Step,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(default = "default_weight_kind")]
    pub kind: WeightKind,
    /// Power exponents; when absent the sweep is chosen from the space.
    #[serde(default)]
    pub a: Option<OneOrMany>,
    /// Step-weight values, spread evenly over the domain.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// Random weights take values in `[1/bound, bound]`, log-uniformly.
    #[serde(default = "default_bound")]
    pub bound: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            kind: default_weight_kind(),
            a: None,
            values: None,
            bound: default_bound(),
            count: default_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceFamily {
    Lebesgue,
    Lorentz,
    Orlicz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(default = "default_family")]
    pub family: SpaceFamily,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub q: Option<f64>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            p: default_p(),
            q: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    Power,
    Piecewise,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    #[serde(default = "default_phi_kind")]
    pub kind: PhiKind,
    /// Exponent, or the lower exponent of a piecewise power.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Upper exponent of a piecewise power.
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "default_knot")]
    pub knot: f64,
    #[serde(default = "default_coef")]
    pub coef: f64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            kind: default_phi_kind(),
            p: default_p(),
            q: None,
            knot: default_knot(),
            coef: default_coef(),
        }
    }
}

/// Thresholds for the pass/fail flags of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    /// Largest relative change of an empirical constant from `J` to `J + 1`.
    #[serde(default = "default_drift")]
    pub drift: f64,
    /// Largest max/min ratio of the norm constant across the weight sweep.
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Largest relative error of the `c/(1-a²)` fit in the comparison run.
    #[serde(default = "default_fit")]
    pub fit: f64,
    /// Whether the resolution-drift flag takes part in the exit status.
    #[serde(default = "default_true")]
    pub check_drift: bool,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            drift: default_drift(),
            spread: default_spread(),
            fit: default_fit(),
            check_drift: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Truncation depth of the `2^{-mδ}` series; chosen per trial when absent.
    #[serde(default)]
    pub mmax: Option<u32>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Exponent scale `α` in the modular bound `[w]_{A∞}^{1 + α C'}`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub acceptance: AcceptanceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            domain: DomainConfig::default(),
            kernel: default_kernel(),
            weight: WeightConfig::default(),
            space: SpaceConfig::default(),
            phi: PhiConfig::default(),
            trials: default_trials(),
            seed: 0,
            mmax: None,
            out: None,
            alpha: default_alpha(),
            acceptance: AcceptanceConfig::default(),
        }
    }
}

fn default_len() -> f64 {
    1.0
}
fn default_level() -> u32 {
    10
}
fn default_weight_kind() -> WeightKind {
    WeightKind::Power
}
fn default_bound() -> f64 {
    4.0
}
fn default_count() -> usize {
    4
}
fn default_family() -> SpaceFamily {
    SpaceFamily::Lebesgue
}
fn default_p() -> f64 {
    2.0
}
fn default_phi_kind() -> PhiKind {
    PhiKind::Power
}
fn default_knot() -> f64 {
    1.0
}
fn default_coef() -> f64 {
    1.0
}
fn default_drift() -> f64 {
    0.25
}
fn default_spread() -> f64 {
    2.0
}
fn default_fit() -> f64 {
    0.2
}
fn default_true() -> bool {
    true
}
fn default_kernel() -> String {
    "hilbert".to_string()
}
fn default_trials() -> usize {
    32
}
fn default_alpha() -> f64 {
    1.0
}

fn range_error(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {reason}"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("--config: cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Range checks that the type system does not cover. Errors name the key.
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if !(d.len > 0.0) || !d.len.is_finite() {
            return Err(range_error(
                "domain.len",
                format!("must be positive and finite, got {}", d.len),
            ));
        }
        if !d.lo.is_finite() {
            return Err(range_error("domain.lo", "must be finite"));
        }
        if !(1..=MAX_HARNESS_LEVEL).contains(&d.level) {
            return Err(range_error(
                "domain.J",
                format!("must be in 1..={MAX_HARNESS_LEVEL}, got {}", d.level),
            ));
        }
        if self.kernel != "hilbert" {
            return Err(range_error(
                "kernel",
                format!("unknown kernel {:?} (available: hilbert)", self.kernel),
            ));
        }
        if self.trials == 0 {
            return Err(range_error("trials", "must be at least 1"));
        }
        if let Some(m) = self.mmax {
            if m > 64 {
                return Err(range_error("mmax", format!("must be at most 64, got {m}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(range_error("alpha", format!("must be in (0, 1], got {}", self.alpha)));
        }
        let w = &self.weight;
        if let Some(a) = &w.a {
            for a in a.to_vec() {
                if !(a > -1.0) || !a.is_finite() {
                    return Err(range_error(
                        "weight.a",
                        format!("power exponents must exceed -1, got {a}"),
                    ));
                }
            }
        }
        if w.kind == WeightKind::Step {
            match &w.values {
                None => return Err(range_error("weight.values", "required for step weights")),
                Some(v) if v.is_empty() => return Err(range_error("weight.values", "must be non-empty")),
                Some(v) => {
                    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                        return Err(range_error("weight.values", "entries must be positive and finite"));
                    }
                    if v.len() > 1 << d.level {
                        return Err(range_error("weight.values", "more values than cells"));
                    }
                }
            }
        }
        if !(w.bound >= 1.0) || !w.bound.is_finite() {
            return Err(range_error("weight.bound", format!("must be ≥ 1, got {}", w.bound)));
        }
        if w.kind == WeightKind::Random && w.count == 0 {
            return Err(range_error("weight.count", "must be at least 1"));
        }
        self.space_spec()?;
        let uses_ap = matches!(
            self.kind,
            Some(ExperimentKind::Norm | ExperimentKind::Median | ExperimentKind::Weights)
        );
        if uses_ap && self.space.family != SpaceFamily::Orlicz && !(self.space.p > 1.0) {
            return Err(range_error(
                "space.p",
                format!("the A_p characteristic needs p > 1, got {}", self.space.p),
            ));
        }
        if matches!(self.kind, Some(ExperimentKind::Modular | ExperimentKind::Young)) {
            self.nfunction()?;
        }
        for (key, v) in [
            ("acceptance.drift", self.acceptance.drift),
            ("acceptance.spread", self.acceptance.spread),
            ("acceptance.fit", self.acceptance.fit),
        ] {
            if !(v > 0.0) {
                return Err(range_error(key, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.domain.lo, self.domain.len, self.domain.level)
    }

    pub fn nfunction(&self) -> Result<NFunction> {
        let phi = &self.phi;
        let built = match phi.kind {
            PhiKind::Power => NFunction::scaled_power(phi.coef, phi.p),
            PhiKind::Piecewise => NFunction::piecewise(phi.p, phi.q.unwrap_or(phi.p), phi.knot),
            PhiKind::Exponential => Ok(NFunction::exponential()),
        };
        built.map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let key = if name.starts_with("phi") {
                    name.to_string()
                } else {
                    format!("phi.{name}")
                };
                range_error(&key, reason)
            }
            other => other,
        })
    }

    pub fn space_spec(&self) -> Result<SpaceSpec> {
        let s = &self.space;
        let built = match s.family {
            SpaceFamily::Lebesgue => SpaceSpec::lebesgue(s.p),
            SpaceFamily::Lorentz => SpaceSpec::lorentz(s.p, s.q.unwrap_or(s.p)),
            SpaceFamily::Orlicz => self.nfunction().map(SpaceSpec::orlicz),
        };
        built.map_err(|e| match e {
            Error::InvalidParameter { name, reason } => range_error(name, reason),
            other => other,
        })
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
