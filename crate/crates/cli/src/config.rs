//! Run configuration: a single JSON document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use collarlab::{Complex64, CutoffSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Suite identifiers, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    VerifyCalculus,
    WpAsymptotics,
    RicciAsymptotics,
    GreenProps,
    Approximants,
    HoloCurvature,
    Perturbed,
    Lengths,
    Equivalence,
    G2Bounds,
}

impl SuiteId {
    pub const ALL: [SuiteId; 10] = [
        SuiteId::VerifyCalculus,
        SuiteId::WpAsymptotics,
        SuiteId::RicciAsymptotics,
        SuiteId::GreenProps,
        SuiteId::Approximants,
        SuiteId::HoloCurvature,
        SuiteId::Perturbed,
        SuiteId::Lengths,
        SuiteId::Equivalence,
        SuiteId::G2Bounds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteId::VerifyCalculus => "verify-calculus",
            SuiteId::WpAsymptotics => "wp-asymptotics",
            SuiteId::RicciAsymptotics => "ricci-asymptotics",
            SuiteId::GreenProps => "green-props",
            SuiteId::Approximants => "approximants",
            SuiteId::HoloCurvature => "holo-curvature",
            SuiteId::Perturbed => "perturbed",
            SuiteId::Lengths => "lengths",
            SuiteId::Equivalence => "equivalence",
            SuiteId::G2Bounds => "g2-bounds",
        }
    }
}

impl std::str::FromStr for SuiteId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        SuiteId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| CliError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Markdown,
    SvgLines,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" => Ok(Format::Markdown),
            "svg-lines" => Ok(Format::SvgLines),
            other => Err(CliError::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// Which Beltrami data a collar carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecRef {
    #[default]
    Pure,
}

/// One collar template. `c`, `phase` and `spec` shape the model family; an
/// explicit `u` or `t` also adds a pinned evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollarEntry {
    #[serde(default = "default_cut")]
    pub c: f64,
    /// `arg t` for swept points.
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub u: Option<f64>,
    /// `t` as `[re, im]`.
    #[serde(default)]
    pub t: Option<[f64; 2]>,
    #[serde(default)]
    pub spec: SpecRef,
}

fn default_cut() -> f64 {
    0.5
}

impl Default for CollarEntry {
    fn default() -> Self {
        Self { c: 0.5, phase: 0.0, u: None, t: None, spec: SpecRef::Pure }
    }
}

impl CollarEntry {
    /// Width of the pinned point, if any.
    pub fn pinned_u(&self) -> Option<f64> {
        self.u.or_else(|| self.t.map(|[re, im]| -std::f64::consts::PI / Complex64::new(re, im).norm().ln()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_tau: usize,
    /// Highest angular mode kept by the Green operator.
    pub n_modes: i32,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_tau: 4096, n_modes: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub u_min: f64,
    pub u_max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Width at which constant bands are asserted (nearest sweep point).
    #[serde(default = "default_reference")]
    pub reference_u: f64,
}

fn default_reference() -> f64 {
    0.025
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { u_min: 0.0125, u_max: 0.1, points: 4, spacing: Spacing::Geometric, reference_u: 0.025 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("collarlab-out"), formats: vec![Format::Csv, Format::Json, Format::Markdown] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub collars: Vec<CollarEntry>,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub suites: Vec<SuiteId>,
    /// Per-check overrides of the pass band, keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
    pub output: OutputConfig,
    pub seed: u64,
    /// Perturbation constants `C` for the perturbed suite.
    pub perturbation: Vec<f64>,
    /// Off-diagonal coupling strength of the two-collar models.
    pub coupling: f64,
    pub cutoff: CutoffSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            collars: vec![CollarEntry::default()],
            grid: GridConfig::default(),
            sweep: SweepConfig::default(),
            suites: SuiteId::ALL.to_vec(),
            tolerances: BTreeMap::new(),
            output: OutputConfig::default(),
            seed: 20240917,
            perturbation: vec![1.0, 10.0],
            coupling: 0.5,
            cutoff: CutoffSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.sweep;
        if !(s.u_min > 0.0 && s.u_min < s.u_max && s.u_max <= 0.15) {
            return Err(CliError::Config(format!("sweep needs 0 < u_min < u_max ≤ 0.15, got [{}, {}]", s.u_min, s.u_max)));
        }
        if s.points < 4 {
            return Err(CliError::Config(format!("sweep needs at least 4 points, got {}", s.points)));
        }
        if self.grid.n_tau < 512 {
            return Err(CliError::Config(format!("n_tau must be at least 512, got {}", self.grid.n_tau)));
        }
        if self.grid.n_modes < 2 {
            return Err(CliError::Config("n_modes must be at least 2".into()));
        }
        if self.collars.is_empty() {
            return Err(CliError::Config("at least one collar template is required".into()));
        }
        for c in &self.collars {
            if !(c.c > 0.0 && c.c < 1.0) {
                return Err(CliError::Config(format!("collar cut {} outside (0, 1)", c.c)));
            }
            if c.u.is_some() && c.t.is_some() {
                return Err(CliError::Config("a collar gives either u or t, not both".into()));
            }
            if let Some(u) = c.pinned_u() {
                collarlab::CollarParams::from_u(u, c.c).map_err(|e| CliError::Config(format!("pinned point: {e}")))?;
            }
        }
        if self.perturbation.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(CliError::Config("perturbation constants must be positive".into()));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(CliError::Config("coupling must be non-negative".into()));
        }
        if self.tolerances.values().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(CliError::Config("tolerance overrides must be positive".into()));
        }
        self.cutoff.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if (self.cutoff.c - self.collars[0].c).abs() > 0.0 {
            return Err(CliError::Config("cutoff.c must equal the collar cut".into()));
        }
        Ok(())
    }

    /// Geometric sweep from `u_max` down to `u_min`.
    pub fn sweep_points(&self) -> Vec<f64> {
        let s = &self.sweep;
        let ratio = s.u_min / s.u_max;
        (0..s.points).map(|k| s.u_max * ratio.powf(k as f64 / (s.points - 1) as f64)).collect()
    }

    /// The sweep point nearest to `reference_u`.
    pub fn reference_point(&self) -> f64 {
        let target = self.sweep.reference_u;
        self.sweep_points().into_iter().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())).unwrap_or(target)
    }

    pub fn pinned_points(&self) -> Vec<f64> {
        self.collars.iter().filter_map(CollarEntry::pinned_u).collect()
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { mode_cutoff: self.grid.n_modes, ..SolverConfig::default() }
    }

    pub fn cut(&self) -> f64 {
        self.collars[0].c
    }

    pub fn phase(&self) -> f64 {
        self.collars[0].phase
    }

    pub fn tolerance(&self, check_id: &str, default: f64) -> f64 {
        self.tolerances.get(check_id).copied().unwrap_or(default)
    }
}
