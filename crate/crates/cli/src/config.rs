//! Experiment configuration: a flat TOML table with strict key checking.

use std::path::{Path, PathBuf};

use rough_lsm::forward::{check_line, Variant};
use rough_lsm::geometry::{default_cell_width, HalfDiskInterface, InterfaceProfile, MeasurementLine, SamplingGrid};
use rough_lsm::inversion::{TikhonovConfig, DEFAULT_ALPHA, DEFAULT_CUTOFF};
use rough_lsm::Medium;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("field '{field}': {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

/// All parameters of one synthesize-and-invert run.
///
/// Keys: `profile` (flat, f1, f2, f3, f6 or `table:<path>`), `kappa1`,
/// `kappa2`, `a`, `b`, `n`, `x_range`, `y_range`, `hx`, `hy`, `alpha`,
/// `noise` (list of relative levels), `seed`, `variant` (raw or modified),
/// `radius` (half-disk radius, modified only), `h` (cell width, default
/// lambda2/10), `cutoff`, `output`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub profile: String,
    pub kappa1: f64,
    pub kappa2: f64,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub hx: f64,
    pub hy: f64,
    pub alpha: f64,
    pub noise: Vec<f64>,
    pub seed: u64,
    pub variant: String,
    pub radius: Option<f64>,
    pub h: Option<f64>,
    pub cutoff: f64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    /// Example 1 at desk scale.
    fn default() -> Self {
        Self {
            profile: "f1".into(),
            kappa1: 1.0,
            kappa2: 2.0,
            a: 15.0,
            b: 0.55,
            n: 201,
            x_range: [-10.0, 10.0],
            y_range: [-1.0, 0.5],
            hx: 0.5,
            hy: 0.1,
            alpha: DEFAULT_ALPHA,
            noise: vec![0.0],
            seed: 42,
            variant: "raw".into(),
            radius: None,
            h: None,
            cutoff: DEFAULT_CUTOFF,
            output: PathBuf::from("out"),
        }
    }
}

/// A configuration with every field checked and converted.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub profile: InterfaceProfile,
    pub medium: Medium,
    pub line: MeasurementLine,
    pub grid: SamplingGrid,
    pub tikhonov: TikhonovConfig,
    pub variant: Variant,
    pub reference: Option<HalfDiskInterface>,
    pub h: f64,
    pub cutoff: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn load_profile(&self) -> Result<InterfaceProfile, ConfigError> {
        if let Some(path) = self.profile.strip_prefix("table:") {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
            return InterfaceProfile::parse_table(&text).map_err(|e| invalid("profile", e.to_string()));
        }
        InterfaceProfile::by_name(&self.profile).map_err(|e| invalid("profile", e.to_string()))
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let positive = |field: &'static str, v: f64| if v.is_finite() && v > 0.0 { Ok(v) } else { Err(invalid(field, format!("must be positive, got {v}"))) };
        positive("kappa1", self.kappa1)?;
        positive("kappa2", self.kappa2)?;
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("hx", self.hx)?;
        positive("hy", self.hy)?;
        positive("alpha", self.alpha)?;
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(invalid("cutoff", format!("must lie in (0, 1], got {}", self.cutoff)));
        }
        if let Some(d) = self.noise.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(invalid("noise", format!("levels must be non-negative, got {d}")));
        }
        let profile = self.load_profile()?;
        let medium = Medium::new(self.kappa1, self.kappa2).map_err(|e| invalid("kappa1", e.to_string()))?;
        let line = MeasurementLine::new(self.a, self.b, self.n).map_err(|e| invalid("n", e.to_string()))?;
        check_line(&profile, &line).map_err(|e| invalid("b", e.to_string()))?;
        let grid = SamplingGrid::new((self.x_range[0], self.x_range[1]), (self.y_range[0], self.y_range[1]), self.hx, self.hy)
            .map_err(|e| invalid("x_range", e.to_string()))?;
        let tikhonov = TikhonovConfig::new(self.alpha).map_err(|e| invalid("alpha", e.to_string()))?;
        let variant = match self.variant.as_str() {
            "raw" => Variant::Raw,
            "modified" => Variant::Modified,
            other => return Err(invalid("variant", format!("expected raw or modified, got '{other}'"))),
        };
        let reference = match (variant, self.radius) {
            (Variant::Raw, _) => None,
            (Variant::Modified, None) => return Err(invalid("radius", "required for the modified variant")),
            (Variant::Modified, Some(r)) => {
                if !(r > profile.support_radius()) {
                    return Err(invalid("radius", format!("must exceed the profile support radius {}", profile.support_radius())));
                }
                Some(HalfDiskInterface::new(r).map_err(|e| invalid("radius", e.to_string()))?)
            }
        };
        let h = match self.h {
            Some(h) => positive("h", h)?,
            None => default_cell_width(&medium),
        };
        Ok(Resolved { profile, medium, line, grid, tikhonov, variant, reference, h, cutoff: self.cutoff })
    }
}
