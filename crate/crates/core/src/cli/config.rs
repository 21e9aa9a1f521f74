use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::radial::LayeredMedium;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub radii: Vec<f64>,
    /// Serialized as `[re, im]` pairs.
    pub permittivities: Vec<Complex64>,
}

impl MediumConfig {
    pub fn build(&self) -> Result<LayeredMedium, CliError> {
        LayeredMedium::new(self.radii.clone(), self.permittivities.clone())
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub degrees: Vec<usize>,
    pub deltas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            degrees: vec![1],
            deltas: vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1],
        }
    }
}

/// Contrast family `eps_t = eps_0 + t` on the selected layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    pub offsets: Vec<f64>,
    /// Layer indices shifted by `t`, innermost first. Empty means all.
    #[serde(default)]
    pub layers: Vec<usize>,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            offsets: vec![1e-1, 1e-2, 1e-3],
            layers: Vec::new(),
        }
    }
}

impl PerturbConfig {
    pub fn family_member(&self, base: &LayeredMedium, t: f64) -> Result<LayeredMedium, CliError> {
        let eps = base
            .permittivities()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if self.layers.is_empty() || self.layers.contains(&i) {
                    e + t
                } else {
                    *e
                }
            })
            .collect();
        LayeredMedium::new(base.radii().to_vec(), eps).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectMethodConfig {
    Moebius,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    pub method: DetectMethodConfig,
    /// Real scan window for the grid method.
    pub window: [f64; 2],
    pub points: usize,
    /// Relative magnitude of the noise on each measured entry.
    pub noise: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            method: DetectMethodConfig::Moebius,
            window: [-50.0, 50.0],
            points: 401,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumConfig,
    pub k: f64,
    #[serde(default)]
    pub delta: f64,
    pub l_max: usize,
    /// Real shift of the solution operator; picked automatically when absent.
    #[serde(default)]
    pub shift: Option<f64>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub perturb: PerturbConfig,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Also write whitespace-separated `.dat` files.
    #[serde(default)]
    pub plots: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.medium.build()?;
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad(format!("k must be finite and positive, got {}", self.k));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad(format!("delta must be finite and >= 0, got {}", self.delta));
        }
        if self.l_max == 0 {
            return bad("l_max must be at least 1".into());
        }
        if let Some(z) = self.shift {
            if !z.is_finite() {
                return bad(format!("shift must be finite, got {z}"));
            }
        }
        if self
            .sweep
            .deltas
            .iter()
            .any(|d| !(d.is_finite() && *d >= 0.0))
        {
            return bad("sweep deltas must be finite and >= 0".into());
        }
        if self.sweep.degrees.contains(&0) {
            return bad("sweep degrees must be >= 1".into());
        }
        if self.perturb.offsets.iter().any(|t| !t.is_finite()) {
            return bad("perturbation offsets must be finite".into());
        }
        let layers = self.medium.radii.len();
        if let Some(i) = self.perturb.layers.iter().find(|&&i| i >= layers) {
            return bad(format!(
                "perturbation layer {i} out of range (medium has {layers})"
            ));
        }
        let [lo, hi] = self.detect.window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("detection window [{lo}, {hi}] is empty"));
        }
        if self.detect.method == DetectMethodConfig::Grid && self.detect.points < 3 {
            return bad("grid detection needs at least 3 points".into());
        }
        if !(self.detect.noise.is_finite() && self.detect.noise >= 0.0) {
            return bad(format!(
                "noise magnitude must be finite and >= 0, got {}",
                self.detect.noise
            ));
        }
        Ok(())
    }
}
