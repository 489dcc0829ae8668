//! Scenario files and their validation.

use std::path::{Path, PathBuf};

use moyalks::entropy::EntropyConfig;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SystemName {
    Cat,
    Baker,
    Rotation,
    Standard,
    Harmonic,
    Identity,
    KickedRotor,
}

/// Which code path computes a classical report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    #[default]
    Measure,
    Algebraic,
}

/// Everything a run needs. Every stochastic choice derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub system: SystemName,
    /// Kick strength of the standard map and kicked rotor.
    pub k: f64,
    /// Rotation number; the golden mean when absent.
    pub alpha: Option<f64>,
    /// Radius of the invariant disk for plane-window systems.
    pub radius: f64,
    /// Explicit polynomial Hamiltonian on a plane window, replacing `system`.
    pub hamiltonian: Option<String>,
    /// Side of the plane window.
    pub side: f64,
    pub grid: usize,
    pub hbar: Vec<f64>,
    pub depths: Vec<u32>,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub layer: Layer,
    pub output: Option<PathBuf>,
    /// Remaining estimator settings; `samples` and `seed` above take precedence.
    pub estimator: EntropyConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            system: SystemName::Cat,
            k: 10.0,
            alpha: None,
            radius: 6.0,
            hamiltonian: None,
            side: 16.0,
            grid: 64,
            hbar: Vec::new(),
            depths: vec![1, 2],
            n_max: 14,
            samples: 1_000_000,
            seed: 1,
            layer: Layer::Measure,
            output: None,
            estimator: EntropyConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(format!("scenario file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// Estimator settings with the scenario's sample count and seed.
    pub fn entropy_config(&self) -> EntropyConfig {
        EntropyConfig { samples: self.samples, seed: self.seed, ..self.estimator.clone() }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |field: &str, msg: String| Err(Failure::Config(format!("field `{field}`: {msg}")));
        if self.depths.is_empty() {
            return bad("depths", "at least one depth is required".into());
        }
        if let Some(d) = self.depths.iter().find(|&&d| d > 8) {
            return bad("depths", format!("depth {d} exceeds 8"));
        }
        if self.depths.windows(2).any(|w| w[1] <= w[0]) {
            return bad("depths", "depths must be strictly increasing".into());
        }
        if self.n_max < 4 {
            return bad("n_max", format!("{} is below 4", self.n_max));
        }
        if self.samples == 0 {
            return bad("samples", "must be positive".into());
        }
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return bad("grid", format!("{} is not a power of two ≥ 8", self.grid));
        }
        if !(self.radius > 0.0 && 2.0 * self.radius <= self.side) {
            return bad("radius", format!("{} must lie in (0, side/2]", self.radius));
        }
        if !self.k.is_finite() {
            return bad("k", "must be finite".into());
        }
        if let Some(h) = self.hbar.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
            return bad("hbar", format!("{h} is not a non-negative number"));
        }
        Ok(())
    }
}

/// `"2..6"` (inclusive) or `"1,2,3"`.
pub fn parse_depths(text: &str) -> Result<Vec<u32>, String> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let lo: u32 = a.trim().parse().map_err(|_| format!("bad depth range `{text}`"))?;
        let hi: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad depth range `{text}`"))?;
        if hi < lo {
            return Err(format!("empty depth range `{text}`"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| format!("bad depth `{s}`"))).collect()
}
