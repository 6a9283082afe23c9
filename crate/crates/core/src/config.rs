//! TOML experiment configuration.
//!
//! ```toml
//! [group]
//! name = "heisenberg"
//! matrix = [[1, 1], [0, 1]]
//!
//! [run]
//! mode = "standard"   # or "exponential"
//! step = 0.25
//! kmax = 24
//! seed = 7
//!
//! [thresholds]
//! spearman = -0.9
//!
//! [[family]]
//! kind = "t_powers"
//! ladder = [4, 8, 16, 32, 64]
//! threshold = 0.05
//! ```

use serde::{Deserialize, Serialize};

use crate::algebra::Automorphism;
use crate::compactification::PsiMode;
use crate::error::{Error, Result};
use crate::nullity::FamilySpec;

#[derive(Clone, Debug, Deserialize, Serialize)]
struct RawConfig {
    group: RawGroup,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    thresholds: RawThresholds,
    #[serde(default, rename = "family")]
    families: Vec<FamilySpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
struct RawGroup {
    #[serde(default)]
    name: Option<String>,
    matrix: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default)]
struct RawRun {
    mode: PsiMode,
    step: f64,
    kmax: usize,
    seed: u64,
    output: Option<String>,
    max_radius: u32,
}

impl Default for RawRun {
    fn default() -> Self {
        RawRun { mode: PsiMode::Standard, step: 0.25, kmax: 24, seed: 0, output: None, max_radius: 8 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default)]
struct RawThresholds {
    spearman: f64,
}

impl Default for RawThresholds {
    fn default() -> Self {
        RawThresholds { spearman: -0.9 }
    }
}

/// A validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub automorphism: Automorphism,
    pub mode: PsiMode,
    /// Grid pitch of the sampled fundamental domain.
    pub step: f64,
    /// Length of the tabulated control function `η`.
    pub kmax: usize,
    pub seed: u64,
    pub output: Option<String>,
    /// Word-length radius for growth series.
    pub max_radius: u32,
    pub spearman: f64,
    pub families: Vec<FamilySpec>,
}

impl ExperimentConfig {
    /// Parses and validates. Syntax errors carry the TOML line and column;
    /// a singular or non-unimodular matrix is reported as such.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let automorphism = Automorphism::new(&raw.group.matrix)?;
        let n = automorphism.dim();
        if !(raw.run.step > 0.0 && raw.run.step <= 1.0) {
            return Err(Error::Config(format!("run.step must lie in (0, 1], got {}", raw.run.step)));
        }
        if raw.run.kmax == 0 {
            return Err(Error::Config("run.kmax must be at least 1".into()));
        }
        for f in &raw.families {
            f.validate(n).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(ExperimentConfig {
            name: raw.group.name.unwrap_or_else(|| format!("rank{n}")),
            automorphism,
            mode: raw.run.mode,
            step: raw.run.step,
            kmax: raw.run.kmax,
            seed: raw.run.seed,
            output: raw.run.output,
            max_radius: raw.run.max_radius,
            spearman: raw.thresholds.spearman,
            families: raw.families,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
