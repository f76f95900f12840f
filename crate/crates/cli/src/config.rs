use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dpp_rigidity::kernels::{KernelConfig, KernelSpec};
use dpp_rigidity::rigidity::{Condition, GridResolution, TaperKind};
use dpp_rigidity::spectral::WeightedRegion;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Eval,
    Bounds,
    VarianceScan,
    Sample,
    Demo,
    FredholmCheck,
}

/// Everything an experiment reads. Fields a kind does not use are ignored;
/// the ones it does use are checked by [`ExperimentConfig::require`].
#[allow(non_snake_case)]
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taper: Option<TaperKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    /// Sampling window; defaults to the kernel's window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Starting node count for continuous windows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Pairs `(x, y)` for `eval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<Condition>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub C: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridResolution>,
    /// Region whose count the demo reconstructs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub B: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<WeightedRegion>>,
    /// Where `sample` also writes the binary spectral cache.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn spec(&self) -> Result<KernelSpec> {
        Ok(KernelSpec::from_config(&self.kernel)?)
    }

    /// SHA-256 of the canonical JSON of everything that determines the
    /// results (output locations excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.cache = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn require<T: Clone>(&self, field: &Option<T>, name: &str, kind: ExperimentKind) -> Result<T> {
        match field {
            Some(v) => Ok(v.clone()),
            None => bail!("config for {} needs `{name}`", kind_name(kind)),
        }
    }

    pub fn window(&self, kind: ExperimentKind) -> Result<(f64, f64)> {
        match self.window.or(self.kernel.window) {
            Some([lo, hi]) => Ok((lo, hi)),
            None => bail!("config for {} needs `window`", kind_name(kind)),
        }
    }
}

pub fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Eval => "eval",
        ExperimentKind::Bounds => "bounds",
        ExperimentKind::VarianceScan => "variance-scan",
        ExperimentKind::Sample => "sample",
        ExperimentKind::Demo => "demo",
        ExperimentKind::FredholmCheck => "fredholm-check",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_paths() {
        let mut a: ExperimentConfig = serde_json::from_str(r#"{"kernel": {"family": "sine"}, "seed": 3}"#).unwrap();
        let h = a.hash();
        a.output = Some("elsewhere.csv".into());
        assert_eq!(a.hash(), h);
        a.seed = Some(4);
        assert_ne!(a.hash(), h);
        assert_eq!(h.len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r = serde_json::from_str::<ExperimentConfig>(r#"{"kernel": {"family": "sine"}, "sede": 3}"#);
        assert!(r.is_err());
    }
}
