//! Run configuration (`--config`) and synthesis manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use stance_aie::{LearnParams, RolloutOptions};
use stance_core::kr::{parse_experience, Declarations, Experience, ParseConfig};
use stance_core::sme::{ScoreWeights, SmeConfig};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub sme: SmeSection,
    pub synthesis: SynthesisSection,
    pub learn: LearnSection,
    pub observe: ObserveSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmeSection {
    pub merge_cap: usize,
    pub weights: ScoreWeights,
}

impl Default for SmeSection {
    fn default() -> Self {
        let d = SmeConfig::default();
        SmeSection {
            merge_cap: d.merge_cap,
            weights: d.weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSection {
    pub max_passes: usize,
}

impl Default for SynthesisSection {
    fn default() -> Self {
        SynthesisSection { max_passes: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnSection {
    pub episodes: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Greedy goal rate below which training is reported as not converged.
    pub success_threshold: f64,
    /// Episodes used to measure that rate.
    pub check_episodes: usize,
}

impl Default for LearnSection {
    fn default() -> Self {
        let p = LearnParams::default();
        LearnSection {
            episodes: p.episodes,
            epsilon: p.epsilon,
            alpha: p.alpha,
            gamma: p.gamma,
            seed: 7,
            success_threshold: 0.9,
            check_episodes: 100,
        }
    }
}

impl LearnSection {
    pub fn params(&self) -> LearnParams {
        LearnParams {
            episodes: self.episodes,
            epsilon: self.epsilon,
            alpha: self.alpha,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserveSection {
    pub rollouts: usize,
    pub first_seed: u64,
    pub epsilon: f64,
    pub step_cap: Option<usize>,
    /// Clustering threshold for representative chronologies.
    pub threshold: f64,
}

impl Default for ObserveSection {
    fn default() -> Self {
        ObserveSection {
            rollouts: 10,
            first_seed: 20,
            epsilon: RolloutOptions::default().epsilon,
            step_cap: None,
            threshold: 0.3,
        }
    }
}

impl ObserveSection {
    pub fn rollout_options(&self) -> RolloutOptions {
        RolloutOptions {
            epsilon: self.epsilon,
            step_cap: self.step_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateSection {
    /// Unseen traces per behavior.
    pub traces: usize,
    pub first_seed: u64,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            traces: 2,
            first_seed: 1000,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let unit = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                bail!("{name} must lie in [0, 1], got {v}");
            }
            Ok(())
        };
        unit("learn.epsilon", self.learn.epsilon)?;
        unit("learn.alpha", self.learn.alpha)?;
        unit("learn.gamma", self.learn.gamma)?;
        unit("learn.success_threshold", self.learn.success_threshold)?;
        unit("observe.epsilon", self.observe.epsilon)?;
        unit("observe.threshold", self.observe.threshold)?;
        if self.synthesis.max_passes == 0 {
            bail!("synthesis.max_passes must be positive");
        }
        Ok(())
    }

    pub fn sme(&self) -> SmeConfig {
        SmeConfig {
            weights: self.sme.weights,
            merge_cap: self.sme.merge_cap,
        }
    }
}

/// A synthesis run: target, base library and the knobs that shape it.
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub target: PathBuf,
    pub bases: Vec<PathBuf>,
    pub vocabulary: Option<PathBuf>,
    #[serde(default = "yes")]
    pub heuristic: bool,
    pub max_passes: Option<usize>,
    pub merge_cap: Option<usize>,
    pub weights: Option<ScoreWeights>,
}

fn yes() -> bool {
    true
}

/// Everything a manifest names, parsed.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub target: Experience,
    pub bases: Vec<Experience>,
    pub events: Declarations,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<LoadedManifest> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        let manifest: Manifest = toml::from_str(&text)
            .with_context(|| format!("invalid manifest {}", path.display()))?;
        if manifest.bases.is_empty() {
            bail!("manifest {} lists no bases", path.display());
        }
        if manifest.max_passes == Some(0) {
            bail!("max_passes must be positive");
        }
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| dir.join(p);
        let all: Vec<PathBuf> = std::iter::once(&manifest.target)
            .chain(&manifest.bases)
            .chain(&manifest.vocabulary)
            .map(|p| resolve(p))
            .collect();
        if let Some(missing) = all.iter().find(|p| !p.is_file()) {
            bail!("{} does not exist", missing.display());
        }
        let parse = match &manifest.vocabulary {
            Some(v) => parse_config(Some(&resolve(v)))?,
            None => ParseConfig::default(),
        };
        let target = load_experience(&resolve(&manifest.target), &parse)?;
        let bases = manifest
            .bases
            .iter()
            .map(|b| load_experience(&resolve(b), &parse))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedManifest {
            events: parse.vocabulary.clone(),
            manifest,
            target,
            bases,
        })
    }
}

/// Parser settings with the declarations of `vocabulary`, if any.
pub fn parse_config(vocabulary: Option<&Path>) -> Result<ParseConfig> {
    match vocabulary {
        None => Ok(ParseConfig::default()),
        Some(p) => {
            let vocab = load_experience(p, &ParseConfig::default())?;
            Ok(ParseConfig::with_vocabulary(vocab.declarations().clone()))
        }
    }
}

/// The experience id is the file stem.
pub fn experience_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experience".to_string())
}

pub fn load_experience(path: &Path, config: &ParseConfig) -> Result<Experience> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_experience(&experience_id(path), &text, config)
        .with_context(|| path.display().to_string())
}
