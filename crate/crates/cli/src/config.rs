use std::path::{Path, PathBuf};

use affect_core::evec::EvecConfig;
use anyhow::{Context, Result};
use serde::Deserialize;

/// Pipeline settings read from `--config`. Relative paths are resolved
/// against the config file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub features: FeatureSettings,
    pub regression: RegressionSettings,
    /// `auto`, `naive`, `scope` or `poly`.
    pub mapping: String,
    pub multilabel: MultiLabelSettings,
    pub evec: EvecConfig,
    pub seed: u64,
    pub merge_train_dev: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            paths: Paths::default(),
            features: FeatureSettings::default(),
            regression: RegressionSettings::default(),
            mapping: "auto".into(),
            multilabel: MultiLabelSettings::default(),
            evec: EvecConfig::default(),
            seed: 0,
            merge_train_dev: true,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub sentence_features: Option<PathBuf>,
    pub evec_vectors: Option<PathBuf>,
    pub emoji_lexicon: Option<PathBuf>,
    pub emoticon_lexicon: Option<PathBuf>,
    pub word_freq: Option<PathBuf>,
    pub model_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    pub blocks: Vec<String>,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            blocks: vec!["sentence".into(), "evec".into(), "tweet".into()],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSettings {
    /// Grid file; the built-in grid is used when absent.
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiLabelSettings {
    pub lambda: f64,
    pub lr: f64,
    pub iters: usize,
    pub tune_thresholds: bool,
    pub chains: usize,
    pub chain_l2: f64,
    pub chain_lr: f64,
    pub chain_iters: usize,
    pub threshold: f64,
    /// RLR and chain weights for the blended prediction.
    pub weights: [f64; 2],
}

impl Default for MultiLabelSettings {
    fn default() -> Self {
        MultiLabelSettings {
            lambda: -0.0001,
            lr: 1.0,
            iters: 1000,
            tune_thresholds: false,
            chains: 10,
            chain_l2: 1e-3,
            chain_lr: 1.0,
            chain_iters: 2000,
            threshold: 0.5,
            weights: [0.5, 0.5],
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(affect_core::Error::from)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p {
                if inner.is_relative() {
                    *inner = base.join(&*inner);
                }
            }
        };
        let paths = &mut self.paths;
        for p in [
            &mut paths.sentence_features,
            &mut paths.evec_vectors,
            &mut paths.emoji_lexicon,
            &mut paths.emoticon_lexicon,
            &mut paths.word_freq,
            &mut paths.model_dir,
            &mut self.regression.grid,
        ] {
            fix(p);
        }
    }
}
