use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use coalition_core::dataset::GeneratorSpec;
use coalition_core::features::{default_filter_map, Catalog, ExtractionConfig, FilterMap};
use coalition_core::pipeline::{SelectionParams, Selector};
use coalition_core::wavelet::{BoundaryMode, Channel, WaveletFilter, DEFAULT_DEPTH};

/// Synthetic data source: a generator spec plus the seed it is drawn with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    #[serde(flatten)]
    pub spec: GeneratorSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_selectors() -> Vec<Selector> {
    Selector::ALL.to_vec()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a run needs. Serialized verbatim into the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset directory holding `manifest.json`.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    /// Used when `dataset` is absent, and by `synth`.
    #[serde(default)]
    pub synthetic: Option<SyntheticSource>,
    /// Channel name to wavelet name; unlisted channels use their default.
    #[serde(default)]
    pub filter_map: BTreeMap<Channel, String>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub catalog: Catalog,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default = "default_selectors")]
    pub selectors: Vec<Selector>,
    #[serde(default)]
    pub params: SelectionParams,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.selectors.is_empty() {
            bail!("no selectors configured");
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.selectors {
            if !seen.insert(s) {
                bail!("selector {s} listed twice");
            }
        }
        if self.params.top_k == 0 {
            bail!("top_k must be at least 1");
        }
        Ok(())
    }

    pub fn extraction(&self, channels: &[Channel]) -> Result<ExtractionConfig> {
        let mut filters: FilterMap = default_filter_map(channels)?;
        for (channel, name) in &self.filter_map {
            if !channels.contains(channel) {
                bail!("filter_map names channel {channel}, which the dataset does not have");
            }
            filters.insert(channel.clone(), WaveletFilter::by_name(name)?);
        }
        Ok(ExtractionConfig {
            filters,
            depth: self.depth,
            catalog: self.catalog,
            boundary: self.boundary,
        })
    }
}
