//! Pipeline configuration: TOML file, then `TERMMINER_` environment
//! overrides, then command-line flags.
//!
//! Environment variables name a key path with a double underscore between
//! table and key, e.g. `TERMMINER_MINING__GAP_SCORE=-1` sets
//! `mining.gap_score`. Values are parsed as TOML literals and fall back to
//! plain strings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alignment::{MiningParams, ScoringScheme, TracebackMode, DEFAULT_MIN_LENGTH};
use crate::error::{Error, Result};
use crate::evaluation::{DEFAULT_TOP_BIGRAMS, DEFAULT_TOP_TRIGRAMS, DEFAULT_TOP_UNIGRAMS};
use crate::inventory::hac::DEFAULT_SAMPLE_CAP;
use crate::inventory::kmeans::{DEFAULT_K, DEFAULT_MAX_ITERS};
use crate::leader::{ReportOrder, ScanOrder, DEFAULT_MAX_ROUNDS};
use crate::metrics::MiningConfig;
use crate::segmentation::DEFAULT_WINDOW_MS;
use crate::synth::{FeatureSynthConfig, SynthConfig};

pub const ENV_PREFIX: &str = "TERMMINER_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub boundaries_dir: Option<PathBuf>,
    /// Pre-computed pseudo transcriptions; used when no manifest is given.
    pub transcriptions: Option<PathBuf>,
    /// Synthetic ground truth.
    pub truth: Option<PathBuf>,
    /// Reference word transcript (plain text).
    pub transcript: Option<PathBuf>,
    /// JSON object mapping cluster id to a word or phrase.
    pub cluster_labels: Option<PathBuf>,
    /// One stopword per line; replaces the built-in list.
    pub stopwords: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            manifest: None,
            boundaries_dir: None,
            transcriptions: None,
            truth: None,
            transcript: None,
            cluster_labels: None,
            stopwords: None,
            output_dir: PathBuf::from("termminer-out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationSettings {
    pub window_ms: f64,
}

impl Default for SegmentationSettings {
    fn default() -> Self {
        Self { window_ms: DEFAULT_WINDOW_MS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookSettings {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub hac_sample_cap: usize,
    /// Largest cluster count ranked in the suggestions file.
    pub suggest_max_k: usize,
}

impl Default for CodebookSettings {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
            hac_sample_cap: DEFAULT_SAMPLE_CAP,
            suggest_max_k: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSettings {
    pub match_score: f64,
    pub mismatch_score: f64,
    pub gap_score: f64,
    pub traceback: TracebackMode,
    pub min_length: usize,
    /// Worker threads for pair mining. Never affects results.
    #[serde(skip_serializing)]
    pub jobs: Option<usize>,
}

impl Default for MiningSettings {
    fn default() -> Self {
        let s = ScoringScheme::default();
        Self {
            match_score: s.match_score,
            mismatch_score: s.mismatch_score,
            gap_score: s.gap_score,
            traceback: TracebackMode::default(),
            min_length: DEFAULT_MIN_LENGTH,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringSettings {
    pub radius_t: f64,
    pub sep_a: f64,
    pub norm_b: f64,
    pub max_rounds: usize,
    pub scan_order: ScanOrder,
    pub report_top_n: usize,
    pub report_order: ReportOrder,
}

impl Default for ClusteringSettings {
    fn default() -> Self {
        let m = MiningConfig::default();
        Self {
            radius_t: m.radius_t,
            sep_a: m.sep_a,
            norm_b: m.norm_b,
            max_rounds: DEFAULT_MAX_ROUNDS,
            scan_order: m.scan_order,
            report_top_n: 10,
            report_order: ReportOrder::CentroidLength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSettings {
    pub top_unigrams: usize,
    pub top_bigrams: usize,
    pub top_trigrams: usize,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self {
            top_unigrams: DEFAULT_TOP_UNIGRAMS,
            top_bigrams: DEFAULT_TOP_BIGRAMS,
            top_trigrams: DEFAULT_TOP_TRIGRAMS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub corpus: SynthConfig,
    /// Also render frame features and boundary hypotheses.
    pub render_features: bool,
    pub features: FeatureSynthConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub segmentation: SegmentationSettings,
    pub codebook: CodebookSettings,
    pub mining: MiningSettings,
    pub clustering: ClusteringSettings,
    pub evaluation: EvaluationSettings,
    pub synth: SynthSettings,
}

impl PipelineConfig {
    /// Defaults, overlaid with `file` (if any) and then the environment.
    pub fn load(file: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut tree = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>().map_err(|e| Error::invalid_param(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        apply_env(&mut tree, env)?;
        let cfg: PipelineConfig = toml::Value::Table(tree)
            .try_into()
            .map_err(|e: toml::de::Error| Error::invalid_param(format!("configuration: {e}")))?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid_param(format!("configuration: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn scoring(&self) -> ScoringScheme {
        ScoringScheme {
            match_score: self.mining.match_score,
            mismatch_score: self.mining.mismatch_score,
            gap_score: self.mining.gap_score,
        }
    }

    pub fn mining_params(&self) -> MiningParams {
        MiningParams {
            scoring: self.scoring(),
            traceback: self.mining.traceback,
            min_length: self.mining.min_length,
            jobs: self.mining.jobs,
        }
    }

    pub fn mining_config(&self) -> MiningConfig {
        MiningConfig {
            radius_t: self.clustering.radius_t,
            sep_a: self.clustering.sep_a,
            norm_b: self.clustering.norm_b,
            min_length: self.mining.min_length,
            scan_order: self.clustering.scan_order,
        }
    }

    /// Range checks that do not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        if !(self.segmentation.window_ms > 0.0 && self.segmentation.window_ms.is_finite()) {
            return Err(Error::invalid_param("segmentation.window_ms must be positive"));
        }
        if self.codebook.k < 2 {
            return Err(Error::invalid_param("codebook.k must be at least 2"));
        }
        if self.codebook.max_iters == 0 || self.codebook.hac_sample_cap < 2 {
            return Err(Error::invalid_param("codebook.max_iters must be positive and hac_sample_cap at least 2"));
        }
        self.scoring().validate()?;
        if self.mining.min_length == 0 {
            return Err(Error::invalid_param("mining.min_length must be positive"));
        }
        if self.mining.jobs == Some(0) {
            return Err(Error::invalid_param("mining.jobs must be at least 1"));
        }
        self.mining_config().validate()?;
        if self.clustering.max_rounds == 0 {
            return Err(Error::invalid_param("clustering.max_rounds must be positive"));
        }
        Ok(())
    }
}

fn apply_env(tree: &mut toml::Table, env: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    let mut vars: Vec<(String, String)> =
        env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX) && k.contains("__")).collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..].split("__").map(str::to_lowercase).collect();
        if path.iter().any(String::is_empty) {
            return Err(Error::invalid_param(format!("malformed override variable {key}")));
        }
        let value = parse_literal(&raw);
        let mut table = &mut *tree;
        for seg in &path[..path.len() - 1] {
            let slot = table.entry(seg.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table =
                slot.as_table_mut().ok_or_else(|| Error::invalid_param(format!("{key}: `{seg}` is not a table")))?;
        }
        table.insert(path[path.len() - 1].clone(), value);
    }
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}
