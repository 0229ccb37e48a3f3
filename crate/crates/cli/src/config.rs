//! Run configuration: a versioned TOML document plus `MTLUE_` environment
//! overrides.

use std::path::{Path, PathBuf};

use mtlue::analysis::{CrossgroupConfig, MiTarget, DEFAULT_TOP_K};
use mtlue::classify::ClassifyConfig;
use mtlue::cluster::DEFAULT_KS;
use mtlue::corpus::{DatasetKind, SyntheticConfig};
use mtlue::sgns::TrainConfig;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

pub const CONFIG_VERSION: i64 = 1;
pub const ENV_PREFIX: &str = "MTLUE_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: i64,
    /// Review file read by every subcommand except `ingest` and `synth`.
    pub reviews: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub dataset_kind: DatasetKind,
    pub max_vocab: usize,
    pub n_user_vocab: usize,
    pub train: TrainConfig,
    pub cluster: ClusterSettings,
    pub classify: ClassifyConfig,
    pub analysis: AnalysisSettings,
    pub synth: SyntheticConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            reviews: None,
            out_dir: None,
            dataset_kind: DatasetKind::Synthetic,
            max_vocab: 20_000,
            n_user_vocab: 100,
            train: TrainConfig::default(),
            cluster: ClusterSettings::default(),
            classify: ClassifyConfig::default(),
            analysis: AnalysisSettings::default(),
            synth: SyntheticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSettings {
    pub ks: Vec<usize>,
    pub seed: u64,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        ClusterSettings {
            ks: DEFAULT_KS.to_vec(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub top_k: usize,
    pub mi_target: MiTarget,
    pub crossgroup: CrossgroupConfig,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            top_k: DEFAULT_TOP_K,
            mi_target: MiTarget::Sentiment,
            crossgroup: CrossgroupConfig::default(),
        }
    }
}

/// Reads `path` (if any), applies the overrides and validates the result.
pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))?;
            let table: Table = text
                .parse()
                .map_err(|e: toml::de::Error| CliError::new("config", format!("{}: {}", p.display(), e.message())))?;
            match table.get("version") {
                Some(Value::Integer(CONFIG_VERSION)) => {}
                Some(v) => return Err(CliError::new("config", format!("unsupported config version {v}"))),
                None => return Err(CliError::new("config", format!("{}: missing \"version\"", p.display()))),
            }
            table
        }
        None => Table::new(),
    };
    apply_env(&mut table, env)?;
    let config: RunConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::new("config", e.message().to_string()))?;
    if config.version != CONFIG_VERSION {
        return Err(CliError::new("config", format!("unsupported config version {}", config.version)));
    }
    config.train.validate().map_err(CliError::from)?;
    Ok(config)
}

/// `MTLUE_TRAIN__EPOCHS=3` sets `train.epochs`. Values are read as TOML
/// scalars or arrays, falling back to a plain string.
pub fn apply_env(table: &mut Table, env: impl IntoIterator<Item = (String, String)>) -> Result<(), CliError> {
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..].split("__").map(str::to_lowercase).collect();
        if path.iter().any(String::is_empty) {
            return Err(CliError::new("config", format!("malformed override {key}")));
        }
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or(Value::String(raw));
        let (last, parents) = path.split_last().expect("non-empty path");
        let mut node = &mut *table;
        for part in parents {
            let entry = node.entry(part.clone()).or_insert_with(|| Value::Table(Table::new()));
            node = match entry {
                Value::Table(t) => t,
                _ => return Err(CliError::new("config", format!("override {key}: {part} is not a section"))),
            };
        }
        node.insert(last.clone(), value);
    }
    Ok(())
}
