//! Experiment configuration and the staged pipeline behind the CLI.
//!
//! A run is described by one TOML file. Every field has a default, so an
//! empty file is a valid configuration. Stages communicate only through the
//! caches they leave in the output directory:
//!
//! ```text
//! ingest/    frame.csv, manifest.json
//! features/  features.json, manifest.json
//! train/     seed_<s>/{training_log.csv, checkpoint_*.json, summary.json}
//! backtest/  <strategy>/{rows.json, report.json, table.csv, trades.csv, equity.csv}
//! report/    table.csv, table.json, equity_<strategy>.csv
//! ```

mod pipeline;

pub use pipeline::{
    cmd_backtest, cmd_features, cmd_ingest, cmd_report, cmd_train, cmd_train_seeds, load_feature_cache, load_frame_cache,
    parse_strategy, slug, StageSummary, StrategyChoice,
};

use crate::a2c::{A2cConfig, A2cError};
use crate::baselines::{BaselineError, Strategy};
use crate::env::{EnvConfig, EnvError};
use crate::indicators::{default_specs, IndicatorError, IndicatorSpec};
use crate::market_data::{DataError, DateRange};
use crate::metrics::MetricsError;
use crate::nn::NnError;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing {stage} cache at {path}; run `{stage}` first")]
    MissingCache { stage: &'static str, path: PathBuf },
    #[error("stale {stage} cache at {path}; rerun `{stage}`")]
    StaleCache { stage: &'static str, path: PathBuf },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("checkpoint does not match this experiment: {0}")]
    CheckpointMismatch(String),
    #[error("training aborted at update {update}: non-finite loss; last good checkpoint at {checkpoint}")]
    TrainingAborted { update: u64, checkpoint: PathBuf },
    #[error("nothing to report under {0}")]
    EmptyRun(PathBuf),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Training(#[from] A2cError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl ExperimentError {
    /// Stable short name for the failure, printed by the CLI.
    pub fn class(&self) -> &'static str {
        match self {
            Self::Config(_) => "config_error",
            Self::MissingCache { .. } => "missing_cache",
            Self::StaleCache { .. } => "stale_cache",
            Self::Io { .. } => "io_error",
            Self::Format { .. } => "format_error",
            Self::CheckpointMismatch(_) => "checkpoint_mismatch",
            Self::TrainingAborted { .. } => "training_aborted",
            Self::EmptyRun(_) => "empty_run",
            Self::Data(_) => "data_error",
            Self::Indicator(_) => "indicator_error",
            Self::Env(_) => "env_error",
            Self::Nn(NnError::Checkpoint(_)) => "checkpoint_error",
            Self::Nn(_) => "network_error",
            Self::Training(_) => "training_error",
            Self::Baseline(_) => "strategy_error",
            Self::Metrics(_) => "metrics_error",
        }
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Scale presets. `desk` keeps a full run to minutes on a laptop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Desk,
    Paper,
}

impl Profile {
    pub fn total_timesteps(self) -> u64 {
        match self {
            Self::Desk => 100_000,
            Self::Paper => 1_000_000,
        }
    }

    pub fn max_assets(self) -> Option<usize> {
        match self {
            Self::Desk => Some(4),
            Self::Paper => None,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            other => Err(ExperimentError::Config(format!("unknown profile `{other}` (expected desk or paper)"))),
        }
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid literal date")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    /// Empty selects every ticker in the file.
    pub tickers: Vec<String>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Keep at most this many tickers, in selection order.
    pub max_assets: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("data/prices.csv"),
            tickers: Vec::new(),
            start: date(2000, 1, 3),
            end: date(2022, 12, 30),
            max_assets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: DateRange,
    pub test: DateRange,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: DateRange::new(date(2010, 1, 1), date(2019, 12, 31)),
            test: DateRange::new(date(2020, 1, 1), date(2020, 12, 31)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    /// Seeds for stochastic strategies; one report row each plus their mean.
    pub seeds: Vec<u64>,
    /// Also evaluate the trained agent when its checkpoint exists.
    pub include_agent: bool,
    pub strategies: Vec<Strategy>,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            seeds: (42..=46).collect(),
            include_agent: true,
            strategies: Strategy::standard_set(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profile: Profile,
    /// Standardize features with statistics fitted on the training split.
    pub normalize: bool,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub split: SplitConfig,
    pub env: EnvConfig,
    pub agent: A2cConfig,
    pub backtest: BacktestConfig,
    pub indicators: Vec<IndicatorSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Desk)
    }
}

impl ExperimentConfig {
    pub fn for_profile(profile: Profile) -> Self {
        Self {
            profile,
            data: DataConfig {
                max_assets: profile.max_assets(),
                ..DataConfig::default()
            },
            split: SplitConfig::default(),
            indicators: default_specs(),
            normalize: true,
            env: EnvConfig::default(),
            agent: A2cConfig {
                total_timesteps: profile.total_timesteps(),
                ..A2cConfig::default()
            },
            backtest: BacktestConfig::default(),
            output_dir: PathBuf::from("runs/default"),
        }
    }

    /// Parse TOML. Profile-dependent fields the file leaves unset take the
    /// profile's values; `profile` overrides the file's own choice.
    pub fn from_toml_str(text: &str, profile: Option<Profile>) -> Result<Self> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        let mut cfg: Self = raw
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        let has = |section: &str, key: &str| {
            raw.get(section)
                .and_then(|s| s.as_table())
                .is_some_and(|t| t.contains_key(key))
        };
        if let Some(p) = profile {
            cfg.profile = p;
        }
        if !has("agent", "total_timesteps") {
            cfg.agent.total_timesteps = cfg.profile.total_timesteps();
        }
        if !has("data", "max_assets") {
            cfg.data.max_assets = cfg.profile.max_assets();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, profile: Option<Profile>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_toml_str(&text, profile)?;
        // relative data paths are resolved against the config file
        if cfg.data.path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.data.path = dir.join(&cfg.data.path);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.agent.validate()?;
        if self.data.start > self.data.end {
            return Err(ExperimentError::Config("data.start is after data.end".into()));
        }
        if self.split.train.end >= self.split.test.start {
            return Err(ExperimentError::Config(format!(
                "train range ends {} but test starts {}",
                self.split.train.end, self.split.test.start
            )));
        }
        if self.data.max_assets == Some(0) {
            return Err(ExperimentError::Config("data.max_assets must be >= 1".into()));
        }
        Ok(())
    }

    /// Digest of everything that affects results. The output directory and
    /// the data file's location are excluded; the data itself is covered by
    /// the fingerprint.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.data.path = PathBuf::new();
        sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }

    /// Digest of the settings that shape the ingest cache.
    pub(crate) fn ingest_hash(&self) -> String {
        let mut d = self.data.clone();
        d.path = PathBuf::new();
        sha256_hex(serde_json::to_string(&d).expect("config serializes").as_bytes())
    }

    /// Digest of the settings that shape the feature cache.
    pub(crate) fn features_hash(&self) -> String {
        let text = serde_json::to_string(&self.indicators).expect("config serializes");
        sha256_hex(format!("{}|{}", self.ingest_hash(), text).as_bytes())
    }

    pub fn year_label(&self) -> String {
        let (a, b) = (self.split.test.start, self.split.test.end);
        use chrono::Datelike;
        if a.year() == b.year() {
            a.year().to_string()
        } else {
            format!("{}-{}", a.year(), b.year())
        }
    }

    pub fn train_dir(&self, seed: u64) -> PathBuf {
        self.output_dir.join("train").join(format!("seed_{seed}"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance line prefixed to CSV outputs.
pub fn provenance_line(config_hash: &str, data_fingerprint: &str) -> String {
    format!("# config_hash={config_hash} data_fingerprint={data_fingerprint}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_desk_defaults() {
        let cfg = ExperimentConfig::from_toml_str("", None).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.agent.total_timesteps, 100_000);
        assert_eq!(cfg.data.max_assets, Some(4));
        assert_eq!(cfg.agent.gamma, 0.96);
        assert_eq!(cfg.env.window, 20);
        assert_eq!(cfg.backtest.seeds, vec![42, 43, 44, 45, 46]);
    }

    #[test]
    fn paper_profile_scales_up_unless_overridden() {
        let cfg = ExperimentConfig::from_toml_str("profile = \"paper\"", None).unwrap();
        assert_eq!(cfg.agent.total_timesteps, 1_000_000);
        assert_eq!(cfg.data.max_assets, None);
        let cfg = ExperimentConfig::from_toml_str("[agent]\ntotal_timesteps = 7\n", Some(Profile::Paper)).unwrap();
        assert_eq!(cfg.agent.total_timesteps, 7);
        assert_eq!(cfg.profile, Profile::Paper);
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml().unwrap(), None).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.config_hash(), b.config_hash());
        b.agent.seed = 43;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("[split.train]\nstart = \"2020-01-01\"\nend = \"2021-01-01\"\n", None),
            Err(ExperimentError::Config(_))
        ));
        assert!(ExperimentConfig::from_toml_str("[env]\nfee_rate = -1.0\n", None).is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1", None).is_err());
        let e = ExperimentConfig::from_toml_str("[agent]\ngamma = 0.0\n", None).unwrap_err();
        assert_eq!(e.class(), "training_error");
    }

    #[test]
    fn year_labels() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.year_label(), "2020");
        cfg.split.test = DateRange::new(date(2020, 6, 1), date(2021, 6, 1));
        assert_eq!(cfg.year_label(), "2020-2021");
    }
}
