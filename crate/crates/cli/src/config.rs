//! Flat TOML pipeline configuration and its command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use newsprom::cards::AnchorMode;
use newsprom::comparator::Hyper;
use newsprom::pairs::Criterion;
use newsprom::ranker::ReportFormat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{key} = {value} is outside its valid range ({range})")]
    OutOfRange {
        key: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("unknown value `{value}` for {key}")]
    UnknownValue { key: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub store_dir: PathBuf,
    pub bundles_dir: Option<PathBuf>,
    pub link_rules: Option<PathBuf>,
    pub anchor_mode: String,
    pub viewport_w: u32,
    pub band_height: f64,
    pub text_match_min: f64,
    pub count_ratio_min: f64,
    pub adjacency_gap: f64,
    pub criterion: String,
    pub split_ratio: f64,
    pub learning_rate: f64,
    pub epochs: u32,
    pub l2: f64,
    pub seed: u64,
    pub article_sets: Vec<PathBuf>,
    pub top_k: usize,
    pub report_format: String,
    /// Worker threads for per-snapshot stages; 0 picks the core count.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let hyper = Hyper::default();
        PipelineConfig {
            store_dir: PathBuf::from("store"),
            bundles_dir: None,
            link_rules: None,
            anchor_mode: "qualifying".into(),
            viewport_w: newsprom::layout::DEFAULT_VIEWPORT_W,
            band_height: newsprom::layout::DEFAULT_BAND_HEIGHT,
            text_match_min: newsprom::cards::DEFAULT_TEXT_MATCH_MIN,
            count_ratio_min: newsprom::cards::DEFAULT_COUNT_RATIO_MIN,
            adjacency_gap: newsprom::pairs::DEFAULT_GAP,
            criterion: "size".into(),
            split_ratio: newsprom::pairs::DEFAULT_SPLIT_RATIO,
            learning_rate: hyper.learning_rate,
            epochs: hyper.epochs,
            l2: hyper.l2,
            seed: hyper.seed,
            article_sets: Vec::new(),
            top_k: 10,
            report_format: "csv".into(),
            jobs: 0,
        }
    }
}

/// Command-line overrides; each flag mirrors the config key of the same
/// name with dashes for underscores.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub store_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub bundles_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub link_rules: Option<PathBuf>,
    #[arg(long, global = true, value_name = "qualifying|all_anchors")]
    pub anchor_mode: Option<String>,
    #[arg(long, global = true)]
    pub viewport_w: Option<u32>,
    #[arg(long, global = true)]
    pub band_height: Option<f64>,
    #[arg(long, global = true)]
    pub text_match_min: Option<f64>,
    #[arg(long, global = true)]
    pub count_ratio_min: Option<f64>,
    #[arg(long, global = true)]
    pub adjacency_gap: Option<f64>,
    #[arg(long, global = true, value_name = "size|position|combined")]
    pub criterion: Option<String>,
    #[arg(long, global = true)]
    pub split_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true)]
    pub epochs: Option<u32>,
    #[arg(long, global = true)]
    pub l2: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Repeatable; replaces the configured list.
    #[arg(long = "article-set", global = true, value_name = "FILE")]
    pub article_sets: Vec<PathBuf>,
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    #[arg(long, global = true, value_name = "csv|json")]
    pub report_format: Option<String>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident, $($field:ident),*) => {
        $(if let Some(v) = $ov.$field.clone() { $cfg.$field = v; })*
    };
}

impl PipelineConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| ConfigError::Malformed {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.store_dir);
        cfg.bundles_dir.iter_mut().for_each(resolve);
        cfg.link_rules.iter_mut().for_each(resolve);
        cfg.article_sets.iter_mut().for_each(resolve);
        Ok(cfg)
    }

    /// Loads the file (or defaults), applies flag overrides and validates.
    pub fn resolve(file: Option<&Path>, ov: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match file {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        apply!(
            cfg,
            ov,
            store_dir,
            anchor_mode,
            viewport_w,
            band_height,
            text_match_min,
            count_ratio_min,
            adjacency_gap,
            criterion,
            split_ratio,
            learning_rate,
            epochs,
            l2,
            seed,
            top_k,
            report_format,
            jobs
        );
        if ov.bundles_dir.is_some() {
            cfg.bundles_dir = ov.bundles_dir.clone();
        }
        if ov.link_rules.is_some() {
            cfg.link_rules = ov.link_rules.clone();
        }
        if !ov.article_sets.is_empty() {
            cfg.article_sets = ov.article_sets.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, value: impl ToString, range: &'static str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    key,
                    value: value.to_string(),
                    range,
                })
            }
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        check(self.viewport_w > 0, "viewport_w", self.viewport_w, "> 0")?;
        check(self.band_height > 0.0 && self.band_height.is_finite(), "band_height", self.band_height, "> 0")?;
        check(unit(self.text_match_min), "text_match_min", self.text_match_min, "0 to 1")?;
        check(unit(self.count_ratio_min), "count_ratio_min", self.count_ratio_min, "0 to 1")?;
        check(
            self.adjacency_gap >= 0.0 && self.adjacency_gap.is_finite(),
            "adjacency_gap",
            self.adjacency_gap,
            ">= 0",
        )?;
        check(
            self.split_ratio > 0.0 && self.split_ratio < 1.0,
            "split_ratio",
            self.split_ratio,
            "strictly between 0 and 1",
        )?;
        check(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning_rate",
            self.learning_rate,
            "> 0",
        )?;
        check(self.epochs > 0, "epochs", self.epochs, ">= 1")?;
        check(
            self.l2 >= 0.0 && self.learning_rate * self.l2 < 1.0,
            "l2",
            self.l2,
            ">= 0 and learning_rate * l2 < 1",
        )?;
        check(self.top_k > 0, "top_k", self.top_k, ">= 1")?;
        self.criterion()?;
        self.anchor_mode()?;
        self.report_format()?;
        Ok(())
    }

    pub fn criterion(&self) -> Result<Criterion, ConfigError> {
        self.criterion.parse().map_err(|_| ConfigError::UnknownValue {
            key: "criterion",
            value: self.criterion.clone(),
        })
    }

    pub fn anchor_mode(&self) -> Result<AnchorMode, ConfigError> {
        match self.anchor_mode.as_str() {
            "qualifying" => Ok(AnchorMode::Qualifying),
            "all_anchors" => Ok(AnchorMode::AllAnchors),
            other => Err(ConfigError::UnknownValue {
                key: "anchor_mode",
                value: other.to_string(),
            }),
        }
    }

    pub fn report_format(&self) -> Result<ReportFormat, ConfigError> {
        self.report_format.parse().map_err(|_| ConfigError::UnknownValue {
            key: "report_format",
            value: self.report_format.clone(),
        })
    }

    pub fn hyper(&self) -> Hyper {
        Hyper {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
            seed: self.seed,
        }
    }
}
