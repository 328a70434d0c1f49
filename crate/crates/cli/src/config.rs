//! Pipeline configuration from command-line flags and an optional TOML file.
//! Flags win over file values; file values win over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ocdc_core::labels::DEFAULT_STRIDE;
use ocdc_core::{Fraction, PasteStrategy, Position, Scaling};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fixed,
    Random,
}

/// One layer of settings. Every field is optional so that flag and file layers
/// can be merged.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// TOML file with the same keys as the flags (underscores instead of dashes).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub source_images: Option<PathBuf>,
    #[arg(long)]
    pub source_ann: Option<PathBuf>,
    #[arg(long)]
    pub target_images: Option<PathBuf>,
    #[arg(long)]
    pub target_ann: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub position: Option<Mode>,
    #[arg(long, value_enum)]
    pub scaling: Option<Mode>,
    #[arg(long)]
    pub scale_min: Option<f64>,
    #[arg(long)]
    pub scale_max: Option<f64>,
    /// Overlap threshold: the largest fraction of an existing box a paste may hide.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    #[arg(long)]
    pub min_box_side: Option<u32>,
    /// Per-axis shift radius for fixed positions.
    #[arg(long)]
    pub jitter: Option<u32>,

    #[arg(long)]
    pub stride: Option<u32>,
    /// Fraction of the target dataset to keep, e.g. `1/16`.
    #[arg(long)]
    pub target_fraction: Option<String>,
    #[arg(long)]
    pub epoch_length: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resize to training resolution (height 600, width at most 1000).
    #[arg(long)]
    pub resize: Option<bool>,
    #[arg(long)]
    pub workers: Option<usize>,
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        ConfigLayer { config: $hi.config.clone(), $($f: $hi.$f.clone().or_else(|| $lo.$f.clone()),)* }
    };
}

impl ConfigLayer {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Values from `self`, falling back to `lower`.
    pub fn over(&self, lower: &ConfigLayer) -> ConfigLayer {
        merge_fields!(
            self,
            lower,
            source_images,
            source_ann,
            target_images,
            target_ann,
            out_dir,
            position,
            scaling,
            scale_min,
            scale_max,
            gamma,
            max_attempts,
            min_box_side,
            jitter,
            stride,
            target_fraction,
            epoch_length,
            seed,
            resize,
            workers
        )
    }

    /// Merges in the `--config` file, if any, and resolves defaults.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let merged = match &self.config {
            Some(path) => self.over(&ConfigLayer::read(path)?),
            None => self.clone(),
        };
        merged.into_config()
    }

    fn into_config(self) -> Result<PipelineConfig> {
        fn required<T>(v: Option<T>, name: &str) -> Result<T> {
            v.ok_or_else(|| Error::Config(format!("missing required setting {name}")))
        }
        let defaults = PasteStrategy::default();
        let mode = |m: Option<Mode>| m.unwrap_or(Mode::Fixed);
        let strategy = PasteStrategy {
            position: match mode(self.position) {
                Mode::Fixed => Position::Fixed,
                Mode::Random => Position::Random,
            },
            scaling: match mode(self.scaling) {
                Mode::Fixed => Scaling::Fixed,
                Mode::Random => Scaling::Random,
            },
            scale_min: self.scale_min.unwrap_or(defaults.scale_min),
            scale_max: self.scale_max.unwrap_or(defaults.scale_max),
            gamma: self.gamma.unwrap_or(defaults.gamma),
            max_attempts: self.max_attempts.unwrap_or(defaults.max_attempts),
            min_box_side: self.min_box_side.unwrap_or(defaults.min_box_side),
            jitter_radius: self.jitter.unwrap_or(defaults.jitter_radius),
        };
        let config = PipelineConfig {
            source_images: required(self.source_images, "source_images")?,
            source_ann: required(self.source_ann, "source_ann")?,
            target_images: required(self.target_images, "target_images")?,
            target_ann: required(self.target_ann, "target_ann")?,
            out_dir: required(self.out_dir, "out_dir")?,
            strategy,
            stride: self.stride.unwrap_or(DEFAULT_STRIDE),
            target_fraction: match self.target_fraction {
                Some(s) => parse_fraction(&s)?,
                None => Fraction::FULL,
            },
            epoch_length: required(self.epoch_length, "epoch_length")?,
            seed: self.seed.unwrap_or(0),
            resize: self.resize.unwrap_or(true),
            workers: self.workers.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses `1`, `full`, `1/16` or `3/8`.
pub fn parse_fraction(s: &str) -> Result<Fraction> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid fraction {s:?}"));
    if s.eq_ignore_ascii_case("full") || s == "1" {
        return Ok(Fraction::FULL);
    }
    let (num, den) = s.split_once('/').ok_or_else(bad)?;
    let num = num.trim().parse().map_err(|_| bad())?;
    let den = den.trim().parse().map_err(|_| bad())?;
    Fraction::new(num, den).map_err(|e| Error::Config(e.to_string()))
}

/// Everything that determines one augmentation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source_images: PathBuf,
    pub source_ann: PathBuf,
    pub target_images: PathBuf,
    pub target_ann: PathBuf,
    pub out_dir: PathBuf,
    pub strategy: PasteStrategy,
    pub stride: u32,
    pub target_fraction: Fraction,
    pub epoch_length: usize,
    pub seed: u64,
    pub resize: bool,
    pub workers: usize,
}

impl PipelineConfig {
    /// A config with defaults for everything but the paths and epoch length.
    pub fn new(
        source_images: impl Into<PathBuf>,
        source_ann: impl Into<PathBuf>,
        target_images: impl Into<PathBuf>,
        target_ann: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
        epoch_length: usize,
    ) -> Self {
        PipelineConfig {
            source_images: source_images.into(),
            source_ann: source_ann.into(),
            target_images: target_images.into(),
            target_ann: target_ann.into(),
            out_dir: out_dir.into(),
            strategy: PasteStrategy::default(),
            stride: DEFAULT_STRIDE,
            target_fraction: Fraction::FULL,
            epoch_length,
            seed: 0,
            resize: true,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.strategy.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        for (name, dir) in [
            ("source_images", &self.source_images),
            ("target_images", &self.target_images),
        ] {
            if !dir.is_dir() {
                return Err(Error::Config(format!("{name} {} is not a directory", dir.display())));
            }
        }
        for (name, file) in [("source_ann", &self.source_ann), ("target_ann", &self.target_ann)] {
            if !file.is_file() {
                return Err(Error::Config(format!("{name} {} is not a file", file.display())));
            }
        }
        Ok(())
    }

    /// The settings that influence artifact bytes. Output directory and worker
    /// count are left out so that they cannot change the manifest.
    pub fn echo(&self) -> ConfigEcho {
        let s = &self.strategy;
        ConfigEcho {
            source_images: self.source_images.display().to_string(),
            source_ann: self.source_ann.display().to_string(),
            target_images: self.target_images.display().to_string(),
            target_ann: self.target_ann.display().to_string(),
            position: if s.position == Position::Fixed {
                Mode::Fixed
            } else {
                Mode::Random
            },
            scaling: if s.scaling == Scaling::Fixed {
                Mode::Fixed
            } else {
                Mode::Random
            },
            scale_min: s.scale_min,
            scale_max: s.scale_max,
            gamma: s.gamma,
            max_attempts: s.max_attempts,
            min_box_side: s.min_box_side,
            jitter: s.jitter_radius,
            stride: self.stride,
            target_fraction: self.target_fraction.to_string(),
            epoch_length: self.epoch_length,
            seed: self.seed,
            resize: self.resize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub source_images: String,
    pub source_ann: String,
    pub target_images: String,
    pub target_ann: String,
    pub position: Mode,
    pub scaling: Mode,
    pub scale_min: f64,
    pub scale_max: f64,
    pub gamma: f64,
    pub max_attempts: u32,
    pub min_box_side: u32,
    pub jitter: u32,
    pub stride: u32,
    pub target_fraction: String,
    pub epoch_length: usize,
    pub seed: u64,
    pub resize: bool,
}
