//! Merging of the optional TOML configuration file with command-line flags.
//! Flags take precedence over the file, which takes precedence over the
//! metric preset.

use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use netmanifold::{AnalysisConfig, GpaSettings, MetricPreset, QpSettings, ReverseMapVariant};
use serde::Deserialize;

use crate::output::Format;

/// Keys accepted in the configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub metric: Option<String>,
    pub alpha: Option<f64>,
    pub reverse: Option<ReverseMapVariant>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub qp: Option<QpSettings>,
    pub gpa: Option<GpaSettings>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed: Self = toml::from_str(&text).map_err(|e| netmanifold::Error::Parse {
            path: path.to_path_buf(),
            line: line_of(&text, e.span().map_or(0, |s| s.start)),
            message: e.message().to_string(),
        })?;
        Ok(parsed)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Flag values that may override the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub metric: Option<String>,
    pub alpha: Option<f64>,
    pub reverse: Option<ReverseMapVariant>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

#[derive(Debug)]
pub struct Settings {
    pub config: AnalysisConfig,
    pub threads: Option<usize>,
    pub format: Format,
}

pub fn resolve(file: ConfigFile, flags: Overrides) -> Result<Settings> {
    let metric = flags.metric.or(file.metric).unwrap_or_else(|| "sqrt".into());
    let mut config = MetricPreset::parse(&metric)?.config();
    if let Some(qp) = file.qp {
        config.qp = qp;
    }
    if let Some(gpa) = file.gpa {
        config.gpa = gpa;
    }
    let reverse = flags.reverse.or(file.reverse);
    if let Some(alpha) = flags.alpha.or(file.alpha) {
        config.alpha = alpha;
        if reverse.is_none() && config.reverse == ReverseMapVariant::OddIntegerPower && !odd_reciprocal(alpha) {
            info!("alpha = {alpha} has no odd-integer reciprocal; using the nearest-PSD reverse map");
            config.reverse = ReverseMapVariant::NearestPsdThenPower;
        }
    }
    if let Some(reverse) = reverse {
        config.reverse = reverse;
    }
    if let Some(seed) = flags.seed.or(file.seed) {
        config.seed = seed;
    }
    config.validate()?;
    let threads = flags.threads.or(file.threads);
    if threads == Some(0) {
        return Err(netmanifold::Error::InvalidParameter("--threads must be at least 1".into()).into());
    }
    Ok(Settings {
        config,
        threads,
        format: flags.format.or(file.format).unwrap_or_default(),
    })
}

fn odd_reciprocal(alpha: f64) -> bool {
    let k = 1.0 / alpha;
    let r = k.round();
    (k - r).abs() <= 1e-9 * r.max(1.0) && r >= 1.0 && r % 2.0 == 1.0
}
