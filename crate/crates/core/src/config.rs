//! Analysis configuration shared by every statistical routine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Geometry, ReverseMapVariant};
use crate::projection::QpSettings;

/// Named metric presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricPreset {
    /// `d_1`, Euclidean distance between the Laplacians themselves.
    Euclidean,
    /// `d_{1/2}`, square-root Euclidean.
    Sqrt,
    /// `d_{1/2,S}`, square-root Procrustes.
    Procrustes,
}

impl MetricPreset {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Self::Euclidean),
            "sqrt" => Ok(Self::Sqrt),
            "procrustes" => Ok(Self::Procrustes),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric {other:?}; expected euclidean, sqrt or procrustes"
            ))),
        }
    }

    pub fn config(self) -> AnalysisConfig {
        match self {
            Self::Euclidean => AnalysisConfig {
                geometry: Geometry::Euclidean,
                alpha: 1.0,
                reverse: ReverseMapVariant::OddIntegerPower,
                ..AnalysisConfig::base()
            },
            Self::Sqrt => AnalysisConfig {
                geometry: Geometry::Euclidean,
                alpha: 0.5,
                reverse: ReverseMapVariant::NearestPsdThenPower,
                ..AnalysisConfig::base()
            },
            Self::Procrustes => AnalysisConfig {
                geometry: Geometry::Procrustes,
                alpha: 0.5,
                reverse: ReverseMapVariant::RightGram,
                ..AnalysisConfig::base()
            },
        }
    }
}

/// Stopping rule for the generalised Procrustes mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpaSettings {
    pub max_iterations: usize,
    /// Procrustes distance moved by the mean in one iteration below which
    /// the iteration stops.
    pub tolerance: f64,
}

impl Default for GpaSettings {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub geometry: Geometry,
    pub alpha: f64,
    pub reverse: ReverseMapVariant,
    pub qp: QpSettings,
    pub gpa: GpaSettings,
    pub seed: u64,
}

impl AnalysisConfig {
    fn base() -> Self {
        Self {
            geometry: Geometry::Euclidean,
            alpha: 0.5,
            reverse: ReverseMapVariant::NearestPsdThenPower,
            qp: QpSettings::default(),
            gpa: GpaSettings::default(),
            seed: 0,
        }
    }

    pub fn euclidean() -> Self {
        MetricPreset::Euclidean.config()
    }

    pub fn sqrt() -> Self {
        MetricPreset::Sqrt.config()
    }

    pub fn procrustes() -> Self {
        MetricPreset::Procrustes.config()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.reverse == ReverseMapVariant::OddIntegerPower {
            let k = 1.0 / self.alpha;
            let r = k.round();
            if (k - r).abs() > 1e-9 * r.max(1.0) || r < 1.0 || r % 2.0 != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "odd-integer reverse map needs 1/alpha to be an odd integer, got alpha = {}",
                    self.alpha
                )));
            }
        }
        if self.gpa.max_iterations == 0 || !(self.gpa.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "GPA needs a positive iteration cap and tolerance".into(),
            ));
        }
        self.qp.validate()
    }

    /// Short description such as `procrustes(alpha=0.5)`.
    pub fn describe(&self) -> String {
        let geometry = match self.geometry {
            Geometry::Euclidean => "euclidean",
            Geometry::Procrustes => "procrustes",
        };
        format!("{geometry}(alpha={})", self.alpha)
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self::sqrt()
    }
}
