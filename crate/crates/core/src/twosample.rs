//! Two-sample tests for equality of mean networks.
//!
//! The statistic is `T = d(η̂_A, η̂_B)²` between the group means in the
//! embedding space. The asymptotic test scales it by `n_A n_B / (n_A + n_B)`
//! and compares with a weighted chi-square mixture whose weights are pooled
//! per-coordinate variances. The permutation test relabels the pooled
//! sample `r` times.

use log::warn;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::AnalysisConfig;
use crate::error::{ensure_same_dim, Error, Result};
use crate::means::embedding_mean;
use crate::metrics::{embedded_distance, EmbeddedPoint, Geometry};
use crate::sample::NetworkSample;
use crate::vectorize::{vech_star, HelmertSubMatrix};

/// Monte Carlo draws for the mixture p-value unless configured otherwise.
pub const DEFAULT_DRAWS: usize = 100_000;

/// Above this many mixture terms the p-value uses a moment-matched scaled
/// chi-square instead of Monte Carlo, whose cost grows with terms × draws.
pub const MAX_MONTE_CARLO_TERMS: usize = 20_000;

const CHUNK: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Asymptotic,
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaSummary {
    pub count: usize,
    pub sum: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSampleResult {
    /// `T = d(η̂_A, η̂_B)²`.
    pub statistic: f64,
    /// `n_A n_B / (n_A + n_B) · T` for the asymptotic test.
    pub scaled_statistic: Option<f64>,
    pub method: TestMethod,
    pub p_value: f64,
    pub geometry: Geometry,
    pub alpha: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub delta: Option<DeltaSummary>,
    pub draws: Option<usize>,
    pub r: Option<usize>,
    pub seed: Option<u64>,
    pub permuted: Option<Vec<f64>>,
}

fn check_groups(a: &NetworkSample, b: &NetworkSample) -> Result<()> {
    ensure_same_dim(a.dim(), b.dim())
}

fn statistic_from_points(a: &[EmbeddedPoint], b: &[EmbeddedPoint], config: &AnalysisConfig) -> Result<f64> {
    let mean_a = embedding_mean(a, config)?;
    let mean_b = embedding_mean(b, config)?;
    Ok(embedded_distance(mean_a.matrix(), mean_b.matrix(), config.geometry)?.powi(2))
}

/// `T = d(η̂_A, η̂_B)²` under the configured metric.
pub fn two_sample_statistic(a: &NetworkSample, b: &NetworkSample, config: &AnalysisConfig) -> Result<f64> {
    config.validate()?;
    check_groups(a, b)?;
    statistic_from_points(&a.embed(config.alpha)?, &b.embed(config.alpha)?, config)
}

/// The law of `Σ δ_i Z_i²` for independent standard normal `Z_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChiSquare {
    weights: Vec<f64>,
}

impl WeightedChiSquare {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "mixture weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `draws` seeded samples. Chunk `c` of the draws uses stream `c` of the
    /// generator, so the output does not depend on the thread count.
    pub fn sample(&self, draws: usize, seed: u64) -> Vec<f64> {
        let chunks = draws.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let len = CHUNK.min(draws - c * CHUNK);
                (0..len)
                    .map(|_| {
                        self.weights
                            .iter()
                            .map(|w| {
                                let z: f64 = StandardNormal.sample(&mut rng);
                                w * z * z
                            })
                            .sum::<f64>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Upper tail `P(X >= x)`: Monte Carlo with `draws` samples, or the
    /// moment-matched scaled chi-square when there are more than
    /// [`MAX_MONTE_CARLO_TERMS`] weights.
    pub fn sf(&self, x: f64, draws: usize, seed: u64) -> Result<f64> {
        if draws == 0 {
            return Err(Error::InvalidParameter("at least one draw is needed".into()));
        }
        let mean = self.mean();
        if mean == 0.0 {
            return Ok(if x > 0.0 { 0.0 } else { 1.0 });
        }
        if self.weights.len() > MAX_MONTE_CARLO_TERMS {
            warn!(
                "{} mixture terms; using the moment-matched chi-square approximation",
                self.weights.len()
            );
            let sum_sq: f64 = self.weights.iter().map(|w| w * w).sum();
            let scale = sum_sq / mean;
            let df = mean * mean / sum_sq;
            let chi =
                ChiSquared::new(df).map_err(|e| Error::InvalidParameter(format!("chi-square approximation: {e}")))?;
            return Ok(chi.sf(x / scale));
        }
        let hits = self.sample(draws, seed).iter().filter(|&&v| v >= x).count();
        Ok(hits as f64 / draws as f64)
    }
}

/// Per-observation coordinates `vech*(H X Hᵀ)` as columns.
fn euclidean_coordinates(points: &[EmbeddedPoint]) -> Result<DMatrix<f64>> {
    let helmert = HelmertSubMatrix::new(points[0].dim())?;
    let columns: Vec<_> = points
        .par_iter()
        .map(|x| vech_star(&helmert.reduce(x.matrix())?))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_columns(&columns))
}

/// Per-row sample variance with divisor `n - 1`.
fn row_variances(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.ncols() as f64;
    x.row_iter()
        .map(|row| {
            let mean = row.sum() / n;
            row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .collect()
}

/// Asymptotic test for the Euclidean family with diagonal covariance.
pub fn asymptotic_test(
    a: &NetworkSample,
    b: &NetworkSample,
    config: &AnalysisConfig,
    draws: usize,
) -> Result<TwoSampleResult> {
    config.validate()?;
    check_groups(a, b)?;
    if config.geometry != Geometry::Euclidean {
        return Err(Error::InvalidParameter(
            "the asymptotic test is available for the Euclidean metrics only; use the permutation test".into(),
        ));
    }
    let (n_a, n_b) = (a.len(), b.len());
    if n_a < 2 || n_b < 2 {
        return Err(Error::InvalidParameter(format!(
            "variance estimation needs at least 2 observations per group, got {n_a} and {n_b}"
        )));
    }
    let pa = a.embed(config.alpha)?;
    let pb = b.embed(config.alpha)?;
    let statistic = statistic_from_points(&pa, &pb, config)?;
    let var_a = row_variances(&euclidean_coordinates(&pa)?);
    let var_b = row_variances(&euclidean_coordinates(&pb)?);
    let (na, nb) = (n_a as f64, n_b as f64);
    let weights: Vec<f64> = var_a
        .iter()
        .zip(&var_b)
        .map(|(sa, sb)| (nb * sa + na * sb) / (na + nb))
        .collect();
    let scaled = na * nb / (na + nb) * statistic;
    let mixture = WeightedChiSquare::new(weights)?;
    let p_value = mixture.sf(scaled, draws, config.seed)?;
    let w = mixture.weights();
    let delta = DeltaSummary {
        count: w.len(),
        sum: w.iter().sum(),
        min: w.iter().copied().fold(f64::INFINITY, f64::min),
        max: w.iter().copied().fold(0.0, f64::max),
    };
    Ok(TwoSampleResult {
        statistic,
        scaled_statistic: Some(scaled),
        method: TestMethod::Asymptotic,
        p_value,
        geometry: config.geometry,
        alpha: config.alpha,
        n_a,
        n_b,
        delta: Some(delta),
        draws: Some(draws),
        r: None,
        seed: Some(config.seed),
        permuted: None,
    })
}

/// p-value from `r` permuted statistics: with `T*(1) <= … <= T*(r)` sorted,
/// `1 - j/r` for the `j` with `T*(j) < T <= T*(j+1)`; 1 when `T <= T*(1)`
/// and 0 when `T > T*(r)`.
pub fn permutation_p_value(t: f64, permuted: &[f64]) -> f64 {
    let r = permuted.len();
    if r == 0 {
        return 1.0;
    }
    let j = permuted.iter().filter(|&&v| v < t).count();
    1.0 - j as f64 / r as f64
}

/// Permutation test with `r` random relabelings of the pooled sample.
/// Replicate `i` draws its relabeling from stream `i` of a generator seeded
/// with `config.seed`, so results are reproducible and thread-independent.
pub fn permutation_test(
    a: &NetworkSample,
    b: &NetworkSample,
    config: &AnalysisConfig,
    r: usize,
) -> Result<TwoSampleResult> {
    config.validate()?;
    check_groups(a, b)?;
    if r == 0 {
        return Err(Error::InvalidParameter("at least one permutation is needed".into()));
    }
    let pa = a.embed(config.alpha)?;
    let pb = b.embed(config.alpha)?;
    let statistic = statistic_from_points(&pa, &pb, config)?;
    let n_a = pa.len();
    let pooled: Vec<EmbeddedPoint> = pa.into_iter().chain(pb).collect();
    let permuted: Vec<f64> = (0..r)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let mut order: Vec<usize> = (0..pooled.len()).collect();
            order.shuffle(&mut rng);
            let group_a: Vec<EmbeddedPoint> = order[..n_a].iter().map(|&k| pooled[k].clone()).collect();
            let group_b: Vec<EmbeddedPoint> = order[n_a..].iter().map(|&k| pooled[k].clone()).collect();
            statistic_from_points(&group_a, &group_b, config)
        })
        .collect::<Result<_>>()?;
    Ok(TwoSampleResult {
        statistic,
        scaled_statistic: None,
        method: TestMethod::Permutation,
        p_value: permutation_p_value(statistic, &permuted),
        geometry: config.geometry,
        alpha: config.alpha,
        n_a,
        n_b: pooled.len() - n_a,
        delta: None,
        draws: None,
        r: Some(r),
        seed: Some(config.seed),
        permuted: Some(permuted),
    })
}
