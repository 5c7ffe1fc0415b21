//! Principal component analysis in the tangent space at the sample mean.
//!
//! `S = (1/n) Σ v_k v_kᵀ` with `v_k = π_ν⁻¹(F_α(L_k))` and `ν = η̂`. The
//! tangent vectors are not re-centred. Components are sign-normalised so
//! that each one's largest-magnitude coordinate is positive.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::laplacian::GraphLaplacian;
use crate::means::{reconstruct, sample_mean, MeanResult};
use crate::metrics::{sorted_eigen, EmbeddedPoint, Geometry};
use crate::projection::Projector;
use crate::sample::NetworkSample;
use crate::tangent::{coordinate_len, from_tangent, to_tangent, TangentVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaSolver {
    /// Gram matrix when `n` is below the tangent dimension, primal otherwise.
    Auto,
    /// Eigen-decomposition of the `n x n` Gram matrix of tangent vectors.
    Gram,
    /// Eigen-decomposition of the `dim x dim` second-moment matrix.
    Primal,
}

#[derive(Debug, Clone)]
pub struct PcaResult {
    pub pole: EmbeddedPoint,
    pub mu_hat: GraphLaplacian,
    pub geometry: Geometry,
    pub alpha: f64,
    /// Positive eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// `dim x r`, orthonormal columns.
    pub components: DMatrix<f64>,
    /// `n x r`, `s_kj = γ_jᵀ v_k`.
    pub scores: DMatrix<f64>,
    /// `dim x n`, the tangent vectors `v_k`.
    pub tangent_vectors: DMatrix<f64>,
    /// `trace(S)`.
    pub total_variance: f64,
    pub ids: Vec<String>,
    pub node_labels: Option<Vec<String>>,
}

impl PcaResult {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n(&self) -> usize {
        self.tangent_vectors.ncols()
    }

    /// `λ_j / trace(S)`; empty for a degenerate sample.
    pub fn explained_ratio(&self) -> Vec<f64> {
        if self.total_variance > 0.0 {
            self.eigenvalues.iter().map(|l| l / self.total_variance).collect()
        } else {
            Vec::new()
        }
    }

    /// Component `j` (1-based) as a tangent vector at the pole.
    pub fn component(&self, j: usize) -> Result<TangentVector> {
        let idx = self.index(j)?;
        TangentVector::at_pole(self.components.column(idx).into_owned(), self.geometry, &self.pole)
    }

    /// Scores of an arbitrary tangent vector on all components.
    pub fn project_scores(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        crate::error::ensure_same_dim(self.components.nrows(), v.len())?;
        Ok(self.components.tr_mul(v))
    }

    fn index(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.rank() {
            return Err(Error::InvalidParameter(format!(
                "component {j} out of range 1..={}",
                self.rank()
            )));
        }
        Ok(j - 1)
    }
}

/// Tangent PCA with the pole at the sample mean under the configured metric.
pub fn tangent_pca(sample: &NetworkSample, config: &AnalysisConfig) -> Result<PcaResult> {
    let mean = sample_mean(sample, config)?;
    tangent_pca_from_mean(sample, &mean, config, PcaSolver::Auto)
}

/// Tangent PCA about a precomputed mean.
pub fn tangent_pca_from_mean(
    sample: &NetworkSample,
    mean: &MeanResult,
    config: &AnalysisConfig,
    solver: PcaSolver,
) -> Result<PcaResult> {
    config.validate()?;
    let n = sample.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "PCA needs at least 2 observations, got {n}"
        )));
    }
    let pole = &mean.eta_hat;
    let points = sample.embed(config.alpha)?;
    let dim = coordinate_len(config.geometry, sample.dim());
    let columns: Vec<DVector<f64>> = points
        .par_iter()
        .map(|x| to_tangent(x, pole, config.geometry).map(TangentVector::into_coords))
        .collect::<Result<_>>()?;
    let v = DMatrix::from_columns(&columns);
    let scale = points.iter().map(|x| x.matrix().norm_squared()).sum::<f64>() / n as f64;
    let threshold = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let total_variance = v.norm_squared() / n as f64;

    let use_gram = match solver {
        PcaSolver::Auto => n < dim,
        PcaSolver::Gram => true,
        PcaSolver::Primal => false,
    };
    let (eigenvalues, mut components) = if use_gram {
        let gram = v.tr_mul(&v);
        let (mu, u) = sorted_eigen(&gram);
        let keep: Vec<usize> = (0..n).filter(|&j| mu[j] / n as f64 > threshold).collect();
        let values = keep.iter().map(|&j| mu[j] / n as f64).collect::<Vec<_>>();
        let cols: Vec<DVector<f64>> = keep.iter().map(|&j| (&v * u.column(j)) / mu[j].sqrt()).collect();
        (values, cols)
    } else {
        let s = (&v * v.transpose()) / n as f64;
        let (lambda, gamma) = sorted_eigen(&s);
        let keep: Vec<usize> = (0..dim).filter(|&j| lambda[j] > threshold).collect();
        let values = keep.iter().map(|&j| lambda[j]).collect::<Vec<_>>();
        let cols = keep.iter().map(|&j| gamma.column(j).into_owned()).collect();
        (values, cols)
    };
    for gamma in components.iter_mut() {
        fix_sign(gamma);
    }
    let components = if components.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&components)
    };
    let scores = v.tr_mul(&components);
    Ok(PcaResult {
        pole: pole.clone(),
        mu_hat: mean.mu_hat.clone(),
        geometry: config.geometry,
        alpha: config.alpha,
        eigenvalues,
        components,
        scores,
        tangent_vectors: v,
        total_variance,
        ids: sample.ids().to_vec(),
        node_labels: sample.node_labels().map(<[String]>::to_vec),
    })
}

/// Makes the largest-magnitude coordinate positive (first one on ties).
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = k;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// `P₁(G_α(π_ν(c λ_j^{1/2} γ_j)))`, the path of component `j` (1-based).
pub fn pc_path(
    result: &PcaResult,
    j: usize,
    c: f64,
    config: &AnalysisConfig,
    projector: &mut Projector,
) -> Result<GraphLaplacian> {
    let idx = result.index(j)?;
    let gamma = result.component(j)?;
    let point = from_tangent(&gamma.scaled(c * result.eigenvalues[idx].sqrt()), &result.pole)?;
    let l = reconstruct(point.matrix(), config, projector)?;
    match &result.node_labels {
        Some(labels) => l.with_labels(labels.clone()),
        None => Ok(l),
    }
}

/// Node importances for component `j`: the diagonal of `π_ν(γ_j)` divided
/// by its trace. Only defined for the Euclidean metric with `α = 1`.
pub fn word_importance(result: &PcaResult, j: usize) -> Result<DVector<f64>> {
    if result.geometry != Geometry::Euclidean || result.alpha != 1.0 {
        return Err(Error::InvalidParameter(
            "node importance is defined for the Euclidean metric with alpha = 1 only".into(),
        ));
    }
    let gamma = result.component(j)?;
    let point = from_tangent(&gamma, &result.pole)?;
    let diag = point.matrix().diagonal();
    let total = diag.sum();
    let scale = diag.amax().max(f64::MIN_POSITIVE);
    if total.abs() <= 1e-12 * scale {
        return Err(Error::Degenerate(format!(
            "component {j} has a zero diagonal sum; importances are undefined"
        )));
    }
    Ok(diag / total)
}
