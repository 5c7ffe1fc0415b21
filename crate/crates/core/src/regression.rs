//! Linear regression of networks on covariates in tangent coordinates.
//!
//! Each tangent coordinate is regressed by ordinary least squares on
//! `(1, t¹, …, tᵘ)`, which is the joint least-squares problem because the
//! objective separates over coordinates. Noise variances are maximum
//! likelihood estimates (divisor `n`), per coordinate or pooled.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::AnalysisConfig;
use crate::error::{ensure_same_dim, Error, Result};
use crate::laplacian::GraphLaplacian;
use crate::means::{reconstruct, sample_mean};
use crate::metrics::{EmbeddedPoint, Geometry};
use crate::projection::Projector;
use crate::sample::NetworkSample;
use crate::tangent::{from_tangent, to_tangent, TangentVector};
use crate::vectorize::{vec_inv, vech_star_inv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModel {
    /// One variance per tangent coordinate.
    #[default]
    Diagonal,
    /// A single variance shared by all coordinates.
    Isotropic,
}

#[derive(Debug, Clone)]
pub struct RegressionFit {
    pub pole: EmbeddedPoint,
    pub geometry: Geometry,
    pub alpha: f64,
    pub covariate_names: Vec<String>,
    /// `(u+1) x dim`; row 0 is the intercept, row `w` the coefficients of
    /// covariate `w`.
    pub coefficients: DMatrix<f64>,
    /// Residual sum of squares per coordinate.
    pub rss: DVector<f64>,
    pub variance_model: VarianceModel,
    pub n: usize,
}

impl RegressionFit {
    pub fn u(&self) -> usize {
        self.coefficients.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Fewer observations than tangent coordinates, where the asymptotic
    /// reference distribution of the likelihood-ratio test is questionable.
    pub fn underdetermined(&self) -> bool {
        self.n < self.dim()
    }

    /// Maximum likelihood noise variances under the fitted variance model.
    pub fn residual_variance(&self) -> DVector<f64> {
        let n = self.n as f64;
        match self.variance_model {
            VarianceModel::Diagonal => &self.rss / n,
            VarianceModel::Isotropic => DVector::from_element(self.dim(), self.rss.sum() / (n * self.dim() as f64)),
        }
    }

    /// Coefficient `w` (0 = intercept) as an `(m-1) x (m-1)` matrix.
    pub fn coefficient_matrix(&self, w: usize) -> Result<DMatrix<f64>> {
        if w > self.u() {
            return Err(Error::InvalidParameter(format!(
                "coefficient {w} out of range 0..={}",
                self.u()
            )));
        }
        let row = self.coefficients.row(w).transpose();
        match self.geometry {
            Geometry::Euclidean => vech_star_inv(&row),
            Geometry::Procrustes => vec_inv(&row),
        }
    }

    /// Fitted tangent coordinates `D̂₀ + Σ t^w D̂_w`.
    pub fn fitted_tangent(&self, t: &[f64]) -> Result<TangentVector> {
        ensure_same_dim(self.u(), t.len())?;
        let mut coords = self.coefficients.row(0).transpose();
        for (w, tw) in t.iter().enumerate() {
            coords += self.coefficients.row(w + 1).transpose() * *tw;
        }
        TangentVector::at_pole(coords, self.geometry, &self.pole)
    }
}

/// Pole used for regression: the origin for the Euclidean family, the
/// sample mean `η̂` for the Procrustes family.
pub fn regression_pole(sample: &NetworkSample, config: &AnalysisConfig) -> Result<EmbeddedPoint> {
    match config.geometry {
        Geometry::Euclidean => Ok(EmbeddedPoint::zero(sample.dim(), config.alpha)),
        Geometry::Procrustes => Ok(sample_mean(sample, config)?.eta_hat),
    }
}

/// `n x dim` matrix of tangent coordinates at `pole`.
pub fn tangent_coordinates(
    sample: &NetworkSample,
    config: &AnalysisConfig,
    pole: &EmbeddedPoint,
) -> Result<DMatrix<f64>> {
    let points = sample.embed(config.alpha)?;
    let rows: Vec<DVector<f64>> = points
        .par_iter()
        .map(|x| to_tangent(x, pole, config.geometry).map(TangentVector::into_coords))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_columns(&rows).transpose())
}

/// `[1, t]` design matrix.
pub fn design_matrix(covariates: &[Vec<f64>]) -> DMatrix<f64> {
    let n = covariates.len();
    let u = covariates.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, u + 1, |k, c| if c == 0 { 1.0 } else { covariates[k][c - 1] })
}

/// Least-squares coefficients (`p x dim`) and per-column residual sums of
/// squares for `y ≈ design · coef`.
pub fn least_squares(y: &DMatrix<f64>, design: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    ensure_same_dim(design.nrows(), y.nrows())?;
    let (n, p) = design.shape();
    if n <= p {
        return Err(Error::InvalidParameter(format!(
            "regression needs more observations ({n}) than design columns ({p})"
        )));
    }
    let svd = crate::linalg::thin_svd(design)?;
    let s = &svd.s;
    let smax = s.max();
    let smin = s.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::SingularDesign {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let (u, v_t) = (svd.u, svd.v_t);
    let uty = u.tr_mul(y);
    let mut scaled = uty;
    for (r, sv) in s.iter().enumerate() {
        scaled.row_mut(r).scale_mut(1.0 / sv);
    }
    let coef = v_t.tr_mul(&scaled);
    let residual = y - design * &coef;
    let rss = DVector::from_iterator(residual.ncols(), residual.column_iter().map(|c| c.norm_squared()));
    Ok((coef, rss))
}

fn covariate_rows(sample: &NetworkSample) -> Result<&[Vec<f64>]> {
    sample
        .covariates()
        .ok_or_else(|| Error::InvalidParameter("sample has no covariates".into()))
}

/// Fits the regression with the pole chosen by [`regression_pole`].
pub fn fit(sample: &NetworkSample, config: &AnalysisConfig, model: VarianceModel) -> Result<RegressionFit> {
    config.validate()?;
    let pole = regression_pole(sample, config)?;
    let y = tangent_coordinates(sample, config, &pole)?;
    fit_coordinates(sample, config, pole, &y, model)
}

fn fit_coordinates(
    sample: &NetworkSample,
    config: &AnalysisConfig,
    pole: EmbeddedPoint,
    y: &DMatrix<f64>,
    model: VarianceModel,
) -> Result<RegressionFit> {
    let design = design_matrix(covariate_rows(sample)?);
    let (coefficients, rss) = least_squares(y, &design)?;
    Ok(RegressionFit {
        pole,
        geometry: config.geometry,
        alpha: config.alpha,
        covariate_names: sample.covariate_names().to_vec(),
        coefficients,
        rss,
        variance_model: model,
        n: sample.len(),
    })
}

/// `P₁(G_α(π_ν(D̂₀ + Σ t^w D̂_w)))`.
pub fn predict(
    fit: &RegressionFit,
    t: &[f64],
    config: &AnalysisConfig,
    projector: &mut Projector,
) -> Result<GraphLaplacian> {
    let q = fit.fitted_tangent(t)?;
    let point = from_tangent(&q, &fit.pole)?;
    reconstruct(point.matrix(), config, projector)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrtResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub n: usize,
    pub dim: usize,
    /// `n < dim`; the chi-square reference is then a rough guide only.
    pub underdetermined: bool,
}

/// Likelihood-ratio statistic from residual sums of squares of the null and
/// full models, with one coefficient per coordinate removed under the null.
pub fn lrt_from_rss(
    rss_null: &DVector<f64>,
    rss_full: &DVector<f64>,
    n: usize,
    model: VarianceModel,
) -> Result<LrtResult> {
    ensure_same_dim(rss_null.len(), rss_full.len())?;
    let dim = rss_full.len();
    // A vanishing residual variance makes the likelihood unbounded.
    let vanishes = |full: f64, null: f64| !(null > 0.0) || !(full > 1e-24 * null);
    match model {
        VarianceModel::Diagonal => {
            if let Some(c) = (0..dim).find(|&c| vanishes(rss_full[c], rss_null[c])) {
                return Err(Error::DegenerateLikelihood { coordinate: c });
            }
        }
        VarianceModel::Isotropic => {
            if vanishes(rss_full.sum(), rss_null.sum()) {
                return Err(Error::DegenerateLikelihood { coordinate: 0 });
            }
        }
    }
    let nf = n as f64;
    let statistic = match model {
        VarianceModel::Diagonal => nf * rss_null.iter().zip(rss_full).map(|(a, b)| (a / b).ln()).sum::<f64>(),
        VarianceModel::Isotropic => nf * dim as f64 * (rss_null.sum() / rss_full.sum()).ln(),
    };
    // Nested least squares: the null RSS is never below the full RSS, so a
    // negative value can only be rounding.
    let statistic = statistic.max(0.0);
    let chi = ChiSquared::new(dim as f64).map_err(|e| Error::InvalidParameter(format!("chi-square reference: {e}")))?;
    Ok(LrtResult {
        statistic,
        df: dim,
        p_value: chi.sf(statistic),
        n,
        dim,
        underdetermined: n < dim,
    })
}

/// Wilks test of `D_w = 0` for covariate `w` (0-based index into the
/// sample's covariates).
pub fn lrt_covariate(
    sample: &NetworkSample,
    config: &AnalysisConfig,
    w: usize,
    model: VarianceModel,
) -> Result<LrtResult> {
    config.validate()?;
    let rows = covariate_rows(sample)?;
    let u = rows.first().map_or(0, Vec::len);
    if w >= u {
        return Err(Error::InvalidParameter(format!(
            "covariate index {w} out of range for {u} covariates"
        )));
    }
    let pole = regression_pole(sample, config)?;
    let y = tangent_coordinates(sample, config, &pole)?;
    let full = design_matrix(rows);
    let null = full.clone().remove_column(w + 1);
    let (_, rss_full) = least_squares(&y, &full)?;
    let (_, rss_null) = least_squares(&y, &null)?;
    lrt_from_rss(&rss_null, &rss_full, sample.len(), model)
}
