//! Matrix-power embedding, reverse power maps, ordinary Procrustes
//! alignment, and the power Euclidean / power Procrustes distances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_same_dim, Error, Result};
use crate::laplacian::GraphLaplacian;
use crate::tolerance::{scale_of, EIGEN_NOISE, PSD_REL_TOL, SYM_TOL};
use crate::vectorize::HelmertSubMatrix;

/// Which distance the embedding space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Frobenius distance between embedded matrices.
    Euclidean,
    /// Frobenius distance after optimal orthogonal right-alignment.
    Procrustes,
}

/// The four maps from the embedding space back toward the PSD cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReverseMapVariant {
    /// `Q^(1/α)`, only when `1/α` is an odd integer.
    OddIntegerPower,
    /// Nearest symmetric PSD matrix, then the `1/α` power.
    NearestPsdThenPower,
    /// `(Q Qᵀ)^(1/(2α))`; discards a right orthogonal factor.
    RightGram,
    /// `(Qᵀ Q)^(1/(2α))`; keeps a right orthogonal factor.
    LeftGram,
}

/// A point of the embedding space: an `m x m` matrix with centred rows and
/// columns. Images of Laplacians are also symmetric; Procrustes-aligned
/// points generally are not.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoint {
    matrix: DMatrix<f64>,
    alpha: f64,
}

impl EmbeddedPoint {
    pub fn new(matrix: DMatrix<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let (r, c) = matrix.shape();
        ensure_same_dim(r, c)?;
        let tol = SYM_TOL * scale_of(matrix.iter().copied()) * (r.max(1) as f64).sqrt();
        for (i, row_sum) in matrix.column_sum().iter().enumerate() {
            if row_sum.abs() > tol {
                return Err(Error::ConstraintViolation {
                    constraint: "centred rows",
                    i,
                    j: i,
                    value: *row_sum,
                });
            }
        }
        for (j, col_sum) in matrix.row_sum().iter().enumerate() {
            if col_sum.abs() > tol {
                return Err(Error::ConstraintViolation {
                    constraint: "centred columns",
                    i: j,
                    j,
                    value: *col_sum,
                });
            }
        }
        Ok(Self { matrix, alpha })
    }

    pub(crate) fn from_parts_unchecked(matrix: DMatrix<f64>, alpha: f64) -> Self {
        Self { matrix, alpha }
    }

    /// The origin of the embedding space.
    pub fn zero(m: usize, alpha: f64) -> Self {
        Self {
            matrix: DMatrix::zeros(m, m),
            alpha,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        let tol = SYM_TOL * scale_of(self.matrix.iter().copied());
        (&self.matrix - self.matrix.transpose()).amax() <= tol
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "power alpha must be positive and finite, got {alpha}"
        )))
    }
}

/// `C X C` with `C = I - 11ᵀ/m`.
pub(crate) fn double_centre(x: &mut DMatrix<f64>) {
    let m = x.nrows() as f64;
    let col_means = x.row_sum() / m;
    let row_means = x.column_sum() / m;
    let grand = row_means.sum() / m;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            x[(i, j)] += grand - row_means[i] - col_means[j];
        }
    }
}

pub(crate) fn symmetrize(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

/// `U f(Ξ) Uᵀ` for a symmetric matrix. `f` maps each eigenvalue to a
/// non-negative value, which is what makes `B Bᵀ` with `B = U f(Ξ)^{1/2}`
/// a valid (and exactly symmetric) reconstruction.
///
/// Eigenvalues within `m · EIGEN_NOISE · max|λ|` of zero are treated as exact
/// zeros. Fractional powers would otherwise lift rounding noise of order
/// `ε` to order `ε^α`, which breaks exact null spaces (`√ε ≈ 1e-8`).
fn spectral_map(s: &DMatrix<f64>, f: impl Fn(f64) -> Result<f64>) -> Result<DMatrix<f64>> {
    let eig = s.clone().symmetric_eigen();
    let noise = s.nrows() as f64 * EIGEN_NOISE * eig.eigenvalues.amax();
    let mut b = eig.eigenvectors;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let lambda = if lambda.abs() <= noise { 0.0 } else { *lambda };
        let value = f(lambda)?;
        debug_assert!(value >= 0.0);
        b.column_mut(k).scale_mut(value.sqrt());
    }
    Ok(&b * b.transpose())
}

/// The embedding `F_α(L) = U Ξ^α Uᵀ`.
///
/// Eigenvalues in `(-1e-8 trace, 0)` are rounding noise and are set to zero;
/// anything more negative is reported. `α = 1` returns `L` unchanged.
pub fn f_alpha(l: &GraphLaplacian, alpha: f64) -> Result<EmbeddedPoint> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(EmbeddedPoint::from_parts_unchecked(l.matrix().clone(), 1.0));
    }
    let tolerance = PSD_REL_TOL * l.trace().max(f64::MIN_POSITIVE);
    let mut out = spectral_map(l.matrix(), |lambda| {
        if lambda < -tolerance {
            Err(Error::NotPsd {
                eigenvalue: lambda,
                tolerance,
            })
        } else {
            Ok(lambda.max(0.0).powf(alpha))
        }
    })?;
    double_centre(&mut out);
    Ok(EmbeddedPoint::from_parts_unchecked(symmetrize(&out), alpha))
}

/// Whether `1/α` is an odd integer, returning it if so.
fn odd_reciprocal(alpha: f64) -> Option<u32> {
    let k = 1.0 / alpha;
    let rounded = k.round();
    if (k - rounded).abs() <= 1e-9 * rounded.max(1.0) && rounded >= 1.0 && rounded % 2.0 == 1.0 {
        Some(rounded as u32)
    } else {
        None
    }
}

/// PSD power of a symmetric Gram matrix; power one skips the eigensolve.
fn gram_power(gram: DMatrix<f64>, power: f64) -> Result<DMatrix<f64>> {
    let gram = symmetrize(&gram);
    if (power - 1.0).abs() < 1e-15 {
        return Ok(gram);
    }
    spectral_map(&gram, |lambda| Ok(lambda.max(0.0).powf(power)))
}

/// Reverse power map `G_α`. Variants other than [`ReverseMapVariant::OddIntegerPower`]
/// return symmetric PSD matrices.
pub fn g_alpha(q: &DMatrix<f64>, alpha: f64, variant: ReverseMapVariant) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    ensure_same_dim(q.nrows(), q.ncols())?;
    match variant {
        ReverseMapVariant::OddIntegerPower => {
            let k = odd_reciprocal(alpha).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "odd-integer reverse map needs 1/alpha to be an odd integer, got alpha = {alpha}"
                ))
            })?;
            let mut out = q.clone();
            for _ in 1..k {
                out = &out * q;
            }
            Ok(out)
        }
        ReverseMapVariant::NearestPsdThenPower => {
            // ((Q+Qᵀ) + |Q+Qᵀ|)/4 keeps the non-negative spectrum of sym(Q).
            let power = 1.0 / alpha;
            spectral_map(&symmetrize(q), |lambda| Ok(lambda.max(0.0).powf(power)))
        }
        ReverseMapVariant::RightGram => gram_power(q * q.transpose(), 0.5 / alpha),
        ReverseMapVariant::LeftGram => gram_power(q.transpose() * q, 0.5 / alpha),
    }
}

/// Ordinary Procrustes analysis: the orthogonal `R` minimising `‖X - Y R‖_F`
/// over the full orthogonal group (reflections allowed).
///
/// With `Yᵀ X = U Σ Vᵀ` (singular values non-negative) the minimiser is
/// `R = U Vᵀ`. In degenerate spectra the choice among minimisers follows the
/// decomposition routine's deterministic output.
pub fn opa(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_same_dim(x.nrows(), y.nrows())?;
    ensure_same_dim(x.ncols(), y.ncols())?;
    let cross = y.transpose() * x;
    let svd = crate::linalg::svd(&cross)?;
    Ok(svd.u * svd.v_t)
}

/// Procrustes match for matrices whose rows sum to zero (`X 1 = Y 1 = 0`).
///
/// The search runs over orthogonal matrices fixing the ones vector, which
/// reach the same optimum as the full group for such inputs while keeping
/// `Y R` centred. The problem is solved in Helmert coordinates of size `m-1`.
pub fn opa_centred(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ensure_same_dim(x.nrows(), y.nrows())?;
    ensure_same_dim(x.ncols(), y.ncols())?;
    let m = x.ncols();
    if m < 2 {
        return Ok(DMatrix::identity(m, m));
    }
    let helmert = HelmertSubMatrix::new(m)?;
    let h = helmert.matrix();
    let x_r = x * h.transpose();
    let y_r = y * h.transpose();
    let r_reduced = opa(&x_r, &y_r)?;
    let mut r = h.transpose() * r_reduced * &h;
    r.add_scalar_mut(1.0 / m as f64);
    Ok(r)
}

/// `Y R̂` with `R̂ = opa_centred(target, Y)`.
pub fn align_to(target: &DMatrix<f64>, moving: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = opa_centred(target, moving)?;
    Ok(moving * r)
}

/// Distance between two embedded matrices under the given geometry.
pub fn embedded_distance(x: &DMatrix<f64>, y: &DMatrix<f64>, geometry: Geometry) -> Result<f64> {
    ensure_same_dim(x.nrows(), y.nrows())?;
    ensure_same_dim(x.ncols(), y.ncols())?;
    match geometry {
        Geometry::Euclidean => Ok((x - y).norm()),
        Geometry::Procrustes => Ok((x - align_to(x, y)?).norm()),
    }
}

/// Power Euclidean distance `‖F_α(L1) - F_α(L2)‖_F`.
pub fn dist_euclidean(l1: &GraphLaplacian, l2: &GraphLaplacian, alpha: f64) -> Result<f64> {
    ensure_same_dim(l1.dim(), l2.dim())?;
    let x = f_alpha(l1, alpha)?;
    let y = f_alpha(l2, alpha)?;
    embedded_distance(x.matrix(), y.matrix(), Geometry::Euclidean)
}

/// Power Procrustes distance `min_R ‖F_α(L1) - F_α(L2) R‖_F`.
pub fn dist_procrustes(l1: &GraphLaplacian, l2: &GraphLaplacian, alpha: f64) -> Result<f64> {
    ensure_same_dim(l1.dim(), l2.dim())?;
    let x = f_alpha(l1, alpha)?;
    let y = f_alpha(l2, alpha)?;
    embedded_distance(x.matrix(), y.matrix(), Geometry::Procrustes)
}

/// Eigenvalues of a symmetric matrix, descending.
pub(crate) fn sorted_eigen(s: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = s.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}
