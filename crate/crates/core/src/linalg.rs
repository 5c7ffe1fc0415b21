//! Singular value decomposition backed by `faer`.
//!
//! nalgebra's SVD mishandles rank-deficient 2x2 blocks during deflation
//! (its closed-form 2x2 step divides by the smaller singular value), which
//! returns factors that do not reconstruct the input. Rank-deficient cross
//! products are routine here (disconnected graphs), so every SVD goes
//! through this module.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Full SVD `A = U diag(s) Vᵀ`, singular values non-increasing.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn decompose(a: &DMatrix<f64>, thin: bool) -> Result<Svd> {
    let m = to_faer(a);
    let svd = if thin { m.thin_svd() } else { m.svd() }.map_err(|_| Error::NonConvergence {
        solver: "singular value decomposition",
        iterations: 0,
        primal: f64::NAN,
        dual: f64::NAN,
    })?;
    let s = svd.S().column_vector();
    Ok(Svd {
        u: from_faer(svd.U()),
        s: DVector::from_fn(s.nrows(), |k, _| s[k]),
        v_t: from_faer(svd.V()).transpose(),
    })
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    decompose(a, false)
}

/// Thin SVD: `U` is `n x k` and `Vᵀ` is `k x p` with `k = min(n, p)`.
pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Result<Svd> {
    decompose(a, true)
}
