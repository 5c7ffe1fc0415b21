//! Helmert sub-matrix and the half-vectorisation operators used for
//! tangent coordinates.
//!
//! `vech*` ordering is column-major over the lower triangle including the
//! diagonal: `(s00, √2 s10, …, √2 s(k-1)0, s11, √2 s21, …, s(k-1)(k-1))`.
//! This order is part of the on-disk format of tangent coordinates.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_same_dim, Error, Result};
use crate::tolerance::{scale_of, SYM_TOL};

/// The `(m-1) x m` Helmert sub-matrix. Rows are orthonormal and orthogonal
/// to the ones vector, so `H Hᵀ = I` and `Hᵀ H = I - 11ᵀ/m`.
#[derive(Debug, Clone)]
pub struct HelmertSubMatrix {
    m: usize,
    // h[r] is h_{r+1} = -((r+1)(r+2))^{-1/2}
    h: Vec<f64>,
}

impl HelmertSubMatrix {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "Helmert sub-matrix needs m >= 2, got {m}"
            )));
        }
        let h = (1..m).map(|j| -1.0 / ((j * (j + 1)) as f64).sqrt()).collect();
        Ok(Self { m, h })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Dense `(m-1) x m` form. Row `j` (1-based) is `(h_j, …, h_j, -j h_j, 0, …, 0)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m - 1, self.m, |r, c| {
            let j = r + 1;
            if c < j {
                self.h[r]
            } else if c == j {
                -(j as f64) * self.h[r]
            } else {
                0.0
            }
        })
    }

    /// `H x` in O(m).
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut prefix = 0.0;
        for r in 0..self.m - 1 {
            prefix += x[r];
            out[r] = self.h[r] * (prefix - (r + 1) as f64 * x[r + 1]);
        }
    }

    /// `Hᵀ y` in O(m).
    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let k = self.m - 1;
        let mut suffix = 0.0;
        for c in (0..self.m).rev() {
            if c < k {
                suffix += self.h[c] * y[c];
            }
            let own = if c >= 1 {
                -(c as f64) * self.h[c - 1] * y[c - 1]
            } else {
                0.0
            };
            out[c] = suffix + own;
        }
    }

    fn left(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m - 1, x.ncols());
        for (src, mut dst) in x.column_iter().zip(out.column_iter_mut()) {
            self.apply(src.as_slice(), dst.as_mut_slice());
        }
        out
    }

    fn left_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m, y.ncols());
        for (src, mut dst) in y.column_iter().zip(out.column_iter_mut()) {
            self.apply_transpose(src.as_slice(), dst.as_mut_slice());
        }
        out
    }

    /// `H X Hᵀ` for an `m x m` matrix, in O(m²).
    pub fn reduce(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        ensure_same_dim(self.m, x.nrows())?;
        ensure_same_dim(self.m, x.ncols())?;
        let hx = self.left(x);
        Ok(self.left(&hx.transpose()).transpose())
    }

    /// `Hᵀ S H` for an `(m-1) x (m-1)` matrix, in O(m²).
    pub fn expand(&self, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        ensure_same_dim(self.m - 1, s.nrows())?;
        ensure_same_dim(self.m - 1, s.ncols())?;
        let hs = self.left_transpose(s);
        Ok(self.left_transpose(&hs.transpose()).transpose())
    }
}

/// `m(m-1)/2`, the Laplacian-space dimension for `m` nodes.
pub fn tangent_dim(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Half-vectorisation with `√2` weighting off the diagonal; an isometry from
/// symmetric `k x k` matrices (Frobenius) to `R^{k(k+1)/2}`.
pub fn vech_star(s: &DMatrix<f64>) -> Result<DVector<f64>> {
    let k = s.nrows();
    ensure_same_dim(k, s.ncols())?;
    let tol = SYM_TOL * scale_of(s.iter().copied());
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        out.push(s[(j, j)]);
        for i in j + 1..k {
            if (s[(i, j)] - s[(j, i)]).abs() > tol {
                return Err(Error::ConstraintViolation {
                    constraint: "symmetry",
                    i,
                    j,
                    value: s[(i, j)] - s[(j, i)],
                });
            }
            out.push(SQRT_2 * 0.5 * (s[(i, j)] + s[(j, i)]));
        }
    }
    Ok(DVector::from_vec(out))
}

/// Inverse of [`vech_star`]; `k` is recovered from the length.
pub fn vech_star_inv(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let k = side_from_half_len(v.len())?;
    let mut s = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        s[(j, j)] = v[idx];
        idx += 1;
        for i in j + 1..k {
            let x = v[idx] / SQRT_2;
            s[(i, j)] = x;
            s[(j, i)] = x;
            idx += 1;
        }
    }
    Ok(s)
}

/// Column stacking.
pub fn vec(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec`] for a square matrix; the length must be a perfect square.
pub fn vec_inv(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let k = (v.len() as f64).sqrt().round() as usize;
    if k * k != v.len() {
        return Err(Error::InvalidParameter(format!(
            "vector of length {} is not a vectorised square matrix",
            v.len()
        )));
    }
    Ok(DMatrix::from_column_slice(k, k, v.as_slice()))
}

fn side_from_half_len(len: usize) -> Result<usize> {
    // k(k+1)/2 = len
    let k = (((8 * len + 1) as f64).sqrt() - 1.0) / 2.0;
    let k = k.round() as usize;
    if k * (k + 1) / 2 != len {
        return Err(Error::InvalidParameter(format!(
            "vector of length {len} is not a half-vectorised matrix"
        )));
    }
    Ok(k)
}
