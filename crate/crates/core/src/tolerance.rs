//! Numerical tolerances shared across the crate.
//!
//! Entry-wise checks are scaled by `max(1, max |entry|)` so that raw count
//! Laplacians and trace-normalised ones are judged alike.

/// Symmetry and idempotence checks.
pub const SYM_TOL: f64 = 1e-10;

/// Membership in the Laplacian set after numerical projection.
pub const FEAS_TOL: f64 = 1e-8;

/// Negative eigenvalues above `-PSD_REL_TOL * trace` are rounding noise.
pub const PSD_REL_TOL: f64 = 1e-8;

/// Per-dimension relative size of eigenvalues indistinguishable from zero
/// after a symmetric eigensolve.
pub const EIGEN_NOISE: f64 = 16.0 * f64::EPSILON;

pub(crate) fn scale_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(1.0_f64, |acc, v| acc.max(v.abs()))
}
