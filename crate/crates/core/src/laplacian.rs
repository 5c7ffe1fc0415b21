//! Graph Laplacians of undirected, loop-free weighted networks.
//!
//! A Laplacian `L = D - A` is symmetric, has non-positive off-diagonal
//! entries and zero row sums. Diagonal dominance makes it positive
//! semi-definite, so PSD membership is never re-checked on construction;
//! [`GraphLaplacian::min_eigenvalue`] is available when it matters.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance::{scale_of, FEAS_TOL, PSD_REL_TOL, SYM_TOL};

/// Symmetric non-negative edge weights with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    weights: DMatrix<f64>,
}

impl AdjacencyMatrix {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let m = square_dim(&weights)?;
        for j in 0..m {
            for i in 0..m {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(violation("finite weight", i, j, w));
                }
                if i == j && w != 0.0 {
                    return Err(violation("zero diagonal", i, j, w));
                }
                if w < 0.0 {
                    return Err(violation("non-negative weight", i, j, w));
                }
                if i < j && w != weights[(j, i)] {
                    return Err(violation("symmetric weights", i, j, w - weights[(j, i)]));
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            weights: DMatrix::zeros(m, m),
        }
    }

    /// Builds a matrix from `(i, j, weight)` triples; repeated pairs accumulate.
    pub fn from_edges(m: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut weights = DMatrix::zeros(m, m);
        for (i, j, w) in edges {
            if i >= m || j >= m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: i.max(j) + 1,
                });
            }
            if i == j {
                return Err(violation("no self-loops", i, j, w));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(violation("non-negative weight", i, j, w));
            }
            weights[(i, j)] += w;
            weights[(j, i)] += w;
        }
        Ok(Self { weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.weights
    }

    pub fn total_weight(&self) -> f64 {
        let m = self.dim();
        let mut total = 0.0;
        for j in 0..m {
            for i in 0..j {
                total += self.weights[(i, j)];
            }
        }
        total
    }
}

/// A validated element of the Laplacian set, optionally carrying node labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLaplacian {
    matrix: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl GraphLaplacian {
    /// Validates `matrix` against the Laplacian constraints at the feasibility
    /// tolerance and stores its symmetric part.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let m = square_dim(&matrix)?;
        let scale = scale_of(matrix.iter().copied());
        let sym_tol = SYM_TOL * scale;
        let feas_tol = FEAS_TOL * scale;
        for j in 0..m {
            let mut row_sum = 0.0;
            for i in 0..m {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(violation("finite entry", i, j, v));
                }
                if i < j && (v - matrix[(j, i)]).abs() > sym_tol {
                    return Err(violation("symmetry", i, j, v - matrix[(j, i)]));
                }
                if i != j && v > feas_tol {
                    return Err(violation("non-positive off-diagonal", i, j, v));
                }
                row_sum += v;
            }
            if row_sum.abs() > feas_tol {
                return Err(violation("zero row sum", j, j, row_sum));
            }
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix, labels: None })
    }

    /// Wraps a matrix built so that the constraints hold by construction.
    pub(crate) fn from_parts_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix, labels: None }
    }

    pub fn zeros(m: usize) -> Self {
        Self::from_parts_unchecked(DMatrix::zeros(m, m))
    }

    /// `L = D - A` with `D = diag(A 1)`.
    pub fn from_adjacency(adjacency: &AdjacencyMatrix) -> Self {
        let w = adjacency.weights();
        let m = w.nrows();
        let mut l = -w.clone();
        for i in 0..m {
            l[(i, i)] = w.row(i).sum();
        }
        Self::from_parts_unchecked(l)
    }

    /// Off-diagonal weights `-l_ij`, with tolerance-level positive entries clamped to zero.
    pub fn to_adjacency(&self) -> AdjacencyMatrix {
        let m = self.dim();
        let mut w = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                if i != j {
                    w[(i, j)] = (-self.matrix[(i, j)]).max(0.0);
                }
            }
        }
        AdjacencyMatrix { weights: w }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        crate::error::ensure_same_dim(self.dim(), labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Divides by the trace so that the result has unit trace.
    pub fn trace_normalize(&self) -> Result<Self> {
        let trace = self.trace();
        if !(trace > 0.0) {
            return Err(Error::Degenerate(
                "cannot trace-normalise a Laplacian with zero trace (empty network)".into(),
            ));
        }
        Ok(Self {
            matrix: &self.matrix / trace,
            labels: self.labels.clone(),
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks positive semi-definiteness at `-PSD_REL_TOL * trace`.
    pub fn check_psd(&self) -> Result<()> {
        let tolerance = PSD_REL_TOL * self.trace().max(f64::MIN_POSITIVE);
        let eigenvalue = self.min_eigenvalue();
        if eigenvalue < -tolerance {
            return Err(Error::NotPsd { eigenvalue, tolerance });
        }
        Ok(())
    }

    /// Largest constraint violation; zero for exact members.
    pub fn constraint_violation(&self) -> ConstraintReport {
        constraint_report(&self.matrix)
    }
}

/// Worst-case violation of each Laplacian constraint family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub asymmetry: f64,
    pub positive_off_diagonal: f64,
    pub row_sum: f64,
}

impl ConstraintReport {
    pub fn max(&self) -> f64 {
        self.asymmetry.max(self.positive_off_diagonal).max(self.row_sum)
    }
}

pub fn constraint_report(matrix: &DMatrix<f64>) -> ConstraintReport {
    let m = matrix.nrows();
    let mut report = ConstraintReport::default();
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..matrix.ncols() {
            let v = matrix[(i, j)];
            row_sum += v;
            if i != j {
                report.positive_off_diagonal = report.positive_off_diagonal.max(v);
                report.asymmetry = report.asymmetry.max((v - matrix[(j, i)]).abs());
            }
        }
        report.row_sum = report.row_sum.max(row_sum.abs());
    }
    report
}

fn square_dim(matrix: &DMatrix<f64>) -> Result<usize> {
    let (r, c) = matrix.shape();
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, found: c });
    }
    Ok(r)
}

fn violation(constraint: &'static str, i: usize, j: usize, value: f64) -> Error {
    Error::ConstraintViolation {
        constraint,
        i,
        j,
        value,
    }
}
