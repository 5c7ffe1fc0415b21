//! Edge-level z-statistics comparing mean adjacency weights of two groups.
//!
//! For each node pair the values are `-l_ij` of the trace-normalised
//! Laplacians. The pooled variance mixes the sample variance with a
//! mean-proportional term, `β² x̄²`, weighted by `w = n / N`, and the
//! regularising offset `q` defaults to the median pooled standard deviation
//! over the retained pairs.

use serde::Serialize;

use crate::error::{ensure_same_dim, Error, Result};
use crate::sample::NetworkSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetPolicy {
    /// Median of `s_p` over the retained pairs.
    MedianSp,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeZParams {
    /// Slope of the standard deviation against the mean.
    pub beta: f64,
    /// Reference sample size in the weights `w = n / N`.
    pub n_ref: f64,
    pub offset: OffsetPolicy,
}

impl Default for EdgeZParams {
    fn default() -> Self {
        Self {
            beta: 0.2,
            n_ref: 200.0,
            offset: OffsetPolicy::MedianSp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeZ {
    pub i: usize,
    pub j: usize,
    pub label_i: String,
    pub label_j: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub s_p: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeZTable {
    /// Retained pairs, in decreasing order of `|z|`.
    pub rows: Vec<EdgeZ>,
    pub beta: f64,
    pub n_ref: f64,
    pub q: f64,
    /// Pairs dropped because one group never shows the edge.
    pub dropped: usize,
}

impl EdgeZTable {
    pub fn top(&self, k: usize) -> &[EdgeZ] {
        &self.rows[..k.min(self.rows.len())]
    }
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    // A single observation carries no spread information; the
    // mean-proportional term then supplies the whole variance estimate.
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// z-statistics for every node pair present in both groups.
pub fn edge_z_table(a: &NetworkSample, b: &NetworkSample, params: &EdgeZParams) -> Result<EdgeZTable> {
    ensure_same_dim(a.dim(), b.dim())?;
    if !(params.beta >= 0.0) || !(params.n_ref > 0.0) {
        return Err(Error::InvalidParameter("beta must be >= 0 and N > 0".into()));
    }
    if let OffsetPolicy::Fixed(q) = params.offset {
        if !(q > 0.0) {
            return Err(Error::InvalidParameter("offset q must be positive".into()));
        }
    }
    let (n_a, n_b) = (a.len(), b.len());
    if n_a + n_b < 3 {
        return Err(Error::InvalidParameter(
            "the pooled variance needs at least three observations in total".into(),
        ));
    }
    let normalise =
        |s: &NetworkSample| -> Result<Vec<_>> { s.observations().iter().map(|l| l.trace_normalize()).collect() };
    let la = normalise(a)?;
    let lb = normalise(b)?;
    let m = a.dim();
    let labels: Vec<String> = match a.node_labels().or(b.node_labels()) {
        Some(l) => l.to_vec(),
        None => (0..m).map(|i| i.to_string()).collect(),
    };
    let (na, nb) = (n_a as f64, n_b as f64);
    let (w_a, w_b) = (na / params.n_ref, nb / params.n_ref);
    let beta2 = params.beta * params.beta;

    let mut rows = Vec::new();
    let mut dropped = 0;
    for j in 1..m {
        for i in 0..j {
            let xs: Vec<f64> = la.iter().map(|l| -l.matrix()[(i, j)]).collect();
            let ys: Vec<f64> = lb.iter().map(|l| -l.matrix()[(i, j)]).collect();
            if xs.iter().all(|&v| v == 0.0) || ys.iter().all(|&v| v == 0.0) {
                dropped += 1;
                continue;
            }
            let (xbar, sx2) = mean_and_variance(&xs);
            let (ybar, sy2) = mean_and_variance(&ys);
            let sp2 = (na * (w_a * sx2 + (1.0 - w_a) * beta2 * xbar * xbar)
                + nb * (w_b * sy2 + (1.0 - w_b) * beta2 * ybar * ybar))
                / (na + nb - 2.0);
            rows.push(EdgeZ {
                i,
                j,
                label_i: labels[i].clone(),
                label_j: labels[j].clone(),
                mean_a: xbar,
                mean_b: ybar,
                s_p: sp2.max(0.0).sqrt(),
                z: 0.0,
            });
        }
    }
    let q = match params.offset {
        OffsetPolicy::Fixed(q) => q,
        OffsetPolicy::MedianSp if rows.is_empty() => 0.0,
        OffsetPolicy::MedianSp => median(&mut rows.iter().map(|r| r.s_p).collect::<Vec<_>>()),
    };
    let root = (1.0 / na + 1.0 / nb).sqrt();
    for row in rows.iter_mut() {
        let denom = (q + row.s_p) * root;
        row.z = if row.mean_a == row.mean_b {
            0.0
        } else if denom > 0.0 {
            (row.mean_a - row.mean_b) / denom
        } else {
            return Err(Error::Degenerate(format!(
                "zero standard error for pair ({}, {})",
                row.label_i, row.label_j
            )));
        };
    }
    rows.sort_by(|x, y| y.z.abs().total_cmp(&x.z.abs()).then((x.j, x.i).cmp(&(y.j, y.i))));
    Ok(EdgeZTable {
        rows,
        beta: params.beta,
        n_ref: params.n_ref,
        q,
        dropped,
    })
}
