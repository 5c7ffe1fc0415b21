//! Pairwise distances, classical multidimensional scaling and Ward
//! hierarchical clustering.

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::error::{ensure_same_dim, Error, Result};
use crate::metrics::{embedded_distance, sorted_eigen};
use crate::sample::NetworkSample;

/// `D_ij = d(L_i, L_j)` under the configured metric.
pub fn distance_matrix(sample: &NetworkSample, config: &AnalysisConfig) -> Result<DMatrix<f64>> {
    config.validate()?;
    let n = sample.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "a distance matrix needs at least 2 observations, got {n}"
        )));
    }
    let points = sample.embed(config.alpha)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| embedded_distance(points[i].matrix(), points[j].matrix(), config.geometry))
        .collect::<Result<_>>()?;
    let mut d = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    Ok(d)
}

fn check_distances(d: &DMatrix<f64>) -> Result<usize> {
    let n = d.nrows();
    ensure_same_dim(n, d.ncols())?;
    for j in 0..n {
        for i in 0..n {
            let v = d[(i, j)];
            if !(v.is_finite() && v >= 0.0) || v != d[(j, i)] || (i == j && v != 0.0) {
                return Err(Error::ConstraintViolation {
                    constraint: "symmetric non-negative distance matrix with zero diagonal",
                    i,
                    j,
                    value: v,
                });
            }
        }
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult {
    /// `n x k` coordinates.
    pub coordinates: DMatrix<f64>,
    /// All eigenvalues of `B = -½ J D² J`, non-increasing.
    pub eigenvalues: Vec<f64>,
}

/// Classical (Torgerson) scaling into `k` dimensions.
pub fn classical_mds(d: &DMatrix<f64>, k: usize) -> Result<MdsResult> {
    let n = check_distances(d)?;
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "MDS dimension must lie in 1..={} for {n} points, got {k}",
            n.saturating_sub(1)
        )));
    }
    let mut b = d.map(|v| -0.5 * v * v);
    crate::metrics::double_centre(&mut b);
    let b = (&b + b.transpose()) * 0.5;
    let (values, vectors) = sorted_eigen(&b);
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let negative = values.iter().filter(|&&v| v < -1e-10 * scale).count();
    if negative > 0 {
        warn!("distance matrix is not Euclidean: {negative} negative eigenvalues truncated to zero");
    }
    let mut coordinates = DMatrix::zeros(n, k);
    for c in 0..k {
        let lambda = values[c].max(0.0);
        coordinates.set_column(c, &(vectors.column(c) * lambda.sqrt()));
    }
    for mut col in coordinates.column_iter_mut() {
        let mut best = 0;
        for (r, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = r;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(MdsResult {
        coordinates,
        eigenvalues: values.iter().copied().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WardVariant {
    /// Lance–Williams update on squared distances; heights are distances.
    #[default]
    D2,
    /// The same update applied to the unsquared distances.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// Cluster ids: `0..n` are observations, `n + s` is the cluster formed
    /// at step `s`.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Flat labels `0..k` for `k` clusters, numbered by first appearance.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidParameter(format!(
                "cluster count must lie in 1..={}, got {k}",
                self.n
            )));
        }
        let mut parent: Vec<usize> = (0..2 * self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (s, merge) in self.merges.iter().take(self.n - k).enumerate() {
            let id = self.n + s;
            let l = find(&mut parent, merge.left);
            let r = find(&mut parent, merge.right);
            parent[l] = id;
            parent[r] = id;
        }
        let mut roots: Vec<usize> = Vec::new();
        Ok((0..self.n)
            .map(|i| {
                let root = find(&mut parent, i);
                match roots.iter().position(|&r| r == root) {
                    Some(p) => p,
                    None => {
                        roots.push(root);
                        roots.len() - 1
                    }
                }
            })
            .collect())
    }
}

/// Agglomerative clustering with Ward's criterion.
pub fn ward_clustering(d: &DMatrix<f64>, variant: WardVariant) -> Result<Dendrogram> {
    let n = check_distances(d)?;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "clustering needs at least 2 observations".into(),
        ));
    }
    let mut dist = match variant {
        WardVariant::D2 => d.map(|v| v * v),
        WardVariant::D => d.clone(),
    };
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(usize, usize)> = None;
        for j in 0..n {
            if !active[j] {
                continue;
            }
            for i in 0..j {
                if active[i] && best.is_none_or(|(bi, bj)| dist[(i, j)] < dist[(bi, bj)]) {
                    best = Some((i, j));
                }
            }
        }
        let (i, j) = best.expect("two active clusters remain");
        let dij = dist[(i, j)];
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k] as f64;
            let v = ((ni + nk) * dist[(i, k)] + (nj + nk) * dist[(j, k)] - nk * dij) / (ni + nj + nk);
            dist[(i, k)] = v;
            dist[(k, i)] = v;
        }
        let (left, right) = (id[i].min(id[j]), id[i].max(id[j]));
        let height = match variant {
            WardVariant::D2 => dij.max(0.0).sqrt(),
            WardVariant::D => dij,
        };
        size[i] += size[j];
        active[j] = false;
        id[i] = n + step;
        merges.push(Merge {
            left,
            right,
            height,
            size: size[i],
        });
    }
    Ok(Dendrogram { n, merges })
}
