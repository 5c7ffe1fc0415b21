//! Ordered collections of networks over a shared node set.

use rayon::prelude::*;

use crate::error::{ensure_same_dim, Error, Result};
use crate::laplacian::GraphLaplacian;
use crate::metrics::{f_alpha, EmbeddedPoint};

#[derive(Debug, Clone)]
pub struct NetworkSample {
    observations: Vec<GraphLaplacian>,
    ids: Vec<String>,
    node_labels: Option<Vec<String>>,
    covariate_names: Vec<String>,
    covariates: Option<Vec<Vec<f64>>>,
    groups: Option<Vec<String>>,
}

impl NetworkSample {
    /// All observations must share the node count. Observation ids default
    /// to `obs1`, `obs2`, ….
    pub fn new(observations: Vec<GraphLaplacian>) -> Result<Self> {
        let first = observations.first().ok_or(Error::EmptySample)?;
        let m = first.dim();
        for l in &observations {
            ensure_same_dim(m, l.dim())?;
        }
        let node_labels = first.labels().map(<[String]>::to_vec);
        let ids = (1..=observations.len()).map(|k| format!("obs{k}")).collect();
        Ok(Self {
            observations,
            ids,
            node_labels,
            covariate_names: Vec::new(),
            covariates: None,
            groups: None,
        })
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        ensure_same_dim(self.len(), ids.len())?;
        self.ids = ids;
        Ok(self)
    }

    pub fn with_node_labels(mut self, labels: Vec<String>) -> Result<Self> {
        ensure_same_dim(self.dim(), labels.len())?;
        self.node_labels = Some(labels);
        Ok(self)
    }

    /// One row of `names.len()` values per observation.
    pub fn with_covariates(mut self, names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        ensure_same_dim(self.len(), rows.len())?;
        for row in &rows {
            ensure_same_dim(names.len(), row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("covariates must be finite".into()));
            }
        }
        self.covariate_names = names;
        self.covariates = Some(rows);
        Ok(self)
    }

    pub fn with_groups(mut self, groups: Vec<String>) -> Result<Self> {
        ensure_same_dim(self.len(), groups.len())?;
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Node count `m`.
    pub fn dim(&self) -> usize {
        self.observations[0].dim()
    }

    pub fn observations(&self) -> &[GraphLaplacian] {
        &self.observations
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn covariates(&self) -> Option<&[Vec<f64>]> {
        self.covariates.as_deref()
    }

    pub fn groups(&self) -> Option<&[String]> {
        self.groups.as_deref()
    }

    /// Sub-sample in the given order, carrying metadata along.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(&bad) = indices.iter().find(|&&k| k >= self.len()) {
            return Err(Error::InvalidParameter(format!(
                "observation index {bad} out of range for a sample of {}",
                self.len()
            )));
        }
        let pick = |v: &[String]| indices.iter().map(|&k| v[k].clone()).collect::<Vec<_>>();
        Ok(Self {
            observations: indices.iter().map(|&k| self.observations[k].clone()).collect(),
            ids: pick(&self.ids),
            node_labels: self.node_labels.clone(),
            covariate_names: self.covariate_names.clone(),
            covariates: self
                .covariates
                .as_ref()
                .map(|c| indices.iter().map(|&k| c[k].clone()).collect()),
            groups: self.groups.as_deref().map(pick),
        })
    }

    /// Splits by group label into `(first, second)`.
    pub fn split_groups(&self, first: &str, second: &str) -> Result<(Self, Self)> {
        let groups = self
            .groups
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("sample has no group labels".into()))?;
        let select = |g: &str| -> Vec<usize> {
            groups
                .iter()
                .enumerate()
                .filter(|(_, x)| *x == g)
                .map(|(k, _)| k)
                .collect()
        };
        let (a, b) = (select(first), select(second));
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "groups {first:?} and {second:?} must both be non-empty"
            )));
        }
        Ok((self.subset(&a)?, self.subset(&b)?))
    }

    /// Distinct group labels in order of first appearance.
    pub fn group_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for g in self.groups.iter().flatten() {
            if !names.contains(g) {
                names.push(g.clone());
            }
        }
        names
    }

    /// `F_α` of every observation, in parallel.
    pub fn embed(&self, alpha: f64) -> Result<Vec<EmbeddedPoint>> {
        self.observations.par_iter().map(|l| f_alpha(l, alpha)).collect()
    }
}
