//! Tangent-space coordinates at a pole `ν`.
//!
//! Euclidean coordinates are `vech*(H (X - ν) Hᵀ)` of length `m(m-1)/2`.
//! Procrustes coordinates are `vec(H (X R̂ - ν) Hᵀ)` of length `(m-1)²`,
//! where `R̂` matches `X` to `ν`; they over-parameterise the tangent space
//! and are used as they are.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_same_dim, Error, Result};
use crate::metrics::{align_to, opa_centred, EmbeddedPoint, Geometry};
use crate::vectorize::{vec, vec_inv, vech_star, vech_star_inv, HelmertSubMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: DVector<f64>,
    flavor: Geometry,
    m: usize,
    pole_id: u64,
}

impl TangentVector {
    /// Wraps raw coordinates for use at the given pole.
    pub fn at_pole(coords: DVector<f64>, flavor: Geometry, pole: &EmbeddedPoint) -> Result<Self> {
        let m = pole.dim();
        ensure_same_dim(coordinate_len(flavor, m), coords.len())?;
        Ok(Self {
            coords,
            flavor,
            m,
            pole_id: pole_id(pole),
        })
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn flavor(&self) -> Geometry {
        self.flavor
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pole_id(&self) -> u64 {
        self.pole_id
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coords: &self.coords * c,
            ..self.clone()
        }
    }
}

/// Coordinate count for `m` nodes: `m(m-1)/2` Euclidean, `(m-1)²` Procrustes.
pub fn coordinate_len(flavor: Geometry, m: usize) -> usize {
    let k = m.saturating_sub(1);
    match flavor {
        Geometry::Euclidean => m * k / 2,
        Geometry::Procrustes => k * k,
    }
}

/// Identifier of a pole: a hash of its power and matrix entries. Tangent
/// vectors carry it so that they are not decoded at the wrong pole.
pub fn pole_id(pole: &EmbeddedPoint) -> u64 {
    let mut hasher = DefaultHasher::new();
    pole.dim().hash(&mut hasher);
    pole.alpha().to_bits().hash(&mut hasher);
    for v in pole.matrix().iter() {
        v.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

fn check_pair(x: &EmbeddedPoint, nu: &EmbeddedPoint) -> Result<HelmertSubMatrix> {
    ensure_same_dim(nu.dim(), x.dim())?;
    if x.alpha() != nu.alpha() {
        return Err(Error::InvalidParameter(format!(
            "point has power {} but pole has power {}",
            x.alpha(),
            nu.alpha()
        )));
    }
    HelmertSubMatrix::new(nu.dim())
}

fn check_vector(q: &TangentVector, flavor: Geometry, nu: &EmbeddedPoint) -> Result<HelmertSubMatrix> {
    if q.flavor != flavor {
        return Err(Error::InvalidParameter(format!(
            "expected {flavor:?} tangent coordinates, got {:?}",
            q.flavor
        )));
    }
    ensure_same_dim(nu.dim(), q.m)?;
    ensure_same_dim(coordinate_len(flavor, q.m), q.coords.len())?;
    if q.pole_id != pole_id(nu) {
        return Err(Error::InvalidParameter(
            "tangent vector was computed at a different pole".into(),
        ));
    }
    HelmertSubMatrix::new(nu.dim())
}

pub fn to_tangent_euclidean(x: &EmbeddedPoint, nu: &EmbeddedPoint) -> Result<TangentVector> {
    let helmert = check_pair(x, nu)?;
    let reduced = helmert.reduce(&(x.matrix() - nu.matrix()))?;
    TangentVector::at_pole(vech_star(&reduced)?, Geometry::Euclidean, nu)
}

/// `ν + Hᵀ vech*⁻¹(q) H`.
pub fn from_tangent_euclidean(q: &TangentVector, nu: &EmbeddedPoint) -> Result<EmbeddedPoint> {
    let helmert = check_vector(q, Geometry::Euclidean, nu)?;
    let s = vech_star_inv(&q.coords)?;
    let x = nu.matrix() + helmert.expand(&s)?;
    Ok(EmbeddedPoint::from_parts_unchecked(x, nu.alpha()))
}

pub fn to_tangent_procrustes(x: &EmbeddedPoint, nu: &EmbeddedPoint) -> Result<TangentVector> {
    let helmert = check_pair(x, nu)?;
    let aligned = align_to(nu.matrix(), x.matrix())?;
    let reduced = helmert.reduce(&(aligned - nu.matrix()))?;
    TangentVector::at_pole(vec(&reduced), Geometry::Procrustes, nu)
}

/// `(ν + Hᵀ vec⁻¹(q) H) R̃`, with `R̃` matching the reconstructed point to `ν`.
pub fn from_tangent_procrustes(q: &TangentVector, nu: &EmbeddedPoint) -> Result<EmbeddedPoint> {
    let helmert = check_vector(q, Geometry::Procrustes, nu)?;
    let s = vec_inv(&q.coords)?;
    let z: DMatrix<f64> = nu.matrix() + helmert.expand(&s)?;
    let r = opa_centred(nu.matrix(), &z)?;
    Ok(EmbeddedPoint::from_parts_unchecked(z * r, nu.alpha()))
}

pub fn to_tangent(x: &EmbeddedPoint, nu: &EmbeddedPoint, geometry: Geometry) -> Result<TangentVector> {
    match geometry {
        Geometry::Euclidean => to_tangent_euclidean(x, nu),
        Geometry::Procrustes => to_tangent_procrustes(x, nu),
    }
}

pub fn from_tangent(q: &TangentVector, nu: &EmbeddedPoint) -> Result<EmbeddedPoint> {
    match q.flavor {
        Geometry::Euclidean => from_tangent_euclidean(q, nu),
        Geometry::Procrustes => from_tangent_procrustes(q, nu),
    }
}
