//! Random networks and matrices for simulation studies and tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::laplacian::{AdjacencyMatrix, GraphLaplacian};
use crate::metrics::double_centre;
use crate::vectorize::HelmertSubMatrix;

/// Each unordered pair gets an edge with probability `density` and an
/// exponential(1) weight.
pub fn random_adjacency<R: Rng + ?Sized>(rng: &mut R, m: usize, density: f64) -> AdjacencyMatrix {
    let mut w = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..j {
            if rng.random::<f64>() < density {
                let weight = -(1.0 - rng.random::<f64>()).ln();
                w[(i, j)] = weight;
                w[(j, i)] = weight;
            }
        }
    }
    AdjacencyMatrix::new(w).expect("valid by construction")
}

pub fn random_laplacian<R: Rng + ?Sized>(rng: &mut R, m: usize, density: f64) -> GraphLaplacian {
    GraphLaplacian::from_adjacency(&random_adjacency(rng, m, density))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, k: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthogonal `m x m` matrix fixing the ones vector: `Hᵀ R H + 11ᵀ/m`.
pub fn random_centred_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let h = HelmertSubMatrix::new(m).expect("m >= 2").matrix();
    let r = random_orthogonal(rng, m - 1);
    let mut out = h.transpose() * r * &h;
    out.add_scalar_mut(1.0 / m as f64);
    out
}

/// Symmetrised Gaussian matrix `(G + Gᵀ)/2`, then double-centred.
pub fn random_centred_symmetric<R: Rng + ?Sized>(rng: &mut R, m: usize, sd: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| sd * normal(rng));
    let mut s = (&g + g.transpose()) * 0.5;
    double_centre(&mut s);
    s
}

/// Symmetric matrix with i.i.d. `N(0, sd²)` entries on and above the diagonal.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, m: usize, sd: f64) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let v = sd * normal(rng);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
