//! Shared oracles and data generators for the integration suites.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use netmanifold::metrics::f_alpha;
use netmanifold::vectorize::{tangent_dim, vech_star_inv, HelmertSubMatrix};
use netmanifold::{AnalysisConfig, GraphLaplacian, Projector};

/// The edges of the 3-node graph in a fixed order.
const EDGES3: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn edge_basis(i: usize, j: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(3, 3);
    b[(i, i)] = 1.0;
    b[(j, j)] = 1.0;
    b[(i, j)] = -1.0;
    b[(j, i)] = -1.0;
    b
}

/// Nearest 3-node Laplacian to `y` by enumerating all 2³ active sets of the
/// edge-weight sign constraints and solving each equality-constrained least
/// squares problem in closed form.
pub fn brute_force_projection_m3(y: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(y.shape(), (3, 3));
    let basis: Vec<DMatrix<f64>> = EDGES3.iter().map(|&(i, j)| edge_basis(i, j)).collect();
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for mask in 0u8..8 {
        let free: Vec<usize> = (0..3).filter(|e| mask & (1 << e) != 0).collect();
        let k = free.len();
        let mut weights = [0.0; 3];
        if k > 0 {
            let gram = DMatrix::from_fn(k, k, |a, b| basis[free[a]].dot(&basis[free[b]]));
            let rhs = DVector::from_fn(k, |a, _| basis[free[a]].dot(y));
            let w = gram.lu().solve(&rhs).expect("edge Gram matrix is nonsingular");
            if w.iter().any(|&v| v < 0.0) {
                continue;
            }
            for (a, &e) in free.iter().enumerate() {
                weights[e] = w[a];
            }
        }
        let l = basis
            .iter()
            .zip(weights)
            .fold(DMatrix::zeros(3, 3), |acc, (b, w)| acc + b * w);
        let objective = (&l - y).norm_squared();
        if best.as_ref().is_none_or(|(f, _)| objective < *f) {
            best = Some((objective, l));
        }
    }
    best.expect("the all-zero active set is always feasible").1
}

/// Naive co-occurrence count: every ordered position pair `p < q` with
/// `q - p <= span`, distinct in-vocabulary words, counted on both sides.
pub fn naive_cooccurrence(tokens: &[String], words: &[String], span: usize) -> DMatrix<f64> {
    let m = words.len();
    let mut w = DMatrix::zeros(m, m);
    for p in 0..tokens.len() {
        for q in 0..tokens.len() {
            if !(p < q && q - p <= span) {
                continue;
            }
            let a = words.iter().position(|x| *x == tokens[p]);
            let b = words.iter().position(|x| *x == tokens[q]);
            if let (Some(a), Some(b)) = (a, b) {
                if a != b {
                    w[(a, b)] += 1.0;
                    w[(b, a)] += 1.0;
                }
            }
        }
    }
    w
}

/// A complete graph on `m` nodes with weights drawn from `[low, high]`.
pub fn strong_laplacian<R: Rng>(rng: &mut R, m: usize, low: f64, high: f64) -> GraphLaplacian {
    let mut a = DMatrix::zeros(m, m);
    for j in 1..m {
        for i in 0..j {
            let w = rng.random_range(low..high);
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    let degree = a.row_sum();
    let mut l = -a;
    for i in 0..m {
        l[(i, i)] = degree[i];
    }
    GraphLaplacian::new(l).unwrap()
}

/// Centred symmetric noise with i.i.d. `N(0, sd²)` tangent coordinates:
/// `Hᵀ vech*⁻¹(z) H`.
pub fn tangent_noise<R: Rng>(rng: &mut R, m: usize, sd: f64) -> DMatrix<f64> {
    let z = DVector::from_fn(tangent_dim(m), |_, _| sd * rng.sample::<f64, _>(StandardNormal));
    HelmertSubMatrix::new(m)
        .unwrap()
        .expand(&vech_star_inv(&z).unwrap())
        .unwrap()
}

/// `L = P₁(G_α(F_α(μ) + E))` with `E` from [`tangent_noise`].
pub fn perturbed<R: Rng>(
    rng: &mut R,
    mu: &GraphLaplacian,
    sd: f64,
    config: &AnalysisConfig,
    projector: &mut Projector,
) -> GraphLaplacian {
    let centre = f_alpha(mu, config.alpha).unwrap();
    let q = centre.matrix() + tangent_noise(rng, mu.dim(), sd);
    projector.reconstruct(&q, config.alpha, config.reverse).unwrap()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Kolmogorov–Smirnov distance between a sample and the uniform law on [0, 1].
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(k, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((k as f64 + 1.0) / n - x).abs().max((x - k as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}
