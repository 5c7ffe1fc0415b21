//! Extrinsic sample means and interpolation paths.

use log::{debug, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AnalysisConfig, GpaSettings};
use crate::error::{ensure_same_dim, Error, Result};
use crate::laplacian::GraphLaplacian;
use crate::metrics::{embedded_distance, f_alpha, opa_centred, EmbeddedPoint, Geometry};
use crate::projection::Projector;
use crate::sample::NetworkSample;
use crate::tangent::{from_tangent, to_tangent};

#[derive(Debug, Clone)]
pub struct MeanResult {
    /// Mean in the embedding space.
    pub eta_hat: EmbeddedPoint,
    /// `P₁(G_α(η̂))`.
    pub mu_hat: GraphLaplacian,
    pub geometry: Geometry,
    pub alpha: f64,
    pub gpa: Option<GpaReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpaReport {
    pub iterations: usize,
    /// Procrustes distance moved by the mean in the last iteration.
    pub last_delta: f64,
    pub converged: bool,
}

/// Arithmetic mean of embedded points.
pub fn euclidean_embedding_mean(points: &[EmbeddedPoint]) -> Result<EmbeddedPoint> {
    let first = points.first().ok_or(Error::EmptySample)?;
    let m = first.dim();
    let mut sum = DMatrix::zeros(m, m);
    for p in points {
        ensure_same_dim(m, p.dim())?;
        sum += p.matrix();
    }
    Ok(EmbeddedPoint::from_parts_unchecked(
        sum / points.len() as f64,
        first.alpha(),
    ))
}

/// Generalised Procrustes mean: starting from the first point, align every
/// point to the current mean and average, until the mean moves less than
/// the tolerance.
pub fn gpa_mean(points: &[EmbeddedPoint], settings: &GpaSettings) -> Result<(EmbeddedPoint, GpaReport)> {
    let first = points.first().ok_or(Error::EmptySample)?;
    for p in points {
        ensure_same_dim(first.dim(), p.dim())?;
    }
    let n = points.len() as f64;
    let mut mean = first.matrix().clone();
    let mut delta = f64::INFINITY;
    for iteration in 1..=settings.max_iterations {
        let aligned: Vec<DMatrix<f64>> = points
            .par_iter()
            .map(|p| opa_centred(&mean, p.matrix()).map(|r| p.matrix() * r))
            .collect::<Result<_>>()?;
        let next = aligned
            .iter()
            .fold(DMatrix::zeros(mean.nrows(), mean.ncols()), |acc, a| acc + a)
            / n;
        // Movement modulo rotation: when a point is rank deficient its
        // alignment is not unique and the mean can drift along that orbit
        // without changing the objective.
        delta = embedded_distance(&next, &mean, Geometry::Procrustes)?;
        mean = next;
        if delta < settings.tolerance {
            debug!("GPA converged after {iteration} iterations (delta {delta:e})");
            let report = GpaReport {
                iterations: iteration,
                last_delta: delta,
                converged: true,
            };
            return Ok((EmbeddedPoint::from_parts_unchecked(mean, first.alpha()), report));
        }
    }
    warn!(
        "GPA stopped after {} iterations without converging (last movement {delta:e})",
        settings.max_iterations
    );
    let report = GpaReport {
        iterations: settings.max_iterations,
        last_delta: delta,
        converged: false,
    };
    Ok((EmbeddedPoint::from_parts_unchecked(mean, first.alpha()), report))
}

/// Maps an embedding-space point back to `L_m` with the configured reverse
/// map and the nearest-Laplacian projection.
pub fn reconstruct(q: &DMatrix<f64>, config: &AnalysisConfig, projector: &mut Projector) -> Result<GraphLaplacian> {
    projector.reconstruct(q, config.alpha, config.reverse)
}

fn finish(
    sample: &NetworkSample,
    eta_hat: EmbeddedPoint,
    config: &AnalysisConfig,
    gpa: Option<GpaReport>,
) -> Result<MeanResult> {
    let mut projector = Projector::new(config.qp);
    let mut mu_hat = reconstruct(eta_hat.matrix(), config, &mut projector)?;
    if let Some(labels) = sample.node_labels() {
        mu_hat = mu_hat.with_labels(labels.to_vec())?;
    }
    Ok(MeanResult {
        eta_hat,
        mu_hat,
        geometry: config.geometry,
        alpha: config.alpha,
        gpa,
    })
}

/// `η̂ = (1/n) Σ F_α(L_k)` and `μ̂ = P₁(G_α(η̂))`.
pub fn mean_euclidean(sample: &NetworkSample, config: &AnalysisConfig) -> Result<MeanResult> {
    config.validate()?;
    let points = sample.embed(config.alpha)?;
    let eta_hat = euclidean_embedding_mean(&points)?;
    finish(
        sample,
        eta_hat,
        &AnalysisConfig {
            geometry: Geometry::Euclidean,
            ..*config
        },
        None,
    )
}

/// Procrustes mean by GPA on the embedded points.
pub fn mean_procrustes(sample: &NetworkSample, config: &AnalysisConfig) -> Result<MeanResult> {
    config.validate()?;
    let points = sample.embed(config.alpha)?;
    let (eta_hat, report) = gpa_mean(&points, &config.gpa)?;
    finish(
        sample,
        eta_hat,
        &AnalysisConfig {
            geometry: Geometry::Procrustes,
            ..*config
        },
        Some(report),
    )
}

/// Mean under the configured geometry.
pub fn sample_mean(sample: &NetworkSample, config: &AnalysisConfig) -> Result<MeanResult> {
    match config.geometry {
        Geometry::Euclidean => mean_euclidean(sample, config),
        Geometry::Procrustes => mean_procrustes(sample, config),
    }
}

/// Embedding-space mean of already embedded points under a geometry.
pub fn embedding_mean(points: &[EmbeddedPoint], config: &AnalysisConfig) -> Result<EmbeddedPoint> {
    match config.geometry {
        Geometry::Euclidean => euclidean_embedding_mean(points),
        Geometry::Procrustes => gpa_mean(points, &config.gpa).map(|(mean, _)| mean),
    }
}

/// Point at parameter `c` on the path through `L₁` (`c = 0`) and `L₂`
/// (`c = 1`): `P₁(G_α(π_ν(c π_ν⁻¹(F_α(L₂)))))` with `ν = F_α(L₁)`. Values
/// outside `[0, 1]` extrapolate.
pub fn interpolate(
    l1: &GraphLaplacian,
    l2: &GraphLaplacian,
    c: f64,
    config: &AnalysisConfig,
) -> Result<GraphLaplacian> {
    let mut path = interpolation_path(l1, l2, &[c], config)?;
    Ok(path.remove(0))
}

/// Several path points, warm-starting each projection from the previous one.
pub fn interpolation_path(
    l1: &GraphLaplacian,
    l2: &GraphLaplacian,
    cs: &[f64],
    config: &AnalysisConfig,
) -> Result<Vec<GraphLaplacian>> {
    config.validate()?;
    ensure_same_dim(l1.dim(), l2.dim())?;
    if let Some(c) = cs.iter().find(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!("path parameter {c} is not finite")));
    }
    let nu = f_alpha(l1, config.alpha)?;
    let x2 = f_alpha(l2, config.alpha)?;
    let v = to_tangent(&x2, &nu, config.geometry)?;
    let mut projector = Projector::new(config.qp);
    let labels = l1.labels().or(l2.labels()).map(<[String]>::to_vec);
    cs.iter()
        .map(|&c| {
            let point = from_tangent(&v.scaled(c), &nu)?;
            let mut l = reconstruct(point.matrix(), config, &mut projector)?;
            if let Some(labels) = &labels {
                l = l.with_labels(labels.clone())?;
            }
            Ok(l)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{dist_euclidean, dist_procrustes};
    use crate::synth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_of(ls: Vec<GraphLaplacian>) -> NetworkSample {
        NetworkSample::new(ls).unwrap()
    }

    fn max_diff(a: &GraphLaplacian, b: &GraphLaplacian) -> f64 {
        (a.matrix() - b.matrix()).amax()
    }

    #[test]
    fn identical_elements_give_that_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = synth::random_laplacian(&mut rng, 6, 0.6);
        let s = sample_of(vec![l.clone(), l.clone(), l.clone()]);
        for config in [
            AnalysisConfig::euclidean(),
            AnalysisConfig::sqrt(),
            AnalysisConfig::procrustes(),
        ] {
            let mean = sample_mean(&s, &config).unwrap();
            assert!(max_diff(&mean.mu_hat, &l) < 1e-8, "{}", config.describe());
        }
    }

    #[test]
    fn single_element_mean_is_that_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = synth::random_laplacian(&mut rng, 5, 0.7);
        let s = sample_of(vec![l.clone()]);
        for config in [
            AnalysisConfig::euclidean(),
            AnalysisConfig::sqrt(),
            AnalysisConfig::procrustes(),
        ] {
            let mean = sample_mean(&s, &config).unwrap();
            assert!(max_diff(&mean.mu_hat, &l) < 1e-8);
        }
    }

    #[test]
    fn alpha_one_mean_is_elementwise_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l1 = synth::random_laplacian(&mut rng, 5, 0.5);
        let l2 = synth::random_laplacian(&mut rng, 5, 0.5);
        let mean = mean_euclidean(&sample_of(vec![l1.clone(), l2.clone()]), &AnalysisConfig::euclidean()).unwrap();
        let average = (l1.matrix() + l2.matrix()) * 0.5;
        assert_eq!(mean.mu_hat.matrix(), &average);
        assert_eq!(mean.eta_hat.matrix(), &average);
    }

    #[test]
    fn mean_is_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ls: Vec<_> = (0..4).map(|_| synth::random_laplacian(&mut rng, 5, 0.7)).collect();
        let mut reversed = ls.clone();
        reversed.reverse();
        for config in [AnalysisConfig::sqrt(), AnalysisConfig::procrustes()] {
            let a = sample_mean(&sample_of(ls.clone()), &config).unwrap();
            let b = sample_mean(&sample_of(reversed.clone()), &config).unwrap();
            assert!(max_diff(&a.mu_hat, &b.mu_hat) < 1e-6, "{}", config.describe());
        }
    }

    #[test]
    fn gpa_mean_is_locally_optimal_for_two_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = AnalysisConfig::procrustes();
        let points: Vec<_> = (0..2)
            .map(|_| f_alpha(&synth::random_laplacian(&mut rng, 5, 0.7), 0.5).unwrap())
            .collect();
        let (eta, _) = gpa_mean(&points, &config.gpa).unwrap();
        let objective = |c: &DMatrix<f64>| -> f64 {
            points
                .iter()
                .map(|p| {
                    crate::metrics::embedded_distance(c, p.matrix(), Geometry::Procrustes)
                        .unwrap()
                        .powi(2)
                })
                .sum()
        };
        let best = objective(eta.matrix());
        for _ in 0..100 {
            let candidate = eta.matrix() + synth::random_centred_symmetric(&mut rng, 5, 0.05);
            assert!(objective(&candidate) >= best - 1e-10);
        }
    }

    #[test]
    fn procrustes_mean_of_rotated_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let l = synth::random_laplacian(&mut rng, 5, 0.8);
        let x = f_alpha(&l, 0.5).unwrap();
        let r0 = synth::random_centred_orthogonal(&mut rng, 5);
        let rotated = EmbeddedPoint::new(x.matrix() * r0, 0.5).unwrap();
        let (eta, _) = gpa_mean(&[x.clone(), rotated], &GpaSettings::default()).unwrap();
        let d = crate::metrics::embedded_distance(x.matrix(), eta.matrix(), Geometry::Procrustes).unwrap();
        assert!(d < 1e-9);
        let mu = reconstruct(eta.matrix(), &AnalysisConfig::procrustes(), &mut Projector::default()).unwrap();
        assert!(dist_procrustes(&mu, &l, 0.5).unwrap() < 1e-8);
    }

    #[test]
    fn interpolation_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l1 = synth::random_laplacian(&mut rng, 6, 0.6);
        let l2 = synth::random_laplacian(&mut rng, 6, 0.6);
        for config in [
            AnalysisConfig::euclidean(),
            AnalysisConfig::sqrt(),
            AnalysisConfig::procrustes(),
        ] {
            let path = interpolation_path(&l1, &l2, &[0.0, 1.0], &config).unwrap();
            assert!(max_diff(&path[0], &l1) < 1e-7, "{}", config.describe());
            assert!(max_diff(&path[1], &l2) < 1e-7, "{}", config.describe());
        }
    }

    #[test]
    fn alpha_one_path_is_convex_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l1 = synth::random_laplacian(&mut rng, 5, 0.6);
        let l2 = synth::random_laplacian(&mut rng, 5, 0.6);
        let mid = interpolate(&l1, &l2, 0.5, &AnalysisConfig::euclidean()).unwrap();
        let expected = (l1.matrix() + l2.matrix()) * 0.5;
        assert!((mid.matrix() - expected).amax() < 1e-14);
    }

    #[test]
    fn extrapolation_stays_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l1 = synth::random_laplacian(&mut rng, 5, 0.6);
        let l2 = synth::random_laplacian(&mut rng, 5, 0.6);
        for config in [
            AnalysisConfig::euclidean(),
            AnalysisConfig::sqrt(),
            AnalysisConfig::procrustes(),
        ] {
            for l in interpolation_path(&l1, &l2, &[-5.0, 0.5, 6.0], &config).unwrap() {
                GraphLaplacian::new(l.matrix().clone()).unwrap();
            }
        }
        assert!(dist_euclidean(&l1, &l2, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(euclidean_embedding_mean(&[]).is_err());
        assert!(gpa_mean(&[], &GpaSettings::default()).is_err());
        let a = GraphLaplacian::zeros(3);
        let b = GraphLaplacian::zeros(4);
        assert!(interpolate(&a, &b, 0.5, &AnalysisConfig::sqrt()).is_err());
    }
}
