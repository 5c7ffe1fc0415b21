//! Nearest-Laplacian projection in Frobenius norm.
//!
//! Writing `L = L(w)` with `w_ij = -l_ij >= 0` for `i < j` and the diagonal
//! fixed by zero row sums removes the equality constraints, leaving
//!
//! ```text
//! minimise  ‖M w - diag(Y)‖² + 2 ‖w + offdiag(Y)‖²   subject to  w >= 0
//! ```
//!
//! where `M` is the `m x m(m-1)/2` node/edge incidence matrix. The Hessian
//! `4I + 2MᵀM` has `MMᵀ = (m-2)I + 11ᵀ`, so `(aI + 2MᵀM)⁻¹` is available in
//! closed form through Woodbury and Sherman–Morrison, and every ADMM step
//! costs O(m²). After ADMM the active set is polished with conjugate
//! gradients and a short primal–dual active-set loop, which recovers the
//! exact minimiser whenever the active set has been identified.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::GraphLaplacian;
use crate::metrics::{g_alpha, ReverseMapVariant};
use crate::tolerance::{scale_of, FEAS_TOL, SYM_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QpSettings {
    pub max_iterations: usize,
    /// Absolute tolerance, relative to the largest entry of the input.
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Initial ADMM penalty; `None` uses `4 sqrt(m)`, the geometric mean of
    /// the Hessian's extreme eigenvalues.
    pub rho: Option<f64>,
    pub adaptive_rho: bool,
    pub relaxation: f64,
    pub polish: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            eps_abs: 1e-8,
            eps_rel: 1e-8,
            rho: None,
            adaptive_rho: true,
            relaxation: 1.6,
            polish: true,
        }
    }
}

impl QpSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        if !(self.eps_abs > 0.0) || !(self.eps_rel > 0.0) {
            return Err(Error::InvalidParameter("QP tolerances must be positive".into()));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0) {
                return Err(Error::InvalidParameter("rho must be positive".into()));
            }
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidParameter("relaxation must lie in (0, 2)".into()));
        }
        Ok(())
    }
}

/// Diagnostics of the last solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Largest violation of the optimality conditions at the returned point,
    /// relative to the input scale.
    pub kkt_residual: f64,
    pub polished: bool,
    pub rho: f64,
}

#[derive(Debug, Clone)]
struct WarmStart {
    m: usize,
    z: Vec<f64>,
    dual: Vec<f64>,
    rho: f64,
}

/// Stateful projector that warm-starts each solve from the previous one.
/// Solves are single-threaded; use one projector per thread.
#[derive(Debug, Clone, Default)]
pub struct Projector {
    settings: QpSettings,
    warm: Option<WarmStart>,
    last: Option<SolveReport>,
}

impl Projector {
    pub fn new(settings: QpSettings) -> Self {
        Self {
            settings,
            warm: None,
            last: None,
        }
    }

    pub fn settings(&self) -> &QpSettings {
        &self.settings
    }

    pub fn last_report(&self) -> Option<&SolveReport> {
        self.last.as_ref()
    }

    pub fn reset(&mut self) {
        self.warm = None;
    }

    /// Nearest graph Laplacian to a symmetric matrix. Inputs that already
    /// satisfy the Laplacian constraints to within [`FEAS_TOL`] in absolute
    /// terms are returned unchanged; membership alone is scale-relative and
    /// would let large-magnitude inputs through with row sums above it.
    pub fn project(&mut self, y: &DMatrix<f64>) -> Result<GraphLaplacian> {
        self.settings.validate()?;
        if let Some(l) = GraphLaplacian::new(y.clone())
            .ok()
            .filter(|l| l.constraint_violation().max() <= FEAS_TOL)
        {
            self.last = Some(SolveReport {
                iterations: 0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                kkt_residual: 0.0,
                polished: false,
                rho: 0.0,
            });
            return Ok(l);
        }
        let problem = EdgeProblem::new(y)?;
        let warm = self.warm.take().filter(|w| w.m == problem.m);
        let (w, report, warm) = solve(&problem, &self.settings, warm)?;
        self.warm = Some(warm);
        self.last = Some(report);
        Ok(problem.laplacian(&w))
    }

    /// `P₁(G_α(q))`: reverse power map followed by projection.
    pub fn reconstruct(&mut self, q: &DMatrix<f64>, alpha: f64, variant: ReverseMapVariant) -> Result<GraphLaplacian> {
        let g = g_alpha(q, alpha, variant)?;
        self.project(&g)
    }
}

/// One-shot projection with the given settings.
pub fn project_to_laplacian(y: &DMatrix<f64>, settings: &QpSettings) -> Result<GraphLaplacian> {
    Projector::new(*settings).project(y)
}

/// Edge `e` for `i < j` is `j(j-1)/2 + i`.
struct EdgeProblem {
    m: usize,
    scale: f64,
    y_diag: Vec<f64>,
    y_off: Vec<f64>,
    g0: Vec<f64>,
}

impl EdgeProblem {
    fn new(y: &DMatrix<f64>) -> Result<Self> {
        let (m, c) = y.shape();
        crate::error::ensure_same_dim(m, c)?;
        let scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let tol = SYM_TOL * scale_of(y.iter().copied());
        let mut y_off = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for j in 1..m {
            for i in 0..j {
                let (a, b) = (y[(i, j)], y[(j, i)]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::ConstraintViolation {
                        constraint: "finite entry",
                        i,
                        j,
                        value: a + b,
                    });
                }
                if (a - b).abs() > tol {
                    return Err(Error::ConstraintViolation {
                        constraint: "symmetry",
                        i,
                        j,
                        value: a - b,
                    });
                }
                y_off.push(0.5 * (a + b));
            }
        }
        let y_diag: Vec<f64> = (0..m).map(|i| y[(i, i)]).collect();
        let mut g0 = incidence_t(m, &y_diag);
        for (g, yo) in g0.iter_mut().zip(&y_off) {
            *g = -2.0 * *g + 4.0 * yo;
        }
        Ok(Self {
            m,
            scale,
            y_diag,
            y_off,
            g0,
        })
    }

    fn n(&self) -> usize {
        self.y_off.len()
    }

    /// `H v = 4v + 2 Mᵀ M v`.
    fn hessian_apply(&self, v: &[f64], out: &mut [f64]) {
        let mv = incidence(self.m, v);
        let mtmv = incidence_t(self.m, &mv);
        for ((o, vi), t) in out.iter_mut().zip(v).zip(&mtmv) {
            *o = 4.0 * vi + 2.0 * t;
        }
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        self.hessian_apply(w, &mut g);
        for (gi, g0) in g.iter_mut().zip(&self.g0) {
            *gi += g0;
        }
        g
    }

    /// Solves `(aI + 2MᵀM) x = b` with `a = 4 + ρ`.
    fn shifted_solve(&self, rho: f64, b: &[f64], x: &mut [f64]) {
        let m = self.m as f64;
        let a = 4.0 + rho;
        let c = a / 2.0 + m - 2.0;
        let mb = incidence(self.m, b);
        let total: f64 = mb.iter().sum();
        let shift = total / (c + m);
        let t: Vec<f64> = mb.iter().map(|v| (v - shift) / c).collect();
        let mtt = incidence_t(self.m, &t);
        for ((xi, bi), ti) in x.iter_mut().zip(b).zip(&mtt) {
            *xi = (bi - ti) / a;
        }
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let d = incidence(self.m, w);
        let diag: f64 = d.iter().zip(&self.y_diag).map(|(a, b)| (a - b).powi(2)).sum();
        let off: f64 = w.iter().zip(&self.y_off).map(|(a, b)| (a + b).powi(2)).sum();
        diag + 2.0 * off
    }

    fn laplacian(&self, w: &[f64]) -> GraphLaplacian {
        let m = self.m;
        let mut l = DMatrix::zeros(m, m);
        let mut e = 0;
        for j in 1..m {
            for i in 0..j {
                let v = w[e];
                l[(i, j)] = -v;
                l[(j, i)] = -v;
                l[(i, i)] += v;
                l[(j, j)] += v;
                e += 1;
            }
        }
        GraphLaplacian::from_parts_unchecked(l)
    }

    /// Optimality violation at a feasible `w`, relative to the input scale.
    fn kkt_residual(&self, w: &[f64]) -> f64 {
        let g = self.gradient(w);
        let worst = w.iter().zip(&g).fold(0.0_f64, |acc, (wi, gi)| {
            let v = if *wi > 0.0 { gi.abs() } else { (-gi).max(0.0) };
            acc.max(v).max((-wi).max(0.0))
        });
        worst / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Node degrees `M w`.
fn incidence(m: usize, w: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; m];
    let mut e = 0;
    for j in 1..m {
        let mut dj = 0.0;
        for di in d.iter_mut().take(j) {
            let v = w[e];
            *di += v;
            dj += v;
            e += 1;
        }
        d[j] += dj;
    }
    d
}

/// `Mᵀ v`: edge `(i, j)` receives `v_i + v_j`.
fn incidence_t(m: usize, v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for j in 1..m {
        let vj = v[j];
        out.extend(v[..j].iter().map(|vi| vi + vj));
    }
    out
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn solve(
    problem: &EdgeProblem,
    settings: &QpSettings,
    warm: Option<WarmStart>,
) -> Result<(Vec<f64>, SolveReport, WarmStart)> {
    let n = problem.n();
    let m = problem.m;
    if n == 0 || problem.scale == 0.0 {
        let w = vec![0.0; n];
        let report = SolveReport {
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            kkt_residual: 0.0,
            polished: false,
            rho: 0.0,
        };
        let warm = WarmStart {
            m,
            z: w.clone(),
            dual: w.clone(),
            rho: 4.0 * (m as f64).sqrt(),
        };
        return Ok((w, report, warm));
    }

    let (mut z, mut u, mut rho) = match warm {
        Some(w) => {
            let u = w.dual.iter().map(|y| y / w.rho).collect();
            (w.z, u, w.rho)
        }
        None => {
            let z: Vec<f64> = problem.y_off.iter().map(|y| (-y).max(0.0)).collect();
            (z, vec![0.0; n], settings.rho.unwrap_or(4.0 * (m as f64).sqrt()))
        }
    };

    let eps_abs = settings.eps_abs * problem.scale;
    let mut x = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut z_prev = vec![0.0; n];
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=settings.max_iterations {
        iterations = k;
        for e in 0..n {
            rhs[e] = -problem.g0[e] + rho * (z[e] - u[e]);
        }
        problem.shifted_solve(rho, &rhs, &mut x);
        z_prev.copy_from_slice(&z);
        let relax = settings.relaxation;
        let mut primal_acc = 0.0_f64;
        let mut dual_acc = 0.0_f64;
        for e in 0..n {
            let x_hat = relax * x[e] + (1.0 - relax) * z_prev[e];
            let z_new = (x_hat + u[e]).max(0.0);
            u[e] += x_hat - z_new;
            z[e] = z_new;
            primal_acc = primal_acc.max((x[e] - z_new).abs());
            dual_acc = dual_acc.max((z_new - z_prev[e]).abs());
        }
        primal = primal_acc;
        dual = rho * dual_acc;

        let eps_primal = eps_abs + settings.eps_rel * inf_norm(&x).max(inf_norm(&z));
        let eps_dual = eps_abs + settings.eps_rel * rho * inf_norm(&u);
        if primal <= eps_primal && dual <= eps_dual {
            converged = true;
            break;
        }

        if settings.adaptive_rho && k % 25 == 0 {
            let primal_rel = primal / inf_norm(&x).max(inf_norm(&z)).max(f64::MIN_POSITIVE);
            let dual_rel = dual / (rho * inf_norm(&u)).max(f64::MIN_POSITIVE);
            let ratio = (primal_rel / dual_rel.max(f64::MIN_POSITIVE)).sqrt();
            if !(0.2..=5.0).contains(&ratio) {
                let new_rho = (rho * ratio).clamp(1e-6, 1e6 * (m as f64));
                for ue in u.iter_mut() {
                    *ue *= rho / new_rho;
                }
                rho = new_rho;
            }
        }
    }

    let mut w = z.clone();
    let mut polished = false;
    if settings.polish {
        if let Some(p) = polish(problem, &z) {
            if problem.objective(&p) <= problem.objective(&w) + 1e-12 * problem.scale.powi(2) {
                w = p;
                polished = true;
            }
        }
    }
    let kkt = problem.kkt_residual(&w);
    if !converged && !(polished && kkt <= settings.eps_abs) {
        return Err(Error::NonConvergence {
            solver: "Laplacian projection QP",
            iterations,
            primal,
            dual,
        });
    }

    let report = SolveReport {
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        kkt_residual: kkt,
        polished,
        rho,
    };
    let warm = WarmStart {
        m,
        dual: u.iter().map(|v| v * rho).collect(),
        z: w.clone(),
        rho,
    };
    Ok((w, report, warm))
}

/// Exact minimiser on a guessed active set, refined by primal–dual
/// active-set swaps. `None` if the loop does not settle.
fn polish(problem: &EdgeProblem, z: &[f64]) -> Option<Vec<f64>> {
    let n = problem.n();
    let mut free: Vec<bool> = z.iter().map(|v| *v > 0.0).collect();
    let mut w = z.to_vec();
    let grad_tol = 1e-11 * problem.scale.max(f64::MIN_POSITIVE);
    for _ in 0..50 {
        w = restricted_minimiser(problem, &free, &w)?;
        let g = problem.gradient(&w);
        let mut changed = false;
        for e in 0..n {
            if free[e] && w[e] < 0.0 {
                if w[e] < -grad_tol {
                    free[e] = false;
                    changed = true;
                }
            } else if !free[e] && g[e] < -grad_tol {
                free[e] = true;
                changed = true;
            }
        }
        if !changed {
            for (e, we) in w.iter_mut().enumerate() {
                if !free[e] || *we < 0.0 {
                    *we = 0.0;
                }
            }
            return Some(w);
        }
    }
    None
}

/// Minimises the objective with `w_e = 0` off `free`, by conjugate gradients
/// on the restricted Hessian (condition number at most `m`).
fn restricted_minimiser(problem: &EdgeProblem, free: &[bool], start: &[f64]) -> Option<Vec<f64>> {
    let n = problem.n();
    let mask = |v: &mut [f64]| {
        for (vi, f) in v.iter_mut().zip(free) {
            if !f {
                *vi = 0.0;
            }
        }
    };
    let mut w = start.to_vec();
    mask(&mut w);
    let mut r = problem.gradient(&w);
    for ri in r.iter_mut() {
        *ri = -*ri;
    }
    mask(&mut r);
    let mut p = r.clone();
    let mut hp = vec![0.0; n];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let target = (1e-15 * inf_norm(&problem.g0).max(f64::MIN_POSITIVE)).powi(2) * n as f64;
    let max_iter = 10 * (problem.m + 50);
    for _ in 0..max_iter {
        if rr <= target {
            return Some(w);
        }
        problem.hessian_apply(&p, &mut hp);
        mask(&mut hp);
        let php: f64 = p.iter().zip(&hp).map(|(a, b)| a * b).sum();
        if !(php > 0.0) {
            return Some(w);
        }
        let step = rr / php;
        for e in 0..n {
            w[e] += step * p[e];
            r[e] -= step * hp[e];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        for e in 0..n {
            p[e] = r[e] + beta * p[e];
        }
        rr = rr_new;
    }
    // Rounding floor above target: accept if the residual is tiny anyway.
    (rr.sqrt() <= 1e-10 * inf_norm(&problem.g0).max(f64::MIN_POSITIVE)).then_some(w)
}
