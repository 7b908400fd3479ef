//! Dirichlet problems for the nonlocal p-Laplacian by minimising
//!
//! `J(u) = (1/p) Σ_{i≠j} |u_i − u_j|^p / (ρ^{sp} V(i,ρ)^{(p−1)/p}) μ_i μ_j − Σ_i rhs_i u_i μ_i`
//!
//! over fields that match the boundary values. The kernel keeps the
//! first-argument ball normalisation; the gradient therefore carries the
//! sum of both orientations of each pair.

use std::collections::BTreeMap;

use serde::Serialize;

use super::NonlocalParams;
use crate::error::{Error, Result};
use crate::functionals::ScalarField;
use crate::parallel;
use crate::space::MetricMeasureSpace;

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletProblem {
    pub rhs: ScalarField,
    /// Point id → prescribed value.
    pub boundary: BTreeMap<usize, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop when the weighted ℓ² residual on the interior drops below this.
    pub residual_tol: f64,
    /// Stop when an accepted step lowers the energy by at most this,
    /// relatively (0 disables the test).
    pub energy_rtol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Compare the analytic gradient with central differences before solving.
    pub check_gradient: bool,
    pub fd_step: f64,
    pub fd_rtol: f64,
    /// Smoothing factor for `p < 2`, relative to the data scale.
    pub smoothing: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            residual_tol: 1e-8,
            energy_rtol: 0.0,
            armijo: 1e-4,
            max_backtracks: 80,
            check_gradient: true,
            fd_step: 1e-6,
            fd_rtol: 1e-4,
            smoothing: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Residual,
    EnergyStagnation,
    LineSearch,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub solution: ScalarField,
    /// `J` evaluated directly at the solution.
    pub energy: f64,
    /// `(Σ_{interior} μ_i (μ_i^{-1} ∂J/∂u_i)²)^{1/2}`.
    pub residual: f64,
    /// Euclidean norm of `∂J/∂u` restricted to the interior.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub energy_trace: Vec<f64>,
    pub step_trace: Vec<f64>,
    /// Relative error of the finite-difference gradient check, when run.
    pub gradient_check: Option<f64>,
}

/// Discrete energy with its pair weights precomputed.
#[derive(Clone, Debug)]
pub struct DirichletEnergy {
    n: usize,
    p: f64,
    eps: f64,
    /// `w_ij + w_ji`, row-major.
    sym: Vec<f64>,
    load: Vec<f64>,
    mu: Vec<f64>,
}

impl DirichletEnergy {
    /// `eps > 0` replaces `|t|^p` by `(t² + eps²)^{p/2} − eps^p`.
    pub fn new(
        space: &MetricMeasureSpace,
        rhs: &ScalarField,
        params: NonlocalParams,
        eps: f64,
    ) -> Result<Self> {
        params.validate()?;
        rhs.check(space)?;
        let n = space.len();
        let mu = space.weights().to_vec();
        let (sp, vexp) = (params.s * params.p, (params.p - 1.0) / params.p);
        let w: Vec<Vec<f64>> = parallel::map_rows(n, |i| {
            let row = space.pair_row(i);
            (0..n)
                .map(|j| {
                    if j == i {
                        0.0
                    } else {
                        mu[i] * mu[j] / (row.dist[j].powf(sp) * row.vol[j].powf(vexp))
                    }
                })
                .collect()
        });
        let mut sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sym[i * n + j] = w[i][j] + w[j][i];
            }
        }
        let load = rhs.values().iter().zip(&mu).map(|(r, m)| r * m).collect();
        Ok(Self {
            n,
            p: params.p,
            eps,
            sym,
            load,
            mu,
        })
    }

    #[inline]
    fn pair_energy(&self, t: f64) -> f64 {
        if self.eps > 0.0 {
            (t * t + self.eps * self.eps).powf(0.5 * self.p) - self.eps.powf(self.p)
        } else {
            t.abs().powf(self.p)
        }
    }

    #[inline]
    fn pair_slope(&self, t: f64) -> f64 {
        if self.eps > 0.0 {
            (t * t + self.eps * self.eps).powf(0.5 * self.p - 1.0) * t
        } else {
            super::signed_power(t, self.p)
        }
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let n = self.n;
        let pairs = parallel::sum_rows(n, |i| {
            let mut acc = 0.0;
            for j in (i + 1)..n {
                acc += self.pair_energy(u[i] - u[j]) * self.sym[i * n + j];
            }
            acc
        });
        let load = u.iter().zip(&self.load).fold(0.0, |a, (x, b)| a + x * b);
        pairs / self.p - load
    }

    /// `ψ(x + h) − ψ(x)` for the pair energy `ψ`, accurate relative to the result.
    #[inline]
    fn pair_change(&self, x: f64, h: f64) -> f64 {
        if h == 0.0 {
            return 0.0;
        }
        if self.eps > 0.0 {
            let a = x * x + self.eps * self.eps;
            let q = (2.0 * x + h) * h / a;
            return a.powf(0.5 * self.p) * (0.5 * self.p * q.ln_1p()).exp_m1();
        }
        if x == 0.0 {
            return h.abs().powf(self.p);
        }
        let r = h / x;
        if r > -1.0 {
            x.abs().powf(self.p) * (self.p * r.ln_1p()).exp_m1()
        } else {
            (x + h).abs().powf(self.p) - x.abs().powf(self.p)
        }
    }

    /// `J(v) − J(u)`, summed from per-pair differences.
    pub fn change(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let pairs = parallel::sum_rows(n, |i| {
            let mut acc = 0.0;
            for j in (i + 1)..n {
                let x = u[i] - u[j];
                acc += self.pair_change(x, (v[i] - v[j]) - x) * self.sym[i * n + j];
            }
            acc
        });
        let load = (0..n).fold(0.0, |a, k| a + (v[k] - u[k]) * self.load[k]);
        pairs / self.p - load
    }

    /// Full gradient `∂J/∂u_k` (boundary entries included).
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        parallel::map_rows(n, |k| {
            let mut acc = 0.0;
            for j in 0..n {
                if j != k {
                    acc += self.pair_slope(u[k] - u[j]) * self.sym[k * n + j];
                }
            }
            acc - self.load[k]
        })
    }

    /// Relative error between the gradient and central differences of the
    /// energy over the listed coordinates.
    pub fn finite_difference_error(&self, u: &[f64], coords: &[usize], step: f64) -> f64 {
        let g = self.gradient(u);
        let mut work = u.to_vec();
        let (mut diff, mut norm_g, mut norm_fd) = (0.0_f64, 0.0_f64, 0.0_f64);
        for &k in coords {
            let h = step * u[k].abs().max(1.0);
            work[k] = u[k] + h;
            let plus = self.energy(&work);
            work[k] = u[k] - h;
            let minus = self.energy(&work);
            work[k] = u[k];
            let fd = (plus - minus) / (2.0 * h);
            diff += (fd - g[k]).powi(2);
            norm_g += g[k] * g[k];
            norm_fd += fd * fd;
        }
        let scale = norm_g.max(norm_fd).sqrt();
        if scale == 0.0 {
            0.0
        } else {
            diff.sqrt() / scale
        }
    }

    fn residual(&self, g: &[f64], interior: &[usize]) -> f64 {
        interior
            .iter()
            .map(|&k| g[k] * g[k] / self.mu[k])
            .sum::<f64>()
            .sqrt()
    }
}

/// Armijo backtracking by halving, refined by the minimiser of the quadratic
/// through `J(0)`, `J'(0)` and `J(α)` when that also passes the test.
/// `change(α)` is `J(u + α d) − J(u)`.
fn armijo_step(
    change: &impl Fn(f64) -> f64,
    slope: f64,
    mut alpha: f64,
    options: &SolverOptions,
) -> Option<(f64, f64)> {
    for _ in 0..options.max_backtracks {
        let dj = change(alpha);
        if dj.is_finite() && dj < 0.0 && dj <= options.armijo * alpha * slope {
            let curv = dj - slope * alpha;
            let mut best = (alpha, dj);
            if curv > 0.0 {
                let aq = -slope * alpha * alpha / (2.0 * curv);
                if aq.is_finite() && aq > 0.0 && aq != alpha {
                    let djq = change(aq);
                    if djq < best.1 && djq <= options.armijo * aq * slope {
                        best = (aq, djq);
                    }
                }
            }
            return Some(best);
        }
        alpha *= 0.5;
    }
    None
}

/// Minimises the Dirichlet energy by nonlinear conjugate gradients
/// (Polak–Ribière+, steepest-descent restarts) with Armijo backtracking.
/// Energy changes along the search line are evaluated pair by pair, so the
/// line search stays reliable after the decreases fall below the rounding
/// level of `J` itself; the recorded trace accumulates these changes.
pub fn solve_dirichlet(
    space: &MetricMeasureSpace,
    problem: &DirichletProblem,
    params: NonlocalParams,
    options: &SolverOptions,
) -> Result<SolveReport> {
    params.validate()?;
    problem.rhs.check(space)?;
    let n = space.len();
    if problem.boundary.is_empty() {
        return Err(Error::Degenerate(
            "Dirichlet problem needs boundary values".into(),
        ));
    }
    if let Some((&k, &v)) = problem
        .boundary
        .iter()
        .find(|(k, v)| **k >= n || !v.is_finite())
    {
        return Err(Error::Config(format!("invalid boundary entry {k} → {v}")));
    }
    let interior: Vec<usize> = (0..n)
        .filter(|k| !problem.boundary.contains_key(k))
        .collect();
    if interior.is_empty() {
        return Err(Error::Degenerate(
            "Dirichlet problem has no interior points".into(),
        ));
    }

    let scale = problem
        .boundary
        .values()
        .fold(problem.rhs.sup_norm(), |m, v| m.max(v.abs()));
    let eps = if params.p < 2.0 {
        options.smoothing * if scale > 0.0 { scale } else { 1.0 }
    } else {
        0.0
    };
    let energy = DirichletEnergy::new(space, &problem.rhs, params, eps)?;

    let mean = problem.boundary.values().sum::<f64>() / problem.boundary.len() as f64;
    let mut u = vec![mean; n];
    for (&k, &v) in &problem.boundary {
        u[k] = v;
    }

    let gradient_check = if options.check_gradient {
        let mut probe = u.clone();
        let amp = if scale > 0.0 { 0.1 * scale } else { 0.1 };
        for (m, &k) in interior.iter().enumerate() {
            probe[k] += amp * ((m as f64 + 1.0) * 1.618).sin();
        }
        let err = energy.finite_difference_error(&probe, &interior, options.fd_step);
        if err > options.fd_rtol {
            return Err(Error::GradientCheck {
                rel_error: err,
                tolerance: options.fd_rtol,
            });
        }
        Some(err)
    } else {
        None
    };

    let project = |g: &mut Vec<f64>| {
        for &k in problem.boundary.keys() {
            g[k] = 0.0;
        }
    };
    let dot = |a: &[f64], b: &[f64]| interior.iter().fold(0.0, |acc, &k| acc + a[k] * b[k]);

    let mut j_cur = energy.energy(&u);
    let mut g = energy.gradient(&u);
    project(&mut g);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut energy_trace = vec![j_cur];
    let mut step_trace = Vec::new();
    let mut prev_slope = f64::NAN;
    let mut prev_alpha = f64::NAN;
    let mut iterations = 0;

    let stop_reason = loop {
        if energy.residual(&g, &interior) < options.residual_tol {
            break StopReason::Residual;
        }
        if iterations >= options.max_iter {
            break StopReason::IterationCap;
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let gmax = interior.iter().fold(0.0_f64, |m, &k| m.max(g[k].abs()));
        let alpha = if prev_alpha.is_finite() {
            (prev_alpha * prev_slope / slope).clamp(1e-20, 1e20)
        } else {
            1.0 / gmax.max(1e-300)
        };

        let change = |a: f64| {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x + a * y).collect();
            energy.change(&u, &trial)
        };
        let Some((alpha, dj)) = armijo_step(&change, slope, alpha, options) else {
            break StopReason::LineSearch;
        };
        for k in 0..n {
            u[k] += alpha * d[k];
        }
        iterations += 1;
        j_cur += dj;
        energy_trace.push(j_cur);
        step_trace.push(alpha);

        let mut g_new = energy.gradient(&u);
        project(&mut g_new);
        let beta = {
            let num = interior
                .iter()
                .fold(0.0, |a, &k| a + g_new[k] * (g_new[k] - g[k]));
            (num / dot(&g, &g)).max(0.0)
        };
        for k in 0..n {
            d[k] = -g_new[k] + beta * d[k];
        }
        g = g_new;
        prev_slope = slope;
        prev_alpha = alpha;
        if -dj <= options.energy_rtol * j_cur.abs()
            && energy.residual(&g, &interior) >= options.residual_tol
        {
            break StopReason::EnergyStagnation;
        }
    };

    let j_final = energy.energy(&u);
    let residual = energy.residual(&g, &interior);
    let gradient_norm = dot(&g, &g).sqrt();
    if !(residual.is_finite() && j_cur.is_finite() && j_final.is_finite()) {
        return Err(Error::NonFinite("nonlocal solve".into()));
    }
    Ok(SolveReport {
        solution: ScalarField::new(u)?,
        energy: j_final,
        residual,
        gradient_norm,
        iterations,
        converged: residual < options.residual_tol,
        stop_reason,
        energy_trace,
        step_trace,
        gradient_check,
    })
}
