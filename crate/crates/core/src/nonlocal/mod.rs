//! Nonlocal p-Laplacian: evaluation, Dirichlet solves by energy
//! minimisation, the ball Poincaré check and regularity probes.

mod equivalence;
mod holder;
mod poincare;
mod solver;

pub use equivalence::{energy_equivalence_report, EquivalenceReport, EquivalenceRow};
pub use holder::{holder_probe, HolderNorms, HolderProbe, OscillationRow, ALPHA_SWEEP};
pub use poincare::{poincare_check, PoincareReport};
pub use solver::{
    solve_dirichlet, DirichletEnergy, DirichletProblem, SolveReport, SolverOptions, StopReason,
};

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Result};
use crate::functionals::ScalarField;
use crate::parallel;
use crate::space::MetricMeasureSpace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlocalParams {
    pub s: f64,
    pub p: f64,
}

impl NonlocalParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        let params = Self { s, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_param(
            "s",
            self.s,
            self.s > 0.0 && self.s < 1.0,
            "smoothness must lie in (0, 1)",
        )?;
        check_param("p", self.p, self.p >= 1.0, "exponent must be at least 1")
    }
}

/// `|t|^{p−2} t`, taken as 0 at `t = 0`.
#[inline]
pub(crate) fn signed_power(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

/// `(L f)_i = Σ_{j≠i} |f_i − f_j|^{p−2}(f_i − f_j) / (ρ^{sp} V(i,ρ)^{(p−1)/p}) · μ_j`.
pub fn apply_nonlocal_p_laplacian(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    params: NonlocalParams,
) -> Result<ScalarField> {
    params.validate()?;
    f.check(space)?;
    if space.len() < 2 {
        return Err(crate::Error::Degenerate(
            "operator needs at least two points".into(),
        ));
    }
    let vals = f.values();
    let mu = space.weights();
    let (sp, vexp) = (params.s * params.p, (params.p - 1.0) / params.p);
    let out = parallel::map_rows(space.len(), |i| {
        let row = space.pair_row(i);
        let mut acc = 0.0;
        for j in 0..space.len() {
            if j != i {
                let kernel = row.dist[j].powf(sp) * row.vol[j].powf(vexp);
                acc += signed_power(vals[i] - vals[j], params.p) / kernel * mu[j];
            }
        }
        acc
    });
    ScalarField::new(out)
}

/// Operator with the kernel averaged over both centres:
/// `Σ_{j≠i} φ(f_i − f_j) [k(i,j) + k(j,i)] μ_j`, `k(x,y) = 1/(ρ^{sp} V(x,ρ)^{(p−1)/p})`.
/// This is `μ_i^{-1} ∂J/∂u_i` for the Dirichlet energy without load.
pub fn symmetrized_p_laplacian(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    params: NonlocalParams,
) -> Result<ScalarField> {
    params.validate()?;
    f.check(space)?;
    let n = space.len();
    let (sp, vexp) = (params.s * params.p, (params.p - 1.0) / params.p);
    let kernel: Vec<Vec<f64>> = parallel::map_rows(n, |i| {
        let row = space.pair_row(i);
        (0..n)
            .map(|j| {
                if j == i {
                    0.0
                } else {
                    1.0 / (row.dist[j].powf(sp) * row.vol[j].powf(vexp))
                }
            })
            .collect()
    });
    let vals = f.values();
    let mu = space.weights();
    let out = parallel::map_rows(n, |i| {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                signed_power(vals[i] - vals[j], params.p) * (kernel[i][j] + kernel[j][i]) * mu[j]
            })
            .fold(0.0, |a, v| a + v)
    });
    ScalarField::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceConfig};

    fn two_points() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None).unwrap()
    }

    #[test]
    fn two_point_operator() {
        let s = two_points();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let lf =
            apply_nonlocal_p_laplacian(&s, &f, NonlocalParams::new(0.5, 2.0).unwrap()).unwrap();
        assert_eq!(lf.values(), &[-1.0, 1.0]);
    }

    #[test]
    fn constants_are_annihilated() {
        let s = build_space(&SpaceConfig::grid_1d(9)).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let lf = apply_nonlocal_p_laplacian(
                &s,
                &ScalarField::constant(9, 2.0),
                NonlocalParams::new(0.3, p).unwrap(),
            )
            .unwrap();
            assert!(lf.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn quadratic_case_is_linear() {
        let s = build_space(&SpaceConfig::grid_1d(11)).unwrap();
        let params = NonlocalParams::new(0.4, 2.0).unwrap();
        let f = ScalarField::from_fn(&s, |x| (4.0 * x[0]).sin()).unwrap();
        let g = ScalarField::from_fn(&s, |x| x[0] * x[0]).unwrap();
        let (a, b) = (1.7, -0.3);
        let comb = ScalarField::new(
            f.values()
                .iter()
                .zip(g.values())
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        let lhs = apply_nonlocal_p_laplacian(&s, &comb, params).unwrap();
        let lf = apply_nonlocal_p_laplacian(&s, &f, params).unwrap();
        let lg = apply_nonlocal_p_laplacian(&s, &g, params).unwrap();
        let scale = lhs.sup_norm();
        for i in 0..11 {
            let rhs = a * lf.values()[i] + b * lg.values()[i];
            assert!((lhs.values()[i] - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(NonlocalParams::new(1.0, 2.0).is_err());
        assert!(NonlocalParams::new(0.5, 0.5).is_err());
    }
}
