use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{bvy_profile, ScalarField};
use crate::space::MetricMeasureSpace;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub perturbation: usize,
    pub eps: f64,
    pub energy: f64,
    /// `|E(f + ε g) − E(f)|`.
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub base_energy: f64,
    pub rows: Vec<StabilityRow>,
    /// Per perturbation: the last three positive-ε differences strictly decrease.
    pub tail_decreasing: Vec<bool>,
    /// Per perturbation: allowed difference at the smallest positive ε.
    pub tolerance: Vec<f64>,
    pub final_within_tolerance: Vec<bool>,
    pub all_pass: bool,
}

/// `max_λ [(λ + η)^p − λ^p] · w{R ≥ λ}` over the profile levels and 0.
fn first_order_bound(ratios: &[f64], tails: &[f64], total: f64, p: f64, eta: f64) -> f64 {
    ratios
        .iter()
        .zip(tails)
        .map(|(&r, &w)| ((r + eta).powf(p) - r.powf(p)) * w)
        .fold(eta.powf(p) * total, f64::max)
}

/// Differences `|E(f + εg) − E(f)|` of the BVY weak-type functional. The
/// tolerance bounds the change of every pair ratio by
/// `η = ε (‖g‖_∞ + Lip g) / min μ^{1/p}` and propagates it through the level
/// sets of both `f` and the last perturbed field, with a factor 2.
pub fn stability_test(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    perturbations: &[ScalarField],
    eps: &[f64],
    p: f64,
) -> Result<StabilityReport> {
    if eps.is_empty()
        || eps.iter().any(|e| !(*e >= 0.0 && e.is_finite()))
        || eps.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Config(
            "ε-sequence must be nonnegative and strictly decreasing".into(),
        ));
    }
    let base = bvy_profile(space, f, p)?;
    let base_energy = base.sup_power(p);
    let mu = space.weights();
    let total = space.total_mass().powi(2) - mu.iter().map(|m| m * m).sum::<f64>();
    let vmin = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rows = Vec::new();
    let (mut tail_decreasing, mut tolerance, mut final_within) =
        (Vec::new(), Vec::new(), Vec::new());
    for (k, g) in perturbations.iter().enumerate() {
        g.check(space)?;
        let mut diffs = Vec::new();
        let mut last_profile = None;
        for &e in eps {
            let fe = f.axpy(e, g)?;
            let profile = bvy_profile(space, &fe, p)?;
            let energy = profile.sup_power(p);
            let diff = (energy - base_energy).abs();
            rows.push(StabilityRow {
                perturbation: k,
                eps: e,
                energy,
                diff,
            });
            if e > 0.0 {
                diffs.push(diff);
                last_profile = Some((e, profile));
            }
        }
        let tail = &diffs[diffs.len().saturating_sub(3)..];
        tail_decreasing.push(tail.len() == 3 && tail.windows(2).all(|w| w[1] < w[0]));
        let (tol, within) = match last_profile {
            Some((e, profile)) => {
                let vals = g.values();
                let mut lip = 0.0_f64;
                for i in 0..space.len() {
                    for j in (i + 1)..space.len() {
                        lip = lip.max((vals[i] - vals[j]).abs() / space.dist(i, j));
                    }
                }
                let eta = e * (g.sup_norm() + lip) / vmin.powf(1.0 / p);
                let bound =
                    first_order_bound(base.ratios(), base.tail_weights(), total, p, eta).max(
                        first_order_bound(profile.ratios(), profile.tail_weights(), total, p, eta),
                    );
                let tol = 2.0 * bound;
                (tol, diffs[diffs.len() - 1] <= tol)
            }
            None => (0.0, true),
        };
        tolerance.push(tol);
        final_within.push(within);
    }
    let all_pass = tail_decreasing.iter().all(|&b| b) && final_within.iter().all(|&b| b);
    Ok(StabilityReport {
        base_energy,
        rows,
        tail_decreasing,
        tolerance,
        final_within_tolerance: final_within,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceConfig};

    #[test]
    fn zero_perturbation_and_zero_eps() {
        let s = build_space(&SpaceConfig::grid_1d(12)).unwrap();
        let f = ScalarField::from_fn(&s, |x| (3.0 * x[0]).sin()).unwrap();
        let r = stability_test(
            &s,
            &f,
            &[ScalarField::constant(12, 0.0)],
            &[1e-1, 1e-2, 0.0],
            2.0,
        )
        .unwrap();
        assert!(r.rows.iter().all(|row| row.diff == 0.0));
        assert_eq!(r.rows[2].energy, r.base_energy);
    }

    #[test]
    fn smooth_perturbation_decays() {
        let s = build_space(&SpaceConfig::grid_1d(30)).unwrap();
        let f = ScalarField::from_fn(&s, |x| (3.0 * x[0]).sin()).unwrap();
        let g = ScalarField::from_fn(&s, |x| (7.0 * x[0]).cos()).unwrap();
        let eps = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
        let r = stability_test(&s, &f, &[g], &eps, 2.0).unwrap();
        assert!(r.all_pass, "{r:?}");
    }
}
