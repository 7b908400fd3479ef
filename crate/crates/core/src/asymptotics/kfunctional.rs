use serde::Serialize;

use crate::error::{check_param, Error, Result};
use crate::functionals::{fractional_seminorm, lipschitz_field, ScalarField};
use crate::space::MetricMeasureSpace;

/// Smoothing scale of the ball-average mollifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// `f_δ = f`.
    Identity,
    Radius(f64),
    /// `f_δ ≡` the weighted mean of `f`.
    GlobalMean,
}

/// `f_δ(i) = V(i,δ)^{-1} Σ_{j ∈ B(i,δ)} f_j μ_j`.
pub fn ball_average(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    delta: f64,
) -> Result<ScalarField> {
    f.check(space)?;
    check_param(
        "delta",
        delta,
        delta > 0.0,
        "smoothing radius must be positive",
    )?;
    let (vals, mu) = (f.values(), space.weights());
    let out = crate::parallel::map_rows(space.len(), |i| {
        let members = space.ball_members(i, delta);
        let mass: f64 = members.iter().map(|&j| mu[j]).sum();
        members.iter().map(|&j| vals[j] * mu[j]).sum::<f64>() / mass
    });
    ScalarField::new(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KPoint {
    pub t: f64,
    pub k: f64,
    pub delta_star: Smoothing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KFunctionalCurve {
    pub points: Vec<KPoint>,
    /// `(δ, ‖Lip(f − f_δ)‖_{L^p}, [f_δ]_{s1,p1})` for every candidate.
    pub candidates: Vec<(Smoothing, f64, f64)>,
    /// `‖Lip f‖_{L^p}`.
    pub x0_norm: f64,
    /// `[f]_{W^{s1,p1}}`.
    pub x1_norm: f64,
    pub nondecreasing: bool,
    pub concave: bool,
    pub endpoint_bounds: bool,
    pub warnings: Vec<String>,
}

const CURVE_RTOL: f64 = 1e-12;

/// Upper bound for `K(t, f; Lip-L^p, W^{s1,p1})` from the decompositions
/// `f = (f − f_δ) + f_δ`. The candidate list always contains the identity
/// and the global mean besides the supplied radii.
pub fn k_functional(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s1: f64,
    p1: f64,
    p: f64,
    t_grid: &[f64],
    deltas: &[f64],
) -> Result<KFunctionalCurve> {
    f.check(space)?;
    check_param("p", p, p >= 1.0, "exponent must be at least 1")?;
    if t_grid.is_empty() || deltas.is_empty() {
        return Err(Error::Degenerate(
            "t-grid and δ-grid must be nonempty".into(),
        ));
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite()))
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Config(
            "t-grid must be positive and strictly ascending".into(),
        ));
    }
    for &d in deltas {
        check_param("delta", d, d > 0.0, "smoothing radius must be positive")?;
    }
    let mu = space.weights();
    let lip_norm =
        |g: &ScalarField| -> Result<f64> { Ok(lipschitz_field(space, g, None)?.lp_norm(mu, p)) };
    let x0_norm = lip_norm(f)?;
    let x1_norm = fractional_seminorm(space, f, s1, p1)?;

    let min_dist = space.min_positive_distance();
    let mut warnings = Vec::new();
    let mut candidates = vec![(Smoothing::Identity, 0.0, x1_norm)];
    for &d in deltas {
        if d <= min_dist {
            warnings.push(format!(
                "δ = {d} does not exceed the minimum spacing {min_dist}; f_δ = f"
            ));
        }
        let fd = ball_average(space, f, d)?;
        let diff = ScalarField::new(
            f.values()
                .iter()
                .zip(fd.values())
                .map(|(a, b)| a - b)
                .collect(),
        )?;
        candidates.push((
            Smoothing::Radius(d),
            lip_norm(&diff)?,
            fractional_seminorm(space, &fd, s1, p1)?,
        ));
    }
    candidates.push((Smoothing::GlobalMean, x0_norm, 0.0));

    let points: Vec<KPoint> = t_grid
        .iter()
        .map(|&t| {
            let (best, k) = candidates.iter().map(|c| (c.0, c.1 + t * c.2)).fold(
                (Smoothing::Identity, f64::INFINITY),
                |acc, c| if c.1 < acc.1 { c } else { acc },
            );
            KPoint {
                t,
                k,
                delta_star: best,
            }
        })
        .collect();

    let scale = points.iter().map(|q| q.k).fold(0.0, f64::max);
    let nondecreasing = points.windows(2).all(|w| w[1].k >= w[0].k);
    let concave = points.windows(3).all(|w| {
        let lam = (w[1].t - w[0].t) / (w[2].t - w[0].t);
        w[1].k >= (1.0 - lam) * w[0].k + lam * w[2].k - CURVE_RTOL * scale
    });
    let endpoint_bounds = points.iter().all(|q| q.k <= x0_norm.min(q.t * x1_norm));
    Ok(KFunctionalCurve {
        points,
        candidates,
        x0_norm,
        x1_norm,
        nondecreasing,
        concave,
        endpoint_bounds,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    pub theta: f64,
    pub s1: f64,
    pub p1: f64,
    /// `(1 − θ) s1 + θ`.
    pub s: f64,
    /// `1/p = (1 − θ)/p1 + θ`.
    pub p: f64,
    /// `[f]_{W^{s,p}}`.
    pub lhs: f64,
    /// `‖Lip f‖_{L^p}`.
    pub lip_norm: f64,
    /// `[f]_{W^{s1,p1}}^{p1}`.
    pub x1_energy: f64,
    /// `‖Lip f‖^θ ([f]_{s1,p1}^{p1})^{(1−θ)/p1}`.
    pub rhs_core: f64,
    /// `lhs / rhs_core`; `None` when `rhs_core` vanishes.
    pub c_emp: Option<f64>,
}

pub fn interpolation_inequality_report(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s1: f64,
    p1: f64,
    theta: f64,
) -> Result<InterpolationReport> {
    check_param(
        "theta",
        theta,
        theta > 0.0 && theta < 1.0,
        "θ must lie in (0, 1)",
    )?;
    check_param(
        "s1",
        s1,
        s1 > 0.0 && s1 < 1.0,
        "smoothness must lie in (0, 1)",
    )?;
    check_param("p1", p1, p1 >= 1.0, "exponent must be at least 1")?;
    let s = (1.0 - theta) * s1 + theta;
    let p = 1.0 / ((1.0 - theta) / p1 + theta);
    let lhs = fractional_seminorm(space, f, s, p)?;
    let lip_norm = lipschitz_field(space, f, None)?.lp_norm(space.weights(), p);
    let x1_energy = crate::functionals::fractional_energy(space, f, s1, p1)?;
    let rhs_core = lip_norm.powf(theta) * x1_energy.powf((1.0 - theta) / p1);
    Ok(InterpolationReport {
        theta,
        s1,
        p1,
        s,
        p,
        lhs,
        lip_norm,
        x1_energy,
        rhs_core,
        c_emp: (rhs_core > 0.0).then(|| lhs / rhs_core),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceConfig};

    fn bump(space: &MetricMeasureSpace) -> ScalarField {
        ScalarField::from_fn(space, |x| {
            let u = (x[0] - 0.5) / 0.25;
            if u.abs() < 1.0 {
                (1.0 - u * u).powi(3)
            } else {
                0.0
            }
        })
        .unwrap()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn zero_field() {
        let s = build_space(&SpaceConfig::grid_1d(16)).unwrap();
        let c = k_functional(
            &s,
            &ScalarField::constant(16, 0.0),
            0.3,
            2.0,
            2.0,
            &[0.1, 1.0],
            &[0.1],
        )
        .unwrap();
        assert!(c.points.iter().all(|q| q.k == 0.0));
    }

    #[test]
    fn bump_curve_properties() {
        let s = build_space(&SpaceConfig::grid_1d(128)).unwrap();
        let c = k_functional(
            &s,
            &bump(&s),
            0.3,
            2.0,
            2.0,
            &log_grid(1e-3, 1e3, 25),
            &log_grid(0.01, 0.5, 12),
        )
        .unwrap();
        assert!(c.nondecreasing && c.concave && c.endpoint_bounds, "{c:?}");
        assert!(c.points[0].k <= c.points[0].t * c.x1_norm);
    }

    #[test]
    fn small_delta_is_flagged() {
        let s = build_space(&SpaceConfig::grid_1d(16)).unwrap();
        let c = k_functional(&s, &bump(&s), 0.3, 2.0, 2.0, &[1.0], &[0.01]).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert!(k_functional(&s, &bump(&s), 0.3, 2.0, 2.0, &[1.0], &[]).is_err());
    }

    #[test]
    fn interpolation_parameters() {
        let s = build_space(&SpaceConfig::grid_1d(32)).unwrap();
        let r = interpolation_inequality_report(&s, &bump(&s), 0.3, 2.0, 0.5).unwrap();
        assert!((r.s - 0.65).abs() < 1e-15 && (r.p - 4.0 / 3.0).abs() < 1e-15);
        assert!(r.c_emp.unwrap() > 0.0);
        let c = interpolation_inequality_report(&s, &ScalarField::constant(32, 1.0), 0.3, 2.0, 0.5)
            .unwrap();
        assert_eq!((c.lhs, c.c_emp), (0.0, None));
        assert!(interpolation_inequality_report(&s, &bump(&s), 0.3, 2.0, 1.0).is_err());
    }
}
