use serde::Serialize;

use super::NonlocalParams;
use crate::covering::Ball;
use crate::error::{Error, Result};
use crate::functionals::ScalarField;
use crate::space::MetricMeasureSpace;

/// Relative slack for rounding in the comparison `lhs ≤ bound`.
pub const POINCARE_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub members: Vec<usize>,
    /// `Σ_{i∈B} |f_i − f_B|^p μ_i`.
    pub lhs: f64,
    /// `Σ_{i≠j ∈ B} |f_i − f_j|^p / (ρ^{sp} V(i,ρ)) μ_i μ_j`.
    pub rhs_raw: f64,
    /// `max_{i∈B} V(i,2r) / μ(B)`.
    pub c0: f64,
    /// `C₀ (2r)^{sp} rhs_raw`.
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates both sides of the ball Poincaré inequality with its explicit
/// constant. A violation is returned as an error.
pub fn poincare_check(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    ball: Ball,
    params: NonlocalParams,
) -> Result<PoincareReport> {
    params.validate()?;
    f.check(space)?;
    if ball.center >= space.len() || !(ball.radius > 0.0 && ball.radius.is_finite()) {
        return Err(Error::Config(format!(
            "invalid ball ({}, {})",
            ball.center, ball.radius
        )));
    }
    let members = space.ball_members(ball.center, ball.radius);
    if members.len() < 2 {
        return Err(Error::Degenerate(
            "ball contains fewer than two points".into(),
        ));
    }
    let (mu, vals, p) = (space.weights(), f.values(), params.p);
    let mass: f64 = members.iter().map(|&i| mu[i]).sum();
    let avg = members.iter().map(|&i| vals[i] * mu[i]).sum::<f64>() / mass;
    let lhs: f64 = members
        .iter()
        .map(|&i| (vals[i] - avg).abs().powf(p) * mu[i])
        .sum();

    let sp = params.s * p;
    let mut rhs_raw = 0.0;
    let mut vmax = 0.0_f64;
    for &i in &members {
        let row = space.pair_row(i);
        vmax = vmax.max(space.ball_volume(i, 2.0 * ball.radius));
        for &j in &members {
            if j != i {
                rhs_raw += (vals[i] - vals[j]).abs().powf(p) / (row.dist[j].powf(sp) * row.vol[j])
                    * mu[i]
                    * mu[j];
            }
        }
    }
    let c0 = vmax / mass;
    let bound = c0 * (2.0 * ball.radius).powf(sp) * rhs_raw;
    let holds = lhs <= bound * (1.0 + POINCARE_RTOL);
    let report = PoincareReport {
        members,
        lhs,
        rhs_raw,
        c0,
        bound,
        holds,
    };
    if !(lhs.is_finite() && bound.is_finite()) {
        return Err(Error::NonFinite("Poincaré check".into()));
    }
    if !holds {
        return Err(Error::InvariantViolated(format!(
            "Poincaré bound fails on ball ({}, {}): {lhs} > {bound}",
            ball.center, ball.radius
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_ball() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let r = poincare_check(
            &s,
            &f,
            Ball {
                center: 0,
                radius: 1.5,
            },
            NonlocalParams::new(0.5, 2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs_raw, 2.0);
        assert_eq!(r.c0, 1.0);
        assert!((r.bound - 6.0).abs() < 1e-14);
        assert!(r.holds);
    }

    #[test]
    fn constant_field_and_singleton() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let params = NonlocalParams::new(0.5, 2.0).unwrap();
        let r = poincare_check(
            &s,
            &ScalarField::constant(2, 3.0),
            Ball {
                center: 1,
                radius: 2.0,
            },
            params,
        )
        .unwrap();
        assert_eq!((r.lhs, r.bound), (0.0, 0.0));
        let e = poincare_check(
            &s,
            &ScalarField::constant(2, 3.0),
            Ball {
                center: 1,
                radius: 1.0,
            },
            params,
        );
        assert!(matches!(e, Err(Error::Degenerate(_))));
    }
}
