use serde::Serialize;

use crate::error::{check_param, Error, Result};
use crate::functionals::ScalarField;
use crate::space::MetricMeasureSpace;

/// Exponents swept alongside the requested one.
pub const ALPHA_SWEEP: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationRow {
    pub radius: f64,
    /// `max_{c ∈ Ω′} osc_{B(c,r)} u`.
    pub osc: f64,
    /// `osc(r) / osc(2r)`; `None` when the larger oscillation vanishes.
    pub decay: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderProbe {
    pub alpha: f64,
    /// `max_{i≠j ∈ Ω′} |u_i − u_j| / ρ(i,j)^α`.
    pub seminorm: f64,
    /// `(α, [u]_{C^α})` over [`ALPHA_SWEEP`].
    pub sweep: Vec<(f64, f64)>,
    pub oscillation: Vec<OscillationRow>,
    pub u_norm: f64,
    pub rhs_norm: f64,
    /// `[u]_{C^α} / (‖u‖_{L^p} + ‖rhs‖_{L^q})`; `None` when the denominator is 0.
    pub c_emp: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderNorms<'a> {
    pub p: f64,
    pub q: f64,
    pub rhs: Option<&'a ScalarField>,
}

fn seminorm(space: &MetricMeasureSpace, u: &[f64], sub: &[usize], alpha: f64) -> f64 {
    let mut best = 0.0_f64;
    for (a, &i) in sub.iter().enumerate() {
        for &j in &sub[a + 1..] {
            best = best.max((u[i] - u[j]).abs() / space.dist(i, j).powf(alpha));
        }
    }
    best
}

/// Empirical Hölder seminorm of `u` on the subdomain with a dyadic
/// oscillation-decay table (radii `diam(Ω′)/2^k` down to the grid scale).
pub fn holder_probe(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    subdomain: &[usize],
    alpha: f64,
    norms: HolderNorms<'_>,
) -> Result<HolderProbe> {
    u.check(space)?;
    check_param(
        "alpha",
        alpha,
        alpha > 0.0 && alpha <= 1.0,
        "Hölder exponent must lie in (0, 1]",
    )?;
    check_param("p", norms.p, norms.p >= 1.0, "exponent must be at least 1")?;
    check_param("q", norms.q, norms.q >= 1.0, "exponent must be at least 1")?;
    let mut sub = subdomain.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if let Some(&k) = sub.iter().find(|&&k| k >= space.len()) {
        return Err(Error::Config(format!(
            "subdomain point {k} is not in the space"
        )));
    }
    if sub.len() < 2 {
        return Err(Error::Degenerate(
            "subdomain needs at least two points".into(),
        ));
    }
    if let Some(rhs) = norms.rhs {
        rhs.check(space)?;
    }
    let vals = u.values();
    let seminorm_alpha = seminorm(space, vals, &sub, alpha);
    let sweep = ALPHA_SWEEP
        .iter()
        .map(|&a| (a, seminorm(space, vals, &sub, a)))
        .collect();

    let mut diam = 0.0_f64;
    let mut dmin = f64::INFINITY;
    for (a, &i) in sub.iter().enumerate() {
        for &j in &sub[a + 1..] {
            let d = space.dist(i, j);
            diam = diam.max(d);
            dmin = dmin.min(d);
        }
    }
    let osc_at = |r: f64| {
        sub.iter()
            .map(|&c| {
                let ball = space.ball_members(c, r);
                let hi = ball.iter().map(|&k| vals[k]).fold(f64::MIN, f64::max);
                let lo = ball.iter().map(|&k| vals[k]).fold(f64::MAX, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    };
    let mut oscillation = Vec::new();
    let mut r = diam / 2.0;
    let mut larger = osc_at(diam);
    while r >= dmin {
        let osc = osc_at(r);
        oscillation.push(OscillationRow {
            radius: r,
            osc,
            decay: (larger > 0.0).then(|| osc / larger),
        });
        larger = osc;
        r /= 2.0;
    }

    let u_norm = u.lp_norm(space.weights(), norms.p);
    let rhs_norm = norms
        .rhs
        .map_or(0.0, |f| f.lp_norm(space.weights(), norms.q));
    let denom = u_norm + rhs_norm;
    Ok(HolderProbe {
        alpha,
        seminorm: seminorm_alpha,
        sweep,
        oscillation,
        u_norm,
        rhs_norm,
        c_emp: (denom > 0.0).then(|| seminorm_alpha / denom),
    })
}
