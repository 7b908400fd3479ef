use serde::Serialize;

use crate::error::{check_param, Error, Result};
use crate::fields::BumpProfile;
use crate::functionals::{bvy_weak_functional, lipschitz_energy, ScalarField};
use crate::space::{build_space, SpaceConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub delta: f64,
    pub n: usize,
    /// Weak-type functional `E(f_δ)`.
    pub e: f64,
    /// `Σ L_i^p μ_i`.
    pub s: f64,
    pub ratio: f64,
    /// Same ratio for `2 f_δ`.
    pub doubled_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessTrace {
    pub profile: BumpProfile,
    pub rows: Vec<SharpnessRow>,
    /// Last ratio.
    pub c_hat: f64,
    /// The last two ratios differ by less than 5%.
    pub converged: bool,
    /// `max |doubled_ratio/ratio − 1|`.
    pub homogeneity_error: f64,
}

/// Ratios `E(f_δ)/S(f_δ)` for `f_δ(x) = φ((x − x₀)/δ)` on unit-interval grids
/// with `⌈resolution/(2δ)⌉` points, so `resolution` points span the support.
pub fn sharpness_trace(
    profile: BumpProfile,
    x0: f64,
    deltas: &[f64],
    p: f64,
    resolution: usize,
) -> Result<SharpnessTrace> {
    check_param("p", p, p >= 1.0, "exponent must be at least 1")?;
    if resolution < 32 {
        return Err(Error::Config(format!(
            "resolution {resolution} is below 32 points per support"
        )));
    }
    if deltas.is_empty() || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(
            "δ-sequence must be nonempty and strictly decreasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        check_param("delta", delta, delta > 0.0, "scale must be positive")?;
        if !(x0 - delta > 0.0 && x0 + delta < 1.0) {
            return Err(Error::Config(format!(
                "bump of radius {delta} at {x0} leaves the unit interval"
            )));
        }
        let n = (resolution as f64 / (2.0 * delta)).ceil() as usize;
        let space = build_space(&SpaceConfig::grid_1d(n))?;
        let f = ScalarField::from_fn(&space, |x| profile.eval((x[0] - x0) / delta))?;
        let eval = |g: &ScalarField| -> Result<(f64, f64)> {
            Ok((
                bvy_weak_functional(&space, g, p)?,
                lipschitz_energy(&space, g, p)?,
            ))
        };
        let (e, s) = eval(&f)?;
        if !(e > 0.0 && s > 0.0) {
            return Err(Error::Degenerate(format!(
                "bump at δ = {delta} is not resolved"
            )));
        }
        let (e2, s2) = eval(&f.map(|v| 2.0 * v)?)?;
        rows.push(SharpnessRow {
            delta,
            n,
            e,
            s,
            ratio: e / s,
            doubled_ratio: e2 / s2,
        });
    }
    let last = rows[rows.len() - 1].ratio;
    let converged = rows.len() >= 2 && (last - rows[rows.len() - 2].ratio).abs() < 0.05 * last;
    let homogeneity_error = rows
        .iter()
        .map(|r| (r.doubled_ratio / r.ratio - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(SharpnessTrace {
        profile,
        rows,
        c_hat: last,
        converged,
        homogeneity_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_trace() {
        let t =
            sharpness_trace(BumpProfile::Triangle, 0.5, &[0.25, 0.125, 0.0625], 2.0, 32).unwrap();
        assert_eq!(
            t.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
            vec![64, 128, 256]
        );
        assert!(t.rows.iter().all(|r| r.ratio > 0.0));
        assert!(t.homogeneity_error < 1e-10);
    }

    #[test]
    fn invalid_sequences() {
        assert!(sharpness_trace(BumpProfile::C2, 0.5, &[0.1, 0.2], 2.0, 32).is_err());
        assert!(sharpness_trace(BumpProfile::C2, 0.5, &[0.6], 2.0, 32).is_err());
        assert!(sharpness_trace(BumpProfile::C2, 0.5, &[0.1], 2.0, 8).is_err());
    }
}
