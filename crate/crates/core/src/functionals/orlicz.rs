//! Young functions, Luxemburg norms and the Orlicz finite-difference seminorm.

use serde::{Deserialize, Serialize};

use super::{check_pairs, check_s, ScalarField};
use crate::error::{Error, Result};
use crate::parallel;
use crate::space::MetricMeasureSpace;

const BISECTION_RTOL: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 200;
const BRACKET_MAX_STEPS: usize = 2100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum YoungKind {
    /// `t^p`
    Power { p: f64 },
    /// `t^p · ln(e + t)`
    PowerLog { p: f64 },
}

/// A validated Young function with its sampled Δ2 constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoungFunction {
    kind: YoungKind,
    delta2: f64,
}

impl YoungFunction {
    pub fn new(kind: YoungKind) -> Result<Self> {
        let p = match kind {
            YoungKind::Power { p } | YoungKind::PowerLog { p } => p,
        };
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidYoung(format!(
                "exponent {p} must be finite and ≥ 1"
            )));
        }
        let mut phi = Self { kind, delta2: 0.0 };
        phi.delta2 = phi.validate()?;
        Ok(phi)
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(YoungKind::Power { p })
    }

    pub fn power_log(p: f64) -> Result<Self> {
        Self::new(YoungKind::PowerLog { p })
    }

    pub fn kind(&self) -> YoungKind {
        self.kind
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            YoungKind::Power { p } => t.powf(p),
            YoungKind::PowerLog { p } => t.powf(p) * (std::f64::consts::E + t).ln(),
        }
    }

    /// `max Φ(2t)/Φ(t)` over the validation grid.
    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    fn sample_grid() -> Vec<f64> {
        (-24..=24).map(|k| 10f64.powf(k as f64 / 4.0)).collect()
    }

    /// Checks `Φ(0) = 0`, monotonicity, midpoint convexity and growth on a
    /// log grid; returns the Δ2 estimate.
    fn validate(&self) -> Result<f64> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidYoung("Φ(0) ≠ 0".into()));
        }
        let grid = Self::sample_grid();
        let mut prev = 0.0;
        for &t in &grid {
            let v = self.eval(t);
            if !(v.is_finite() && v >= prev) {
                return Err(Error::InvalidYoung(format!(
                    "Φ not nondecreasing at t = {t}"
                )));
            }
            prev = v;
        }
        for w in grid.windows(2) {
            let mid = self.eval(0.5 * (w[0] + w[1]));
            let chord = 0.5 * (self.eval(w[0]) + self.eval(w[1]));
            if mid > chord * (1.0 + 1e-12) {
                return Err(Error::InvalidYoung(format!(
                    "midpoint convexity fails on [{}, {}]",
                    w[0], w[1]
                )));
            }
        }
        let (lo, hi) = (self.eval(1.0), self.eval(*grid.last().unwrap()));
        if !(hi > 1e3 * lo) {
            return Err(Error::InvalidYoung("Φ does not grow without bound".into()));
        }
        Ok(grid
            .iter()
            .map(|&t| self.eval(2.0 * t) / self.eval(t))
            .fold(0.0, f64::max))
    }
}

/// `inf{λ > 0 : modular(λ) ≤ 1}` for a nonincreasing modular.
///
/// `scale` seeds the bracket (any positive data scale works; the result is
/// exactly scale-covariant when `scale` and the data change by a power of
/// two). Returns the upper end of the final bracket, so the modular there is
/// at most 1. Zero scale means a vanishing argument and yields 0.
pub fn luxemburg_bisect(modular: impl Fn(f64) -> f64, scale: f64) -> Result<f64> {
    if scale == 0.0 {
        return Ok(0.0);
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::NonFinite("Luxemburg bracket scale".into()));
    }
    let mut hi = scale;
    let mut steps = 0;
    while !(modular(hi) <= 1.0) {
        hi *= 2.0;
        steps += 1;
        if steps > BRACKET_MAX_STEPS || !hi.is_finite() {
            return Err(Error::NoBracket(format!(
                "modular still above 1 at λ = {hi:e}"
            )));
        }
    }
    let mut lo = 0.5 * hi;
    steps = 0;
    while modular(lo) <= 1.0 {
        hi = lo;
        lo *= 0.5;
        steps += 1;
        if steps > BRACKET_MAX_STEPS || lo == 0.0 {
            // The modular stays ≤ 1 down to underflow: the norm is 0.
            return Ok(0.0);
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `‖g‖_{L^Φ} = inf{λ > 0 : Σ_i Φ(|g_i|/λ) μ_i ≤ 1}`.
pub fn luxemburg_norm(
    space: &MetricMeasureSpace,
    g: &ScalarField,
    phi: &YoungFunction,
) -> Result<f64> {
    g.check(space)?;
    let items: Vec<(f64, f64)> = g
        .values()
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, w)| (v.abs(), *w))
        .collect();
    let scale = items.iter().fold(0.0_f64, |m, it| m.max(it.0));
    luxemburg_bisect(
        |lambda| parallel::chunked_sum(&items, |&(t, w)| phi.eval(t / lambda) * w),
        scale,
    )
}

/// `(|f_i − f_j| / ρ(i,j)^s, μ_i μ_j)` over ordered pairs with distinct values.
pub(crate) fn difference_quotients(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s: f64,
) -> Vec<(usize, usize, f64, f64)> {
    let vals = f.values();
    let mu = space.weights();
    parallel::map_rows(space.len(), |i| {
        (0..space.len())
            .filter(|&j| j != i && vals[i] != vals[j])
            .map(|j| {
                let t = (vals[i] - vals[j]).abs() / space.dist(i, j).powf(s);
                (i, j, t, mu[i] * mu[j])
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Luxemburg-type seminorm of the pair modular `Σ_{i≠j} Φ(|Δf|/(λ ρ^s)) μ_i μ_j`.
pub fn orlicz_fd_seminorm(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s: f64,
    phi: &YoungFunction,
) -> Result<f64> {
    check_s(s)?;
    check_pairs(space)?;
    f.check(space)?;
    let pairs = difference_quotients(space, f, s);
    let scale = pairs.iter().fold(0.0_f64, |m, q| m.max(q.2));
    luxemburg_bisect(
        |lambda| parallel::chunked_sum(&pairs, |&(_, _, t, w)| phi.eval(t / lambda) * w),
        scale,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_point() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix(vec![0.0], vec![1.0], None).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let s = single_point();
        let phi = YoungFunction::power(2.0).unwrap();
        assert_eq!(
            luxemburg_norm(&s, &ScalarField::constant(1, 0.0), &phi).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_point_square() {
        let s = single_point();
        let phi = YoungFunction::power(2.0).unwrap();
        let v = luxemburg_norm(&s, &ScalarField::new(vec![2.0]).unwrap(), &phi).unwrap();
        assert!((v - 2.0).abs() <= 2.0 * 1e-10);
        assert!(v >= 2.0);
    }

    #[test]
    fn two_point_orlicz_square() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let phi = YoungFunction::power(2.0).unwrap();
        let v = orlicz_fd_seminorm(&s, &f, 0.5, &phi).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(
            orlicz_fd_seminorm(&s, &ScalarField::constant(2, 1.0), 0.5, &phi).unwrap(),
            0.0
        );
    }

    #[test]
    fn young_catalog_validates() {
        let a = YoungFunction::power(2.0).unwrap();
        assert!((a.delta2() - 4.0).abs() < 1e-12);
        let b = YoungFunction::power_log(1.0).unwrap();
        assert!(b.delta2() > 2.0 && b.delta2() < 4.0);
        assert!(YoungFunction::power(0.5).is_err());
    }

    #[test]
    fn bracket_failure_reported() {
        let err = luxemburg_bisect(|_| 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::NoBracket(_)));
    }
}
