use super::orlicz::{difference_quotients, luxemburg_bisect};
use super::{check_pairs, check_s, ScalarField};
use crate::error::{Error, Result};
use crate::parallel;
use crate::space::MetricMeasureSpace;

/// Per-point exponent `p(·) ≥ 1` with its log-Hölder constant
/// `max_{i≠j} |p_i − p_j| · ln(e + 1/ρ(i,j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentField {
    values: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    log_holder: f64,
}

impl ExponentField {
    pub fn new(space: &MetricMeasureSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::FieldLength {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(p) = values.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
            return Err(Error::Parameter {
                name: "p(x)",
                value: *p,
                reason: "exponent must be finite and ≥ 1",
            });
        }
        let p_minus = values.iter().copied().fold(f64::INFINITY, f64::min);
        let p_plus = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_holder = parallel::map_rows(space.len(), |i| {
            ((i + 1)..space.len())
                .map(|j| {
                    (values[i] - values[j]).abs()
                        * (std::f64::consts::E + 1.0 / space.dist(i, j)).ln()
                })
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max);
        Ok(Self {
            values,
            p_minus,
            p_plus,
            log_holder,
        })
    }

    pub fn constant(space: &MetricMeasureSpace, p: f64) -> Result<Self> {
        Self::new(space, vec![p; space.len()])
    }

    pub fn from_fn(space: &MetricMeasureSpace, rule: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let f = ScalarField::from_fn(space, rule)?;
        Self::new(space, f.into_values())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn log_holder(&self) -> f64 {
        self.log_holder
    }

    pub(crate) fn check(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.values.len() != space.len() {
            return Err(Error::FieldLength {
                expected: space.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Luxemburg-type seminorm of `Σ_{i≠j} (|Δf| / (λ ρ^s))^{p_ij} μ_i μ_j`,
/// `p_ij = (p_i + p_j)/2`.
pub fn varexp_fd_seminorm(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s: f64,
    pfield: &ExponentField,
) -> Result<f64> {
    check_s(s)?;
    check_pairs(space)?;
    f.check(space)?;
    pfield.check(space)?;
    let p = pfield.values();
    let pairs: Vec<(f64, f64, f64)> = difference_quotients(space, f, s)
        .into_iter()
        .map(|(i, j, t, w)| (t, 0.5 * (p[i] + p[j]), w))
        .collect();
    let scale = pairs.iter().fold(0.0_f64, |m, q| m.max(q.0));
    luxemburg_bisect(
        |lambda| parallel::chunked_sum(&pairs, |&(t, pij, w)| (t / lambda).powf(pij) * w),
        scale,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{orlicz_fd_seminorm, YoungFunction};
    use crate::space::{build_space, SpaceConfig};

    #[test]
    fn constant_exponent_matches_power_orlicz() {
        let s = build_space(&SpaceConfig::grid_1d(15)).unwrap();
        let f = ScalarField::from_fn(&s, |x| (3.0 * x[0]).cos()).unwrap();
        let pf = ExponentField::constant(&s, 2.5).unwrap();
        let a = varexp_fd_seminorm(&s, &f, 0.4, &pf).unwrap();
        let b = orlicz_fd_seminorm(&s, &f, 0.4, &YoungFunction::power(2.5).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-9 * b);
        assert_eq!(
            varexp_fd_seminorm(&s, &ScalarField::constant(15, 1.0), 0.4, &pf).unwrap(),
            0.0
        );
    }

    #[test]
    fn log_holder_of_constant_is_zero() {
        let s = build_space(&SpaceConfig::grid_1d(5)).unwrap();
        let pf = ExponentField::constant(&s, 3.0).unwrap();
        assert_eq!(pf.log_holder(), 0.0);
        let lin = ExponentField::from_fn(&s, |x| 2.0 + x[0]).unwrap();
        assert!(lin.log_holder() > 0.0 && lin.log_holder().is_finite());
        assert!(ExponentField::new(&s, vec![0.5; 5]).is_err());
    }
}
