//! Pointwise Lipschitz constants, weak-type functionals and seminorms.

mod gradient;
mod level_set;
mod orlicz;
mod seminorm;
mod varexp;
mod weak;

pub use gradient::{anisotropic_gradient, AnisotropicGradient};
pub use level_set::LevelSetProfile;
pub use orlicz::{luxemburg_bisect, luxemburg_norm, orlicz_fd_seminorm, YoungFunction, YoungKind};
pub use seminorm::{fractional_energy, fractional_seminorm};
pub use varexp::{varexp_fd_seminorm, ExponentField};
pub use weak::{
    anisotropic_weak_functional, anisotropic_weak_profile, bvy_profile, bvy_weak_functional,
    metric_weak_functional, varexp_weak_functional, varexp_weak_profile,
};

use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::space::MetricMeasureSpace;

/// One real value per point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field value at point {i}")));
        }
        Ok(Self(values))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn from_fn(space: &MetricMeasureSpace, rule: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..space.len())
            .map(|i| {
                space.coords(i).map(&rule).ok_or(Error::MissingCoordinates(
                    "field rule needs point coordinates",
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.0.iter().map(|&v| op(v)).collect())
    }

    /// `self + eps · other`.
    pub fn axpy(&self, eps: f64, other: &ScalarField) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::FieldLength {
                expected: self.len(),
                got: other.len(),
            });
        }
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + eps * b)
                .collect(),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(Σ_i |f_i|^p μ_i)^{1/p}`.
    pub fn lp_norm(&self, weights: &[f64], p: f64) -> f64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub(crate) fn check(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::FieldLength {
                expected: space.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Discrete local Lipschitz constants at scale `h`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzField {
    pub values: Vec<f64>,
    pub h: f64,
    /// Set when `h` is below the smallest pairwise distance.
    pub warning: Option<String>,
}

impl LipschitzField {
    /// `Σ_i L_i^p μ_i`.
    pub fn energy(&self, weights: &[f64], p: f64) -> f64 {
        self.values
            .iter()
            .zip(weights)
            .map(|(l, w)| l.powf(p) * w)
            .sum()
    }

    pub fn lp_norm(&self, weights: &[f64], p: f64) -> f64 {
        self.energy(weights, p).powf(1.0 / p)
    }
}

/// Neighbourhood scale used when none is given: 1.5× the smallest distance.
pub fn default_lipschitz_scale(space: &MetricMeasureSpace) -> f64 {
    1.5 * space.min_positive_distance()
}

/// `L_i = max_{j ≠ i, ρ(i,j) ≤ h} |f_i − f_j| / ρ(i,j)`, or 0 without neighbours.
pub fn lipschitz_field(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    h: Option<f64>,
) -> Result<LipschitzField> {
    f.check(space)?;
    let min_dist = space.min_positive_distance();
    let h = h.unwrap_or(1.5 * min_dist);
    check_param("h", h, h > 0.0, "neighbourhood scale must be positive")?;
    let warning = (h < min_dist).then(|| {
        format!("h = {h} is below the minimum pairwise distance {min_dist}; every L_i is 0")
    });
    let vals = f.values();
    let values = crate::parallel::map_rows(space.len(), |i| {
        (0..space.len())
            .filter(|&j| j != i)
            .filter_map(|j| {
                let d = space.dist(i, j);
                (d <= h).then(|| (vals[i] - vals[j]).abs() / d)
            })
            .fold(0.0, f64::max)
    });
    Ok(LipschitzField { values, h, warning })
}

/// `Σ_i L_i^p μ_i` at the default scale.
pub fn lipschitz_energy(space: &MetricMeasureSpace, f: &ScalarField, p: f64) -> Result<f64> {
    Ok(lipschitz_field(space, f, None)?.energy(space.weights(), p))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    check_param("p", p, p >= 1.0, "exponent must be at least 1")
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    check_param("s", s, s > 0.0 && s < 1.0, "smoothness must lie in (0, 1)")
}

pub(crate) fn check_pairs(space: &MetricMeasureSpace) -> Result<()> {
    if space.len() < 2 {
        return Err(Error::Degenerate(
            "pairwise functionals need at least two points".into(),
        ));
    }
    Ok(())
}
