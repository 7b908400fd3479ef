//! Weak-type functionals `sup_λ λ^p · (μ⊗μ){(x, y) : R(x, y) > λ}`.
//!
//! Ordered pairs `(i, j)` and `(j, i)` are both counted; the ratio is not
//! symmetric because the ball volume is centred at the first point.

use super::level_set::LevelSetProfile;
use super::varexp::ExponentField;
use super::{check_p, check_pairs, ScalarField};
use crate::error::{check_param, Error, Result};
use crate::parallel;
use crate::space::{anisotropic_distance, AnisotropyMatrix, MetricMeasureSpace};

fn collect_profile<F>(space: &MetricMeasureSpace, f: &ScalarField, ratio: F) -> LevelSetProfile
where
    F: Fn(usize, usize, f64, f64, f64) -> f64 + Sync + Send,
{
    let vals = f.values();
    let w = space.weights();
    let rows = parallel::map_rows(space.len(), |i| {
        let row = space.pair_row(i);
        (0..space.len())
            .filter(|&j| j != i && vals[i] != vals[j])
            .map(|j| {
                let diff = (vals[i] - vals[j]).abs();
                (ratio(i, j, diff, row.dist[j], row.vol[j]), w[i] * w[j])
            })
            .collect::<Vec<_>>()
    });
    LevelSetProfile::from_pairs(rows.into_iter().flatten().collect())
}

/// Pair ratios `|f_i − f_j| / (ρ(i,j) · V(i, ρ(i,j))^{1/p})`.
pub fn bvy_profile(space: &MetricMeasureSpace, f: &ScalarField, p: f64) -> Result<LevelSetProfile> {
    check_p(p)?;
    check_pairs(space)?;
    f.check(space)?;
    let inv = 1.0 / p;
    Ok(collect_profile(space, f, |_, _, diff, rho, vol| {
        diff / (rho * vol.powf(inv))
    }))
}

/// Exact BVY weak-type functional.
pub fn bvy_weak_functional(space: &MetricMeasureSpace, f: &ScalarField, p: f64) -> Result<f64> {
    Ok(bvy_profile(space, f, p)?.sup_power(p))
}

/// Pair ratios with the averaged exponent `p_ij = (p_i + p_j)/2`.
pub fn varexp_weak_profile(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    pfield: &ExponentField,
) -> Result<LevelSetProfile> {
    check_pairs(space)?;
    f.check(space)?;
    pfield.check(space)?;
    let p = pfield.values();
    Ok(collect_profile(space, f, |i, j, diff, rho, vol| {
        let pij = 0.5 * (p[i] + p[j]);
        diff / (rho * vol.powf(1.0 / pij))
    }))
}

/// Variable-exponent weak functional with outer exponent `pstar`
/// (defaults to `p⁻` when `None`).
pub fn varexp_weak_functional(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    pfield: &ExponentField,
    pstar: Option<f64>,
) -> Result<f64> {
    let pstar = pstar.unwrap_or(pfield.p_minus());
    check_param(
        "pstar",
        pstar,
        pstar >= pfield.p_minus() && pstar <= pfield.p_plus(),
        "outer exponent must lie in [p⁻, p⁺]",
    )?;
    Ok(varexp_weak_profile(space, f, pfield)?.sup_power(pstar))
}

/// Pair ratios `|f_i − f_j| / ρ_A(i,j)^{1 + n/p}` on point coordinates.
pub fn anisotropic_weak_profile(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    a: &AnisotropyMatrix,
    p: f64,
    n: usize,
) -> Result<LevelSetProfile> {
    check_p(p)?;
    check_pairs(space)?;
    f.check(space)?;
    let dim = space
        .dim()
        .filter(|_| space.has_coords())
        .ok_or(Error::MissingCoordinates(
            "anisotropic functional needs coordinates",
        ))?;
    if dim != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.dim(),
        });
    }
    let expo = 1.0 + n as f64 / p;
    let coord = |i: usize| space.coords(i).expect("coordinates checked above");
    Ok(collect_profile(space, f, |i, j, diff, _, _| {
        let rho = anisotropic_distance(a, coord(i), coord(j)).expect("dimensions checked above");
        diff / rho.powf(expo)
    }))
}

/// Anisotropic weak functional `sup_λ λ^p · w{|Δf| / ρ_A^{1+n/p} > λ}`.
pub fn anisotropic_weak_functional(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    a: &AnisotropyMatrix,
    p: f64,
    n: usize,
) -> Result<f64> {
    Ok(anisotropic_weak_profile(space, f, a, p, n)?.sup_power(p))
}

/// Same level sets as the anisotropic functional but measured with the
/// space's own metric: `|Δf| / ρ^{1+n/p}`.
pub fn metric_weak_functional(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    p: f64,
    n: usize,
) -> Result<f64> {
    check_p(p)?;
    check_pairs(space)?;
    f.check(space)?;
    let expo = 1.0 + n as f64 / p;
    Ok(collect_profile(space, f, |_, _, diff, rho, _| diff / rho.powf(expo)).sup_power(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, CoordMetric, SpaceConfig};

    fn two_points() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None).unwrap()
    }

    #[test]
    fn two_point_bvy() {
        let s = two_points();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(bvy_weak_functional(&s, &f, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn constant_field_is_zero() {
        let s = build_space(&SpaceConfig::grid_1d(10)).unwrap();
        let f = ScalarField::constant(10, 2.5);
        assert_eq!(bvy_weak_functional(&s, &f, 2.0).unwrap(), 0.0);
        let pf = ExponentField::constant(&s, 2.0).unwrap();
        assert_eq!(varexp_weak_functional(&s, &f, &pf, None).unwrap(), 0.0);
        let a = AnisotropyMatrix::identity(1);
        assert_eq!(
            anisotropic_weak_functional(&s, &f, &a, 2.0, 1).unwrap(),
            0.0
        );
    }

    #[test]
    fn p_below_one_rejected() {
        let s = two_points();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            bvy_weak_functional(&s, &f, 0.5),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn constant_exponent_collapses_to_bvy() {
        let s = build_space(&SpaceConfig::grid_1d(12)).unwrap();
        let f = ScalarField::from_fn(&s, |x| (5.0 * x[0]).sin()).unwrap();
        let pf = ExponentField::constant(&s, 1.7).unwrap();
        assert_eq!(
            varexp_weak_functional(&s, &f, &pf, Some(1.7)).unwrap(),
            bvy_weak_functional(&s, &f, 1.7).unwrap()
        );
    }

    #[test]
    fn pstar_outside_range_rejected() {
        let s = build_space(&SpaceConfig::grid_1d(6)).unwrap();
        let f = ScalarField::from_fn(&s, |x| x[0]).unwrap();
        let pf = ExponentField::constant(&s, 2.0).unwrap();
        assert!(varexp_weak_functional(&s, &f, &pf, Some(3.0)).is_err());
    }

    #[test]
    fn identity_anisotropy_matches_sup_metric() {
        let coords: Vec<Vec<f64>> = (0..25)
            .map(|k| vec![(k % 5) as f64 * 0.2, (k / 5) as f64 * 0.2])
            .collect();
        let sup =
            MetricMeasureSpace::from_coords(coords, CoordMetric::Sup, vec![0.04; 25]).unwrap();
        let f = ScalarField::from_fn(&sup, |x| x[0] * x[0] - x[1]).unwrap();
        let a = AnisotropyMatrix::identity(2);
        assert_eq!(
            anisotropic_weak_functional(&sup, &f, &a, 2.0, 2).unwrap(),
            metric_weak_functional(&sup, &f, 2.0, 2).unwrap()
        );
    }

    #[test]
    fn anisotropic_needs_coordinates() {
        let s = two_points();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let a = AnisotropyMatrix::identity(1);
        assert!(matches!(
            anisotropic_weak_functional(&s, &f, &a, 2.0, 1),
            Err(Error::MissingCoordinates(_))
        ));
    }
}
