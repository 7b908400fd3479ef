use super::{check_p, check_pairs, check_s, ScalarField};
use crate::error::Result;
use crate::parallel;
use crate::space::MetricMeasureSpace;

/// `Σ_{i≠j} |f_i − f_j|^p / (ρ(i,j)^{sp} V(i, ρ(i,j))) · μ_i μ_j`.
///
/// Rows are summed over `j` in index order and the row sums are folded in
/// index order, so the result equals a plain nested loop bit for bit.
pub fn fractional_energy(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s: f64,
    p: f64,
) -> Result<f64> {
    check_s(s)?;
    check_p(p)?;
    check_pairs(space)?;
    f.check(space)?;
    let vals = f.values();
    let mu = space.weights();
    let sp = s * p;
    Ok(parallel::sum_rows(space.len(), |i| {
        let row = space.pair_row(i);
        let mut acc = 0.0;
        for j in 0..space.len() {
            if j == i {
                continue;
            }
            let d = (vals[i] - vals[j]).abs();
            acc += (d.powf(p) / (row.dist[j].powf(sp) * row.vol[j])) * mu[i] * mu[j];
        }
        acc
    }))
}

/// `[f]_{W^{s,p}} = fractional_energy^{1/p}`.
pub fn fractional_seminorm(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    s: f64,
    p: f64,
) -> Result<f64> {
    Ok(fractional_energy(space, f, s, p)?.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn two_point_seminorm() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        let v = fractional_seminorm(&s, &f, 0.5, 2.0).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        let c = ScalarField::constant(2, 4.0);
        assert_eq!(fractional_seminorm(&s, &c, 0.5, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn parameter_ranges() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        for (sv, pv) in [(0.0, 2.0), (1.0, 2.0), (0.5, 0.9)] {
            assert!(matches!(
                fractional_seminorm(&s, &f, sv, pv),
                Err(Error::Parameter { .. })
            ));
        }
    }
}
