use super::ScalarField;
use crate::error::{Error, Result};
use crate::space::{AnisotropyMatrix, MetricMeasureSpace};

/// Per-point `∇_A f = Aᵀ ∇f` from grid finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropicGradient {
    pub vectors: Vec<Vec<f64>>,
}

impl AnisotropicGradient {
    /// `Σ_i |∇_A f(i)|^p μ_i` with the Euclidean length.
    pub fn p_energy(&self, weights: &[f64], p: f64) -> f64 {
        self.vectors
            .iter()
            .zip(weights)
            .map(|(v, w)| v.iter().map(|c| c * c).sum::<f64>().sqrt().powf(p) * w)
            .sum()
    }
}

/// Central differences in the interior, one-sided at the boundary.
pub fn anisotropic_gradient(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    a: &AnisotropyMatrix,
) -> Result<AnisotropicGradient> {
    f.check(space)?;
    let grid = *space.grid().ok_or(Error::NotAGrid)?;
    if a.dim() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: a.dim(),
        });
    }
    let vals = f.values();
    let h = grid.spacing;
    let vectors = (0..space.len())
        .map(|i| {
            let k = grid.multi_index(i);
            let grad: Vec<f64> = (0..grid.dim)
                .map(|d| {
                    let shifted = |delta: isize| {
                        let mut m = k.clone();
                        m[d] = (m[d] as isize + delta) as usize;
                        vals[grid.linear_index(&m)]
                    };
                    let (lo, hi) = (k[d] > 0, k[d] + 1 < grid.side);
                    match (lo, hi) {
                        (true, true) => (shifted(1) - shifted(-1)) / (2.0 * h),
                        (false, true) => (shifted(1) - vals[i]) / h,
                        (true, false) => (vals[i] - shifted(-1)) / h,
                        (false, false) => 0.0,
                    }
                })
                .collect();
            a.transpose_apply(&grad)
        })
        .collect();
    Ok(AnisotropicGradient { vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceConfig};

    fn square(side: usize) -> MetricMeasureSpace {
        build_space(&SpaceConfig::Grid {
            dim: 2,
            side,
            spacing: None,
            metric: None,
            weights: None,
        })
        .unwrap()
    }

    #[test]
    fn linear_field_gradient() {
        let s = square(8);
        let f = ScalarField::from_fn(&s, |x| x[0]).unwrap();
        let a = AnisotropyMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let g = anisotropic_gradient(&s, &f, &a).unwrap();
        for v in &g.vectors {
            assert!((v[0] - 2.0).abs() < 1e-12 && v[1].abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_gradient_vanishes() {
        let s = square(5);
        let g = anisotropic_gradient(
            &s,
            &ScalarField::constant(25, 1.0),
            &AnisotropyMatrix::identity(2),
        )
        .unwrap();
        assert_eq!(g.p_energy(s.weights(), 2.0), 0.0);
    }

    #[test]
    fn identity_gives_plain_differences() {
        let s = square(6);
        let f = ScalarField::from_fn(&s, |x| x[0] * x[1]).unwrap();
        let g = anisotropic_gradient(&s, &f, &AnisotropyMatrix::identity(2)).unwrap();
        let grid = s.grid().unwrap();
        let h = grid.spacing;
        let i = grid.linear_index(&[2, 3]);
        let e = (f.values()[grid.linear_index(&[3, 3])] - f.values()[grid.linear_index(&[1, 3])])
            / (2.0 * h);
        assert!((g.vectors[i][0] - e).abs() < 1e-12);
    }

    #[test]
    fn non_grid_rejected() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let f = ScalarField::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            anisotropic_gradient(&s, &f, &AnisotropyMatrix::identity(1)),
            Err(Error::NotAGrid)
        ));
    }
}
