use serde::Serialize;

use crate::error::{check_param, Error, Result};
use crate::functionals::{fractional_energy, ScalarField};
use crate::space::MetricMeasureSpace;

/// Default mesh for each smoothness in the BBM sweep: finer grids as `s → 1`.
pub const DEFAULT_COUPLING: [(f64, usize); 5] = [
    (0.6, 256),
    (0.7, 512),
    (0.8, 1024),
    (0.9, 2048),
    (0.95, 4096),
];

/// `∫_{S^{n−1}} |e · θ|^p dθ = 2 π^{(n−1)/2} Γ((p+1)/2) / Γ((n+p)/2)`.
pub fn angular_constant(n: usize, p: f64) -> f64 {
    let n = n as f64;
    2.0 * std::f64::consts::PI.powf(0.5 * (n - 1.0)) * libm::tgamma(0.5 * (p + 1.0))
        / libm::tgamma(0.5 * (n + p))
}

/// Median over points of `V(i, r)/r^n` at the midpoints between the first
/// eight distinct distances from each point.
pub fn empirical_ball_constant(space: &MetricMeasureSpace, n: usize) -> Result<f64> {
    if space.len() < 2 {
        return Err(Error::Degenerate(
            "ball constant needs at least two points".into(),
        ));
    }
    let mut samples: Vec<f64> = crate::parallel::map_rows(space.len(), |i| {
        let mut d: Vec<f64> = (0..space.len()).map(|j| space.dist(i, j)).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d.windows(2)
            .take(8)
            .map(|w| {
                let r = 0.5 * (w[0] + w[1]);
                space.ball_volume(i, r) / r.powi(n as i32)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    samples.sort_by(f64::total_cmp);
    let m = samples.len();
    Ok(if m % 2 == 1 {
        samples[m / 2]
    } else {
        0.5 * (samples[m / 2 - 1] + samples[m / 2])
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BbmEntry {
    pub s: f64,
    pub n: usize,
    /// `(1 − s) [f]_{W^{s,p}}^p`.
    pub value: f64,
    /// `|value − target| / target`.
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BbmSweep {
    pub p: f64,
    pub dim: usize,
    pub s_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    /// Ball constants measured on every space of the family.
    pub c_hat: Vec<f64>,
    pub angular_constant: f64,
    pub gradient_integral: f64,
    pub target: f64,
    pub target_provenance: String,
    /// `s_grid[k]` evaluated on `spaces[k]`.
    pub diagonal: Vec<BbmEntry>,
    /// Every `(s, space)` combination when requested.
    pub table: Vec<BbmEntry>,
    /// Relative errors along the diagonal are nonincreasing.
    pub monotone: bool,
    pub final_rel_error: f64,
    pub within_10_percent: bool,
}

/// Sweeps `(1 − s)[f]^p` along a mesh family coupled to `s` and compares it
/// with `(1/(ĉ p)) ∫_{S^{n−1}}|θ₁|^p dθ · ∫|∇f|^p`, where `ĉ` is measured on
/// the finest space.
#[allow(clippy::too_many_arguments)]
pub fn bbm_limit<F>(
    spaces: &[MetricMeasureSpace],
    rule: F,
    p: f64,
    s_grid: &[f64],
    gradient_integral: f64,
    target_provenance: &str,
    full_table: bool,
) -> Result<BbmSweep>
where
    F: Fn(&MetricMeasureSpace) -> Result<ScalarField>,
{
    check_param("p", p, p >= 1.0, "exponent must be at least 1")?;
    check_param(
        "gradient_integral",
        gradient_integral,
        gradient_integral >= 0.0,
        "must be nonnegative",
    )?;
    if spaces.is_empty() || spaces.len() != s_grid.len() {
        return Err(Error::Config(format!(
            "BBM family has {} spaces for {} smoothness values",
            spaces.len(),
            s_grid.len()
        )));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("s-grid must be strictly ascending".into()));
    }
    let dim = spaces[0]
        .dim()
        .ok_or(Error::MissingCoordinates("BBM limit needs coordinates"))?;
    if spaces.iter().any(|s| s.dim() != Some(dim)) {
        return Err(Error::Config("BBM family mixes dimensions".into()));
    }
    let c_hat = spaces
        .iter()
        .map(|s| empirical_ball_constant(s, dim))
        .collect::<Result<Vec<_>>>()?;
    let angular = angular_constant(dim, p);
    let target = angular * gradient_integral / (c_hat[c_hat.len() - 1] * p);
    let fields = spaces.iter().map(&rule).collect::<Result<Vec<_>>>()?;

    let entry = |k: usize, s: f64| -> Result<BbmEntry> {
        let value = (1.0 - s) * fractional_energy(&spaces[k], &fields[k], s, p)?;
        Ok(BbmEntry {
            s,
            n: spaces[k].len(),
            value,
            rel_error: (value - target).abs() / target,
        })
    };
    let diagonal = s_grid
        .iter()
        .enumerate()
        .map(|(k, &s)| entry(k, s))
        .collect::<Result<Vec<_>>>()?;
    let table = if full_table {
        let mut t = Vec::new();
        for &s in s_grid {
            for k in 0..spaces.len() {
                t.push(entry(k, s)?);
            }
        }
        t
    } else {
        Vec::new()
    };
    let monotone = diagonal
        .windows(2)
        .all(|w| w[1].rel_error <= w[0].rel_error);
    let final_rel_error = diagonal[diagonal.len() - 1].rel_error;
    Ok(BbmSweep {
        p,
        dim,
        s_grid: s_grid.to_vec(),
        n_grid: spaces.iter().map(|s| s.len()).collect(),
        c_hat,
        angular_constant: angular,
        gradient_integral,
        target,
        target_provenance: target_provenance.to_string(),
        diagonal,
        table,
        monotone,
        final_rel_error,
        within_10_percent: final_rel_error <= 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceConfig};

    #[test]
    fn angular_constants() {
        assert!((angular_constant(1, 2.0) - 2.0).abs() < 1e-14);
        assert!((angular_constant(1, 1.3) - 2.0).abs() < 1e-14);
        assert!((angular_constant(2, 2.0) - std::f64::consts::PI).abs() < 1e-14);
        assert!((angular_constant(3, 2.0) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn ball_constant_on_unit_grid() {
        let s = build_space(&SpaceConfig::grid_1d(64)).unwrap();
        assert!((empirical_ball_constant(&s, 1).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn family_mismatch_rejected() {
        let s = vec![build_space(&SpaceConfig::grid_1d(8)).unwrap()];
        let rule = |sp: &MetricMeasureSpace| ScalarField::from_fn(sp, |x| x[0]);
        assert!(bbm_limit(&s, rule, 2.0, &[0.5, 0.6], 1.0, "", false).is_err());
        let r = bbm_limit(&s, rule, 2.0, &[0.5], 1.0, "", true).unwrap();
        assert_eq!(r.table.len(), 1);
        assert_eq!(r.table[0], r.diagonal[0]);
    }
}
