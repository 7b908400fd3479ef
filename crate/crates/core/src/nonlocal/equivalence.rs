use serde::Serialize;

use super::NonlocalParams;
use crate::error::{Error, Result};
use crate::functionals::{fractional_energy, lipschitz_energy, ScalarField};
use crate::space::MetricMeasureSpace;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub n: usize,
    /// `[f]_{s,p}^p`.
    pub nonlocal: f64,
    /// `Σ_i L_i^p μ_i`.
    pub local: f64,
    /// `None` when either side vanishes.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    /// `max ratio / min ratio` over the determinate rows.
    pub spread: Option<f64>,
    /// Spread below 2.
    pub stable: bool,
}

/// Compares the fractional energy with the local Lipschitz energy of the
/// same rule across a family of spaces.
pub fn energy_equivalence_report<F>(
    spaces: &[MetricMeasureSpace],
    rule: F,
    params: NonlocalParams,
) -> Result<EquivalenceReport>
where
    F: Fn(&MetricMeasureSpace) -> Result<ScalarField>,
{
    params.validate()?;
    if spaces.len() < 2 {
        return Err(Error::Degenerate(
            "equivalence needs at least two spaces".into(),
        ));
    }
    let rows = spaces
        .iter()
        .map(|space| {
            let f = rule(space)?;
            row_for(space, &f, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarise(rows))
}

pub(crate) fn row_for(
    space: &MetricMeasureSpace,
    f: &ScalarField,
    params: NonlocalParams,
) -> Result<EquivalenceRow> {
    let nonlocal = fractional_energy(space, f, params.s, params.p)?;
    let local = lipschitz_energy(space, f, params.p)?;
    let ratio = (nonlocal > 0.0 && local > 0.0).then(|| nonlocal / local);
    Ok(EquivalenceRow {
        n: space.len(),
        nonlocal,
        local,
        ratio,
    })
}

pub(crate) fn summarise(rows: Vec<EquivalenceRow>) -> EquivalenceReport {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let spread = (!ratios.is_empty()).then(|| {
        let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
        let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
        hi / lo
    });
    EquivalenceReport {
        stable: spread.is_some_and(|s| s < 2.0),
        rows,
        spread,
    }
}
