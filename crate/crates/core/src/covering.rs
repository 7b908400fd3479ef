//! Greedy Vitali-type selection of disjoint balls and dilation certificates.
//!
//! Balls are compared as point sets of the finite space: two balls intersect
//! when they share a point, and containment means inclusion of point sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::space::{anisotropic_distance, strictly_inside, AnisotropyMatrix, MetricMeasureSpace};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BallMetric {
    /// The space's own metric.
    Isotropic,
    /// `ρ_A` evaluated on the point coordinates.
    Anisotropic(AnisotropyMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallCollection {
    balls: Vec<Ball>,
    metric: BallMetric,
    radius_bound: f64,
}

impl BallCollection {
    pub fn new(balls: Vec<Ball>, metric: BallMetric, radius_bound: f64) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::Degenerate("empty ball collection".into()));
        }
        if let Some(b) = balls
            .iter()
            .find(|b| !(b.radius > 0.0 && b.radius <= radius_bound && b.radius.is_finite()))
        {
            return Err(Error::Parameter {
                name: "radius",
                value: b.radius,
                reason: "radii must be positive and at most the declared bound",
            });
        }
        Ok(Self {
            balls,
            metric,
            radius_bound,
        })
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn metric(&self) -> &BallMetric {
        &self.metric
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }
}

/// Which selected ball's dilation contains a given input ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentWitness {
    pub ball: usize,
    pub selected: usize,
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringResult {
    /// Indices into the input collection, in selection order.
    pub selected: Vec<usize>,
    /// For every input ball, the selected ball that removed it (itself when selected).
    pub removed_by: Vec<usize>,
    /// Dilation factor of the certificate (3).
    pub factor: f64,
    pub contained_at_3: bool,
    pub contained_at_5: bool,
    /// Smallest `K ∈ {2.0, 2.1, …, 6.0}` for which every input ball lies in
    /// some `K`-dilated selected ball.
    pub k_hat: Option<f64>,
    pub certificate: Vec<ContainmentWitness>,
}

const K_GRID_STEPS: usize = 40;

fn k_grid(step: usize) -> f64 {
    2.0 + step as f64 / 10.0
}

struct Geometry<'a> {
    space: &'a MetricMeasureSpace,
    metric: &'a BallMetric,
}

impl Geometry<'_> {
    fn dist(&self, i: usize, j: usize) -> f64 {
        match self.metric {
            BallMetric::Isotropic => self.space.dist(i, j),
            BallMetric::Anisotropic(a) => {
                let (x, y) = (self.space.coords(i).unwrap(), self.space.coords(j).unwrap());
                anisotropic_distance(a, x, y).unwrap()
            }
        }
    }

    fn members(&self, b: &Ball) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&j| strictly_inside(self.dist(b.center, j), b.radius))
            .collect()
    }
}

/// Greedy selection: repeatedly take the largest remaining ball (ties by
/// lowest centre id, then input order) and discard every ball meeting it.
pub fn greedy_select(
    space: &MetricMeasureSpace,
    collection: &BallCollection,
) -> Result<CoveringResult> {
    let balls = collection.balls();
    if let Some(b) = balls.iter().find(|b| b.center >= space.len()) {
        return Err(Error::Config(format!(
            "ball centre {} is not a point of the space",
            b.center
        )));
    }
    if let BallMetric::Anisotropic(a) = collection.metric() {
        let dim = space
            .dim()
            .filter(|_| space.has_coords())
            .ok_or(Error::MissingCoordinates(
                "anisotropic balls need coordinates",
            ))?;
        if dim != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: a.dim(),
            });
        }
    }
    let geo = Geometry {
        space,
        metric: collection.metric(),
    };
    let members: Vec<Vec<bool>> = parallel::map_rows(balls.len(), |b| {
        let mut mask = vec![false; space.len()];
        for j in geo.members(&balls[b]) {
            mask[j] = true;
        }
        mask
    });
    let meets = |a: usize, b: usize| members[a].iter().zip(&members[b]).any(|(x, y)| *x && *y);

    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        balls[b]
            .radius
            .total_cmp(&balls[a].radius)
            .then(balls[a].center.cmp(&balls[b].center))
            .then(a.cmp(&b))
    });
    let mut removed_by: Vec<Option<usize>> = vec![None; balls.len()];
    let mut selected = Vec::new();
    for &b in &order {
        if removed_by[b].is_some() {
            continue;
        }
        selected.push(b);
        removed_by[b] = Some(b);
        for &other in &order {
            if removed_by[other].is_none() && meets(b, other) {
                removed_by[other] = Some(b);
            }
        }
    }
    let removed_by: Vec<usize> = removed_by
        .into_iter()
        .map(|r| r.expect("every ball is removed"))
        .collect();

    // Smallest sufficient grid factor for each (input, selected) pair.
    let best = parallel::map_rows(balls.len(), |b| {
        let pts: Vec<usize> = (0..space.len()).filter(|&j| members[b][j]).collect();
        let factor_for = |s: usize| -> Option<usize> {
            let c = balls[s].center;
            let r = balls[s].radius;
            let far = pts.iter().map(|&y| geo.dist(c, y)).fold(0.0, f64::max);
            (0..=K_GRID_STEPS).find(|&k| strictly_inside(far, k_grid(k) * r))
        };
        let at = |s: usize, k: f64| {
            let c = balls[s].center;
            pts.iter()
                .all(|&y| strictly_inside(geo.dist(c, y), k * balls[s].radius))
        };
        let witness3 = std::iter::once(removed_by[b])
            .chain(selected.iter().copied())
            .find(|&s| at(s, 3.0));
        let within5 = selected.iter().any(|&s| at(s, 5.0));
        let kmin = selected.iter().filter_map(|&s| factor_for(s)).min();
        (witness3, within5, kmin)
    });

    let contained_at_3 = best.iter().all(|b| b.0.is_some());
    let contained_at_5 = best.iter().all(|b| b.1);
    let k_hat = best
        .iter()
        .map(|b| b.2)
        .try_fold(0usize, |acc, k| k.map(|k| acc.max(k)))
        .map(k_grid);
    let certificate = best
        .iter()
        .enumerate()
        .filter_map(|(b, w)| {
            w.0.map(|s| ContainmentWitness {
                ball: b,
                selected: s,
                factor: 3.0,
            })
        })
        .collect();
    Ok(CoveringResult {
        selected,
        removed_by,
        factor: 3.0,
        contained_at_3,
        contained_at_5,
        k_hat,
        certificate,
    })
}

impl CoveringResult {
    /// Re-checks disjointness of the selected balls point by point.
    pub fn selected_disjoint(
        &self,
        space: &MetricMeasureSpace,
        collection: &BallCollection,
    ) -> bool {
        let geo = Geometry {
            space,
            metric: collection.metric(),
        };
        let mut owner = vec![None; space.len()];
        for &s in &self.selected {
            for j in geo.members(&collection.balls()[s]) {
                if owner[j].is_some() {
                    return false;
                }
                owner[j] = Some(s);
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceConfig};

    #[test]
    fn single_ball() {
        let s = build_space(&SpaceConfig::grid_1d(10)).unwrap();
        let c = BallCollection::new(
            vec![Ball {
                center: 3,
                radius: 0.25,
            }],
            BallMetric::Isotropic,
            1.0,
        )
        .unwrap();
        let r = greedy_select(&s, &c).unwrap();
        assert_eq!(r.selected, vec![0]);
        assert!(r.contained_at_3 && r.contained_at_5);
        assert_eq!(r.k_hat, Some(2.0));
    }

    #[test]
    fn unit_balls_on_integer_grid() {
        let s = build_space(&SpaceConfig::Grid {
            dim: 1,
            side: 12,
            spacing: Some(1.0),
            metric: None,
            weights: None,
        })
        .unwrap();
        let balls = (0..12)
            .map(|i| Ball {
                center: i,
                radius: 1.0,
            })
            .collect();
        let c = BallCollection::new(balls, BallMetric::Isotropic, 1.0).unwrap();
        let r = greedy_select(&s, &c).unwrap();
        // B(i, 1) = {i}: nothing overlaps, so everything is selected.
        assert_eq!(r.selected.len(), 12);
        assert!(r.selected_disjoint(&s, &c));
        assert!(r.contained_at_3);

        let balls = (0..12)
            .map(|i| Ball {
                center: i,
                radius: 1.5,
            })
            .collect();
        let c = BallCollection::new(balls, BallMetric::Isotropic, 2.0).unwrap();
        let r = greedy_select(&s, &c).unwrap();
        let centers: Vec<usize> = r.selected.iter().map(|&b| c.balls()[b].center).collect();
        assert_eq!(centers, vec![0, 3, 6, 9]);
        for w in centers.windows(2) {
            assert!(w[1] - w[0] >= 2);
        }
        assert!(r.selected_disjoint(&s, &c));
        assert!(r.contained_at_3);
    }

    #[test]
    fn anisotropic_requires_coordinates() {
        let s = MetricMeasureSpace::from_matrix(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0], None)
            .unwrap();
        let c = BallCollection::new(
            vec![Ball {
                center: 0,
                radius: 1.0,
            }],
            BallMetric::Anisotropic(AnisotropyMatrix::identity(2)),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            greedy_select(&s, &c),
            Err(Error::MissingCoordinates(_))
        ));
    }

    #[test]
    fn empty_collection_rejected() {
        assert!(BallCollection::new(vec![], BallMetric::Isotropic, 1.0).is_err());
        assert!(BallCollection::new(
            vec![Ball {
                center: 0,
                radius: 2.0
            }],
            BallMetric::Isotropic,
            1.0
        )
        .is_err());
    }
}
