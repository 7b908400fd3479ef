//! Finite metric measure spaces.
//!
//! A space is a weighted point set with either a dense distance matrix or a
//! closed-form metric evaluated on coordinates. Balls are open:
//! `B(x, r) = {y : ρ(x, y) < r}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;

/// Relative slack used when deciding `ρ < r`. Distances that agree in exact
/// arithmetic but differ by a few ulps (mirror-image grid neighbours) are
/// treated as equal.
pub const TIE_RTOL: f64 = 1e-12;

/// Open-ball membership test `d < r` with the tie tolerance applied.
#[inline]
pub fn strictly_inside(d: f64, r: f64) -> bool {
    d < r * (1.0 - TIE_RTOL)
}

const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 200;
const SAMPLED_TRIANGLES: usize = 20_000;

/// Invertible matrix defining `ρ_A(x, y) = ‖A(x − y)‖_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropyMatrix {
    dim: usize,
    entries: Vec<f64>,
    condition: f64,
}

impl AnisotropyMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidMetric("empty anisotropy matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMetric("non-finite anisotropy entry".into()));
            }
            entries.extend_from_slice(row);
        }
        let svd = DMatrix::from_row_slice(dim, dim, &entries).svd(false, false);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        if s_max <= 0.0 || s_min <= 1e-12 * s_max {
            let condition = if s_min > 0.0 {
                s_max / s_min
            } else {
                f64::INFINITY
            };
            return Err(Error::SingularAnisotropy { condition });
        }
        Ok(Self {
            dim,
            entries,
            condition: s_max / s_min,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = c;
        }
        Self {
            dim,
            entries,
            condition: 1.0,
        }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..diag.len())
            .map(|i| {
                let mut r = vec![0.0; diag.len()];
                r[i] = diag[i];
                r
            })
            .collect();
        Self::new(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ratio of extreme singular values.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// `Aᵀ v`.
    pub fn transpose_apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.get(r, c) * v[r]).sum())
            .collect()
    }

    #[inline]
    fn sup_of_product(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut best = 0.0_f64;
        for r in 0..self.dim {
            let row = &self.entries[r * self.dim..(r + 1) * self.dim];
            let mut acc = 0.0;
            for k in 0..self.dim {
                acc += row[k] * (x[k] - y[k]);
            }
            best = best.max(acc.abs());
        }
        best
    }
}

/// `‖A(x − y)‖_∞`.
pub fn anisotropic_distance(a: &AnisotropyMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: x.len(),
        });
    }
    if y.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: y.len(),
        });
    }
    Ok(a.sup_of_product(x, y))
}

/// Closed-form metrics evaluated on coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordMetric {
    Euclidean,
    Sup,
    Anisotropic(AnisotropyMatrix),
}

impl CoordMetric {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CoordMetric::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            CoordMetric::Sup => x
                .iter()
                .zip(y)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
            CoordMetric::Anisotropic(a) => a.sup_of_product(x, y),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Metric {
    Dense(Vec<f64>),
    Coords(CoordMetric),
}

/// Layout of a regular grid: index `i = Σ_d k_d · side^d`, coordinate
/// `(k_d + 1/2) · spacing`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridInfo {
    pub dim: usize,
    pub side: usize,
    pub spacing: f64,
}

impl GridInfo {
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut k = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            k.push(i % self.side);
            i /= self.side;
        }
        k
    }

    pub fn linear_index(&self, k: &[usize]) -> usize {
        k.iter().rev().fold(0, |acc, &v| acc * self.side + v)
    }
}

/// Distances and ball volumes `V(i, ρ(i, j))` seen from one centre.
#[derive(Clone, Debug)]
pub struct PairRow {
    pub dist: Vec<f64>,
    /// `vol[j] = μ(B(i, ρ(i, j)))`; the entry for `j = i` is zero.
    pub vol: Vec<f64>,
}

/// Finite weighted point set with a metric. Immutable after construction.
#[derive(Clone, Debug)]
pub struct MetricMeasureSpace {
    weights: Vec<f64>,
    dim: Option<usize>,
    coords: Option<Vec<f64>>,
    metric: Metric,
    grid: Option<GridInfo>,
}

impl MetricMeasureSpace {
    /// Space from a row-major `N × N` distance matrix.
    pub fn from_matrix(
        matrix: Vec<f64>,
        weights: Vec<f64>,
        coords: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = weights.len();
        validate_weights(&weights)?;
        if matrix.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        let scale = matrix.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("ρ({i},{i}) ≠ 0")));
            }
            for j in 0..n {
                let d = matrix[i * n + j];
                if !d.is_finite() {
                    return Err(Error::InvalidMetric(format!("ρ({i},{j}) is not finite")));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "ρ({i},{j}) = {d} must be positive for distinct points"
                    )));
                }
                if (d - matrix[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidMetric(format!(
                        "non-symmetric metric: ρ({i},{j}) = {d}, ρ({j},{i}) = {}",
                        matrix[j * n + i]
                    )));
                }
            }
        }
        let (dim, flat) = flatten_coords(coords, n)?;
        let space = Self {
            weights,
            dim,
            coords: flat,
            metric: Metric::Dense(matrix),
            grid: None,
        };
        space.check_triangle()?;
        Ok(space)
    }

    /// Space from coordinates and a closed-form metric.
    pub fn from_coords(
        coords: Vec<Vec<f64>>,
        metric: CoordMetric,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = weights.len();
        validate_weights(&weights)?;
        let (dim, flat) = flatten_coords(Some(coords), n)?;
        let dim = dim.unwrap_or(0);
        if let CoordMetric::Anisotropic(a) = &metric {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.dim(),
                });
            }
        }
        let space = Self {
            weights,
            dim: Some(dim),
            coords: flat,
            metric: Metric::Coords(metric),
            grid: None,
        };
        // Closed-form metrics satisfy the axioms except for coincident points.
        let coincident = parallel::map_rows(n, |i| {
            ((i + 1)..n)
                .find(|&j| space.dist(i, j) <= 0.0)
                .map(|j| (i, j))
        });
        if let Some((i, j)) = coincident.into_iter().flatten().next() {
            return Err(Error::InvalidMetric(format!(
                "points {i} and {j} coincide under the metric"
            )));
        }
        space.check_triangle()?;
        Ok(space)
    }

    pub(crate) fn with_grid(mut self, grid: GridInfo) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Ambient dimension, when the points carry coordinates.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        let d = self.dim?;
        self.coords.as_ref().map(|c| &c[i * d..(i + 1) * d])
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    pub fn grid(&self) -> Option<&GridInfo> {
        self.grid.as_ref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Dense(m) => m[i * self.len() + j],
            Metric::Coords(metric) => {
                let d = self.dim.unwrap_or(0);
                let c = self
                    .coords
                    .as_ref()
                    .expect("coordinate metric without coordinates");
                metric.eval(&c[i * d..(i + 1) * d], &c[j * d..(j + 1) * d])
            }
        }
    }

    /// `μ(B(i, r))` with the open-ball convention.
    pub fn ball_volume(&self, i: usize, r: f64) -> f64 {
        (0..self.len())
            .filter(|&j| strictly_inside(self.dist(i, j), r))
            .map(|j| self.weights[j])
            .sum()
    }

    pub fn ball_members(&self, i: usize, r: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| strictly_inside(self.dist(i, j), r))
            .collect()
    }

    /// Distances from `i` and the ball volumes `V(i, ρ(i, j))` for every `j`.
    pub fn pair_row(&self, i: usize) -> PairRow {
        let n = self.len();
        let dist: Vec<f64> = (0..n).map(|j| self.dist(i, j)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let sorted: Vec<f64> = order.iter().map(|&j| dist[j]).collect();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &j in &order {
            acc += self.weights[j];
            prefix.push(acc);
        }
        let vol = (0..n)
            .map(|j| {
                if j == i {
                    0.0
                } else {
                    let cut = dist[j] * (1.0 - TIE_RTOL);
                    prefix[sorted.partition_point(|&d| d < cut)]
                }
            })
            .collect();
        PairRow { dist, vol }
    }

    pub fn min_positive_distance(&self) -> f64 {
        let n = self.len();
        parallel::map_rows(n, |i| {
            ((i + 1)..n).fold(f64::INFINITY, |m, j| m.min(self.dist(i, j)))
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        parallel::map_rows(n, |i| {
            ((i + 1)..n).fold(0.0_f64, |m, j| m.max(self.dist(i, j)))
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Row-major dense distance matrix.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let n = self.len();
        parallel::map_rows(n, |i| (0..n).map(|j| self.dist(i, j)).collect::<Vec<_>>())
            .into_iter()
            .flatten()
            .collect()
    }

    /// Exports the space as a `custom` config carrying the dense matrix.
    pub fn to_config(&self) -> SpaceConfig {
        let coords = self.dim.and_then(|d| {
            self.coords
                .as_ref()
                .map(|c| c.chunks(d.max(1)).map(|p| p.to_vec()).collect())
        });
        SpaceConfig::Custom {
            matrix: self.dense_matrix(),
            weights: self.weights.clone(),
            coords,
        }
    }

    fn check_triangle(&self) -> Result<()> {
        let n = self.len();
        if n < 3 {
            return Ok(());
        }
        let scale = self.diameter();
        let slack = 1e-12 * scale;
        let violation = |i: usize, j: usize, k: usize| -> Option<String> {
            let lhs = self.dist(i, k);
            let rhs = self.dist(i, j) + self.dist(j, k);
            (lhs > rhs + slack).then(|| {
                format!("triangle inequality fails: ρ({i},{k}) = {lhs} > ρ({i},{j}) + ρ({j},{k}) = {rhs}")
            })
        };
        let found = if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            parallel::map_rows(n, |i| {
                for j in 0..n {
                    for k in 0..n {
                        if let Some(msg) = violation(i, j, k) {
                            return Some(msg);
                        }
                    }
                }
                None
            })
            .into_iter()
            .flatten()
            .next()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7e1a);
            (0..SAMPLED_TRIANGLES).find_map(|_| {
                violation(
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                )
            })
        };
        match found {
            Some(msg) => Err(Error::InvalidMetric(msg)),
            None => Ok(()),
        }
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("space has no points".into()));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(Error::InvalidWeights(format!(
            "μ_{i} = {w} must be positive and finite"
        )));
    }
    Ok(())
}

fn flatten_coords(
    coords: Option<Vec<Vec<f64>>>,
    n: usize,
) -> Result<(Option<usize>, Option<Vec<f64>>)> {
    let Some(coords) = coords else {
        return Ok((None, None));
    };
    if coords.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coords.len(),
        });
    }
    let dim = coords.first().map_or(0, Vec::len);
    let mut flat = Vec::with_capacity(n * dim);
    for c in &coords {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMetric("non-finite coordinate".into()));
        }
        flat.extend_from_slice(c);
    }
    Ok((Some(dim), Some(flat)))
}

// ---------------------------------------------------------------------------
// Configuration and generators

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean,
    Sup,
    Anisotropic { matrix: Vec<Vec<f64>> },
}

impl MetricSpec {
    pub fn to_metric(&self) -> Result<CoordMetric> {
        Ok(match self {
            MetricSpec::Euclidean => CoordMetric::Euclidean,
            MetricSpec::Sup => CoordMetric::Sup,
            MetricSpec::Anisotropic { matrix } => {
                CoordMetric::Anisotropic(AnisotropyMatrix::new(matrix)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightRule {
    /// `spacing^dim` per point.
    CellVolume,
    Constant {
        value: f64,
    },
    /// Uniform weights summing to `mass`.
    Total {
        mass: f64,
    },
}

/// JSON description of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceConfig {
    /// `side^dim` cell-centred points with spacing `spacing` (default `1/side`).
    Grid {
        dim: usize,
        side: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<MetricSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<WeightRule>,
    },
    /// Uniform points on a segment of the plane with one-dimensional weights.
    SegmentInPlane {
        points: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<f64>,
    },
    /// Uniform random points in `[-extent, extent]^dim` carrying Gaussian weights.
    GaussianCloud {
        points: usize,
        dim: usize,
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extent: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<MetricSpec>,
    },
    /// Explicit coordinates with a closed-form metric.
    Points {
        coords: Vec<Vec<f64>>,
        weights: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<MetricSpec>,
    },
    /// Dense row-major metric matrix.
    Custom {
        matrix: Vec<f64>,
        weights: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<Vec<f64>>>,
    },
}

impl SpaceConfig {
    pub fn grid_1d(side: usize) -> Self {
        SpaceConfig::Grid {
            dim: 1,
            side,
            spacing: None,
            metric: None,
            weights: None,
        }
    }

    pub fn needs_seed(&self) -> bool {
        matches!(self, SpaceConfig::GaussianCloud { seed: None, .. })
    }
}

pub fn build_space(config: &SpaceConfig) -> Result<MetricMeasureSpace> {
    match config {
        SpaceConfig::Grid {
            dim,
            side,
            spacing,
            metric,
            weights,
        } => {
            let (dim, side) = (*dim, *side);
            if dim == 0 || side == 0 {
                return Err(Error::Config("grid needs dim ≥ 1 and side ≥ 1".into()));
            }
            let h = spacing.unwrap_or(1.0 / side as f64);
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!("grid spacing {h} must be positive")));
            }
            let info = GridInfo {
                dim,
                side,
                spacing: h,
            };
            let n = side
                .checked_pow(dim as u32)
                .ok_or_else(|| Error::Config("grid too large".into()))?;
            let coords: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    info.multi_index(i)
                        .into_iter()
                        .map(|k| (k as f64 + 0.5) * h)
                        .collect()
                })
                .collect();
            let w = match weights.clone().unwrap_or(WeightRule::CellVolume) {
                WeightRule::CellVolume => h.powi(dim as i32),
                WeightRule::Constant { value } => value,
                WeightRule::Total { mass } => mass / n as f64,
            };
            let metric = metric
                .as_ref()
                .map_or(Ok(CoordMetric::Euclidean), MetricSpec::to_metric)?;
            Ok(MetricMeasureSpace::from_coords(coords, metric, vec![w; n])?.with_grid(info))
        }
        SpaceConfig::SegmentInPlane {
            points,
            length,
            angle,
        } => {
            let n = *points;
            if n == 0 {
                return Err(Error::Config("segment needs at least one point".into()));
            }
            let len = length.unwrap_or(1.0);
            let theta = angle.unwrap_or(std::f64::consts::FRAC_PI_6);
            let h = len / n as f64;
            let coords = (0..n)
                .map(|k| {
                    let t = (k as f64 + 0.5) * h;
                    vec![t * theta.cos(), t * theta.sin()]
                })
                .collect();
            MetricMeasureSpace::from_coords(coords, CoordMetric::Euclidean, vec![h; n])
        }
        SpaceConfig::GaussianCloud {
            points,
            dim,
            sigma,
            extent,
            seed,
            metric,
        } => {
            let seed =
                seed.ok_or_else(|| Error::Config("gaussian-cloud requires a seed".into()))?;
            let (n, dim) = (*points, *dim);
            let extent = extent.unwrap_or(1.0);
            if n == 0 || dim == 0 || !(*sigma > 0.0) || !(extent > 0.0) {
                return Err(Error::Config(
                    "gaussian-cloud needs points ≥ 1, dim ≥ 1, sigma > 0, extent > 0".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cell = (2.0 * extent).powi(dim as i32) / n as f64;
            let mut coords = Vec::with_capacity(n);
            let mut weights = Vec::with_capacity(n);
            for _ in 0..n {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-extent..extent)).collect();
                let r2: f64 = x.iter().map(|v| v * v).sum();
                weights.push(cell * (-r2 / (2.0 * sigma * sigma)).exp());
                coords.push(x);
            }
            let metric = metric
                .as_ref()
                .map_or(Ok(CoordMetric::Euclidean), MetricSpec::to_metric)?;
            MetricMeasureSpace::from_coords(coords, metric, weights)
        }
        SpaceConfig::Points {
            coords,
            weights,
            metric,
        } => {
            let metric = metric
                .as_ref()
                .map_or(Ok(CoordMetric::Euclidean), MetricSpec::to_metric)?;
            MetricMeasureSpace::from_coords(coords.clone(), metric, weights.clone())
        }
        SpaceConfig::Custom {
            matrix,
            weights,
            coords,
        } => MetricMeasureSpace::from_matrix(matrix.clone(), weights.clone(), coords.clone()),
    }
}

// ---------------------------------------------------------------------------
// Growth diagnostics

/// Least-squares power law `V(i, r) ≈ C_P r^d` over the sampled balls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub c_p: f64,
    pub exponent: f64,
    /// RMS residual of the log-log regression.
    pub residual: f64,
    /// `max V(i, r) / r^d` over the sample.
    pub sup_ratio: f64,
    /// Whether `sup_ratio ≤ c_p`.
    pub bound_holds: bool,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GrowthFit {
    Fitted(PowerLawFit),
    Degenerate { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthDiagnostics {
    /// `max V(i, 2r) / V(i, r)` over every centre and radius.
    pub doubling: f64,
    pub radii: usize,
    pub fit: GrowthFit,
}

impl GrowthDiagnostics {
    pub fn fitted(&self) -> Option<&PowerLawFit> {
        match &self.fit {
            GrowthFit::Fitted(f) => Some(f),
            GrowthFit::Degenerate { .. } => None,
        }
    }
}

/// Doubling and polynomial-growth diagnostics over every centre and every
/// radius where some `V(i, ·)` can change (distinct distances and midpoints).
/// The power-law fit uses radii up to half the diameter.
pub fn growth_diagnostics(space: &MetricMeasureSpace) -> Result<GrowthDiagnostics> {
    let n = space.len();
    if n < 2 {
        return Err(Error::Degenerate(
            "growth diagnostics need at least two points".into(),
        ));
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = parallel::map_rows(n, |i| {
        let mut d: Vec<(f64, f64)> = (0..n)
            .map(|j| (space.dist(i, j), space.weight(j)))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &(_, w) in &d {
            acc += w;
            prefix.push(acc);
        }
        (d.into_iter().map(|p| p.0).collect(), prefix)
    });
    let mut distinct: Vec<f64> = rows
        .iter()
        .flat_map(|(d, _)| d.iter().copied().filter(|&v| v > 0.0))
        .collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= TIE_RTOL * b.abs());
    if distinct.is_empty() {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let mut radii = distinct.clone();
    radii.extend(distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    radii.sort_by(f64::total_cmp);

    let volume = |row: &(Vec<f64>, Vec<f64>), r: f64| {
        let cut = r * (1.0 - TIE_RTOL);
        row.1[row.0.partition_point(|&d| d < cut)]
    };
    let diameter = *distinct.last().unwrap();
    let fit_cap = 0.5 * diameter * (1.0 + TIE_RTOL);

    // Per centre: doubling max and regression moments.
    let per_row = parallel::map_rows(n, |i| {
        let row = &rows[i];
        let mut dbl = 1.0_f64;
        let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0usize);
        for &r in &radii {
            let v = volume(row, r);
            dbl = dbl.max(volume(row, 2.0 * r) / v);
            if r <= fit_cap {
                let (x, y) = (r.ln(), v.ln());
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                cnt += 1;
            }
        }
        (dbl, sx, sy, sxx, sxy, cnt)
    });
    let doubling = per_row.iter().fold(1.0_f64, |m, r| m.max(r.0));
    let (sx, sy, sxx, sxy, cnt) = per_row.iter().fold((0.0, 0.0, 0.0, 0.0, 0usize), |a, r| {
        (a.0 + r.1, a.1 + r.2, a.2 + r.3, a.3 + r.4, a.4 + r.5)
    });

    let fit_radii = radii.iter().filter(|&&r| r <= fit_cap).count();
    let fit = if fit_radii < 2 || cnt < 2 {
        GrowthFit::Degenerate {
            reason: format!("only {fit_radii} radius scale(s) available for the power-law fit"),
        }
    } else {
        let m = cnt as f64;
        let var = sxx - sx * sx / m;
        if var <= 1e-300 {
            GrowthFit::Degenerate {
                reason: "radii span a single scale".into(),
            }
        } else {
            let slope = (sxy - sx * sy / m) / var;
            let intercept = (sy - slope * sx) / m;
            if !(slope > 0.0) {
                GrowthFit::Degenerate {
                    reason: format!("fitted exponent {slope} is not positive"),
                }
            } else {
                let stats = parallel::map_rows(n, |i| {
                    let row = &rows[i];
                    let (mut ss, mut sup) = (0.0, 0.0_f64);
                    for &r in radii.iter().filter(|&&r| r <= fit_cap) {
                        let v = volume(row, r);
                        let e = v.ln() - (intercept + slope * r.ln());
                        ss += e * e;
                        sup = sup.max(v / r.powf(slope));
                    }
                    (ss, sup)
                });
                let ss = stats.iter().fold(0.0, |a, s| a + s.0);
                let sup_ratio = stats.iter().fold(0.0_f64, |a, s| a.max(s.1));
                let c_p = intercept.exp();
                GrowthFit::Fitted(PowerLawFit {
                    c_p,
                    exponent: slope,
                    residual: (ss / m).sqrt(),
                    sup_ratio,
                    bound_holds: sup_ratio <= c_p,
                    samples: cnt,
                })
            }
        }
    };
    Ok(GrowthDiagnostics {
        doubling,
        radii: radii.len(),
        fit,
    })
}
