//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls into the library's numerics; spaces are rebuilt from
//! the same raw data with their own distance tables.

#![allow(dead_code)]

use mms_core::space::{CoordMetric, MetricMeasureSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TIE: f64 = 1e-12;

/// Raw description of a random point cloud, kept alongside the library space.
#[derive(Clone, Debug)]
pub struct RawSpace {
    pub coords: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub sup: bool,
    pub d: Vec<Vec<f64>>,
}

impl RawSpace {
    pub fn new(coords: Vec<Vec<f64>>, weights: Vec<f64>, sup: bool) -> Self {
        let n = coords.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let diff = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b).abs());
                d[i][j] = if sup {
                    diff.fold(0.0, f64::max)
                } else {
                    diff.map(|t| t * t).sum::<f64>().sqrt()
                };
            }
        }
        Self {
            coords,
            weights,
            sup,
            d,
        }
    }

    pub fn random(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Self {
        let coords = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let weights = (0..n).map(|_| rng.gen_range(0.25..2.0)).collect();
        Self::new(coords, weights, rng.gen_bool(0.5))
    }

    /// Uniform cell-centred grid on `[0, 1]` with cell-volume weights.
    pub fn unit_grid(n: usize) -> Self {
        let h = 1.0 / n as f64;
        Self::new(
            (0..n).map(|k| vec![(k as f64 + 0.5) * h]).collect(),
            vec![h; n],
            false,
        )
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn library(&self) -> MetricMeasureSpace {
        let metric = if self.sup {
            CoordMetric::Sup
        } else {
            CoordMetric::Euclidean
        };
        MetricMeasureSpace::from_coords(self.coords.clone(), metric, self.weights.clone())
            .expect("valid random space")
    }

    /// `μ(B(i, r))` for the open ball.
    pub fn ball_volume(&self, i: usize, r: f64) -> f64 {
        (0..self.len())
            .filter(|&j| self.d[i][j] < r * (1.0 - TIE))
            .map(|j| self.weights[j])
            .sum()
    }

    pub fn ball(&self, i: usize, r: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.d[i][j] < r * (1.0 - TIE))
            .collect()
    }

    pub fn min_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j {
                    m = m.min(self.d[i][j]);
                }
            }
        }
        m
    }
}

/// `‖A(x − y)‖_∞` with `A` row-major.
pub fn aniso_dist(a: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x.iter().zip(y))
                .map(|(m, (u, v))| m * (u - v))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// `(ratio, μ_i μ_j)` over ordered pairs with distinct values.
pub fn pair_ratios(
    sp: &RawSpace,
    f: &[f64],
    ratio: impl Fn(usize, usize, f64) -> f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..sp.len() {
        for j in 0..sp.len() {
            if i != j && f[i] != f[j] {
                out.push((
                    ratio(i, j, (f[i] - f[j]).abs()),
                    sp.weights[i] * sp.weights[j],
                ));
            }
        }
    }
    out
}

pub fn bvy_pairs(sp: &RawSpace, f: &[f64], p: f64) -> Vec<(f64, f64)> {
    pair_ratios(sp, f, |i, j, diff| {
        let rho = sp.d[i][j];
        diff / (rho * sp.ball_volume(i, rho).powf(1.0 / p))
    })
}

/// `Σ w` over pairs with ratio strictly above `λ`, by sorted suffix sums.
pub struct Tails {
    sorted: Vec<f64>,
    suffix: Vec<f64>,
}

impl Tails {
    pub fn new(pairs: &[(f64, f64)]) -> Self {
        let mut v: Vec<(f64, f64)> = pairs.to_vec();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut suffix = vec![0.0; v.len() + 1];
        for k in (0..v.len()).rev() {
            suffix[k] = suffix[k + 1] + v[k].1;
        }
        Self {
            sorted: v.into_iter().map(|x| x.0).collect(),
            suffix,
        }
    }

    pub fn above(&self, lambda: f64) -> f64 {
        self.suffix[self.sorted.partition_point(|&r| r <= lambda)]
    }
}

/// Dense λ-sweep of `λ^q · w{R > λ}`: returns (sweep over a log grid of
/// `points` values augmented with the left limits `r(1 − 1e-13)` of every
/// ratio, plain log-grid sweep).
pub fn lambda_sweep(pairs: &[(f64, f64)], q: f64, points: usize) -> (f64, f64) {
    let positive: Vec<f64> = pairs.iter().map(|p| p.0).filter(|r| *r > 0.0).collect();
    if positive.is_empty() {
        return (0.0, 0.0);
    }
    let tails = Tails::new(pairs);
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min) * 0.5;
    let hi = positive.iter().copied().fold(0.0, f64::max) * 1.01;
    let mut grid = 0.0_f64;
    for k in 0..points {
        let lambda = lo * (hi / lo).powf(k as f64 / (points - 1) as f64);
        grid = grid.max(lambda.powf(q) * tails.above(lambda));
    }
    let mut full = grid;
    for &r in &positive {
        let lambda = r * (1.0 - 1e-13);
        full = full.max(lambda.powf(q) * tails.above(lambda));
    }
    (full, grid)
}

/// `Σ_{i≠j} |Δf|^p / (ρ^{sp} V(i,ρ)) μ_i μ_j`.
pub fn fractional_energy(sp: &RawSpace, f: &[f64], s: f64, p: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..sp.len() {
        for j in 0..sp.len() {
            if i != j {
                let rho = sp.d[i][j];
                acc += (f[i] - f[j]).abs().powf(p) / (rho.powf(s * p) * sp.ball_volume(i, rho))
                    * sp.weights[i]
                    * sp.weights[j];
            }
        }
    }
    acc
}

/// `Σ_i L_i^p μ_i` with `L_i = max_{0<ρ(i,j)≤h} |Δf|/ρ`, `h = 1.5 × min distance`.
pub fn lipschitz_energy(sp: &RawSpace, f: &[f64], p: f64) -> f64 {
    let h = 1.5 * sp.min_distance();
    (0..sp.len())
        .map(|i| {
            let l = (0..sp.len())
                .filter(|&j| j != i && sp.d[i][j] <= h)
                .map(|j| (f[i] - f[j]).abs() / sp.d[i][j])
                .fold(0.0, f64::max);
            l.powf(p) * sp.weights[i]
        })
        .sum()
}

/// Unit-interval grid energy with the ball volume in closed form:
/// `V(i, k h) = h (min(i, k−1) + min(N−1−i, k−1) + 1)`.
pub fn grid_fractional_energy(n: usize, f: &[f64], s: f64, p: f64) -> f64 {
    let h = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = i.abs_diff(j);
                let vol = h * ((i.min(k - 1) + (n - 1 - i).min(k - 1) + 1) as f64);
                let rho = k as f64 * h;
                acc += (f[i] - f[j]).abs().powf(p) / (rho.powf(s * p) * vol) * h * h;
            }
        }
    }
    acc
}

pub fn bump(x: f64, center: f64, width: f64) -> f64 {
    let u = (x - center) / width;
    if u.abs() < 1.0 {
        (1.0 - u * u).powi(3)
    } else {
        0.0
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
