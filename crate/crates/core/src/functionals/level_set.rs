//! Exact supremum of `λ ↦ λ^p · w{R > λ}` over weighted pair ratios.
//!
//! The tail weight is a right-continuous, nonincreasing step function that
//! only jumps at the observed ratios, so the supremum is approached as
//! `λ ↑ r` for some distinct ratio `r` and equals `max_k r_k^p · W_k` with
//! `W_k = w{R ≥ r_k}`.

/// Sorted distinct positive ratios with their tail weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelSetProfile {
    ratios: Vec<f64>,
    tails: Vec<f64>,
}

impl LevelSetProfile {
    /// Builds the profile from `(ratio, weight)` pairs. Pairs with ratio 0
    /// never enter a level set `{R > λ}`, `λ > 0`, and are dropped.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.retain(|&(r, _)| r > 0.0);
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
        let mut ratios = Vec::new();
        let mut tails = Vec::new();
        let mut acc = 0.0;
        let mut k = 0;
        while k < pairs.len() {
            let r = pairs[k].0;
            while k < pairs.len() && pairs[k].0 == r {
                acc += pairs[k].1;
                k += 1;
            }
            ratios.push(r);
            tails.push(acc);
        }
        ratios.reverse();
        tails.reverse();
        Self { ratios, tails }
    }

    /// Distinct ratios, ascending.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// `W_k = w{R ≥ r_k}`, strictly decreasing.
    pub fn tail_weights(&self) -> &[f64] {
        &self.tails
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    /// `w{R > λ}`.
    pub fn tail_weight(&self, lambda: f64) -> f64 {
        let k = self.ratios.partition_point(|&r| r <= lambda);
        self.tails.get(k).copied().unwrap_or(0.0)
    }

    /// `sup_{λ>0} λ^p · w{R > λ}`; zero when every ratio vanishes.
    pub fn sup_power(&self, p: f64) -> f64 {
        self.argmax(p).map_or(0.0, |(_, v)| v)
    }

    /// Index of the maximising ratio and the supremum value.
    pub fn argmax(&self, p: f64) -> Option<(usize, f64)> {
        self.ratios
            .iter()
            .zip(&self.tails)
            .map(|(r, w)| r.powf(p) * w)
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (k, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((k, v)),
            })
    }
}
