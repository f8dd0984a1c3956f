//! Seeded synthetic datasets.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::rng;

/// Two overlapping isotropic Gaussians. The majority is centred at the
/// origin, the minority at distance `separation` along the all-ones
/// direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub n: usize,
    pub d: usize,
    pub ir: f64,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_separation() -> f64 {
    1.5
}

impl GaussianSpec {
    pub fn new(n: usize, d: usize, ir: f64, seed: u64) -> Self {
        GaussianSpec { n, d, ir, separation: default_separation(), seed }
    }

    pub fn name(&self) -> String {
        format!("gauss-n{}-d{}-ir{}-s{}", self.n, self.d, self.ir, self.seed)
    }

    /// Minority size `round(n / (1 + ir))`.
    pub fn minority_count(&self) -> usize {
        (self.n as f64 / (1.0 + self.ir)).round() as usize
    }

    pub fn generate(&self) -> Result<Dataset> {
        if self.d == 0 || !(self.ir >= 1.0) || !self.separation.is_finite() {
            return Err(Error::invalid_param("gaussian spec needs d >= 1, ir >= 1, finite separation"));
        }
        let n_min = self.minority_count();
        if n_min < 2 || n_min >= self.n {
            return Err(Error::invalid_param(format!("n={} with ir={} leaves {n_min} minority rows", self.n, self.ir)));
        }
        let mut r = rng::rng(rng::child(self.seed, "gaussian", 0));
        let shift = self.separation / (self.d as f64).sqrt();
        let mut data = Vec::with_capacity(self.n * self.d);
        let mut labels = vec![0usize; self.n];
        let minority: std::collections::HashSet<usize> =
            rand::seq::index::sample(&mut r, self.n, n_min).into_iter().collect();
        for (i, label) in labels.iter_mut().enumerate() {
            let is_min = minority.contains(&i);
            *label = is_min as usize;
            for _ in 0..self.d {
                let z: f64 = StandardNormal.sample(&mut r);
                data.push(z + if is_min { shift } else { 0.0 });
            }
        }
        Dataset::numeric(self.name(), Matrix::from_vec(self.n, self.d, data)?, labels, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let s = GaussianSpec::new(2000, 10, 20.0, 3);
        let d = s.generate().unwrap();
        assert_eq!(d.class_counts(), vec![1905, 95]);
        assert_eq!(d, s.generate().unwrap());
        assert!(GaussianSpec::new(10, 2, 20.0, 0).generate().is_err());
    }
}
