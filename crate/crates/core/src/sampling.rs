//! Seeded draws of value profiles.
//!
//! All randomness goes through `ChaCha8Rng::seed_from_u64`, so results are
//! bit-reproducible for a given seed on every platform.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::JointDistribution;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws joint profile indices from a distribution.
#[derive(Clone, Debug)]
pub struct ProfileSampler {
    index: WeightedIndex<f64>,
}

impl ProfileSampler {
    pub fn new(d: &JointDistribution) -> Self {
        let index = WeightedIndex::new(d.probs()).expect("a valid distribution has positive total mass");
        Self { index }
    }

    pub fn draw(&self, rng: &mut SeededRng) -> usize {
        self.index.sample(rng)
    }
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{new_joint, TypeSpace};

    #[test]
    fn draws_follow_the_distribution() {
        let d = new_joint(TypeSpace::integer_grid(2, 2).unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let sampler = ProfileSampler::new(&d);
        let mut rng = seeded_rng(7);
        let mut counts = [0usize; 4];
        let n = 200_000;
        for _ in 0..n {
            counts[sampler.draw(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(d.probs()) {
            let freq = *c as f64 / n as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 5.0 * sd, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn zero_mass_profiles_never_drawn() {
        let d = new_joint(TypeSpace::integer_grid(2, 2).unwrap(), vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let sampler = ProfileSampler::new(&d);
        let mut rng = seeded_rng(1);
        assert!((0..1000).all(|_| sampler.draw(&mut rng) == 1));
    }

    #[test]
    fn running_stats() {
        let mut s = RunningStats::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            s.push(x);
        }
        assert!((s.mean() - 2.5).abs() < 1e-15);
        // sample variance 5/3, se = sqrt(5/3/4)
        assert!((s.std_error() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
