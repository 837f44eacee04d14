use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{emd_with, sinkhorn, EmdOptions, SampleSet, SinkhornConfig};
use crate::error::{Error, Result};

/// Summed row-marginal violation accepted from the Sinkhorn fallback.
const FALLBACK_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    /// Points kept per level before solving.
    pub max_samples: usize,
    /// Seed of the subsampling stream.
    pub seed: u64,
    pub exponent: f64,
    /// Exact-solver cap on `rows * cols`.
    pub max_cells: usize,
    /// When set, oversized problems fall back to Sinkhorn with
    /// `epsilon = sinkhorn_relative_epsilon * median cost`.
    pub sinkhorn_relative_epsilon: Option<f64>,
    pub sinkhorn_max_iters: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            max_samples: 64,
            seed: 0,
            exponent: 1.0,
            max_cells: 256 * 256,
            sinkhorn_relative_epsilon: None,
            sinkhorn_max_iters: 20_000,
        }
    }
}

impl DistanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_samples == 0 {
            return Err(Error::config("distance.max_samples", "must be at least 1"));
        }
        if !(self.exponent >= 1.0) {
            return Err(Error::config("distance.exponent", "must be >= 1"));
        }
        if let Some(e) = self.sinkhorn_relative_epsilon {
            if !(e > 0.0) {
                return Err(Error::config("distance.sinkhorn_relative_epsilon", "must be positive"));
            }
        }
        Ok(())
    }

    fn subsample(&self, set: &SampleSet) -> SampleSet {
        // seeding by content makes each set's subsample independent of the
        // argument order, so the distance stays symmetric
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ set.fingerprint());
        set.subsample(self.max_samples, &mut rng).compact()
    }
}

/// Empirical Wasserstein distance between the occupancy samples of two
/// levels.
pub fn level_distance(a: &SampleSet, b: &SampleSet, cfg: &DistanceConfig) -> Result<f64> {
    let a = cfg.subsample(a);
    let b = cfg.subsample(b);
    let options = EmdOptions {
        max_cells: cfg.max_cells,
    };
    match emd_with(&a, &b, cfg.exponent, &options) {
        Ok(t) => Ok(t.distance),
        Err(Error::SizeCap { .. }) if cfg.sinkhorn_relative_epsilon.is_some() => {
            let (a, b) = if a.canonical_cmp(&b).is_gt() { (b, a) } else { (a, b) };
            let median = super::CostMatrix::between(&a, &b, cfg.exponent)?.median();
            let sk = SinkhornConfig {
                epsilon: cfg.sinkhorn_relative_epsilon.unwrap() * median.max(f64::MIN_POSITIVE),
                max_iters: cfg.sinkhorn_max_iters,
                tolerance: FALLBACK_TOLERANCE,
            };
            Ok(sinkhorn(&a, &b, cfg.exponent, &sk)?.value)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(offset: f64, n: usize) -> SampleSet {
        SampleSet::uniform((0..n).map(|i| vec![offset + i as f64, (i % 3) as f64]).collect()).unwrap()
    }

    #[test]
    fn identical_sets_without_subsampling() {
        let a = cloud(0.0, 20);
        assert_eq!(level_distance(&a, &a, &DistanceConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_with_subsampling() {
        let cfg = DistanceConfig {
            max_samples: 16,
            seed: 9,
            ..DistanceConfig::default()
        };
        let a = cloud(0.0, 50);
        let b = cloud(3.5, 40);
        let ab = level_distance(&a, &b, &cfg).unwrap();
        let ba = level_distance(&b, &a, &cfg).unwrap();
        assert_eq!(ab, ba);
        assert!(ab > 0.0);
    }

    #[test]
    fn sinkhorn_fallback_for_oversized_inputs() {
        let a = cloud(0.0, 30);
        let b = cloud(1.0, 30);
        let strict = DistanceConfig {
            max_cells: 100,
            ..DistanceConfig::default()
        };
        assert!(matches!(level_distance(&a, &b, &strict), Err(Error::SizeCap { .. })));
        let relaxed = DistanceConfig {
            sinkhorn_relative_epsilon: Some(1e-2),
            ..strict
        };
        let approx = level_distance(&a, &b, &relaxed).unwrap();
        let exact = level_distance(&a, &b, &DistanceConfig::default()).unwrap();
        assert!((approx - exact).abs() / exact < 0.05, "{approx} vs {exact}");
    }
}
