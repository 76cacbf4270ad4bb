//! Deterministic random streams.
//!
//! A stream is ChaCha8 keyed by the master seed (expanded with
//! `SeedableRng::seed_from_u64`) with the ChaCha stream id set to the stream
//! index. ChaCha is counter based, so stream `i` is fixed by `(seed, i)`
//! alone and never depends on how many other streams were consumed or in
//! which order. Normal variates use `rand_distr::StandardNormal` (ziggurat).
//!
//! The exact crate versions (`rand 0.8.8`, `rand_chacha 0.3.1`,
//! `rand_distr 0.4.3`) are pinned in `Cargo.toml`; changing them may change
//! every simulated path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// The first `count` standard normal draws of the stream.
    pub fn gaussian_increments(&self, count: usize) -> Vec<f64> {
        let mut rng = self.rng();
        (0..count).map(|_| rng.sample(StandardNormal)).collect()
    }
}

/// Fills `out` with standard normals drawn from `rng`.
pub fn fill_standard_normal<R: Rng>(rng: &mut R, out: &mut [f64]) {
    for x in out {
        *x = rng.sample(StandardNormal);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_reproduces() {
        let s = RngStream::new(42, 7);
        assert_eq!(s.gaussian_increments(100), s.gaussian_increments(100));
    }

    #[test]
    fn distinct_streams_differ() {
        let a = RngStream::new(42, 0).gaussian_increments(16);
        let b = RngStream::new(42, 1).gaussian_increments(16);
        let c = RngStream::new(43, 0).gaussian_increments(16);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_property() {
        let s = RngStream::new(1, 3);
        let long = s.gaussian_increments(50);
        let short = s.gaussian_increments(20);
        assert_eq!(&long[..20], &short[..]);
    }

    #[test]
    fn moments_of_a_million_draws() {
        let v = RngStream::new(2025, 0).gaussian_increments(1_000_000);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        // 3 sigma bounds: 3/sqrt(n) ~ 0.003 (mean), 3*sqrt(2/n) ~ 0.0042 (variance)
        assert!(mean.abs() < 0.004, "mean {mean}");
        assert!((var - 1.0).abs() < 0.005, "var {var}");
    }
}
