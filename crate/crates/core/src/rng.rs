//! Deterministic, splittable random streams.
//!
//! Every consumer of randomness owns an [`RngStream`] derived from a 64-bit
//! run seed plus a domain label (repetition index, block index, purpose tag).
//! Streams never share state, so work can be scheduled across any number of
//! threads without affecting the numbers a given (seed, label) pair produces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// splitmix64 step; used only to expand (seed, labels) into a ChaCha key.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse a seed and a grid index into a new 64-bit seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed;
    let a = splitmix64(&mut s);
    s ^= index.wrapping_mul(0xA076_1D64_78BD_642F);
    let b = splitmix64(&mut s);
    a ^ b.rotate_left(17)
}

/// A self-contained uniform random stream (ChaCha8 keyed by seed + labels).
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    /// Derive the stream identified by `(seed, labels)`. Distinct label
    /// sequences give statistically independent streams.
    pub fn derive(seed: u64, labels: &[u64]) -> Self {
        let mut state = seed;
        for &l in labels {
            state ^= splitmix64(&mut state) ^ l.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream(ChaCha8Rng::from_seed(key))
    }

    /// Uniform draw from [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    /// Uniform draw from [lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_label_sensitive() {
        let mut a = RngStream::derive(7, &[1, 2]);
        let mut b = RngStream::derive(7, &[1, 2]);
        let mut c = RngStream::derive(7, &[2, 1]);
        let mut d = RngStream::derive(8, &[1, 2]);
        let xa: Vec<f64> = (0..16).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..16).map(|_| c.uniform()).collect();
        let xd: Vec<f64> = (0..16).map(|_| d.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(xa, xd);
    }

    #[test]
    fn uniform_range_and_mean() {
        let mut s = RngStream::derive(123, &[0]);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean = {mean}");
    }

    #[test]
    fn derive_seed_spreads_indices() {
        let s0 = derive_seed(42, 0);
        let s1 = derive_seed(42, 1);
        assert_ne!(s0, s1);
        assert_eq!(s0, derive_seed(42, 0));
    }
}
