//! Counter-mode pseudo-random primitives.
//!
//! The random models must expose O(1) random access to the n-th draw of a
//! seeded stream (sequences are immutable and may be queried from many
//! threads at arbitrary indices), and the CLI promises bit-identical output
//! for a fixed seed. Both rule out stateful generators whose value stream
//! depends on call order, so draws are produced by hashing `(seed, index)`
//! with the SplitMix64 finalizer.

/// SplitMix64 output function: a full-avalanche 64-bit mixer.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The n-th 64-bit word of the stream keyed by `seed`.
#[inline]
pub fn word_at(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Uniform draw in `[0, 1)` keyed by `(seed, index)`.
#[inline]
pub fn uniform01_at(seed: u64, index: u64) -> f64 {
    // 53 high bits -> dyadic rational in [0, 1)
    (word_at(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[-1, 1)` keyed by `(seed, index)`.
#[inline]
pub fn uniform_pm1_at(seed: u64, index: u64) -> f64 {
    2.0 * uniform01_at(seed, index) - 1.0
}

/// Sequential convenience wrapper over the same keyed stream. Used by the
/// samplers in `bounds` and by the CLI; two instances with the same seed
/// always produce the same values regardless of platform.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = word_at(self.seed, self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Log-uniform in `[lo, hi)`; both endpoints must be positive.
    pub fn log_uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo > 0.0 && hi > lo);
        (self.uniform_in(lo.ln(), hi.ln())).exp()
    }

    /// Uniform integer in `[1, max]` with a logarithmic size profile, so
    /// small values (the hard cases for the inequality checks) are sampled
    /// as often as each decade of large ones.
    pub fn log_uniform_len(&mut self, max: u64) -> u64 {
        debug_assert!(max >= 1);
        let v = self.log_uniform_in(1.0, max as f64 + 1.0);
        (v as u64).clamp(1, max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_draws_are_pure() {
        assert_eq!(word_at(17, 123), word_at(17, 123));
        assert_ne!(word_at(17, 123), word_at(17, 124));
        assert_ne!(word_at(17, 123), word_at(18, 123));
    }

    #[test]
    fn uniform_range() {
        for i in 0..10_000 {
            let u = uniform01_at(5, i);
            assert!((0.0..1.0).contains(&u));
            let v = uniform_pm1_at(5, i);
            assert!((-1.0..1.0).contains(&v));
        }
    }

    #[test]
    fn sequential_matches_keyed() {
        let mut s = SplitMix64::new(99);
        for i in 0..100 {
            assert_eq!(s.next_u64(), word_at(99, i));
        }
    }

    #[test]
    fn mixer_spreads_small_inputs() {
        // adjacent counters must land far apart in the output space
        let a = splitmix64(1);
        let b = splitmix64(2);
        assert!(((a ^ b).count_ones() as i32 - 32).abs() < 24);
    }
}
