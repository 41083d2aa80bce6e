//! Deterministic seeded pseudo-random numbers.
//!
//! The generator is the splitmix64 recurrence, written out here so any
//! implementation in any language can reproduce the exact streams:
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15            (wrapping, 64-bit)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//! output = z ^ (z >> 31)
//! ```
//!
//! `next_f64` takes the top 53 bits of the output scaled by 2^-53, giving a
//! uniform value in [0, 1). All randomness in the crate flows through this
//! generator; identical seeds give identical results on every platform.

use crate::error::{Error, Result};

/// Seeded generator state. Single-owner: never shared across threads.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { seed, state: seed }
    }

    /// The seed this generator was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in [lo, hi). Errors if `lo >= hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        let ordered = matches!(lo.partial_cmp(&hi), Some(std::cmp::Ordering::Less));
        if !ordered {
            return Err(Error::Contract(format!(
                "uniform range requires lo < hi, got [{lo}, {hi})"
            )));
        }
        let v = lo + self.next_f64() * (hi - lo);
        // Guard against the upper bound landing exactly on `hi` after rounding.
        Ok(if v >= hi { hi.next_down().max(lo) } else { v })
    }

    /// Unbiased integer in [0, n) by rejection sampling.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // in (0, 1], keeps the log finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Derive an independent sub-stream seed from a base seed and a stream index.
///
/// Runs one splitmix64 step on `base ^ (stream * golden)`, so sub-streams are
/// reproducible and well separated.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut r = Rng::new(base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    r.next_u64()
}
