use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// A reproducible stream of uniforms on the open interval `(0, 1)`.
///
/// Replicate streams are derived by seed splitting: replicate `i` of a run
/// seeded with `s` uses the stream seeded with `s.wrapping_add(i)`. The
/// generator expands each 64-bit seed through SplitMix64, so adjacent seeds
/// give unrelated streams.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Stream for replicate `index` of a run seeded with `seed`.
    pub fn for_replicate(seed: u64, index: u64) -> Self {
        Self::new(seed.wrapping_add(index))
    }

    /// Uniform on `(0, 1)`, never returning either endpoint.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound`.
    #[inline]
    pub fn next_below(&mut self, bound: usize) -> usize {
        // Lemire's multiply-shift; bias is below 2^-64 * bound
        ((self.rng.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_open01() - 1.0;
            let v = 2.0 * self.next_open01() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let k = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * k);
                return u * k;
            }
        }
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}
