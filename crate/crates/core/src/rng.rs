//! Portable seeded random source.
//!
//! The bit stream is xoshiro256** whose 256-bit state is filled by four
//! consecutive SplitMix64 outputs of the 64-bit seed (the `seed_from_u64`
//! convention of `rand_xoshiro`). Uniforms take the top 53 bits; normals use
//! the cosine branch of Box–Muller, one normal per two raw draws:
//!
//! ```text
//! u1 = ((next >> 11) + 1) · 2⁻⁵³        ∈ (0, 1]
//! u2 =  (next >> 11)      · 2⁻⁵³        ∈ [0, 1)
//! z  = √(−2 ln u1) · cos(2π u2)
//! ```

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct PortableRng(Xoshiro256StarStar);

impl PortableRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG_53;
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normals(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.standard_normal()).collect()
    }
}

/// Seed for an independent sub-stream (`stream ≥ 1`) of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
