//! Seeded random streams.
//!
//! Every random consumer gets its own ChaCha20 stream derived from a base
//! seed and a purpose label, so adding a consumer never shifts the draws
//! seen by another one.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

/// Derive a 64-bit sub-seed from `seed` and a purpose label.
pub fn derive_seed(seed: u64, purpose: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((purpose.len() as u64).to_le_bytes());
    hasher.update(purpose.as_bytes());
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

/// A reproducible generator for `(seed, purpose)`.
pub fn stream(seed: u64, purpose: &str) -> StreamRng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, purpose))
}

/// Standard complex normal sample: real and imaginary parts are independent
/// N(0, 1/2), so E|z|^2 = 1.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
