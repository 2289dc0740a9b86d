//! Deterministic seed derivation.
//!
//! Every stochastic component in this crate draws from a ChaCha8 stream seeded
//! through [`derive_seed`]. Sub-streams (initial conditions, per-step noise,
//! measurement noise, per-trial seeds) are derived by folding integer tags into
//! the base seed with a splitmix64 finalizer, so results are reproducible
//! across platforms and independent of scheduling.

/// splitmix64 finalizer.
fn finalize(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a path of integer tags.
///
/// Distinct paths yield statistically independent seeds; the same path always
/// yields the same seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut x = finalize(base);
    for &tag in path {
        x = finalize(x.rotate_left(17) ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    x
}
