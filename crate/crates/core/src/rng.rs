//! Counter-based random number helpers.
//!
//! Field perturbation and seed derivation draw noise as a pure function of
//! `(seed, counter...)` instead of walking a sequential generator. That keeps
//! every draw independent of evaluation order, so parallel loops produce the
//! same stream as serial ones.

/// SplitMix64 finalizer. Bijective on `u64`, well mixed in both directions.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a `(seed, a)` pair into a uniform 64-bit word.
#[inline]
pub fn hash2(seed: u64, a: u64) -> u64 {
    mix64(mix64(seed).wrapping_add(a))
}

/// Hashes a `(seed, a, b)` triple into a uniform 64-bit word.
#[inline]
pub fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    mix64(hash2(seed, a).wrapping_add(b))
}

/// Maps a hash word to a uniform double in `[0, 1)`.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps a hash word to a uniform double in `(0, 1]` (safe for `ln`).
#[inline]
fn unit_f64_open(h: u64) -> f64 {
    ((h >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw addressed by `(seed, a, b)`.
///
/// Box-Muller on two decorrelated hashes of the same counter. Each address
/// yields one fixed value; there is no generator state.
#[inline]
pub fn counter_normal(seed: u64, a: u64, b: u64) -> f64 {
    let h = hash3(seed, a, b);
    let u1 = unit_f64_open(h);
    let u2 = unit_f64(mix64(h ^ 0x6a09_e667_f3bc_c909));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Derives an independent child seed from a master seed and a stream index.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    hash2(master, index)
}
