//! Deterministic seed derivation.
//!
//! Repetition seeds are derived from `(master_seed, config_digest, index)`
//! with a scheme simple enough to restate in any language:
//!
//! ```text
//! digest  = fnv1a64(canonical config string)
//! base    = mix64(master_seed ^ digest)
//! seed_i  = mix64(base ^ ((i + 1) * 0x9E3779B97F4A7C15))
//! ```
//!
//! `mix64` is the splitmix64 finaliser. It is a bijection on `u64`, and the
//! odd multiplier makes `(i + 1) * GOLDEN` injective, so derived seeds are
//! pairwise distinct for any repetition count below 2^64.

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// splitmix64 output function.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for repetition `index` of the configuration with `digest`.
pub fn derive_seed(master_seed: u64, digest: u64, index: u64) -> u64 {
    let base = mix64(master_seed ^ digest);
    mix64(base ^ (index.wrapping_add(1)).wrapping_mul(GOLDEN))
}

/// Seed for `(time point, repetition)` cells of a longitudinal run.
pub fn derive_seed2(master_seed: u64, digest: u64, time_index: u64, rep_index: u64) -> u64 {
    let base = mix64(master_seed ^ digest);
    let t = mix64(base ^ (time_index.wrapping_add(1)).wrapping_mul(GOLDEN));
    mix64(t ^ (rep_index.wrapping_add(1)).wrapping_mul(GOLDEN))
}
