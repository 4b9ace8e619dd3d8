//! Small, fixed, public 64-bit mixing functions.
//!
//! These are deliberately specified bit-for-bit so that tables, sketches and
//! the toy `trunc8-mix64` password hash are reproducible across
//! implementations:
//!
//! * FNV-1a 64: offset basis `0xcbf29ce484222325`, prime `0x100000001b3`.
//! * Avalanche (`fmix64`): `h ^= h >> 33; h *= 0xff51afd7ed558ccd;
//!   h ^= h >> 33; h *= 0xc4ceb53fe1a85ec3; h ^= h >> 33`.
//! * Seed derivation (`splitmix64`): add `0x9e3779b97f4a7c15`, then
//!   `z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9; z = (z ^ (z >> 27)) *
//!   0x94d049bb133111eb; z ^ (z >> 31)`.

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
pub fn fnv1a64_extend(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

#[inline]
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_extend(FNV_OFFSET, bytes)
}

#[inline]
pub fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b53f_e1a8_5ec3);
    h ^= h >> 33;
    h
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a master seed and a stream index.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Seeded 64-bit hash of a byte string: the seed perturbs the FNV basis and
/// the result is avalanched.
#[inline]
pub fn keyed_hash(seed: u64, bytes: &[u8]) -> u64 {
    fmix64(fnv1a64_extend(FNV_OFFSET ^ splitmix64(seed), bytes))
}
