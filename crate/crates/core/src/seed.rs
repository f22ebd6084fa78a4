//! Deterministic derivation of sub-seeds from a run seed.
//!
//! Every randomized stage (positive sampling, negative sampling, SVM
//! shuffling, co-set capping) gets its own stream derived from the run seed
//! and a stable label, so stages stay independent of each other and of the
//! order in which they execute.

/// Mixes `label` into `seed` with FNV-1a and finalizes with SplitMix64.
pub(crate) fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
