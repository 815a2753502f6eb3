//! Deterministic seed derivation for parallel, schedule-independent streams.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of indices.
///
/// Distinct paths give statistically independent seeds; the result depends
/// only on the inputs, never on which worker asks.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &p| {
        mix64(
            acc.wrapping_add(GOLDEN_GAMMA)
                .wrapping_add(mix64(p ^ GOLDEN_GAMMA)),
        )
    })
}
