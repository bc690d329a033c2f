//! Seed derivation for independent deterministic RNG streams.

/// Mixes two 64-bit values into a well-scrambled derived seed (splitmix64
/// finalizer). Used to give each document / worker / epoch its own RNG stream
/// from one user-facing seed.
pub(crate) fn mix(a: u64, b: u64) -> u64 {
    // The golden-ratio increment keeps (0, 0) off the finalizer's zero
    // fixed point; multiplying only `b` keeps the two arguments asymmetric.
    let mut z = a
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_is_deterministic_and_spreads_inputs() {
        assert_eq!(mix(42, 7), mix(42, 7));
        assert_ne!(mix(42, 7), mix(42, 8));
        assert_ne!(mix(42, 7), mix(43, 7));
        assert_ne!(mix(0, 0), 0);
    }
}
