//! Fixed 64-bit seed derivation so any run is reproducible from a root
//! seed: stage and trial streams are `splitmix64` chains over the parts.
//! The mixing function is part of the public record format and must not
//! change between versions.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One splitmix64 output step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a substream seed from a root seed and a list of index parts
/// (stage index, trial index, ...).
pub fn derive(root: u64, parts: &[u64]) -> u64 {
    let mut z = splitmix64(root);
    for &p in parts {
        z = splitmix64(z ^ p.wrapping_mul(GOLDEN));
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_order_sensitive() {
        assert_eq!(derive(42, &[1, 2]), derive(42, &[1, 2]));
        assert_ne!(derive(42, &[1, 2]), derive(42, &[2, 1]));
        assert_ne!(derive(42, &[0]), derive(43, &[0]));
    }
}
