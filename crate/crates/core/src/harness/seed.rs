use sha2::{Digest, Sha256};

/// Mixes `(master_seed, stream_label, index)` into a 64-bit seed.
///
/// The three inputs are hashed with SHA-256 under an unambiguous
/// length-prefixed encoding; the first eight digest bytes (little endian)
/// form the result, so the mapping is identical on every platform.
pub fn derive_seed(master_seed: u64, stream_label: &[u8], index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"qpem/derive_seed/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update((stream_label.len() as u64).to_le_bytes());
    hasher.update(stream_label);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Packs a `(T, replicate)` cell coordinate into one stream index.
pub fn cell_index(horizon: usize, replicate: usize) -> u64 {
    ((horizon as u64) << 32) | (replicate as u64 & 0xffff_ffff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn labels_separate_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1_000_000 {
            let s: u64 = rng.random();
            assert_ne!(derive_seed(s, b"fit", 0), derive_seed(s, b"eval", 0));
        }
    }

    #[test]
    fn stable_known_value() {
        let v = derive_seed(42, b"sim", 7);
        assert_eq!(v, derive_seed(42, b"sim", 7));
        // Frozen so that accidental changes to the encoding are caught.
        assert_eq!(v, FROZEN_42_SIM_7);
    }

    const FROZEN_42_SIM_7: u64 = 3306272419589239567;

    #[test]
    fn avalanche() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 10_000;
        let mut flipped = 0u64;
        for _ in 0..trials {
            let s: u64 = rng.random();
            let bit = rng.random_range(0..64);
            let a = derive_seed(s, b"sim", 3);
            let b = derive_seed(s ^ (1 << bit), b"sim", 3);
            flipped += (a ^ b).count_ones() as u64;
        }
        let mean = flipped as f64 / trials as f64;
        assert!(mean >= 20.0, "mean flipped bits {mean}");
    }

    #[test]
    fn cell_index_is_injective_on_grid() {
        let mut seen = std::collections::HashSet::new();
        for t in [256, 512, 1024, 16384] {
            for r in 0..300 {
                assert!(seen.insert(cell_index(t, r)));
            }
        }
    }
}
