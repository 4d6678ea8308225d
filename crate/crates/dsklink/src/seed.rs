//! Deterministic random-stream derivation.
//!
//! Monte Carlo runs must be reproducible bit-for-bit from one master seed,
//! independent of thread count and execution order. Every (sweep point,
//! trial) pair therefore derives its own counter-based generator from the
//! master seed and a list of integer labels, instead of sharing one mutable
//! stream. Two derivations collide only if every label matches, and
//! adjacent labels produce statistically unrelated streams, which the
//! splitmix64 finalizer guarantees in practice.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The splitmix64 output mix: a bijective finalizer with full avalanche.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent ChaCha12 stream from a master seed and a label
/// path (for example `[point_index, trial_index]` or a role tag plus
/// indices). Label order matters; an empty path is valid.
pub fn derive_stream(master: u64, labels: &[u64]) -> ChaCha12Rng {
    let mut state = mix(master);
    for &label in labels {
        state = mix(state ^ mix(label));
    }
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(state.wrapping_add(i as u64 + 1)).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

// ---------------------------------------------------------------------------
// Deterministic digests
// ---------------------------------------------------------------------------

/// Incremental FNV-1a 64-bit hash, for cheap deterministic digests of
/// decision sequences and canonical configuration text. Not
/// collision-resistant against adversaries; fine for reproducibility
/// checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fnv1a(u64);

impl Fnv1a {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    /// A hasher at the FNV-1a offset basis.
    pub fn new() -> Self {
        Self(Self::OFFSET)
    }

    /// Folds raw bytes into the state.
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    /// Folds one integer (little-endian bytes) into the state.
    pub fn write_u64(&mut self, value: u64) {
        self.write(&value.to_le_bytes());
    }

    /// The current hash value.
    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}
