//! Counter-based deterministic random streams.
//!
//! Every Monte-Carlo start gets its own stream keyed by `(seed, index)`,
//! so ensemble results do not depend on how starts are sharded across
//! workers. The generator is SplitMix64: one 64-bit state, a Weyl
//! increment and a finalizer with full avalanche.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One independent random stream.
#[derive(Clone, Debug)]
pub struct Stream {
    state: u64,
}

impl Stream {
    /// Stream for a given global seed and start index.
    pub fn for_index(seed: u64, index: u64) -> Self {
        // Decorrelate the key before using it as SplitMix state.
        let key = mix64(
            seed ^ index
                .wrapping_mul(0xA24B_AED4_963E_E407)
                .wrapping_add(GOLDEN),
        );
        Stream { state: key }
    }

    /// Single stream from a bare seed.
    pub fn new(seed: u64) -> Self {
        Stream::for_index(seed, 0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, n)` (n small; modulo bias is negligible for
    /// the digit alphabets used here).
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }
}
