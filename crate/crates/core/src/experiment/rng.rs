//! SplitMix64: the corpus generator's only entropy source.
//!
//! The algorithm is pinned bit-for-bit so corpora are reproducible from
//! seeds alone, independent of platform or library versions: state advances
//! by the golden-ratio increment and the output is the standard 30/27/31
//! xor-shift-multiply finalizer. Bounded draws use plain modulo reduction;
//! the tiny bias is irrelevant here and determinism is the contract.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `lo..=hi` (modulo reduction).
    pub fn bounded(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.next_u64() % (hi - lo + 1)
    }

    /// Derives an independent child stream; used to give each corpus item a
    /// seed that does not depend on evaluation order.
    pub fn derive(&self, stream: u64) -> SplitMix64 {
        let mut mixer = SplitMix64 { state: self.state ^ stream.wrapping_mul(0xA076_1D64_78BD_642F) };
        SplitMix64 { state: mixer.next_u64() }
    }
}
