//! Counter-based 64-bit generator (SplitMix64) for reproducible simulation.
//!
//! Parallel trials derive independent streams from (seed, stream index)
//! without shared state; the generator name is echoed into output metadata.

pub const RNG_NAME: &str = "splitmix64";

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream `i` of a master seed: mixes the stream index through one
    /// splitmix round so streams are decorrelated.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut s = SplitMix64::new(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        s.next_u64();
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    pub fn next_f64_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    pub fn next_usize(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // rejection-free modulo is fine here: n is tiny relative to 2^64
        (self.next_u64() % n as u64) as usize
    }
}
