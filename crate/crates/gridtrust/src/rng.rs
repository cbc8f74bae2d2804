//! Deterministic pseudo-random streams for seeded simulation runs.
//!
//! The generator is pinned by algorithm (splitmix64 seeding a xoshiro256++
//! core) so that a (seed, run, entity) triple produces the same draws on any
//! platform, independent of external library versions.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 step: mixes a counter into a well-distributed 64-bit value.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// xoshiro256++ generator, seeded through splitmix64.
#[derive(Clone, Debug)]
pub struct DeterministicRng {
    s: [u64; 4],
}

impl DeterministicRng {
    pub fn seed_from(seed: u64) -> Self {
        let mut state = seed;
        let s = [
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
        ];
        Self { s }
    }

    /// Derives an independent stream from a master seed and a list of tags
    /// (run index, entity hash, purpose marker, ...).
    pub fn derive(master: u64, tags: &[u64]) -> Self {
        let mut state = master;
        let mut acc = splitmix64(&mut state);
        for &tag in tags {
            state = acc ^ tag;
            acc = splitmix64(&mut state);
        }
        Self::seed_from(acc)
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        // Multiply-shift bounding; bias is negligible for the small ranges
        // used here.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Gaussian draw via Box–Muller.
    pub fn gaussian(&mut self, mean: f64, sigma: f64) -> f64 {
        // Shifted into (0, 1] so ln never sees zero.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        mean + sigma * radius * (std::f64::consts::TAU * u2).cos()
    }
}

/// FNV-1a hash of a label, for deriving per-entity streams.
pub fn label_tag(label: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in label.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
