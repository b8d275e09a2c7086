//! Self-contained PRNG for reproducible synthetic fixtures.
//!
//! Generated datasets must be byte-reproducible from a seed alone, across
//! toolchains and across reimplementations in other languages, so the
//! generator is pinned here instead of delegating to a library whose stream
//! may change between versions. Two well-known algorithms with published
//! constants:
//!
//! * `SplitMix64` (Steele, Lea, Flood 2014) — seed expansion and seed
//!   splitting. State advances by 0x9E3779B97F4A7C15 per draw; output mixes
//!   with the 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB multipliers.
//! * `xoshiro256**` (Blackman, Vigna 2018) — the main stream. 256-bit state,
//!   output `rotl(s1 * 5, 7) * 9`.
//!
//! Uniform doubles take the top 53 bits of a draw. Gaussians use the
//! Marsaglia polar method, which needs only `ln` and `sqrt`; its rejection
//! loop consumes a deterministic number of draws given the stream.

/// SplitMix64: seed expansion and per-subject seed derivation.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256** seeded via SplitMix64.
#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
    cached_normal: Option<f64>,
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()];
        Self { s, cached_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        loop {
            let v1 = 2.0 * self.next_f64() - 1.0;
            let v2 = 2.0 * self.next_f64() - 1.0;
            let s = v1 * v1 + v2 * v2;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.cached_normal = Some(v2 * scale);
                return v1 * scale;
            }
        }
    }
}
