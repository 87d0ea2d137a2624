//! Deterministic random numbers for synthetic data.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, with
//! Box-Muller for normal deviates. Both algorithms have one-paragraph
//! public reference implementations, so any implementation in any
//! language can reproduce the streams bit for bit:
//!
//! * stream derivation: `state = splitmix64(seed ^ (stream * 0x9E3779B97F4A7C15))`,
//!   then four successive SplitMix64 outputs form the xoshiro256++ state;
//! * uniform in `[0, 1)`: `(next_u64() >> 11) * 2^-53`;
//! * uniform in `(0, 1]`: `((next_u64() >> 11) + 1) * 2^-53`;
//! * standard normal: `sqrt(-2 ln u1) * cos(2 pi u2)` with `u1` drawn from
//!   `(0, 1]` and `u2` from `[0, 1)` (one normal per two `u64` draws, no
//!   cached spare).

const GOLDEN_GAMMA: u64 = 0x9E3779B97F4A7C15;

/// SplitMix64 step: advances `state` by the golden gamma and returns the
/// mixed output.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive the seed of stream `stream` from a base seed. Distinct streams
/// give statistically independent generators for the same base seed.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut s = seed ^ stream.wrapping_mul(GOLDEN_GAMMA);
    splitmix64(&mut s)
}

/// xoshiro256++ generator.
#[derive(Debug, Clone)]
pub struct Rng64 {
    s: [u64; 4],
}

impl Rng64 {
    /// Seed via SplitMix64 as recommended by the xoshiro reference code.
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        Rng64 {
            s: [
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
            ],
        }
    }

    /// Generator for stream `stream` of a base seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Rng64::new(stream_seed(seed, stream))
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`; safe as a logarithm argument.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller (cosine branch).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform integer in `[0, n)` by rejection, bias-free.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }
}
