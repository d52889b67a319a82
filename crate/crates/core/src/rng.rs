//! Counter-based random streams for reproducible simulation.
//!
//! Every consumer of randomness receives an explicit [`RngStream`] derived
//! from a master seed and a path of integers (replication index, wave
//! index, purpose tag, ...). Streams with distinct derivation paths are
//! statistically independent, and a stream's output depends only on its
//! derivation, never on what other streams consumed. This is what makes
//! replications order-independent: worker count and scheduling cannot
//! change any draw.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014): a 64-bit
//! counter advanced by a fixed odd increment and passed through an
//! avalanching finalizer. Not cryptographic; entirely adequate for Monte
//! Carlo.

use libm::{log, sqrt};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a new 64-bit key from a master seed and a derivation path.
///
/// The fold is order-sensitive: `derive_key(s, &[a, b])` and
/// `derive_key(s, &[b, a])` are unrelated.
pub fn derive_key(master: u64, path: &[u64]) -> u64 {
    let mut state = mix64(master ^ GOLDEN_GAMMA);
    for &part in path {
        state = mix64(state ^ mix64(part.wrapping_add(GOLDEN_GAMMA)));
    }
    state
}

/// A deterministic random stream (SplitMix64).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    /// Stream seeded directly with a key.
    pub fn new(key: u64) -> Self {
        RngStream { state: key }
    }

    /// Stream for the given derivation path under a master seed.
    pub fn derive(master: u64, path: &[u64]) -> Self {
        RngStream::new(derive_key(master, path))
    }

    /// Next raw 64-bit value.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform draw in `(0, 1]`; safe as a logarithm argument.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Bernoulli draw. Consumes exactly one value from the stream.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Binomial draw as a sum of Bernoulli trials.
    ///
    /// Consumes exactly `n` values from the stream regardless of the
    /// outcome, which keeps the stream position a deterministic function
    /// of the trial counts alone.
    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        let mut successes = 0;
        for _ in 0..n {
            if self.bernoulli(p) {
                successes += 1;
            }
        }
        successes
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * sqrt(-2.0 * log(s) / s);
            }
        }
    }

    /// Gamma(shape, 1) via Marsaglia–Tsang squeeze; `shape > 0`.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            // Boost: Gamma(a) = Gamma(a + 1) * U^(1/a).
            let g = self.gamma(shape + 1.0);
            let u = self.next_f64_open();
            return g * libm::pow(u, 1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / sqrt(9.0 * d);
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.next_f64_open();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if log(u) < 0.5 * x2 + d * (1.0 - v + log(v)) {
                return d * v;
            }
        }
    }

    /// Beta(a, b) draw as a Gamma ratio.
    pub fn beta(&mut self, a: f64, b: f64) -> f64 {
        let x = self.gamma(a);
        let y = self.gamma(b);
        x / (x + y)
    }
}
