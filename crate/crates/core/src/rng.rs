//! Seedable SplitMix64 stream.
//!
//! The generator is fixed by its published constants so that any other
//! implementation seeded identically reproduces the same workloads:
//!
//! - `next_u64`: SplitMix64 (Steele, Lea, Flood 2014).
//! - `next_f64`: top 53 bits scaled to `[0, 1)`.
//! - `next_below(n)`: Lemire's multiply-and-reject method.
//! - `standard_normal`: Box-Muller on two consecutive uniforms `u1, u2`,
//!   returning `sqrt(-2 ln(1 - u1)) * cos(2π u2)`; the sine branch is discarded.

use std::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    pub fn normal_vec(&mut self, len: usize, std: f64) -> Vec<f64> {
        (0..len).map(|_| std * self.standard_normal()).collect()
    }

    /// Independent stream for worker `index`, derived from this stream's
    /// current state without advancing it.
    pub fn substream(&self, index: u64) -> Rng {
        let mut mixer = Rng::new(self.state ^ index.wrapping_mul(GOLDEN_GAMMA).rotate_left(17));
        Rng::new(mixer.next_u64())
    }
}
