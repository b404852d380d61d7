//! Counter-based deterministic randomness.
//!
//! Randomized rounds derive each vertex's bits from `(seed, round, vertex)`
//! through a stateless mixer, so outcomes are independent of evaluation
//! order and identical under any parallel schedule.

use num_bigint::BigInt;
use num_rational::BigRational;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stateless source of uniform words addressed by coordinates.
#[derive(Clone, Copy, Debug)]
pub struct BitSource {
    seed: u64,
}

impl BitSource {
    pub fn new(seed: u64) -> Self {
        BitSource { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// 64 uniform bits for the coordinate triple.
    #[inline]
    pub fn word(&self, a: u64, b: u64, c: u64) -> u64 {
        mix(self.seed ^ mix(a ^ mix(b ^ mix(c))))
    }

    /// Bernoulli draw with dyadic success probability, addressed by
    /// `(round, vertex, stream)`.
    #[inline]
    pub fn bernoulli(&self, round: u64, vertex: u64, stream: u64, p: Dyadic) -> bool {
        if p.s == 0 {
            return p.num > 0;
        }
        let u = self.word(round, vertex, stream) >> (64 - p.s);
        u < p.num
    }

    /// A sequential stream for generators and Monte-Carlo loops.
    pub fn stream(&self, label: u64) -> Stream {
        Stream { src: *self, label, ctr: 0 }
    }
}

/// Sequential deterministic stream derived from a [`BitSource`].
#[derive(Clone, Debug)]
pub struct Stream {
    src: BitSource,
    label: u64,
    ctr: u64,
}

impl Stream {
    pub fn next_u64(&mut self) -> u64 {
        let w = self.src.word(self.label, self.ctr, 0x5eed);
        self.ctr += 1;
        w
    }

    /// Uniform value in `0..n` (n > 0), by rejection to avoid modulo bias.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let w = self.next_u64();
            if w < zone {
                return w % n;
            }
        }
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_bool(&mut self, p: Dyadic) -> bool {
        if p.s == 0 {
            return p.num > 0;
        }
        (self.next_u64() >> (64 - p.s)) < p.num
    }
}

/// A probability with power-of-two denominator: `num / 2^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub num: u64,
    pub s: u32,
}

impl Dyadic {
    pub fn new(num: u64, s: u32) -> Self {
        debug_assert!(s < 64 && num <= 1u64 << s);
        Dyadic { num, s }
    }

    pub const ZERO: Dyadic = Dyadic { num: 0, s: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, s: 0 };

    /// `2^-s` closest to `x` (ties toward the larger probability), clamped
    /// to `[2^-62, 1]`.
    pub fn nearest_pow2(x: f64) -> Dyadic {
        if x >= 1.0 {
            return Dyadic::ONE;
        }
        if x <= 0.0 {
            return Dyadic { num: 1, s: 62 };
        }
        let s = (-x.log2()).round().clamp(0.0, 62.0) as u32;
        if s == 0 {
            Dyadic::ONE
        } else {
            Dyadic { num: 1, s }
        }
    }

    /// Largest multiple of `2^-s` that is `<= x` (never rounded up, so
    /// floors established for the real-valued probability carry over), but
    /// at least `2^-s` for positive `x` so the draw stays live.
    pub fn round_down(x: f64, s: u32) -> Dyadic {
        let s = s.min(62);
        if x >= 1.0 {
            return Dyadic::ONE;
        }
        if x <= 0.0 {
            return Dyadic { num: 0, s };
        }
        let num = ((x * (1u64 << s) as f64).floor() as u64).clamp(1, 1u64 << s);
        Dyadic { num, s }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / (1u64 << self.s) as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(1u64) << self.s)
    }
}
