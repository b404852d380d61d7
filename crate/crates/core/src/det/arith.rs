//! Dual-mode arithmetic for potential evaluation.
//!
//! Potential values are non-negative products of dyadics, powers of the
//! `log m` surrogate, and integer counts; bad-event probabilities are signed
//! sums of dyadics. Float mode evaluates in `f64` with compensated totals;
//! exact mode evaluates in `BigRational`, where the only non-rational input,
//! `log m`, is replaced by a fixed rational approximation recorded in the
//! trace.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait PhiArith: Send + Sync + 'static {
    /// Non-negative potential values.
    type Num: Clone + PartialOrd + std::fmt::Debug + Send + Sync;
    /// Signed linear values (conditional expectations of `h`).
    type Prob: Clone + std::fmt::Debug + Send + Sync;

    const EXACT: bool;

    fn zero() -> Self::Num;
    fn one() -> Self::Num;
    fn add(a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn mul(a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn powi(x: &Self::Num, e: u64) -> Self::Num;
    /// `2^e` for signed `e`.
    fn pow2(e: i64) -> Self::Num;
    fn ratio(num: u64, den: u64) -> Self::Num;
    fn from_count(c: u64) -> Self::Num;
    /// Exact lift of an f64 (used for candidate-independent multipliers).
    fn from_f64(x: f64) -> Self::Num;
    /// Rational surrogate for `log m`, denominator `2^den_bits`.
    fn lambda(m: usize, den_bits: u32) -> Self::Num;
    fn recip(x: &Self::Num) -> Self::Num;
    /// `max(1 - x, 0)` for potential values known to sit in `[0, 1]`.
    fn sub_from_one(x: &Self::Num) -> Self::Num;
    fn to_f64(x: &Self::Num) -> f64;
    /// `a <= b`, allowing `rel_tol` relative slack in float mode.
    fn le_with_tol(a: &Self::Num, b: &Self::Num, rel_tol: f64) -> bool;

    fn p_zero() -> Self::Prob;
    fn p_one() -> Self::Prob;
    fn p_add(a: &Self::Prob, b: &Self::Prob) -> Self::Prob;
    fn p_sub(a: &Self::Prob, b: &Self::Prob) -> Self::Prob;
    /// `2^-e`.
    fn p_pow2_neg(e: u64) -> Self::Prob;
    fn p_to_f64(p: &Self::Prob) -> f64;
    /// `max(1 - p, 0)` lifted into the potential domain.
    fn one_minus_clamped(p: &Self::Prob) -> Self::Num;
}

pub struct FloatArith;

impl PhiArith for FloatArith {
    type Num = f64;
    type Prob = f64;
    const EXACT: bool = false;

    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn add(a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn powi(x: &f64, e: u64) -> f64 {
        x.powi(e as i32)
    }
    fn pow2(e: i64) -> f64 {
        (e as f64).exp2()
    }
    fn ratio(num: u64, den: u64) -> f64 {
        num as f64 / den as f64
    }
    fn from_count(c: u64) -> f64 {
        c as f64
    }
    fn from_f64(x: f64) -> f64 {
        x
    }
    fn lambda(m: usize, _den_bits: u32) -> f64 {
        (m.max(3) as f64).ln()
    }
    fn recip(x: &f64) -> f64 {
        1.0 / x
    }
    fn sub_from_one(x: &f64) -> f64 {
        (1.0 - x).max(0.0)
    }
    fn to_f64(x: &f64) -> f64 {
        *x
    }
    fn le_with_tol(a: &f64, b: &f64, rel_tol: f64) -> bool {
        *a <= *b * (1.0 + rel_tol) + f64::MIN_POSITIVE
    }

    fn p_zero() -> f64 {
        0.0
    }
    fn p_one() -> f64 {
        1.0
    }
    fn p_add(a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn p_sub(a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn p_pow2_neg(e: u64) -> f64 {
        (-(e as f64)).exp2()
    }
    fn p_to_f64(p: &f64) -> f64 {
        *p
    }
    fn one_minus_clamped(p: &f64) -> f64 {
        (1.0 - p).max(0.0)
    }
}

pub struct ExactArith;

impl PhiArith for ExactArith {
    type Num = BigRational;
    type Prob = BigRational;
    const EXACT: bool = true;

    fn zero() -> BigRational {
        BigRational::zero()
    }
    fn one() -> BigRational {
        BigRational::one()
    }
    fn add(a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn powi(x: &BigRational, e: u64) -> BigRational {
        let mut acc = BigRational::one();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
    fn pow2(e: i64) -> BigRational {
        if e >= 0 {
            BigRational::from(BigInt::one() << e as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
        }
    }
    fn ratio(num: u64, den: u64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_count(c: u64) -> BigRational {
        BigRational::from(BigInt::from(c))
    }
    fn from_f64(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }
    fn lambda(m: usize, den_bits: u32) -> BigRational {
        let scale = (1u64 << den_bits) as f64;
        let num = ((m.max(3) as f64).ln() * scale).round() as i64;
        BigRational::new(BigInt::from(num), BigInt::from(1u64) << den_bits)
    }
    fn recip(x: &BigRational) -> BigRational {
        BigRational::one() / x.clone()
    }
    fn sub_from_one(x: &BigRational) -> BigRational {
        let v = BigRational::one() - x.clone();
        if v.is_negative() {
            BigRational::zero()
        } else {
            v
        }
    }
    fn to_f64(x: &BigRational) -> f64 {
        x.to_f64().unwrap_or(f64::NAN)
    }
    fn le_with_tol(a: &BigRational, b: &BigRational, _rel_tol: f64) -> bool {
        a <= b
    }

    fn p_zero() -> BigRational {
        BigRational::zero()
    }
    fn p_one() -> BigRational {
        BigRational::one()
    }
    fn p_add(a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn p_sub(a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn p_pow2_neg(e: u64) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << e as usize)
    }
    fn p_to_f64(p: &BigRational) -> f64 {
        p.to_f64().unwrap_or(f64::NAN)
    }
    fn one_minus_clamped(p: &BigRational) -> BigRational {
        let v = BigRational::one() - p.clone();
        if v.is_negative() {
            BigRational::zero()
        } else {
            v
        }
    }
}

/// The `log m` surrogate as a display string for traces (exact mode).
pub fn lambda_string(m: usize, den_bits: u32) -> String {
    let r = ExactArith::lambda(m, den_bits);
    format!("{r}")
}
