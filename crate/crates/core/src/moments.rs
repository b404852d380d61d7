//! Moment statistics and tail bounds for multilinear polynomials of
//! Bernoulli variables.
//!
//! Coefficients are non-negative rationals so every comparison here can be
//! exact. Two mu-statistics coexist and are named apart: the *weighted*
//! profile (over all terms, remaining variables weighted by their success
//! probabilities, so `mu_0 = E[S]`) feeding the tail evaluator, and the
//! *plain* profile (degree-q terms only, no weights) feeding the non-central
//! moment bounds.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::SpaceError;
use crate::spaces::SampleSpace;
use crate::vset::VertexSet;

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `S(x) = sum over Z of a_Z * prod_{j in Z} x_j`, all `a_Z >= 0`,
/// `|Z| <= q`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearPoly {
    q: usize,
    terms: BTreeMap<VertexSet, Rational>,
}

impl MultilinearPoly {
    pub fn new(q: usize) -> Self {
        MultilinearPoly { q, terms: BTreeMap::new() }
    }

    /// Adds `coef * prod_{j in Z} x_j`; coefficients accumulate.
    pub fn add_term(&mut self, z: VertexSet, coef: Rational) {
        assert!(!coef.is_negative(), "coefficients must be non-negative");
        assert!(z.len() <= self.q, "term {z:?} exceeds degree {}", self.q);
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(z).or_insert_with(Rational::zero);
        *slot += coef;
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VertexSet, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates on a 0/1 assignment given as the set of ones.
    pub fn eval_set(&self, ones: &VertexSet) -> Rational {
        let mut acc = Rational::zero();
        for (z, a) in &self.terms {
            if z.is_subset_of(ones) {
                acc += a;
            }
        }
        acc
    }

    fn term_subsets(&self, len: usize) -> BTreeSet<VertexSet> {
        let mut out = BTreeSet::new();
        for z in self.terms.keys() {
            if z.len() >= len {
                for s in z.subsets() {
                    if s.len() == len {
                        out.insert(s);
                    }
                }
            }
        }
        out
    }
}

/// `mu[l]` for `l = 0..=q`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuProfile {
    pub mu: Vec<Rational>,
}

/// Success probabilities for the weighted profile.
#[derive(Clone, Debug)]
pub enum Weights {
    Uniform(Rational),
    PerVariable(Vec<Rational>),
}

impl Weights {
    fn get(&self, v: u32) -> Rational {
        match self {
            Weights::Uniform(p) => p.clone(),
            Weights::PerVariable(ps) => ps[v as usize].clone(),
        }
    }
}

/// Weighted profile: `mu_i = max_{|Y|=i} sum_{Z >= Y} a_Z prod_{j in Z-Y} p_j`
/// over all terms. `mu_0` is the expectation of `S`.
pub fn mu_profile_weighted(s: &MultilinearPoly, weights: &Weights) -> MuProfile {
    let q = s.degree();
    let mut mu = vec![Rational::zero(); q + 1];
    for (l, slot) in mu.iter_mut().enumerate() {
        let candidates: Vec<VertexSet> = if l == 0 {
            vec![VertexSet::new()]
        } else {
            s.term_subsets(l).into_iter().collect()
        };
        for y in candidates {
            let mut acc = Rational::zero();
            for (z, a) in s.terms() {
                if y.is_subset_of(z) {
                    let mut w = a.clone();
                    for v in z.minus(&y).iter() {
                        w *= weights.get(v);
                    }
                    acc += w;
                }
            }
            if acc > *slot {
                *slot = acc;
            }
        }
    }
    MuProfile { mu }
}

/// Plain profile over degree-q terms only, no probability weights:
/// `mu_l = max_{|Y|=l} sum_{Z in U_q, Z >= Y} a_Z`.
pub fn mu_profile_plain(s: &MultilinearPoly) -> MuProfile {
    let q = s.degree();
    let mut mu = vec![Rational::zero(); q + 1];
    for (l, slot) in mu.iter_mut().enumerate() {
        let candidates: Vec<VertexSet> = if l == 0 {
            vec![VertexSet::new()]
        } else {
            s.term_subsets(l).into_iter().collect()
        };
        for y in candidates {
            let mut acc = Rational::zero();
            for (z, a) in s.terms() {
                if z.len() == q && y.is_subset_of(z) {
                    acc += a;
                }
            }
            if acc > *slot {
                *slot = acc;
            }
        }
    }
    MuProfile { mu }
}

/// The exponential tail evaluator
/// `exp(2 - min(min_i lambda^2/(mu_0 mu_i R^q), min_i (lambda/(mu_i R^q))^(1/i)))`
/// clipped to `[0, 1]`. A numeric diagnostic, not a certificate.
pub fn ss_tail_bound(s: &MultilinearPoly, weights: &Weights, lambda: f64, r_const: f64) -> f64 {
    assert!(lambda >= 0.0 && r_const >= 1.0);
    let q = s.degree();
    if q == 0 {
        return if lambda > 0.0 { 0.0 } else { 1.0 };
    }
    if lambda == 0.0 {
        return 1.0;
    }
    let prof = mu_profile_weighted(s, weights);
    let mu: Vec<f64> = prof.mu.iter().map(|m| m.to_f64().unwrap_or(f64::MAX)).collect();
    let rq = r_const.powi(q as i32);
    let mut best = f64::INFINITY;
    for i in 1..=q {
        if mu[i] > 0.0 {
            let a = lambda * lambda / (mu[0] * mu[i] * rq);
            let b = (lambda / (mu[i] * rq)).powf(1.0 / i as f64);
            best = best.min(a).min(b);
        }
    }
    (2.0 - best).exp().clamp(0.0, 1.0)
}

/// Brute-force oracle for the union-exponent sum
/// `sum over ordered w-tuples of degree-q terms of
/// a_{Z_1}...a_{Z_w} p^(|Z_1 u ... u Z_w|)`.
pub fn union_moment_sum(
    s: &MultilinearPoly,
    w: usize,
    p: &Rational,
    max_tuples: u64,
) -> Result<Rational, SpaceError> {
    let q = s.degree();
    let terms: Vec<(&VertexSet, &Rational)> =
        s.terms().filter(|(z, _)| z.len() == q).collect();
    let count = (terms.len() as u64).checked_pow(w as u32);
    match count {
        Some(c) if c <= max_tuples => {}
        _ => {
            return Err(SpaceError::BudgetExceeded(format!(
                "{} terms to the power {w} exceeds tuple cap {max_tuples}",
                terms.len()
            )))
        }
    }
    fn recur(
        terms: &[(&VertexSet, &Rational)],
        left: usize,
        union: &VertexSet,
        coef: &Rational,
        p: &Rational,
        acc: &mut Rational,
    ) {
        if left == 0 {
            let mut term = coef.clone();
            let mut pw = Rational::one();
            for _ in 0..union.len() {
                pw *= p.clone();
            }
            term *= pw;
            *acc += term;
            return;
        }
        for (z, a) in terms {
            let u = union.union(z);
            let c = coef.clone() * (*a).clone();
            recur(terms, left - 1, &u, &c, p, acc);
        }
    }
    let mut acc = Rational::zero();
    recur(&terms, w, &VertexSet::new(), &Rational::one(), p, &mut acc);
    Ok(acc)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Closed-form majorant of the union-exponent sum:
/// `(sum_k C(wq, k) mu_k p^(q-k))^w` with the plain profile.
pub fn union_moment_bound(s: &MultilinearPoly, w: usize, p: &Rational) -> Rational {
    let q = s.degree();
    let prof = mu_profile_plain(s);
    let mut inner = Rational::zero();
    for k in 0..=q {
        let mut term = Rational::from(binomial(w * q, k));
        term *= prof.mu[k].clone();
        let mut pw = Rational::one();
        for _ in 0..(q - k) {
            pw *= p.clone();
        }
        term *= pw;
        inner += term;
    }
    rational_pow(&inner, w)
}

/// Moment bound under approximate wq-wise independence:
/// `(1+eps) * (sum_k C(wq,k) mu_k 2^(k-q))^w`.
pub fn approx_indep_moment_bound(s: &MultilinearPoly, w: usize, eps: &Rational) -> Rational {
    let q = s.degree();
    let prof = mu_profile_plain(s);
    let half = ratio(1, 2);
    let mut inner = Rational::zero();
    for k in 0..=q {
        let mut term = Rational::from(binomial(w * q, k));
        term *= prof.mu[k].clone();
        term *= rational_pow(&half, q - k);
        inner += term;
    }
    (Rational::one() + eps.clone()) * rational_pow(&inner, w)
}

pub fn rational_pow(x: &Rational, e: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x.clone();
    }
    acc
}

/// Exhaustive `E[S^w]` under iid Bernoulli-p on `n_vars` variables.
/// Exponential in `n_vars`; the independent oracle for the bound checks.
pub fn expectation_power_iid(
    s: &MultilinearPoly,
    w: usize,
    p: &Rational,
    n_vars: usize,
) -> Rational {
    assert!(n_vars <= 22);
    let one_minus = Rational::one() - p.clone();
    let mut acc = Rational::zero();
    for mask in 0u64..(1 << n_vars) {
        let ones = VertexSet::from_sorted(
            (0..n_vars as u32).filter(|&v| mask >> v & 1 == 1).collect(),
        );
        let weight = rational_pow(p, ones.len()) * rational_pow(&one_minus, n_vars - ones.len());
        acc += weight * rational_pow(&s.eval_set(&ones), w);
    }
    acc
}

/// Exhaustive `E[S^w]` over an explicit sample space, exact.
pub fn expectation_power_over_space(s: &MultilinearPoly, w: usize, space: &SampleSpace) -> Rational {
    let mut acc = Rational::zero();
    for i in 0..space.support_len() {
        let ones = VertexSet::from_sorted(
            (0..space.n_bits() as u32).filter(|&v| space.bit(i, v as usize)).collect(),
        );
        acc += rational_pow(&s.eval_set(&ones), w);
    }
    acc / Rational::from(BigInt::from(space.support_len()))
}

#[derive(Serialize, Deserialize)]
struct PolyWire {
    q: usize,
    terms: Vec<TermWire>,
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    #[serde(rename = "Z")]
    z: Vec<u32>,
    a: String,
}

impl Serialize for MultilinearPoly {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        PolyWire {
            q: self.q,
            terms: self
                .terms
                .iter()
                .map(|(z, a)| TermWire { z: z.as_slice().to_vec(), a: a.to_string() })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MultilinearPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = PolyWire::deserialize(d)?;
        let mut poly = MultilinearPoly::new(wire.q);
        for t in wire.terms {
            let a: Rational = t
                .a
                .parse()
                .map_err(|e| serde::de::Error::custom(format!("bad rational {:?}: {e}", t.a)))?;
            poly.add_term(VertexSet::from(t.z), a);
        }
        Ok(poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vset;

    fn poly(q: usize, terms: &[(&[u32], i64)]) -> MultilinearPoly {
        let mut p = MultilinearPoly::new(q);
        for (z, a) in terms {
            p.add_term(VertexSet::from_iter(z.iter().copied()), ratio(*a, 1));
        }
        p
    }

    #[test]
    fn mu_profiles_match_hand_values() {
        // S = x0 + x1, unweighted: mu0 = 2, mu1 = 1.
        let s = poly(1, &[(&[0], 1), (&[1], 1)]);
        let plain = mu_profile_plain(&s);
        assert_eq!(plain.mu, vec![ratio(2, 1), ratio(1, 1)]);

        // Zero polynomial: all zero.
        let z = MultilinearPoly::new(2);
        assert!(mu_profile_plain(&z).mu.iter().all(|m| m.is_zero()));

        // S = x0 x1 with p = 1/2 weighting: mu0 = 1/4, mu1 = 1/2, mu2 = 1.
        let s = poly(2, &[(&[0, 1], 1)]);
        let wt = Weights::Uniform(ratio(1, 2));
        let weighted = mu_profile_weighted(&s, &wt);
        assert_eq!(weighted.mu, vec![ratio(1, 4), ratio(1, 2), ratio(1, 1)]);
    }

    #[test]
    fn tail_bound_hand_value_and_clipping() {
        let s = poly(1, &[(&[0], 1)]);
        let wt = Weights::Uniform(ratio(1, 2));
        assert_eq!(ss_tail_bound(&s, &wt, 0.0, 1.0), 1.0);
        let b = ss_tail_bound(&s, &wt, 10.0, 1.0);
        // mu0 = 1/2, mu1 = 1: min(100/(1/2), 10) = 10 -> exp(-8).
        assert!((b - (2.0f64 - 10.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_monotone_in_lambda() {
        let s = poly(2, &[(&[0, 1], 2), (&[1, 2], 1)]);
        let wt = Weights::Uniform(ratio(1, 4));
        let mut last = 1.0f64;
        for l in 0..20 {
            let b = ss_tail_bound(&s, &wt, l as f64 * 0.7, 1.0);
            assert!(b <= last + 1e-12);
            last = b;
        }
    }

    #[test]
    fn tail_bound_monotone_in_moment_mass() {
        // Scaling every coefficient up scales each mu up, which can only
        // loosen the bound.
        let wt = Weights::Uniform(ratio(1, 2));
        let small = poly(2, &[(&[0, 1], 1), (&[1, 2], 1)]);
        let big = poly(2, &[(&[0, 1], 3), (&[1, 2], 3)]);
        for l in [1.0f64, 2.5, 7.0, 20.0] {
            assert!(
                ss_tail_bound(&small, &wt, l, 1.0) <= ss_tail_bound(&big, &wt, l, 1.0) + 1e-12
            );
        }
    }

    #[test]
    fn union_sum_hand_values() {
        let s = poly(1, &[(&[0], 1), (&[1], 1)]);
        let half = ratio(1, 2);
        assert_eq!(union_moment_sum(&s, 0, &half, 1 << 20).unwrap(), ratio(1, 1));
        // w = 2: 2p + 2p^2 = 3/2.
        assert_eq!(union_moment_sum(&s, 2, &half, 1 << 20).unwrap(), ratio(3, 2));
        // The enumeration refuses to exceed its tuple cap.
        assert!(matches!(
            union_moment_sum(&s, 3, &half, 4),
            Err(crate::error::SpaceError::BudgetExceeded(_))
        ));
    }

    #[test]
    fn union_bound_dominates_oracle_hand_case() {
        let s = poly(1, &[(&[0], 1), (&[1], 1)]);
        let half = ratio(1, 2);
        let oracle = union_moment_sum(&s, 2, &half, 1 << 20).unwrap();
        let bound = union_moment_bound(&s, 2, &half);
        assert_eq!(bound, ratio(9, 1));
        assert!(oracle <= bound);
        assert_eq!(union_moment_bound(&s, 0, &half), ratio(1, 1));
    }

    #[test]
    fn degenerate_constant_poly_bound_is_exact() {
        let mut s = MultilinearPoly::new(0);
        s.add_term(VertexSet::new(), ratio(3, 1));
        let bound = union_moment_bound(&s, 4, &ratio(1, 2));
        assert_eq!(bound, ratio(81, 1));
        let oracle = union_moment_sum(&s, 4, &ratio(1, 2), 1 << 20).unwrap();
        assert_eq!(oracle, ratio(81, 1));
    }

    #[test]
    fn approx_bound_specializes_to_union_bound() {
        let s = poly(2, &[(&[0, 1], 3), (&[2, 3], 1)]);
        let eps0 = approx_indep_moment_bound(&s, 2, &ratio(0, 1));
        let direct = union_moment_bound(&s, 2, &ratio(1, 2));
        assert_eq!(eps0, direct);
        assert!(approx_indep_moment_bound(&MultilinearPoly::new(2), 1, &ratio(1, 1)).is_zero());
    }

    #[test]
    fn poly_json_round_trip() {
        let mut s = MultilinearPoly::new(2);
        s.add_term(vset![0, 3], ratio(3, 4));
        s.add_term(vset![1], ratio(2, 1));
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"q":2,"terms":[{"Z":[0,3],"a":"3/4"},{"Z":[1],"a":"2"}]}"#);
        let back: MultilinearPoly = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
