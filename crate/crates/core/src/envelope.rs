//! Degree envelopes: the `v`-constrained property and its exponent
//! functions.
//!
//! A graph is v-constrained when `D_j(X) <= v^j * (log base)^(-fn(j+|X|))`
//! for every applicable `X` and every `j >= 1`. The randomized regime uses
//! `f(j) = 2^j - 3.5` over `0 < |X| < r`; the deterministic regime uses
//! `g(l) = 2^(l+2) - 9` over every non-empty `X`. `log` is the natural
//! logarithm throughout.
//!
//! The log-power correction terms are concentration slack sized for
//! asymptotic analysis; at bench scale they can dwarf any feasible `v`. The
//! pipelines therefore schedule against the `Plain` envelope
//! (`D_j(X) <= v^j`, the "maximum normalized degree" reading), while traces
//! report the literal `f`/`g` figures alongside it.

use serde::{Deserialize, Serialize};

use crate::hypergraph::Hypergraph;
use crate::vset::VertexSet;

/// Exponent of the randomized-regime correction factor.
pub fn exponent_f(j: usize) -> f64 {
    (1u64 << j) as f64 - 3.5
}

/// Exponent of the deterministic-regime correction factor.
pub fn exponent_g(l: usize) -> f64 {
    (1u64 << (l + 2)) as f64 - 9.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `f`-exponents, `X` restricted to `0 < |X| < r`.
    F,
    /// `g`-exponents, every non-empty `X`.
    G,
    /// No log correction: `D_j(X) <= v^j`.
    Plain,
}

impl Regime {
    fn exponent(self, l: usize) -> f64 {
        match self {
            Regime::F => exponent_f(l),
            Regime::G => exponent_g(l),
            Regime::Plain => 0.0,
        }
    }

    fn max_x_size(self, r: usize) -> usize {
        match self {
            Regime::F => r.saturating_sub(1),
            Regime::G | Regime::Plain => r,
        }
    }
}

/// First violating pair found by a constraint check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: VertexSet,
    pub j: usize,
    pub degree: usize,
    pub threshold: f64,
}

/// Checks whether `g` is v-constrained, returning the first violation in
/// (|X|, X, j) order if not. `base` is the argument of the natural log
/// (callers pass `n` or `m` per context) and must exceed 1.
pub fn is_v_constrained(
    g: &Hypergraph,
    v: f64,
    base: f64,
    regime: Regime,
) -> Result<(), Witness> {
    debug_assert!(base > 1.0);
    let log_base = base.ln();
    let r = g.rank();
    for x in g.edge_subsets(regime.max_x_size(r)) {
        for j in 1..=r.saturating_sub(x.len()) {
            let d = g.degree(&x, j);
            if d == 0 {
                continue;
            }
            let threshold = v.powi(j as i32) * log_base.powf(-regime.exponent(j + x.len()));
            if d as f64 > threshold {
                return Err(Witness { x, j, degree: d, threshold });
            }
        }
    }
    Ok(())
}

/// The least `v` for which `g` is v-constrained (0 for an edgeless graph).
pub fn min_constraining_v(g: &Hypergraph, base: f64, regime: Regime) -> f64 {
    debug_assert!(base > 1.0);
    let log_base = base.ln();
    let r = g.rank();
    let mut need: f64 = 0.0;
    for x in g.edge_subsets(regime.max_x_size(r)) {
        for j in 1..=r.saturating_sub(x.len()) {
            let d = g.degree(&x, j);
            if d == 0 {
                continue;
            }
            let v_j = d as f64 * log_base.powf(regime.exponent(j + x.len()));
            need = need.max(v_j.powf(1.0 / j as f64));
        }
    }
    need
}
