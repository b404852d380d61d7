//! The fully deterministic pipeline: staged bit-level marking driven by a
//! pessimistic-estimator potential over an explicit sample space.
//!
//! A round realizes a Bernoulli-`2^-s` mark as the conjunction of `s`
//! uniform bit vectors, each chosen from the support of the space by
//! minimizing the potential. The potential is a sum of migration guards
//! (controlling the `H` statistics that dominate edge migration) and
//! windowed collapse guards (driving completions of each vertex set into
//! the independent set). All constants are configured: the asymptotic
//! values the analysis wants are meaningless at bench scale, so defaults
//! keep the formulas' structure at feasible magnitudes and are recorded in
//! the trace.

pub mod arith;
mod engine;
pub mod summand;

use num_rational::BigRational;

use crate::det::arith::{ExactArith, PhiArith};
use crate::det::summand::{GuardParams, HEstimator, S1Pieces, S1Summand};
use crate::hypergraph::Hypergraph;
use crate::spaces::SpaceBudget;
use crate::vset::VertexSet;

pub use engine::{
    build_default_omega, det_reduce, find_mis_det, omega_covers, register_summands, DetOutcome,
    PotentialLedger,
};

/// Configured constants for the deterministic pipeline. The analysis-
/// sized quantities (`w`, the settled value, windows, budgets) scale with
/// these.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DetConstants {
    /// `w = ceil(w0 log m / q)` before the supermartingale cap.
    pub w0: f64,
    /// Settled values and budgets are `m^-kappa` / `m^kappa`.
    pub kappa: u32,
    /// Ladder spacing of the migration guard's log-power scale.
    pub ladder: i64,
    /// Clamp applied to the degree-envelope exponent inside migration
    /// guards (the literal doubly-exponential exponents underflow any
    /// feasible scale).
    pub s1_gcap: i64,
    /// Clamp applied inside collapse-guard thresholds.
    pub phi_gcap: i64,
    /// Scales the collapse-guard window length.
    pub s2_window_scale: f64,
    /// Hard cap on any guard window.
    pub max_window: usize,
    /// Denominator bits of the rational `log m` surrogate (exact mode).
    pub lambda_den_bits: u32,
    /// Round cap per reduction call.
    pub round_cap: usize,
    /// Round cap across a whole solve.
    pub total_round_cap: usize,
    /// Zero-commit rounds tolerated before the greedy escape hatch.
    pub stall_rounds: usize,
    /// Overrides the `m^kappa` summand budget.
    pub summand_cap: Option<usize>,
    /// Exact rational arithmetic instead of f64.
    pub exact: bool,
    /// Relative tolerance for float-mode monotonicity checks.
    pub float_rel_tol: f64,
    /// Budget for auto-built marking spaces.
    pub space_budget: SpaceBudget,
    /// Auto-built spaces use the exact cube up to this many vertices.
    pub cube_bits: usize,
    /// Demand exact independence on full edge-pair unions. When off, a
    /// space certifying per-edge subsets (or less) is accepted with a
    /// warning; output correctness never depends on the certificate, only
    /// the potential's martingale structure does.
    pub require_pair_cover: bool,
}

impl Default for DetConstants {
    fn default() -> Self {
        DetConstants {
            w0: 4.0,
            kappa: 4,
            ladder: 4,
            s1_gcap: 2,
            phi_gcap: 1,
            s2_window_scale: 1.0,
            max_window: 512,
            lambda_den_bits: 16,
            round_cap: 400,
            total_round_cap: 20_000,
            stall_rounds: 2,
            summand_cap: None,
            exact: false,
            float_rel_tol: 1e-9,
            space_budget: SpaceBudget::default(),
            cube_bits: 12,
            require_pair_cover: true,
        }
    }
}

impl DetConstants {
    /// A cheaper profile for large instances: small support, tight summand
    /// budget. The potential still steers, just over fewer summands.
    pub fn fast() -> Self {
        DetConstants {
            summand_cap: Some(2_000),
            space_budget: SpaceBudget { max_support: 1 << 12, max_message_bits: 12, ..Default::default() },
            cube_bits: 10,
            require_pair_cover: false,
            ..Default::default()
        }
    }

    /// The registration budget: `m^kappa`, floored so tiny instances still
    /// fit their full (constant-sized) family.
    pub fn summand_budget(&self, m: usize) -> usize {
        self.summand_cap.unwrap_or_else(|| {
            ((m.max(2) as u64).saturating_pow(self.kappa) as usize).clamp(512, 50_000_000)
        })
    }
}

/// The collapse estimator surface: realized integer value and exact
/// conditional expectation of `h(k, X)` with `remaining` stage draws left.
///
/// `marks` holds the current conjunction of fixed stage vectors. The
/// expectation uses the exact product rule, valid when the marking space
/// certifies independence on the graph's edge-pair unions.
pub fn h_estimator(
    g: &Hypergraph,
    x: &VertexSet,
    k: usize,
    marks: &[bool],
    remaining: u32,
) -> (i64, BigRational) {
    let est = HEstimator::build(g, x, k);
    let view: Vec<bool> = marks.to_vec();
    let value = est.value(&view);
    let expect = est.expectation::<ExactArith, _>(&view, remaining);
    (value, expect)
}

/// Case-by-case value of one migration summand at evaluation round `ell`
/// with anchor round `anchor`, stage `i`, and current statistic `h`.
#[allow(clippy::too_many_arguments)]
pub fn s1_value<A: PhiArith>(
    summand: &S1Summand,
    constants: &DetConstants,
    m: usize,
    s: u32,
    anchor: usize,
    ell: usize,
    i: u32,
    h_now: u64,
    h_final: u64,
) -> A::Num {
    let lambda = A::lambda(m, constants.lambda_den_bits);
    let pieces = S1Pieces::<A>::build(summand, s, &lambda, constants);
    if ell < anchor {
        // Settled constant before the anchor round.
        A::powi(&A::ratio(1, m.max(2) as u64), constants.kappa as u64)
    } else if ell == anchor {
        summand.live_value(&pieces, s, i, h_now)
    } else {
        summand.frozen_value(&pieces, s, h_final)
    }
}

/// The five-case windowed collapse value for a single anchor `t`:
/// zero once any window degree dipped to `gamma`, one if the window closed
/// entirely above it, the settled constant before the window opens, and the
/// live `(1 - E[h]) * decay^(t - ell)` form inside the window.
pub fn phi_collapse_value<A: PhiArith>(
    params: &GuardParams<A>,
    anchor: usize,
    ell: usize,
    window_degrees: &[(usize, usize)],
    expectation_h: &A::Prob,
) -> A::Num {
    let tau_eff = params.tau.min(anchor);
    let lo = anchor - tau_eff;
    let dipped = window_degrees
        .iter()
        .any(|&(u, d)| u >= lo && u <= anchor.min(ell.saturating_sub(1)) && (d as f64) <= params.gamma);
    if ell > anchor {
        return if dipped { A::zero() } else { A::one() };
    }
    if dipped {
        return A::zero();
    }
    if ell < lo {
        return A::powi(&params.decay, params.tau as u64);
    }
    A::mul(
        &A::one_minus_clamped(expectation_h),
        &A::powi(&params.decay, (anchor - ell) as u64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::det::arith::FloatArith;
    use crate::moments::ratio;
    use crate::vset;
    use num_traits::ToPrimitive;

    fn graph(n: u32, edges: &[&[u32]]) -> Hypergraph {
        Hypergraph::from_edges(
            n,
            edges.iter().map(|e| VertexSet::from_iter(e.iter().copied())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn h_estimator_exact_product_rule() {
        // Single isolated completion {1,2} of X = {0}; i = 0 with s stages
        // remaining gives E[h] = 2^(-sk) * (1 - 2^(-s)) for the conflict on
        // X's bit.
        let g = graph(3, &[&[0, 1, 2]]);
        let marks = vec![true; 3];
        for s in 1..=4u32 {
            let (_, eh) = h_estimator(&g, &vset![0], 2, &marks, s);
            let expect = ratio(1, 1 << (2 * s)) - ratio(1, 1 << (3 * s));
            assert_eq!(eh, expect, "s={s}");
        }
        // All bits fixed, no conflicts: realized value 1.
        let fixed = vec![false, true, true];
        let (v, eh) = h_estimator(&g, &vset![0], 2, &fixed, 0);
        assert_eq!(v, 1);
        assert_eq!(eh.to_f64().unwrap(), 1.0);
    }

    #[test]
    fn s1_case_selector() {
        let g = graph(3, &[&[0, 1, 2]]);
        let fam = summand::build_s1_family(&g, 12, &DetConstants::default());
        let s1 = &fam[0];
        let c = DetConstants::default();
        let settled: f64 = s1_value::<FloatArith>(s1, &c, 12, 3, 5, 2, 0, 7, 7);
        assert!((settled - 12f64.powi(-4)).abs() < 1e-12);
        let live: f64 = s1_value::<FloatArith>(s1, &c, 12, 3, 5, 5, 1, 1, 0);
        assert!(live > 0.0);
        let frozen: f64 = s1_value::<FloatArith>(s1, &c, 12, 3, 5, 9, 0, 3, 0);
        // Frozen at H = 0: the floor 4^0 (1/lambda)^w.
        let lam = 12f64.ln();
        let w = s1.w;
        assert!((frozen - lam.powi(-(w as i32))).abs() < 1e-12);
    }

    #[test]
    fn phi_cases_follow_window() {
        let params = summand::GuardParams::<FloatArith> {
            gamma: 1.5,
            delta: 0.25,
            decay: 0.75,
            tau: 3,
        };
        let eh = 0.25f64;
        // Anchor 10 watches the window [7, 10].
        let anchor = 10usize;
        // Far before the window opens: the settled constant decay^tau.
        let far: f64 = phi_collapse_value::<FloatArith>(&params, anchor, 1, &[(0, 100)], &eh);
        assert!((far - 0.75f64.powi(3)).abs() < 1e-12);
        // Live inside the window, no dip: (1 - E[h]) decay^(anchor - ell).
        let live: f64 =
            phi_collapse_value::<FloatArith>(&params, anchor, 9, &[(8, 100)], &eh);
        assert!((live - 0.75 * 0.75).abs() < 1e-12);
        // A dip zeroes it.
        let dipped: f64 =
            phi_collapse_value::<FloatArith>(&params, anchor, 9, &[(8, 0)], &eh);
        assert_eq!(dipped, 0.0);
        // Past the anchor: 1 if the window held, 0 if it dipped.
        let bad: f64 = phi_collapse_value::<FloatArith>(&params, anchor, 11, &[(9, 100)], &eh);
        assert_eq!(bad, 1.0);
        let good: f64 = phi_collapse_value::<FloatArith>(&params, anchor, 11, &[(9, 0)], &eh);
        assert_eq!(good, 0.0);
    }
}
