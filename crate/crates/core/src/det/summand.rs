//! Potential summands: migration guards over the `H` statistics, the
//! collapse estimator `h`, and the windowed collapse guards built from it.
//!
//! Each summand family exposes its value as a case-by-case evaluation. The
//! migration family is live during its anchor round and contributes a frozen
//! scalar afterwards; the collapse guards track, per anchor round, whether a
//! degree stayed above its threshold through a trailing window.

use crate::det::arith::PhiArith;
use crate::det::DetConstants;
use crate::envelope::exponent_g;
use crate::hypergraph::Hypergraph;
use crate::vset::VertexSet;

/// Tests whether a set's bits are all alive under the current mark state.
pub trait MarkView {
    fn alive(&self, v: u32) -> bool;
    fn all_alive(&self, s: &VertexSet) -> bool {
        s.iter().all(|v| self.alive(v))
    }
}

impl MarkView for Vec<bool> {
    fn alive(&self, v: u32) -> bool {
        self[v as usize]
    }
}

/// Mark state joined with a candidate stage vector.
pub struct Joined<'a> {
    pub marks: &'a [bool],
    pub candidate: &'a [u64],
}

impl MarkView for Joined<'_> {
    #[inline]
    fn alive(&self, v: u32) -> bool {
        self.marks[v as usize] && (self.candidate[(v / 64) as usize] >> (v % 64)) & 1 == 1
    }
}

impl MarkView for [bool] {
    fn alive(&self, v: u32) -> bool {
        self[v as usize]
    }
}

/// One migration summand: identity `(Y, t, k, j, X)` with the cached `H`
/// support. The exponent of the degree-scale power `2^(s*j)` stands in for
/// `v^j`, and `lambda` powers carry the log-correction ladder.
#[derive(Clone, Debug)]
pub struct S1Summand {
    pub x: VertexSet,
    pub j: usize,
    pub k: usize,
    pub q: usize,
    pub y_set: VertexSet,
    pub w: u64,
    /// `(Z, D_j(X u Z))` for every q-superset `Z` of `Y` with positive
    /// degree, fixed at the anchor round's start.
    pub terms: Vec<(VertexSet, u64)>,
}

impl S1Summand {
    /// `H^i(Y)` under the given mark view: the degree mass of still-alive
    /// `Z`.
    pub fn h_statistic<M: MarkView>(&self, view: &M) -> u64 {
        self.terms
            .iter()
            .filter(|(z, _)| view.all_alive(z))
            .map(|(_, d)| d)
            .sum()
    }

    /// The live-case value at stage `i` of the anchor round:
    /// `4^(s-i) * ((A + H * 2^(-(s-i)(q-y))) / B)^w`, with
    /// `A = v^j * lambda^(-G + ladder*(q-y))`, `B = A * lambda`.
    pub fn live_value<A: PhiArith>(&self, pieces: &S1Pieces<A>, s: u32, i: u32, h: u64) -> A::Num {
        let qy = (self.q - self.y_set.len()) as i64;
        let inner = A::add(
            &pieces.a_over_b,
            &A::mul(
                &A::from_count(h),
                &A::mul(&A::pow2(-((s - i) as i64) * qy), &pieces.inv_b),
            ),
        );
        A::mul(&A::pow2(2 * (s - i) as i64), &A::powi(&inner, self.w))
    }

    /// The value after the anchor round: the stage-s form with `H` frozen.
    pub fn frozen_value<A: PhiArith>(&self, pieces: &S1Pieces<A>, s: u32, h_final: u64) -> A::Num {
        self.live_value(pieces, s, s, h_final)
    }
}

/// Precomputed numeric pieces of one S1 summand at scale `2^s`.
pub struct S1Pieces<A: PhiArith> {
    pub a_over_b: A::Num,
    pub inv_b: A::Num,
}

impl<A: PhiArith> S1Pieces<A> {
    pub fn build(summand: &S1Summand, s: u32, lambda: &A::Num, constants: &DetConstants) -> Self {
        let qy = (summand.q - summand.y_set.len()) as i64;
        let g_exp = clamped_g(summand.k + summand.x.len(), constants.s1_gcap);
        // A = 2^(s j) * lambda^(ladder*(q-y) - G); B = A * lambda.
        let lam_exp = constants.ladder * qy - g_exp;
        let a = A::mul(&A::pow2(s as i64 * summand.j as i64), &lambda_power::<A>(lambda, lam_exp));
        let b = A::mul(&a, lambda);
        S1Pieces { a_over_b: A::recip(lambda), inv_b: A::recip(&b) }
    }
}

pub fn clamped_g(l: usize, cap: i64) -> i64 {
    (exponent_g(l) as i64).min(cap)
}

pub fn lambda_power<A: PhiArith>(lambda: &A::Num, e: i64) -> A::Num {
    if e >= 0 {
        A::powi(lambda, e as u64)
    } else {
        A::recip(&A::powi(lambda, (-e) as u64))
    }
}

/// The S1 exponent `w = ceil(w0 log m / q)`, capped so that `w q <= q + 2`.
/// Under exact per-bit survival probabilities the capped moment growth is
/// absorbed by the stage prefactor, which keeps every stage transition a
/// supermartingale regardless of the graph; an uncapped exponent only does
/// so once powers of `log m` separate scales.
pub fn s1_exponent(m: usize, q: usize, constants: &DetConstants) -> u64 {
    let uncapped = (constants.w0 * (m.max(3) as f64).ln() / q as f64).ceil() as u64;
    let cap = (1 + 2 / q.max(1)) as u64;
    uncapped.clamp(1, cap.max(1))
}

/// Builds the migration family for one anchor round on the current graph:
/// every `(j < k <= r, X subset of an edge with 0 < |X| < r, Y subset of an
/// edge with |Y| < q)` whose `H` support is non-empty.
pub fn build_s1_family(g: &Hypergraph, m_anchor: usize, constants: &DetConstants) -> Vec<S1Summand> {
    let r = g.rank();
    let mut out = Vec::new();
    for x in g.edge_subsets(r.saturating_sub(1)) {
        let xl = x.len();
        for k in 2..=r.saturating_sub(xl) {
            let completions = g.neighborhood(&x, k);
            if completions.is_empty() {
                continue;
            }
            for j in 1..k {
                let q = k - j;
                let w = s1_exponent(m_anchor, q, constants);
                // Candidate Y: subsets of completions with |Y| < q (the
                // empty set included); Z: q-supersets of Y inside a
                // completion, weighted by D_j(X u Z).
                let mut ys: Vec<VertexSet> = vec![VertexSet::new()];
                if q > 1 {
                    let mut seen = std::collections::BTreeSet::new();
                    for c in &completions {
                        for sub in c.subsets() {
                            if !sub.is_empty() && sub.len() < q {
                                seen.insert(sub);
                            }
                        }
                    }
                    ys.extend(seen);
                }
                for y in ys {
                    let mut zs = std::collections::BTreeSet::new();
                    for c in &completions {
                        if !y.is_subset_of(c) {
                            continue;
                        }
                        for sub in c.subsets() {
                            if sub.len() == q && y.is_subset_of(&sub) {
                                zs.insert(sub);
                            }
                        }
                    }
                    let terms: Vec<(VertexSet, u64)> = zs
                        .into_iter()
                        .map(|z| {
                            let d = g.degree(&x.union(&z), j) as u64;
                            (z, d)
                        })
                        .filter(|(_, d)| *d > 0)
                        .collect();
                    if !terms.is_empty() {
                        out.push(S1Summand { x: x.clone(), j, k, q, y_set: y, w, terms });
                    }
                }
            }
        }
    }
    out
}

/// The collapse estimator `h(k, X)` on a fixed graph: one term per
/// k-completion `Y`, discounted by every conflicting edge and every rival
/// completion.
#[derive(Clone, Debug)]
pub struct HEstimator {
    pub x: VertexSet,
    pub k: usize,
    pub terms: Vec<HTerm>,
}

#[derive(Clone, Debug)]
pub struct HTerm {
    /// The completion `Y` itself (`Y - X = Y`).
    pub lead: VertexSet,
    /// Conflict sets paired as (difference, union with the lead):
    /// `e - Y` for each edge meeting `Y`, `Y' - Y` for each rival.
    pub subs: Vec<(VertexSet, VertexSet)>,
}

impl HEstimator {
    pub fn build(g: &Hypergraph, x: &VertexSet, k: usize) -> HEstimator {
        let completions = g.neighborhood(x, k);
        let mut terms = Vec::with_capacity(completions.len());
        for y in &completions {
            let mut subs = Vec::new();
            for e in g.edges() {
                if e.intersects(y) {
                    let diff = e.minus(y);
                    let union = y.union(&diff);
                    subs.push((diff, union));
                }
            }
            for y2 in &completions {
                if y2 != y {
                    let diff = y2.minus(y);
                    let union = y.union(&diff);
                    subs.push((diff, union));
                }
            }
            terms.push(HTerm { lead: y.clone(), subs });
        }
        HEstimator { x: x.clone(), k, terms }
    }

    /// The realized integer value under fully fixed marks.
    pub fn value<M: MarkView>(&self, view: &M) -> i64 {
        let mut acc = 0i64;
        for t in &self.terms {
            if view.all_alive(&t.lead) {
                acc += 1;
                for (diff, _) in &t.subs {
                    if view.all_alive(diff) {
                        acc -= 1;
                    }
                }
            }
        }
        acc
    }

    /// Conditional expectation with `remaining` stages of bits still to be
    /// drawn: each monomial `[C(S)]` contributes
    /// `[alive(S)] * 2^(-remaining * |S|)` by the exact product rule.
    pub fn expectation<A: PhiArith, M: MarkView>(&self, view: &M, remaining: u32) -> A::Prob {
        let mut acc = A::p_zero();
        for t in &self.terms {
            if !view.all_alive(&t.lead) {
                continue;
            }
            let mut term = A::p_pow2_neg(remaining as u64 * t.lead.len() as u64);
            for (_, union) in &t.subs {
                if view.all_alive(union) {
                    term = A::p_sub(&term, &A::p_pow2_neg(remaining as u64 * union.len() as u64));
                }
            }
            acc = A::p_add(&acc, &term);
        }
        acc
    }
}

/// Windowed collapse guard for one `(X, k)`: anchors at rounds `t`, each
/// watching the window `[t - tau_eff(t), t]` for degrees above `gamma`.
#[derive(Clone, Debug)]
pub struct CollapseGuard {
    pub x: VertexSet,
    pub k: usize,
    pub gamma: f64,
    pub tau: usize,
    /// Anchor rounds `[lo, hi]`.
    pub anchor_lo: usize,
    pub anchor_hi: usize,
    /// Most recent completed round whose degree was `<= gamma`.
    pub last_below: Option<usize>,
    /// Anchors finalized at value 1 (the guarded event happened).
    pub finalized_bad: usize,
    /// Index of the shared h-estimator for this `(X, k)`.
    pub h_index: usize,
}

impl CollapseGuard {
    fn tau_eff(&self, t: usize) -> usize {
        self.tau.min(t)
    }

    fn window_ok(&self, t: usize) -> bool {
        match self.last_below {
            None => true,
            Some(u) => t.saturating_sub(self.tau_eff(t)) > u,
        }
    }

    /// First anchor `>= from` whose trailing window avoids every recorded
    /// below-threshold round. Anchors are scanned in order; the window start
    /// is non-decreasing in `t`, so the live set is a contiguous range.
    fn first_ok_anchor(&self, from: usize) -> usize {
        let mut t = from.max(self.anchor_lo);
        while t <= self.anchor_hi && !self.window_ok(t) {
            t += 1;
        }
        t
    }

    /// Splits the anchor family at round `ell` into the live coefficient
    /// (sum of `decay^(t-ell)` over live anchors, in closed form) and the
    /// settled constant (far-future anchors at `decay^tau` plus
    /// finalized-bad ones at 1). These multipliers are candidate-independent
    /// round constants, so f64 is enough for both arithmetic modes.
    pub fn round_coefficients_f64(&self, ell: usize, decay: f64) -> (f64, f64) {
        let first = self.first_ok_anchor(ell);
        let live_hi = self.anchor_hi.min(ell + self.tau);
        let live = if first <= live_hi {
            let len = (live_hi - first + 1) as i32;
            if 1.0 - decay < 1e-15 {
                // The geometric sum degenerates to a plain count.
                len as f64
            } else {
                decay.powi((first - ell) as i32) * (1.0 - decay.powi(len)) / (1.0 - decay)
            }
        } else {
            0.0
        };
        let far_count =
            self.anchor_hi.saturating_sub(live_hi.max(self.anchor_lo.saturating_sub(1)));
        let settled = far_count as f64 * decay.powi(self.tau as i32) + self.finalized_bad as f64;
        (live, settled)
    }

    /// Records the degree of the completed round `u`, finalizing any anchor
    /// at `t = u`.
    pub fn record_round(&mut self, u: usize, degree: usize) {
        if u >= self.anchor_lo && u <= self.anchor_hi && self.window_ok(u) && degree as f64 > self.gamma
        {
            // The anchor at t = u watched [t - tau_eff, t]; every degree in
            // the window stayed above gamma, so the guarded event occurred.
            self.finalized_bad += 1;
        }
        if (degree as f64) <= self.gamma {
            self.last_below = Some(u);
        }
    }
}

/// Desk thresholds for a guard in degree order `j` at scale `2^s`:
/// `gamma = max(1, 2^(s j) / lambda^geff)` and the matching
/// `delta = 2^(-j-1) * 2^(-s j) * gamma`, with `tau` sized so the settled
/// value `(1 - delta)^tau` sinks to the settled constant.
pub struct GuardParams<A: PhiArith> {
    pub gamma: f64,
    pub delta: A::Num,
    pub decay: A::Num,
    pub tau: usize,
}

pub fn s2_params<A: PhiArith>(
    j: usize,
    x_len: usize,
    s: u32,
    m: usize,
    lambda: &A::Num,
    constants: &DetConstants,
) -> GuardParams<A> {
    let geff = clamped_g(j + x_len, constants.phi_gcap);
    let lam_f = A::to_f64(lambda);
    let gamma_raw = (s as f64 * j as f64).exp2() / lam_f.powi(geff as i32);
    if gamma_raw >= 1.0 {
        // gamma = 2^(s j) lambda^(-geff): delta = 2^(-j-1) lambda^(-geff).
        let delta = A::mul(&A::pow2(-(j as i64) - 1), &lambda_power::<A>(lambda, -geff));
        finish_params::<A>(gamma_raw, delta, m, constants)
    } else {
        // Clamp gamma to 1; delta = 2^(-j-1) 2^(-s j).
        let delta = A::pow2(-(j as i64) - 1 - (s as i64) * j as i64);
        finish_params::<A>(1.0, delta, m, constants)
    }
}

pub fn s3_params<A: PhiArith>(
    j: usize,
    x_len: usize,
    s: u32,
    m: usize,
    lambda: &A::Num,
    constants: &DetConstants,
) -> GuardParams<A> {
    // Half the equilibrium threshold, shrunk by the final-decrease factor.
    let base = s2_params::<A>(j, x_len, s, m, lambda, constants);
    let shrink = 0.99f64.powi(j as i32) / 2.0;
    let gamma = (base.gamma * shrink).max(1.0);
    let delta = A::mul(&base.delta, &A::ratio(99u64.pow(j as u32), 2 * 100u64.pow(j as u32)));
    finish_params::<A>(gamma, delta, m, constants)
}

fn finish_params<A: PhiArith>(
    gamma: f64,
    delta: A::Num,
    m: usize,
    constants: &DetConstants,
) -> GuardParams<A> {
    let delta_f = A::to_f64(&delta).clamp(1e-12, 0.5);
    let lam_f = (m.max(3) as f64).ln();
    let tau_raw =
        (constants.s2_window_scale * constants.kappa as f64 * lam_f / delta_f).ceil() as usize;
    let tau = tau_raw.clamp(2, constants.max_window);
    let decay = A::sub_from_one(&delta);
    GuardParams { gamma, delta, decay, tau }
}
