//! The staged potential-minimization engine.
//!
//! Each round builds the live summand families on the current graph, then
//! fixes the round's mark vector one stage at a time: every stage scans the
//! whole support of the sample space, evaluates the potential with that
//! candidate appended, and keeps the first minimizer in canonical support
//! order. Within a round every summand's support-average is at most its
//! current value (the collapse guards are exact martingales under the
//! space's exact-independence property; the migration guards' exponent is
//! capped so their moment growth sits inside the stage prefactor), so the
//! chosen minimum never increases the potential.
//!
//! The scan is the hot path: summand supports are compiled to 64-bit masks
//! once per round, so evaluating one candidate is a stream of AND/compare
//! operations plus table lookups.

use rayon::prelude::*;

use crate::det::arith::{lambda_string, ExactArith, FloatArith, PhiArith};
use crate::det::summand::{
    build_s1_family, s2_params, s3_params, CollapseGuard, HEstimator, S1Pieces,
};
use crate::det::DetConstants;
use crate::envelope::{self, Regime};
use crate::error::SolveError;
use crate::hypergraph::Hypergraph;
use crate::spaces::{edge_pair_unions, SampleSpace};
use crate::trace::{RoundRecord, RunTrace, StageRecord};
use crate::vset::VertexSet;

/// Registration summary for the potential ledger.
#[derive(Clone, Debug)]
pub struct PotentialLedger {
    pub s1_live: usize,
    pub guards: usize,
    pub h_estimators: usize,
    pub cap: usize,
}

/// Result of a full deterministic solve.
#[derive(Clone, Debug)]
pub struct DetOutcome {
    pub mis: VertexSet,
    pub trace: RunTrace,
    pub phi_violations: usize,
    pub p3_violations: usize,
    pub stages_total: usize,
}

/// Counts the summand families the engine would register for one reduction
/// call on `g`, enforcing the budget cap.
pub fn register_summands(
    g: &Hypergraph,
    _v: f64,
    constants: &DetConstants,
) -> Result<PotentialLedger, SolveError> {
    let cap = constants.summand_budget(g.num_edges());
    let s1 = build_s1_family(g, g.num_edges(), constants);
    let mut guards = 0usize;
    let mut hests = 0usize;
    for x in g.edge_subsets(g.rank().saturating_sub(1)) {
        for _j in 1..=g.rank().saturating_sub(x.len()) {
            hests += 1;
            guards += 2; // equilibrium + final-decrease flavors
        }
    }
    let total = s1.len() + guards;
    if total > cap {
        return Err(SolveError::SummandBudgetExceeded { count: total, cap });
    }
    Ok(PotentialLedger { s1_live: s1.len(), guards, h_estimators: hests, cap })
}

pub(crate) struct CallStats {
    pub committed: VertexSet,
    pub rounds_run: usize,
    pub stages_run: usize,
    pub phi_violations: usize,
    pub p3_violations: usize,
    pub records: Vec<RoundRecord>,
    pub warnings: Vec<String>,
}

/// One S1 summand compiled for the scan: term masks plus a value table
/// indexed by the statistic `H`.
struct CompiledS1<A: PhiArith> {
    terms: Vec<(u64, u64)>,
    /// `value_by_h[i][h]`, table per stage for the candidate scan
    /// (`i = i_next`), built lazily per stage.
    table: Vec<A::Num>,
    h_max: u64,
}

struct CompiledLead {
    mask: u64,
    len: u32,
    sub_from: u32,
    sub_to: u32,
}

/// Shared h-estimator, compiled: leads and conflict unions as masks.
struct CompiledH {
    leads: Vec<CompiledLead>,
    subs: Vec<(u64, u32)>,
}

impl CompiledH {
    fn expectation<A: PhiArith>(&self, live: u64, tab: &[A::Prob]) -> A::Prob {
        let mut acc = A::p_zero();
        for lead in &self.leads {
            if lead.mask & live != lead.mask {
                continue;
            }
            let mut term = tab[lead.len as usize].clone();
            for &(mask, len) in &self.subs[lead.sub_from as usize..lead.sub_to as usize] {
                if mask & live == mask {
                    term = A::p_sub(&term, &tab[len as usize]);
                }
            }
            acc = A::p_add(&acc, &term);
        }
        acc
    }
}

struct CompiledGuard<A: PhiArith> {
    coef: A::Num,
    hid: usize,
}

fn mask_of(set: &VertexSet) -> u64 {
    set.mask64()
}

/// One reduction call at scale `v`, generic over the arithmetic.
pub(crate) fn reduce_call<A: PhiArith>(
    g: &Hypergraph,
    v: f64,
    omega: &SampleSpace,
    constants: &DetConstants,
    m_const: usize,
    t_offset: usize,
) -> Result<(Hypergraph, CallStats), SolveError> {
    if g.n() > 64 {
        return Err(SolveError::UnsupportedWidth(g.n()));
    }
    let n = g.n() as usize;
    let r = g.rank();
    let s = (v.max(2.0)).log2().ceil().max(1.0) as u32;
    let lambda = A::lambda(m_const, constants.lambda_den_bits);
    let base_n = (g.n().max(3)) as f64;
    let cap = constants.round_cap;

    let mut stats = CallStats {
        committed: VertexSet::new(),
        rounds_run: 0,
        stages_run: 0,
        phi_violations: 0,
        p3_violations: 0,
        records: Vec::new(),
        warnings: Vec::new(),
    };

    if envelope::is_v_constrained(g, v, base_n, Regime::Plain).is_err() {
        stats.warnings.push(format!("input to reduce at v={v:.3} is not v-constrained (plain)"));
    }

    // Collapse guards persist across the call's rounds. Registration is
    // ordered by |X| so a budget cut keeps the strongest steering terms.
    let budget = constants.summand_budget(m_const);
    let mut guards: Vec<CollapseGuard> = Vec::new();
    let mut guard_decay: Vec<(f64, usize)> = Vec::new(); // (decay, tau) per guard
    let mut guard_keys: Vec<(VertexSet, usize)> = Vec::new();
    {
        let mut xs = g.edge_subsets(r.saturating_sub(1));
        xs.sort_by_key(|x| x.len());
        'outer: for x in xs {
            for j in 1..=r.saturating_sub(x.len()) {
                if guards.len() + 2 > budget {
                    stats
                        .warnings
                        .push(format!("guard registration truncated at {}", guards.len()));
                    break 'outer;
                }
                let key_index = guard_keys.len();
                guard_keys.push((x.clone(), j));
                let p2 = s2_params::<A>(j, x.len(), s, m_const, &lambda, constants);
                let p3 = s3_params::<A>(j, x.len(), s, m_const, &lambda, constants);
                for (flavor, params) in [(0usize, p2), (1usize, p3)] {
                    let (lo, hi) = if flavor == 0 { (2, cap) } else { (cap, cap) };
                    let mut guard = CollapseGuard {
                        x: x.clone(),
                        k: j,
                        gamma: params.gamma,
                        tau: params.tau,
                        anchor_lo: lo,
                        anchor_hi: hi,
                        last_below: None,
                        finalized_bad: 0,
                        h_index: key_index,
                    };
                    guard.record_round(0, g.degree(&x, j));
                    guard_decay.push((A::to_f64(&params.decay), params.tau));
                    guards.push(guard);
                }
            }
        }
    }

    let mut settled_s1_f = 0.0f64;
    let settled_floor = A::powi(&A::ratio(1, m_const.max(2) as u64), constants.kappa as u64);
    let mut cur = g.clone();
    let mut stall = 0usize;

    loop {
        if envelope::is_v_constrained(&cur, 0.99 * v, base_n, Regime::Plain).is_ok() {
            break;
        }
        if stats.rounds_run >= cap {
            return Err(SolveError::RoundCapExceeded { cap, v });
        }
        stats.rounds_run += 1;
        let ell = stats.rounds_run;

        // Round-start families on the current graph.
        let mut s1_family = build_s1_family(&cur, m_const, constants);
        if s1_family.len() > budget {
            s1_family.sort_by_key(|l| (l.y_set.len(), l.k, l.x.len()));
            s1_family.truncate(budget);
            stats.warnings.push(format!("round {ell}: S1 family truncated to {budget}"));
        }
        let pieces: Vec<S1Pieces<A>> =
            s1_family.iter().map(|su| S1Pieces::build(su, s, &lambda, constants)).collect();
        let mut compiled_s1: Vec<CompiledS1<A>> = s1_family
            .iter()
            .map(|su| {
                let terms: Vec<(u64, u64)> =
                    su.terms.iter().map(|(z, d)| (mask_of(z), *d)).collect();
                let h_max: u64 = terms.iter().map(|(_, d)| *d).sum();
                CompiledS1 { terms, table: Vec::new(), h_max }
            })
            .collect();

        // Shared h-estimators, compiled; guards whose estimator is empty
        // contribute `coef * (1 - 0)` - a round constant.
        let hests: Vec<CompiledH> = guard_keys
            .iter()
            .map(|(x, k)| {
                let est = HEstimator::build(&cur, x, *k);
                let mut leads = Vec::with_capacity(est.terms.len());
                let mut subs = Vec::new();
                for t in &est.terms {
                    let from = subs.len() as u32;
                    for (_, union) in &t.subs {
                        subs.push((mask_of(union), union.len() as u32));
                    }
                    leads.push(CompiledLead {
                        mask: mask_of(&t.lead),
                        len: t.lead.len() as u32,
                        sub_from: from,
                        sub_to: subs.len() as u32,
                    });
                }
                CompiledH { leads, subs }
            })
            .collect();

        let mut round_const_f = settled_s1_f;
        let mut live_guards: Vec<CompiledGuard<A>> = Vec::new();
        for (gi, guard) in guards.iter().enumerate() {
            let (decay_f, _tau) = guard_decay[gi];
            let (live_f, settled_f) = guard.round_coefficients_f64(ell, decay_f);
            round_const_f += settled_f;
            if live_f > 0.0 {
                if hests[guard.h_index].leads.is_empty() {
                    // E[h] = 0 for the whole round: a constant contribution.
                    round_const_f += live_f;
                } else {
                    live_guards.push(CompiledGuard { coef: A::from_f64(live_f), hid: guard.h_index });
                }
            }
        }
        let round_const: A::Num = A::from_f64(round_const_f);
        let max_union = hests
            .iter()
            .flat_map(|h| h.subs.iter().map(|&(_, l)| l).chain(h.leads.iter().map(|l| l.len)))
            .max()
            .unwrap_or(1) as usize;

        // Live mask (uncommitted bits all start marked).
        let full_mask: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut marks: u64 = full_mask;

        // Stage tables: probability weights 2^(-remaining * len) and S1
        // value tables per H.
        let mut phi_prev: A::Num = {
            let tab: Vec<A::Prob> =
                (0..=max_union).map(|l| A::p_pow2_neg(s as u64 * l as u64)).collect();
            build_s1_tables::<A>(&mut compiled_s1, &s1_family, &pieces, s, 0);
            eval_compiled::<A>(marks, &compiled_s1, &live_guards, &hests, &tab, &round_const)
        };
        for (ci, su) in compiled_s1.iter().enumerate() {
            let h0: u64 = su.terms.iter().map(|(_, d)| d).sum();
            let psi0 = s1_family[ci].live_value::<A>(&pieces[ci], s, 0, h0);
            if !A::le_with_tol(&psi0, &settled_floor, constants.float_rel_tol) {
                stats.p3_violations += 1;
            }
        }

        let support = omega.support_len();
        let mut stage_records = Vec::with_capacity(s as usize);
        for i in 0..s {
            let remaining = s - i - 1;
            let tab: Vec<A::Prob> =
                (0..=max_union).map(|l| A::p_pow2_neg(remaining as u64 * l as u64)).collect();
            build_s1_tables::<A>(&mut compiled_s1, &s1_family, &pieces, s, i + 1);
            let chosen = (0..support)
                .into_par_iter()
                .map(|idx| {
                    let cand = omega.vector(idx)[0];
                    let live = marks & cand & full_mask;
                    let val = eval_compiled::<A>(
                        live,
                        &compiled_s1,
                        &live_guards,
                        &hests,
                        &tab,
                        &round_const,
                    );
                    (val, idx)
                })
                .reduce_with(|a, b| match a.0.partial_cmp(&b.0) {
                    Some(std::cmp::Ordering::Less) => a,
                    Some(std::cmp::Ordering::Greater) => b,
                    _ => {
                        if a.1 <= b.1 {
                            a
                        } else {
                            b
                        }
                    }
                })
                .expect("support is non-empty");
            let (phi_after, idx) = chosen;
            stats.stages_run += 1;
            if !A::le_with_tol(&phi_after, &phi_prev, constants.float_rel_tol) {
                stats.phi_violations += 1;
                stats.warnings.push(format!(
                    "round {ell} stage {i}: potential increased ({} -> {})",
                    A::to_f64(&phi_prev),
                    A::to_f64(&phi_after)
                ));
            }
            marks &= omega.vector(idx)[0];
            stage_records.push(StageRecord {
                i: i as usize,
                chosen: idx,
                ln_phi_before: A::to_f64(&phi_prev).ln(),
                ln_phi_after: A::to_f64(&phi_after).ln(),
                ln_migration_part: f64::NAN,
                ln_collapse_part: f64::NAN,
                ln_settled_part: round_const_f.ln(),
            });
            phi_prev = phi_after;
        }

        // Commit step: clear fully marked edges, commit survivors.
        let mut surviving = marks & full_mask;
        for e in cur.edges() {
            let em = mask_of(e);
            if em & marks == em {
                surviving &= !em;
            }
        }
        let committed_round = VertexSet::from_sorted(
            (0..n as u32).filter(|&v| surviving >> v & 1 == 1).collect(),
        );
        let next = cur.residualize(&committed_round)?;

        // Freeze this round's migration summands at their final H.
        for (ci, su) in compiled_s1.iter().enumerate() {
            let h_final: u64 =
                su.terms.iter().filter(|(m, _)| m & marks == *m).map(|(_, d)| d).sum();
            settled_s1_f +=
                A::to_f64(&s1_family[ci].frozen_value::<A>(&pieces[ci], s, h_final));
        }
        // Record the completed round's degrees into the guards.
        for guard in guards.iter_mut() {
            let (x, k) = &guard_keys[guard.h_index];
            guard.record_round(ell, next.degree(x, *k));
        }

        stats.committed = stats.committed.union(&committed_round);
        if committed_round.is_empty() {
            stall += 1;
        } else {
            stall = 0;
        }

        let mut record = round_record_det(t_offset + ell, v, s, &next, &stats.committed);
        record.committed_round = committed_round.len();
        record.stages = stage_records;
        stats.records.push(record);

        if stall >= constants.stall_rounds {
            // Deterministic escape hatch: commit the first free vertex so
            // the pipeline always makes progress at bench scale.
            let free = next.free_vertices(&VertexSet::new());
            let first_free = free.as_slice().first().copied();
            if let Some(first) = first_free {
                let single = VertexSet::singleton(first);
                let bumped = next.residualize(&single)?;
                stats.committed = stats.committed.union(&single);
                stats.warnings.push(format!(
                    "round {ell}: stalled {stall} rounds; committed vertex {first} greedily"
                ));
                stall = 0;
                cur = bumped;
                continue;
            }
        }
        cur = next;
        if cur.all_singletons() {
            break;
        }
    }
    Ok((cur, stats))
}

fn build_s1_tables<A: PhiArith>(
    compiled: &mut [CompiledS1<A>],
    family: &[crate::det::summand::S1Summand],
    pieces: &[S1Pieces<A>],
    s: u32,
    i_next: u32,
) {
    for (ci, su) in compiled.iter_mut().enumerate() {
        let cap = su.h_max.min(4096);
        su.table = (0..=cap)
            .map(|h| family[ci].live_value::<A>(&pieces[ci], s, i_next, h))
            .collect();
    }
}

fn eval_compiled<A: PhiArith>(
    live: u64,
    s1: &[CompiledS1<A>],
    guards: &[CompiledGuard<A>],
    hests: &[CompiledH],
    tab: &[A::Prob],
    round_const: &A::Num,
) -> A::Num {
    let mut total = round_const.clone();
    for su in s1 {
        let mut h = 0u64;
        for &(mask, d) in &su.terms {
            if mask & live == mask {
                h += d;
            }
        }
        total = A::add(&total, &su.table[h.min(su.table.len() as u64 - 1) as usize]);
    }
    let mut last: Option<(usize, A::Num)> = None;
    for guard in guards {
        let one_minus = match &last {
            Some((id, cached)) if *id == guard.hid => cached.clone(),
            _ => {
                let eh = hests[guard.hid].expectation::<A>(live, tab);
                let om = A::one_minus_clamped(&eh);
                last = Some((guard.hid, om.clone()));
                om
            }
        };
        total = A::add(&total, &A::mul(&guard.coef, &one_minus));
    }
    total
}

fn round_record_det(
    t: usize,
    v: f64,
    s: u32,
    g: &Hypergraph,
    committed: &VertexSet,
) -> RoundRecord {
    let base_n = (g.n().max(3)) as f64;
    let minv_plain = envelope::min_constraining_v(g, base_n, Regime::Plain);
    RoundRecord {
        t,
        v,
        p: (-(s as f64)).exp2(),
        edges: g.num_edges(),
        singletons: g.edges().iter().filter(|e| e.len() == 1).count(),
        committed_total: committed.len(),
        committed_round: 0,
        minv_plain,
        minv_f: envelope::min_constraining_v(g, base_n, Regime::F),
        minv_g: envelope::min_constraining_v(g, (g.num_edges().max(3)) as f64, Regime::G),
        within_2v: minv_plain <= 2.0 * v,
        within_099v: minv_plain <= 0.99 * v,
        migration_total: None,
        collapse_count: None,
        stages: Vec::new(),
    }
}

/// Checks that the space certifies exact independence on every edge-pair
/// union of `g` (the cube certifies everything it can hold).
pub fn omega_covers(omega: &SampleSpace, g: &Hypergraph) -> bool {
    if omega.meta.construction.starts_with("cube") {
        return omega.n_bits() >= g.n() as usize;
    }
    if omega.n_bits() < g.n() as usize {
        return false;
    }
    let cons = &omega.meta.constraints;
    let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); g.n() as usize];
    for (i, c) in cons.iter().enumerate() {
        for v in c.iter() {
            if (v as usize) < by_vertex.len() {
                by_vertex[v as usize].push(i);
            }
        }
    }
    let covered = |u: &VertexSet| -> bool {
        let Some(first) = u.iter().next() else { return true };
        by_vertex[first as usize].iter().any(|&i| u.is_subset_of(&cons[i]))
    };
    for v in 0..g.n() {
        if !covered(&VertexSet::singleton(v)) {
            return false;
        }
    }
    let unions = edge_pair_unions(g);
    unions.iter().all(covered)
}

/// One deterministic reduction at scale `v`: dispatches on the arithmetic
/// mode and returns the reduced graph plus its trace.
pub fn det_reduce(
    g: &Hypergraph,
    v: f64,
    omega: &SampleSpace,
    constants: &DetConstants,
) -> Result<(Hypergraph, RunTrace), SolveError> {
    if !omega_covers(omega, g) {
        return Err(SolveError::Q2CertificateMissing(
            "space does not certify the graph's edge-pair unions".into(),
        ));
    }
    let m_const = g.num_edges().max(2);
    let (next, stats) = if constants.exact {
        reduce_call::<ExactArith>(g, v, omega, constants, m_const, 0)?
    } else {
        reduce_call::<FloatArith>(g, v, omega, constants, m_const, 0)?
    };
    let mut trace =
        RunTrace::new("det-reduce", arith_name(constants), g.n(), g.num_edges(), g.rank(), None);
    trace.lambda_log_m = Some(lambda_string(m_const, constants.lambda_den_bits));
    trace.rounds = stats.records;
    trace.warnings = stats.warnings;
    trace.phi_violations = stats.phi_violations;
    trace.p3_violations = stats.p3_violations;
    Ok((next, trace))
}

fn arith_name(c: &DetConstants) -> &'static str {
    if c.exact {
        "exact"
    } else {
        "float"
    }
}

/// The full deterministic solver: optional vertex-count pre-processing, the
/// geometric scale schedule with zero-round skipping, reduction calls, and
/// finalization. Fully deterministic; no seed anywhere.
pub fn find_mis_det(
    g: &Hypergraph,
    omega: Option<&SampleSpace>,
    constants: &DetConstants,
) -> Result<DetOutcome, SolveError> {
    if g.n() > 64 {
        return Err(SolveError::UnsupportedWidth(g.n()));
    }
    let mut trace =
        RunTrace::new("det", arith_name(constants), g.n(), g.num_edges(), g.rank(), None);
    let mut committed = VertexSet::new();
    let mut cur = g.residualize(&VertexSet::new())?;

    // When vertices outnumber edges, committing everything but one marked
    // vertex per edge shrinks the live vertex set to at most the edge count.
    if g.n() as usize > g.num_edges() && g.num_edges() > 0 {
        let mut reps = VertexSet::new();
        let mut blocked = vec![false; g.n() as usize];
        for e in cur.edges() {
            if e.len() == 1 {
                blocked[e.iter().next().unwrap() as usize] = true;
            } else {
                reps.insert(e.iter().next().unwrap());
            }
        }
        let mass = VertexSet::from_sorted(
            (0..g.n())
                .filter(|&v| !reps.contains(v) && !blocked[v as usize])
                .collect(),
        );
        if !mass.is_empty() {
            cur = cur.residualize(&mass)?;
            committed = committed.union(&mass);
            trace.warn(format!("pre-processing committed {} vertices", mass.len()));
        }
    }

    // Build the marking space if the caller did not supply one.
    let owned_omega: Option<SampleSpace> = if omega.is_none() {
        Some(build_default_omega(g, constants)?)
    } else {
        None
    };
    let omega = omega.or(owned_omega.as_ref()).expect("omega present");
    if !omega_covers(omega, g) {
        if constants.require_pair_cover {
            return Err(SolveError::Q2CertificateMissing(
                "space does not certify the graph's edge-pair unions".into(),
            ));
        }
        trace.warn("marking space certifies less than the full edge-pair family".to_string());
    }
    trace.lambda_log_m = Some(lambda_string(g.num_edges().max(2), constants.lambda_den_bits));

    let m_const = g.num_edges().max(2);
    let base_n = (g.n().max(3)) as f64;
    let mut v = (m_const as f64).powi(3);
    let mut total_rounds = 0usize;
    let mut stages_total = 0usize;
    let mut phi_violations = 0usize;
    let mut p3_violations = 0usize;

    while !cur.all_singletons() {
        // Skip scale steps that would run zero rounds.
        let minv = envelope::min_constraining_v(&cur, base_n, Regime::Plain);
        while 0.99 * v >= minv && v > 1.0 {
            v = (v * 0.99).max(1.0);
        }
        let (next, stats) = if constants.exact {
            reduce_call::<ExactArith>(&cur, v, omega, constants, m_const, total_rounds)?
        } else {
            reduce_call::<FloatArith>(&cur, v, omega, constants, m_const, total_rounds)?
        };
        total_rounds += stats.rounds_run;
        stages_total += stats.stages_run;
        phi_violations += stats.phi_violations;
        p3_violations += stats.p3_violations;
        committed = committed.union(&stats.committed);
        trace.rounds.extend(stats.records);
        trace.warnings.extend(stats.warnings);
        if total_rounds > constants.total_round_cap {
            return Err(SolveError::RoundCapExceeded { cap: constants.total_round_cap, v });
        }
        cur = next;
        v = (v * 0.99).max(1.0);
    }

    let mis = Hypergraph::finalize_mis(&cur, &committed)?;
    trace.mis_size = mis.len();
    trace.verified = g.verify_mis(&mis);
    trace.phi_violations = phi_violations;
    trace.p3_violations = p3_violations;
    Ok(DetOutcome { mis, trace, phi_violations, p3_violations, stages_total })
}

/// Default marking space: the exact cube when the graph is small enough,
/// otherwise a linear space certifying the graph's edge-pair unions. When
/// the full pair family is infeasible within budget and the constants allow
/// it, fall back to certifying single-edge subsets.
pub fn build_default_omega(
    g: &Hypergraph,
    constants: &DetConstants,
) -> Result<SampleSpace, SolveError> {
    let n = g.n() as usize;
    if n <= constants.cube_bits {
        return SampleSpace::full_cube(n, &constants.space_budget)
            .map_err(|e| SolveError::Q2CertificateMissing(e.to_string()));
    }
    let unions = edge_pair_unions(g);
    match SampleSpace::build_q2(n, &unions, &constants.space_budget) {
        Ok(s) => Ok(s),
        Err(e) if !constants.require_pair_cover => {
            let per_edge: Vec<VertexSet> = g.edges().to_vec();
            SampleSpace::build_q2(n, &per_edge, &constants.space_budget)
                .map_err(|e2| SolveError::Q2CertificateMissing(format!("{e}; fallback: {e2}")))
        }
        Err(e) => Err(SolveError::Q2CertificateMissing(e.to_string())),
    }
}
