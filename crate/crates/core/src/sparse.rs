//! Outer loops for graphs with many edges: reduce to bounded-rank
//! subproblems by marking, solve those, repeat.
//!
//! The randomized loop marks at `p = (n_t / 2m_t)^(1/r)` and breaks every
//! fully marked oversized edge by unmarking one vertex. The deterministic
//! loop replaces the random marking with an exact conditional-expectations
//! selection over the objective `S(Y) = |Y| - sum over oversized edges of
//! [f_e inside Y]`, which guarantees the expectation floor `n_t p / 2`
//! outright.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::det::{find_mis_det, DetConstants};
use crate::error::SolveError;
use crate::hypergraph::Hypergraph;
use crate::moments::{rational_pow, Rational};
use crate::rand_mis::{find_mis, RandConfig};
use crate::rng::{BitSource, Dyadic};
use crate::trace::RunTrace;
use crate::vset::VertexSet;

/// One derandomized marking round.
#[derive(Clone, Debug)]
pub struct SparseRound {
    pub p: Dyadic,
    pub free_vertices: usize,
    pub marked: VertexSet,
    /// The final selection after violated truncation sets are pruned.
    pub chosen: VertexSet,
    /// `E[S]` before any bit was fixed.
    pub expectation: Rational,
    /// `S(Y_0)` achieved by the bit fixing.
    pub achieved: Rational,
}

/// Marking probability for the sparse loops: `(n / 2m)^(1/r)` rounded down
/// to a dyadic with the denominator the loss analysis allows.
pub fn sparse_probability(n_free: usize, m_edges: usize, r: usize) -> Dyadic {
    if n_free == 0 {
        return Dyadic::ZERO;
    }
    if m_edges == 0 || 2 * m_edges <= n_free {
        return Dyadic::ONE;
    }
    let p = (n_free as f64 / (2.0 * m_edges as f64)).powf(1.0 / r as f64);
    let bits = ((2.0 * m_edges as f64 / n_free as f64).log2().ceil() / r as f64).ceil();
    let bits = (bits as u32).clamp(1, 24);
    Dyadic::round_down(p, bits)
}

/// The randomized sparse loop. Each iteration marks, truncates oversized
/// edges, solves the induced bounded-rank subproblem with the randomized
/// solver, and commits.
pub fn sbl(
    g: &Hypergraph,
    r: usize,
    seed: u64,
    config: &RandConfig,
) -> Result<(VertexSet, RunTrace), SolveError> {
    assert!(r >= 1);
    let src = BitSource::new(seed);
    let mut trace = RunTrace::new("sbl", "randomized", g.n(), g.num_edges(), g.rank(), Some(seed));
    let mut committed = VertexSet::new();
    let mut cur = g.residualize(&VertexSet::new())?;
    let mut iter = 0u64;
    while !cur.all_singletons() {
        iter += 1;
        if iter > 100_000 {
            return Err(SolveError::IterationCapExceeded(100_000));
        }
        let free = cur.free_vertices(&VertexSet::new());
        let live_edges = cur.edges().iter().filter(|e| e.len() > 1).count();
        let p = sparse_probability(free.len(), live_edges, r);
        let mut marked: Vec<bool> = (0..cur.n() as u64)
            .map(|v| src.bernoulli(iter, v, 2, p))
            .collect();
        // Break fully marked oversized edges: drop their first vertex.
        for e in cur.edges() {
            if e.len() > r && e.iter().all(|v| marked[v as usize]) {
                marked[e.iter().next().unwrap() as usize] = false;
            }
        }
        let keep = VertexSet::from_sorted(
            (0..cur.n()).filter(|&v| marked[v as usize]).collect(),
        );
        let (sub, back) = cur.induced(&keep);
        debug_assert!(sub.edges().iter().all(|e| e.len() <= r), "truncation left an oversized edge");
        let (sub_mis, _) = find_mis(&sub, src.word(iter, 0, 3), config)?;
        let add = VertexSet::from_iter(sub_mis.iter().map(|v| back[v as usize]));
        if !add.is_empty() {
            cur = cur.residualize(&add)?;
            committed = committed.union(&add);
        }
    }
    let mis = Hypergraph::finalize_mis(&cur, &committed)?;
    trace.mis_size = mis.len();
    trace.verified = g.verify_mis(&mis);
    Ok((mis, trace))
}

/// Derandomized marking: fixes the bit levels of every free vertex's
/// Bernoulli-p indicator by conditional expectations on
/// `S(Y) = sum [v in Y] - sum over oversized e of prod over f_e [v in Y]`,
/// then prunes one vertex from each violated truncation set. Guarantees
/// `S(Y_0) >= E[S] = n p - m' p^(r+1) >= n p / 2` exactly.
pub fn derand_mark(g: &Hypergraph, r: usize) -> SparseRound {
    let free = g.free_vertices(&VertexSet::new());
    let n_free = free.len();
    let live_edges = g.edges().iter().filter(|e| e.len() > 1).count();
    let p = sparse_probability(n_free, live_edges, r);
    let p_rat = p.to_rational();

    // Truncation sets: the first r+1 vertices of each oversized edge.
    let oversized: Vec<VertexSet> = g
        .edges()
        .iter()
        .filter(|e| e.len() > r)
        .map(|e| VertexSet::from_sorted(e.iter().take(r + 1).collect()))
        .collect();

    let idx_of: std::collections::BTreeMap<u32, usize> =
        free.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n_free];
    for (ei, fe) in oversized.iter().enumerate() {
        for v in fe.iter() {
            touching[idx_of[&v]].push(ei);
        }
    }

    // P(v in Y | fixed prefix) per free vertex, and the per-set product.
    let mut prob: Vec<Rational> = vec![p_rat.clone(); n_free];
    let expectation = {
        let lin: Rational = prob.iter().cloned().sum();
        let quad: Rational = oversized
            .iter()
            .map(|fe| rational_pow(&p_rat, fe.len()))
            .sum();
        lin - quad
    };

    // High bits of each vertex's uniform draw, fixed position-major. The
    // threshold is rescaled so degenerate p in {0, 1} stays exact.
    let s_bits = p.s.max(1);
    let a_scaled = p.num << (s_bits - p.s);
    let mut fixed: Vec<u64> = vec![0; n_free];
    let mut current = expectation.clone();
    for level in 0..s_bits {
        let remaining = s_bits - level - 1;
        for vi in 0..n_free {
            if prob[vi].is_zero() || prob[vi] == Rational::from_integer(1.into()) {
                // Already forced; keep the bit at zero.
                fixed[vi] <<= 1;
                continue;
            }
            let mut best: Option<(Rational, u64, Rational)> = None;
            for bit in [1u64, 0u64] {
                let high = (fixed[vi] << 1) | bit;
                let p_new = conditional_prob(a_scaled, high, remaining);
                let delta = p_new.clone() - prob[vi].clone();
                let mut cand = current.clone() + delta.clone();
                for &ei in &touching[vi] {
                    // Product over the set with v's probability replaced.
                    let mut prod = Rational::from_integer(1.into());
                    for u in oversized[ei].iter() {
                        let ui = idx_of[&u];
                        prod *= if ui == vi { p_new.clone() } else { prob[ui].clone() };
                    }
                    let mut old = Rational::from_integer(1.into());
                    for u in oversized[ei].iter() {
                        old *= prob[idx_of[&u]].clone();
                    }
                    cand = cand - prod + old;
                }
                let better = match &best {
                    None => true,
                    Some((b, bbit, _)) => cand > *b || (cand == *b && bit < *bbit),
                };
                if better {
                    best = Some((cand, bit, p_new));
                }
            }
            let (cand, bit, p_new) = best.expect("two candidates evaluated");
            debug_assert!(cand >= current, "conditional expectation decreased");
            fixed[vi] = (fixed[vi] << 1) | bit;
            prob[vi] = p_new;
            current = cand;
        }
    }

    let y0 = VertexSet::from_sorted(
        free.iter()
            .enumerate()
            .filter(|(vi, _)| fixed[*vi] < a_scaled)
            .map(|(_, v)| v)
            .collect(),
    );
    let achieved = {
        let violated = oversized.iter().filter(|fe| fe.is_subset_of(&y0)).count();
        Rational::from_integer((y0.len() as i64 - violated as i64).into())
    };
    debug_assert!(achieved >= expectation);

    // Prune one vertex (first by index) from each still-violated set.
    let mut chosen = y0.clone();
    for fe in &oversized {
        if fe.is_subset_of(&chosen) {
            chosen = chosen.minus(&VertexSet::singleton(fe.iter().next().unwrap()));
        }
    }
    SparseRound { p, free_vertices: n_free, marked: y0.clone(), chosen, expectation, achieved }
}

/// `P(u < a)` where `u` is uniform on `s_total` bits, the top bits of `u`
/// are fixed to `high`, and `remaining` low bits stay uniform.
fn conditional_prob(a: u64, high: u64, remaining: u32) -> Rational {
    let lo = high << remaining;
    let hi = (high + 1) << remaining;
    let favorable = a.clamp(lo, hi) - lo;
    Rational::new(favorable.into(), (1u64 << remaining).into())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DsblIteration {
    pub free_before: usize,
    pub p: f64,
    pub chosen: usize,
    pub floor: f64,
    /// Exact-rational comparison `chosen >= free_before * p / 2`.
    pub floor_ok: bool,
    pub committed: usize,
}

#[derive(Clone, Debug)]
pub struct DsblOutcome {
    pub mis: VertexSet,
    pub trace: RunTrace,
    pub iterations: Vec<DsblIteration>,
}

/// The deterministic sparse loop: derandomized marking, a deterministic MIS
/// of the induced bounded-rank subgraph, residualize, repeat.
pub fn dsbl(g: &Hypergraph, r: usize, det: &DetConstants) -> Result<DsblOutcome, SolveError> {
    assert!(r >= 1);
    let mut trace = RunTrace::new("dsbl", "deterministic", g.n(), g.num_edges(), g.rank(), None);
    let mut committed = VertexSet::new();
    let mut cur = g.residualize(&VertexSet::new())?;

    // Enforce m >= n: mark one vertex per edge, commit the rest.
    if (g.n() as usize) > g.num_edges() {
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

    let cap = iteration_cap(g.num_edges().max(2), g.n(), r);
    let mut iterations = Vec::new();
    while !cur.all_singletons() {
        if iterations.len() >= cap {
            return Err(SolveError::IterationCapExceeded(cap));
        }
        let round = derand_mark(&cur, r);
        let floor =
            Rational::new((round.free_vertices as i64).into(), 2.into()) * round.p.to_rational();
        let floor_ok = Rational::from_integer((round.chosen.len() as i64).into()) >= floor;
        debug_assert!(floor_ok, "selection fell below the expectation floor");
        let (sub, back) = cur.induced(&round.chosen);
        let add = if sub.num_edges() == 0 {
            round.chosen.clone()
        } else {
            let out = find_mis_det(&sub, None, det)?;
            VertexSet::from_iter(out.mis.iter().map(|v| back[v as usize]))
        };
        iterations.push(DsblIteration {
            free_before: round.free_vertices,
            p: round.p.value(),
            chosen: round.chosen.len(),
            floor: floor.to_f64().unwrap_or(0.0),
            floor_ok,
            committed: add.len(),
        });
        if !add.is_empty() {
            cur = cur.residualize(&add)?;
            committed = committed.union(&add);
        }
    }
    let mis = Hypergraph::finalize_mis(&cur, &committed)?;
    trace.mis_size = mis.len();
    trace.verified = g.verify_mis(&mis);
    Ok(DsblOutcome { mis, trace, iterations })
}

/// `8 m^(1/r) log n`, the iteration budget the loop is expected to respect.
pub fn iteration_cap(m: usize, n: u32, r: usize) -> usize {
    let cap = 8.0 * (m as f64).powf(1.0 / r as f64) * (n.max(3) as f64).ln();
    (cap.ceil() as usize).max(4)
}

/// The rank parameter balancing subproblem cost against iteration count:
/// `max(1, log2(log m / (log log m * log log n)) - 3)`, with small inputs
/// clamped to 1.
pub fn choose_rank(n: u32, m: usize) -> usize {
    if n < 3 || m < 16 {
        return 1;
    }
    let lm = (m as f64).ln();
    let llm = lm.ln();
    let lln = (n as f64).ln().ln();
    if llm <= 0.0 || lln <= 0.0 {
        return 1;
    }
    let val = (lm / (llm * lln)).log2() - 3.0;
    val.floor().max(1.0) as usize
}
