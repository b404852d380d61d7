//! The randomized marking pipeline: per-round marking, degree-scale
//! reduction, and the full solver loop, instrumented for migration and
//! collapse measurements.
//!
//! One round marks each vertex independently with dyadic probability `p`,
//! unmarks every vertex of each fully marked edge, commits the survivors,
//! and residualizes. The reduction loop runs rounds at `p ~ 1/v` until the
//! residual's normalized degree drops below `0.99v`; the solver drives `v`
//! down a geometric schedule until only singletons remain.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::envelope::{self, Regime};
use crate::error::SolveError;
use crate::hypergraph::Hypergraph;
use crate::moments::{rational_pow, Rational};
use crate::rng::{BitSource, Dyadic};
use crate::trace::{RoundRecord, RunTrace};
use crate::vset::VertexSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Run each reduction until the 0.99v envelope holds, with a global
    /// round cap.
    Adaptive,
    /// Honor the literal round formula `T = (log n)^(2^r)`; only sane for
    /// tiny parameters.
    Theoretical,
    /// Greedy vertex-by-vertex insertion.
    Sequential,
}

#[derive(Clone, Debug)]
pub struct RandConfig {
    pub mode: Mode,
    /// Global cap on marking rounds before the run aborts.
    pub round_cap: usize,
    /// Record migration counts and collapse events per round (quadratic-ish
    /// bookkeeping; used by diagnostics and tests).
    pub instrument: bool,
}

impl Default for RandConfig {
    fn default() -> Self {
        RandConfig { mode: Mode::Adaptive, round_cap: 20_000, instrument: false }
    }
}

/// Outcome of one marking round.
#[derive(Clone, Debug)]
pub struct MarkRound {
    pub p: Dyadic,
    /// C(v): initially marked.
    pub initial: Vec<bool>,
    /// A(v): still marked after fully-marked edges are cleared.
    pub surviving: Vec<bool>,
    /// K: vertices committed this round.
    pub committed: VertexSet,
}

/// Marks each vertex with probability `p` (bits addressed by `(t, vertex)`),
/// clears fully marked edges, commits the survivors, and residualizes.
/// `g` must already be the residual of the committed prefix, so singleton
/// edges silently keep decided vertices out of `K`.
pub fn mark(g: &Hypergraph, p: Dyadic, src: &BitSource, t: u64) -> (MarkRound, Hypergraph) {
    let n = g.n() as usize;
    let mut initial = vec![false; n];
    for (v, slot) in initial.iter_mut().enumerate() {
        *slot = src.bernoulli(t, v as u64, 0, p);
    }
    let mut surviving = initial.clone();
    for e in g.edges() {
        if e.iter().all(|v| initial[v as usize]) {
            for v in e.iter() {
                surviving[v as usize] = false;
            }
        }
    }
    let committed = VertexSet::from_sorted(
        (0..n as u32).filter(|&v| surviving[v as usize]).collect(),
    );
    let residual = g
        .residualize(&committed)
        .expect("survivors of fully-marked-edge clearing are independent");
    (MarkRound { p, initial, surviving, committed }, residual)
}

/// Chooses the marking probability for scale `v`: the nearest power of two
/// to `1/v`, capped at `1/2` so rounds stay non-degenerate.
pub fn marking_probability(v: f64) -> Dyadic {
    let p = Dyadic::nearest_pow2(1.0 / v.max(1.0));
    if p.s == 0 {
        Dyadic::new(1, 1)
    } else {
        p
    }
}

struct RoundLoop<'a> {
    src: &'a BitSource,
    committed: VertexSet,
    t: usize,
    trace: RunTrace,
    collapsed: BTreeMap<VertexSet, usize>,
    instrument: bool,
}

impl<'a> RoundLoop<'a> {
    fn new(src: &'a BitSource, trace: RunTrace, instrument: bool) -> Self {
        RoundLoop { src, committed: VertexSet::new(), t: 0, trace, collapsed: BTreeMap::new(), instrument }
    }

    /// Runs one round at scale `v`, appending a trace record.
    fn step(&mut self, g: &Hypergraph, v: f64) -> Result<Hypergraph, SolveError> {
        let p = marking_probability(v);
        self.t += 1;
        let (round, next) = mark(g, p, self.src, self.t as u64);
        let (migration_total, collapse_count) = if self.instrument {
            let mig = measure_migration(g, &round, &next);
            let collapses = self.record_collapses(g, &next);
            (Some(mig.values().sum()), Some(collapses))
        } else {
            (None, None)
        };
        self.committed = self.committed.union(&round.committed);
        self.trace.rounds.push(round_record(
            self.t,
            v,
            p,
            &next,
            &self.committed,
            round.committed.len(),
            migration_total,
            collapse_count,
        ));
        // Collapsed sets stay emptied forever; any regrowth is a bug.
        if self.instrument {
            for (x, &at) in &self.collapsed {
                if at < self.t {
                    for j in 1..=next.rank() {
                        debug_assert_eq!(
                            next.degree(x, j),
                            0,
                            "collapsed X={x:?} regrew at round {}",
                            self.t
                        );
                    }
                }
            }
        }
        Ok(next)
    }

    fn record_collapses(&mut self, g: &Hypergraph, next: &Hypergraph) -> u64 {
        let mut count = 0;
        for x in g.edge_subsets(g.rank().saturating_sub(1)) {
            if self.collapsed.contains_key(&x) {
                continue;
            }
            let had: usize = (1..=g.rank()).map(|j| g.degree(&x, j)).sum();
            let has: usize = (1..=g.rank()).map(|j| next.degree(&x, j)).sum();
            if had > 0 && has == 0 {
                self.collapsed.insert(x, self.t);
                count += 1;
            }
        }
        count
    }
}

#[allow(clippy::too_many_arguments)]
fn round_record(
    t: usize,
    v: f64,
    p: Dyadic,
    g: &Hypergraph,
    committed: &VertexSet,
    committed_round: usize,
    migration_total: Option<u64>,
    collapse_count: Option<u64>,
) -> RoundRecord {
    let base_n = (g.n().max(3)) as f64;
    let minv_plain = envelope::min_constraining_v(g, base_n, Regime::Plain);
    RoundRecord {
        t,
        v,
        p: p.value(),
        edges: g.num_edges(),
        singletons: g.edges().iter().filter(|e| e.len() == 1).count(),
        committed_total: committed.len(),
        committed_round,
        minv_plain,
        minv_f: envelope::min_constraining_v(g, base_n, Regime::F),
        minv_g: envelope::min_constraining_v(g, (g.num_edges().max(3)) as f64, Regime::G),
        within_2v: minv_plain <= 2.0 * v,
        within_099v: minv_plain <= 0.99 * v,
        migration_total,
        collapse_count,
        ..Default::default()
    }
}

/// Runs exactly `t_rounds` marking rounds at scale `v` (the explicit-count
/// form of the reduction loop).
pub fn reduce_rounds(
    g: &Hypergraph,
    v: f64,
    t_rounds: usize,
    src: &BitSource,
    instrument: bool,
) -> Result<(Hypergraph, RunTrace), SolveError> {
    let trace = RunTrace::new("rand-reduce", "fixed", g.n(), g.num_edges(), g.rank(), Some(src.seed()));
    let mut authority = RoundLoop::new(src, trace, instrument);
    let mut cur = g.clone();
    for _ in 0..t_rounds {
        cur = authority.step(&cur, v)?;
    }
    Ok((cur, authority.trace))
}

/// Runs marking rounds at scale `v`. Adaptive mode stops once the residual
/// is 0.99v-constrained (plain envelope); theoretical mode runs the literal
/// `T = (log n)^(2^r)` rounds.
pub fn reduce(
    g: &Hypergraph,
    v: f64,
    src: &BitSource,
    config: &RandConfig,
) -> Result<(Hypergraph, RunTrace), SolveError> {
    let mut trace = RunTrace::new("rand-reduce", mode_name(config.mode), g.n(), g.num_edges(), g.rank(), Some(src.seed()));
    if envelope::is_v_constrained(g, v, (g.n().max(3)) as f64, Regime::Plain).is_err() {
        trace.warn(format!("input graph is not {v}-constrained (plain envelope)"));
    }
    let mut authority = RoundLoop::new(src, trace, config.instrument);
    let mut cur = g.clone();
    match config.mode {
        Mode::Theoretical => {
            let t_rounds = theoretical_rounds(g.n(), g.rank());
            if t_rounds > config.round_cap as f64 {
                return Err(SolveError::RoundCapExceeded { cap: config.round_cap, v });
            }
            for _ in 0..t_rounds as usize {
                cur = authority.step(&cur, v)?;
            }
        }
        Mode::Adaptive | Mode::Sequential => {
            while envelope::is_v_constrained(&cur, 0.99 * v, (cur.n().max(3)) as f64, Regime::Plain).is_err() {
                if authority.t >= config.round_cap {
                    return Err(SolveError::RoundCapExceeded { cap: config.round_cap, v });
                }
                cur = authority.step(&cur, v)?;
            }
        }
    }
    Ok((cur, authority.trace))
}

pub fn theoretical_rounds(n: u32, r: usize) -> f64 {
    ((n.max(3)) as f64).ln().powf((1u64 << r.min(30)) as f64)
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Adaptive => "adaptive",
        Mode::Theoretical => "theoretical",
        Mode::Sequential => "sequential",
    }
}

/// The full randomized solver: drives `v` down a 0.99-geometric schedule,
/// reducing at each scale, then finalizes once only singletons remain.
pub fn find_mis(
    g: &Hypergraph,
    seed: u64,
    config: &RandConfig,
) -> Result<(VertexSet, RunTrace), SolveError> {
    let src = BitSource::new(seed);
    let mut trace = RunTrace::new("rand", mode_name(config.mode), g.n(), g.num_edges(), g.rank(), Some(seed));

    if config.mode == Mode::Sequential {
        let mis = sequential_mis(g);
        trace.mis_size = mis.len();
        trace.verified = g.verify_mis(&mis);
        return Ok((mis, trace));
    }

    let mut cur = g.residualize(&VertexSet::new())?;
    let mut authority = RoundLoop::new(&src, trace, config.instrument);
    let base_n = (g.n().max(3)) as f64;

    let mut v = match config.mode {
        Mode::Theoretical => g.n() as f64 * theoretical_rounds(g.n(), g.rank()),
        _ => envelope::min_constraining_v(&cur, base_n, Regime::Plain).max(1.0),
    };
    while !cur.all_singletons() {
        if authority.t >= config.round_cap {
            return Err(SolveError::RoundCapExceeded { cap: config.round_cap, v });
        }
        match config.mode {
            Mode::Theoretical => {
                let t_rounds = theoretical_rounds(cur.n(), cur.rank());
                if t_rounds > config.round_cap as f64 {
                    return Err(SolveError::RoundCapExceeded { cap: config.round_cap, v });
                }
                for _ in 0..t_rounds as usize {
                    cur = authority.step(&cur, v)?;
                }
            }
            _ => {
                // Skip schedule entries that would run zero rounds.
                let minv = envelope::min_constraining_v(&cur, base_n, Regime::Plain);
                while 0.99 * v >= minv && v > 2.0 {
                    v *= 0.99;
                }
                while envelope::is_v_constrained(&cur, 0.99 * v, base_n, Regime::Plain).is_err()
                    && !cur.all_singletons()
                {
                    if authority.t >= config.round_cap {
                        return Err(SolveError::RoundCapExceeded { cap: config.round_cap, v });
                    }
                    cur = authority.step(&cur, v)?;
                }
            }
        }
        v *= 0.99;
        if v < 1.0 {
            v = 1.0;
        }
    }
    let mis = Hypergraph::finalize_mis(&cur, &authority.committed)?;
    let mut trace = authority.trace;
    trace.mis_size = mis.len();
    trace.verified = g.verify_mis(&mis);
    Ok((mis, trace))
}

/// Greedy fallback: insert vertices in index order whenever independence
/// survives.
pub fn sequential_mis(g: &Hypergraph) -> VertexSet {
    let mut chosen = VertexSet::new();
    for v in 0..g.n() {
        let candidate = chosen.union(&VertexSet::singleton(v));
        let closes = g
            .incident_edges(v)
            .iter()
            .any(|&ei| g.edges()[ei as usize].is_subset_of(&candidate));
        if !closes {
            chosen = candidate;
        }
    }
    chosen
}

pub type MigrationMap = BTreeMap<(VertexSet, usize, usize), u64>;

/// Exact migration counts: `M[(X, j, k)]` is the number of `Y` in the
/// k-neighborhood of `X` whose shrunken edge lands in the (j)-neighborhood
/// after the round.
pub fn measure_migration(g_t: &Hypergraph, round: &MarkRound, g_t1: &Hypergraph) -> MigrationMap {
    let mut out = MigrationMap::new();
    let r = g_t.rank();
    for x in g_t.edge_subsets(r.saturating_sub(1)) {
        for k in 2..=r.saturating_sub(x.len()) {
            for y in g_t.neighborhood(&x, k) {
                let remaining = y.minus(&round.committed);
                let j = remaining.len();
                if j == 0 || j >= k {
                    continue;
                }
                let landed = x.union(&remaining);
                if g_t1.contains_edge(&landed) {
                    *out.entry((x.clone(), j, k)).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

/// The migration surrogate `S = sum_Y sum_{Z subset Y, |Z| = k-j} C(Z)`,
/// evaluated on the round's initial marks. Dominates `M[(X, j, k)]`.
pub fn migration_surrogate(
    g_t: &Hypergraph,
    round: &MarkRound,
    x: &VertexSet,
    j: usize,
    k: usize,
) -> u64 {
    let mut total = 0u64;
    for y in g_t.neighborhood(x, k) {
        for z in y.subsets() {
            if z.len() == k - j && z.iter().all(|v| round.initial[v as usize]) {
                total += 1;
            }
        }
    }
    total
}

/// Monte-Carlo estimate of the probability that `X` collapses in one round
/// at probability `p`: some k-completion of `X` survives entirely.
pub fn collapse_frequency_probe(
    g: &Hypergraph,
    x: &VertexSet,
    k: usize,
    p: Dyadic,
    trials: u64,
    seed: u64,
) -> f64 {
    let src = BitSource::new(seed);
    let completions = g.neighborhood(x, k);
    if completions.is_empty() {
        return 0.0;
    }
    let mut hits = 0u64;
    for t in 0..trials {
        let mut initial = vec![false; g.n() as usize];
        for (v, slot) in initial.iter_mut().enumerate() {
            *slot = src.bernoulli(t, v as u64, 1, p);
        }
        let mut surviving = initial.clone();
        for e in g.edges() {
            if e.iter().all(|v| initial[v as usize]) {
                for v in e.iter() {
                    surviving[v as usize] = false;
                }
            }
        }
        if completions.iter().any(|y| y.iter().all(|v| surviving[v as usize])) {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Exact collapse probability by enumerating every assignment of the
/// edge-covered vertices. Exponential; callers keep instances small.
pub fn exact_collapse_probability(g: &Hypergraph, x: &VertexSet, k: usize, p: Dyadic) -> Rational {
    let mut relevant = VertexSet::new();
    for e in g.edges() {
        relevant = relevant.union(e);
    }
    let vars: Vec<u32> = relevant.iter().collect();
    assert!(vars.len() <= 22, "exact collapse enumeration needs <= 22 live vertices");
    let completions = g.neighborhood(x, k);
    let p_rat = p.to_rational();
    let q_rat = Rational::one() - p_rat.clone();
    let mut acc = Rational::zero();
    for mask in 0u64..(1 << vars.len()) {
        let mut initial = vec![false; g.n() as usize];
        for (b, &v) in vars.iter().enumerate() {
            initial[v as usize] = mask >> b & 1 == 1;
        }
        let mut surviving = initial.clone();
        for e in g.edges() {
            if e.iter().all(|v| initial[v as usize]) {
                for v in e.iter() {
                    surviving[v as usize] = false;
                }
            }
        }
        if completions.iter().any(|y| y.iter().all(|v| surviving[v as usize])) {
            let ones = mask.count_ones() as usize;
            acc += rational_pow(&p_rat, ones) * rational_pow(&q_rat, vars.len() - ones);
        }
    }
    acc
}
