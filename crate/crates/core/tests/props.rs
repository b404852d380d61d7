//! Property tests for the structural invariants: reduction, degree
//! accounting, MIS verification against an independent oracle, marking-round
//! invariants, and space round-trips.

use proptest::prelude::*;

use hmis::gen::{generate, InstanceKind};
use hmis::hypergraph::Hypergraph;
use hmis::rand_mis::{find_mis, mark, RandConfig};
use hmis::rng::{BitSource, Dyadic};
use hmis::spaces::{SampleSpace, SpaceBudget};
use hmis::vset::VertexSet;

#[test]
fn hundred_seeds_on_one_instance() {
    let g = generate(InstanceKind::UniformRandom, 50, 90, 3, 77).unwrap();
    for seed in 0..100u64 {
        let (mis, _) = find_mis(&g, seed, &RandConfig::default()).unwrap();
        assert!(g.verify_mis(&mis), "seed {seed}");
    }
}

fn arb_graph(max_n: u32, max_m: usize, max_r: usize) -> impl Strategy<Value = Hypergraph> {
    (2..=max_n, 1..=max_m, 2..=max_r, any::<u16>()).prop_filter_map(
        "generator must have room",
        |(n, m, r, seed)| generate(InstanceKind::UniformRandom, n, m, r, seed as u64).ok(),
    )
}

/// MIS check written against the raw definition with bitmask arithmetic,
/// independent of `verify_mis`'s incidence-based path.
fn brute_is_mis(g: &Hypergraph, s: &VertexSet) -> bool {
    let n = g.n();
    let masks: Vec<u64> = g.edges().iter().map(|e| e.mask64()).collect();
    let sm = s.mask64();
    let independent = |m: u64| masks.iter().all(|&e| e & m != e);
    if !independent(sm) {
        return false;
    }
    (0..n).all(|v| sm >> v & 1 == 1 || !independent(sm | 1 << v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residualize_is_reduced_and_idempotent(g in arb_graph(12, 14, 4)) {
        let r1 = g.residualize(&VertexSet::new()).unwrap();
        // No nested or duplicate edges survive (pairwise subset scan).
        for (i, e) in r1.edges().iter().enumerate() {
            for (j, f) in r1.edges().iter().enumerate() {
                if i != j {
                    prop_assert!(!e.is_subset_of(f), "nested pair {e:?} <= {f:?}");
                }
            }
        }
        let r2 = r1.residualize(&VertexSet::new()).unwrap();
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn no_edge_sits_inside_a_completion(g in arb_graph(12, 14, 4)) {
        // For reduced G and X u Y in E, no edge is contained in Y.
        let g = g.reduce();
        for e in g.edges() {
            for x in e.subsets() {
                if x.is_empty() || x.len() == e.len() {
                    continue;
                }
                let y = e.minus(&x);
                for f in g.edges() {
                    prop_assert!(!f.is_subset_of(&y), "edge {f:?} inside completion {y:?} of {x:?}");
                }
            }
        }
    }

    #[test]
    fn degree_sums_count_containing_edges(g in arb_graph(12, 12, 4)) {
        for x in g.edge_subsets(g.rank()) {
            let total: usize = (0..=g.rank()).map(|j| g.degree(&x, j)).sum();
            let direct = g.edges().iter().filter(|e| x.is_subset_of(e)).count();
            prop_assert_eq!(total, direct);
        }
    }

    #[test]
    fn verify_mis_matches_brute_oracle(g in arb_graph(8, 10, 3), mask in 0u64..256) {
        let s = VertexSet::from_sorted((0..g.n()).filter(|&v| mask >> v & 1 == 1).collect());
        prop_assert_eq!(g.verify_mis(&s), brute_is_mis(&g, &s));
    }

    #[test]
    fn mark_round_invariants(g in arb_graph(14, 16, 4), seed in any::<u64>(), s in 1u32..4) {
        let src = BitSource::new(seed);
        let reduced = g.residualize(&VertexSet::new()).unwrap();
        let (round, next) = mark(&reduced, Dyadic::new(1, s), &src, 1);
        // Survival implies initial marking.
        for v in 0..reduced.n() as usize {
            prop_assert!(!round.surviving[v] || round.initial[v]);
        }
        // A fully marked edge keeps none of its vertices.
        for e in reduced.edges() {
            if e.iter().all(|v| round.initial[v as usize]) {
                prop_assert!(e.iter().all(|v| !round.surviving[v as usize]));
            }
        }
        // The next graph is the residual of the committed set, reduced.
        prop_assert!(next.is_reduced());
        for v in round.committed.iter() {
            prop_assert!(next.contains_edge(&VertexSet::singleton(v)));
        }
    }

    #[test]
    fn randomized_solver_always_verifies(g in arb_graph(16, 20, 4), seed in any::<u64>()) {
        let (mis, trace) = find_mis(&g, seed, &RandConfig::default()).unwrap();
        prop_assert!(g.verify_mis(&mis));
        prop_assert!(trace.verified);
    }

    #[test]
    fn q2_spaces_have_uniform_marginals(g in arb_graph(10, 10, 3)) {
        let budget = SpaceBudget::default();
        let unions = hmis::spaces::edge_pair_unions(&g);
        let space = SampleSpace::build_q2(g.n() as usize, &unions, &budget).unwrap();
        let support = space.support_len();
        for v in 0..g.n() as usize {
            let ones = (0..support).filter(|&i| space.bit(i, v)).count();
            prop_assert_eq!(2 * ones, support, "bit {} marginal", v);
        }
    }

    #[test]
    fn space_round_trip_bit_exact(n in 2usize..10, l in 1usize..4, seed in any::<u16>()) {
        let budget = SpaceBudget::default();
        let l = l.min(n);
        let eps = if seed % 2 == 0 { 0.0 } else { 1.0 / 16.0 };
        let space = SampleSpace::build_q1(n, l, eps, &budget).unwrap();
        let dir = std::env::temp_dir().join(format!("hmis-prop-{}-{seed}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let bin = dir.join("s.bin");
        let side = dir.join("s.json");
        space.save(&bin, &side).unwrap();
        let back = SampleSpace::load(&bin, &side).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        prop_assert_eq!(space, back);
    }

    #[test]
    fn graph_json_round_trip(g in arb_graph(14, 16, 4)) {
        let s = g.to_canonical_json();
        let back = Hypergraph::from_json(&s).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_canonical_json(), s);
    }
}
