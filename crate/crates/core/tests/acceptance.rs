//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figures. Stored fixtures under tests/data/ are
//! content-addressed; the hashes pinned here must match the files.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use num_traits::{One, ToPrimitive, Zero};

use hmis::det::arith::ExactArith;
use hmis::det::summand::HEstimator;
use hmis::det::{build_default_omega, det_reduce, find_mis_det, DetConstants};
use hmis::envelope::{min_constraining_v, Regime};
use hmis::gen::{generate, InstanceKind};
use hmis::hypergraph::Hypergraph;
use hmis::moments::{
    approx_indep_moment_bound, expectation_power_iid, expectation_power_over_space, ratio,
    union_moment_bound, union_moment_sum, MultilinearPoly, Rational,
};
use hmis::rand_mis::{
    collapse_frequency_probe, exact_collapse_probability, find_mis, mark, marking_probability,
    measure_migration, migration_surrogate, sequential_mis, RandConfig,
};
use hmis::rng::{BitSource, Dyadic};
use hmis::spaces::{edge_pair_unions, SampleSpace, SpaceBudget};
use hmis::sparse::{derand_mark, dsbl, iteration_cap, sbl};
use hmis::vset::VertexSet;

const FIXTURE_HASHES: &[(&str, u64)] = &[
    ("det01.json", 0x1f2ed41df669d996),
    ("det02.json", 0xea7fe00eb67795fc),
    ("det03.json", 0x696888dc782c3efe),
    ("det04.json", 0x033ec1fc43b7c8c0),
    ("det05.json", 0x0477dc9ea2a2ef79),
    ("det06.json", 0x45869239bbd1cf8a),
    ("det07.json", 0xd6b849b619ecbfd0),
    ("det08.json", 0x11d74c8280dfcd0d),
    ("det09.json", 0x80f96286a2622d95),
    ("det10.json", 0xb92cb16dde26683f),
    ("det11.json", 0x27d6988d4f7c0281),
    ("det12.json", 0x21e1e8494fe3b187),
    ("det13.json", 0xdc7ae0be21b6615d),
    ("det14.json", 0x6fddcfc6f6a07b91),
    ("det15.json", 0x220ed08f5c382ac4),
    ("det16.json", 0x8989050f5344f6d5),
    ("det17.json", 0xcc1e959a61ed87e1),
    ("det18.json", 0xb1810afd96f4f50f),
    ("det19.json", 0xd08d7eb94be37f1f),
    ("det20.json", 0x12a1640fb6137bfe),
    ("sparse01.json", 0x8ac1f7df9edbbceb),
    ("sparse02.json", 0xc8863a3e3e7cf099),
    ("sparse03.json", 0x17efbad9a9fa57bb),
    ("sparse04.json", 0xb89e01365a904f59),
    ("sparse05.json", 0xb50a89ec96fcefb4),
    ("sparse06.json", 0xb82322b8bac2ddd7),
    ("rand01.json", 0x0e0b79d669ea9fd3),
    ("rand02.json", 0x236ee27bbd441eaa),
    ("rand03.json", 0x2325835096899201),
    ("rand04.json", 0x75531d512454e77a),
    ("rand05.json", 0x29692b796666d8cd),
    ("golden_uniform_n30_m40_r3_seed7.json", 0x7c6b985ffbc61434),
];

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn fixture(name: &str) -> Hypergraph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    let body = fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing fixture {name}: {e}"));
    let expect = FIXTURE_HASHES
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no pinned hash for {name}"))
        .1;
    assert_eq!(fnv64(body.as_bytes()), expect, "fixture {name} content drifted");
    Hypergraph::from_json(&body).unwrap()
}

/// The 200-instance correctness grid: kinds x sizes x ranks x seeds.
fn correctness_grid() -> Vec<(String, Hypergraph)> {
    let mut out = Vec::new();
    let mut push = |kind: InstanceKind, n: u32, m: usize, r: usize, seed: u64| {
        let g = generate(kind, n, m, r, seed)
            .unwrap_or_else(|e| panic!("generate {kind:?} n={n} m={m} r={r}: {e}"));
        out.push((format!("{kind:?}-n{n}-m{m}-r{r}-s{seed}"), g));
    };
    // 126 uniform-random instances across the full size range.
    for &r in &[2usize, 3, 4] {
        for &n in &[8u32, 12, 16, 20, 24, 28, 32, 36, 40, 44, 48, 52, 56, 60] {
            for seed in 0..3u64 {
                let m = match r {
                    2 => ((n as usize) * 3 / 2).min(200),
                    3 => ((n as usize) * 2).min(200),
                    _ => ((n as usize) * 3 / 2).min(120),
                };
                push(InstanceKind::UniformRandom, n, m, r, 1000 + seed * 17 + n as u64);
            }
        }
    }
    // 18 edge-heavy instances.
    for &r in &[3usize, 4] {
        for &n in &[20u32, 30, 40] {
            for seed in 0..3u64 {
                let m = ((n as usize) * 5 / 2).min(200);
                push(InstanceKind::PlantedSparse, n, m, r, 2000 + seed + n as u64);
            }
        }
    }
    // 18 nesting-heavy instances.
    for &r in &[3usize, 4] {
        for &n in &[10u32, 20, 30] {
            for seed in 0..3u64 {
                push(InstanceKind::WorstNested, n, (n as usize) * 2, r, 3000 + seed + n as u64);
            }
        }
    }
    // 38 small instances (these also feed the brute-force criterion).
    let mut count = 0;
    'outer: for &r in &[2usize, 3] {
        for &n in &[6u32, 7, 8, 9, 10] {
            for seed in 0..4u64 {
                push(InstanceKind::UniformRandom, n, n as usize + 2, r, 4000 + seed * 7 + n as u64);
                count += 1;
                if count == 38 {
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(out.len(), 200);
    out
}

#[test]
fn criterion_01_correctness_matrix() {
    let grid = correctness_grid();
    let det_constants = DetConstants::fast();
    let mut runs = 0usize;
    for (name, g) in &grid {
        for seed in 0..5u64 {
            let (mis, _) = find_mis(g, seed, &RandConfig::default())
                .unwrap_or_else(|e| panic!("{name} rand seed {seed}: {e}"));
            assert!(g.verify_mis(&mis), "{name} rand seed {seed}");
            let r_sbl = if g.rank() <= 2 { 2 } else { 3 };
            let (mis, _) = sbl(g, r_sbl, seed, &RandConfig::default())
                .unwrap_or_else(|e| panic!("{name} sbl seed {seed}: {e}"));
            assert!(g.verify_mis(&mis), "{name} sbl seed {seed}");
            runs += 2;
        }
        let out = find_mis_det(g, None, &det_constants)
            .unwrap_or_else(|e| panic!("{name} det: {e}"));
        assert!(g.verify_mis(&out.mis), "{name} det");
        let d = dsbl(g, 2, &det_constants).unwrap_or_else(|e| panic!("{name} dsbl: {e}"));
        assert!(g.verify_mis(&d.mis), "{name} dsbl");
        runs += 2;
    }
    println!("PASS correctness: {} verified runs over {} instances", runs, grid.len());
}

#[test]
fn criterion_02_brute_force_membership() {
    let grid = correctness_grid();
    let small: Vec<_> = grid.iter().filter(|(_, g)| g.n() <= 10).collect();
    assert!(small.len() >= 30, "need a meaningful small-instance population");
    let det_constants = DetConstants::default();
    let mut checked = 0usize;
    for (name, g) in &small {
        let family: BTreeSet<VertexSet> = g.enumerate_all_mis().into_iter().collect();
        assert!(!family.is_empty(), "{name}: no MIS enumerated");
        let mut member = |label: &str, mis: VertexSet| {
            assert!(family.contains(&mis), "{name} {label}: output outside enumerated family");
            checked += 1;
        };
        for seed in 0..5u64 {
            member("rand", find_mis(g, seed, &RandConfig::default()).unwrap().0);
            member("sbl", sbl(g, 2, seed, &RandConfig::default()).unwrap().0);
        }
        member("det", find_mis_det(g, None, &det_constants).unwrap().mis);
        member("dsbl", dsbl(g, 2, &det_constants).unwrap().mis);
        member("seq", sequential_mis(g));
    }
    println!("PASS brute-force membership: {checked} outputs over {} instances", small.len());
}

fn random_poly(stream: &mut hmis::rng::Stream, q: usize, max_terms: usize, n_vars: u32) -> MultilinearPoly {
    let mut poly = MultilinearPoly::new(q);
    let terms = 1 + stream.next_below(max_terms as u64) as usize;
    for _ in 0..terms {
        let mut z = VertexSet::new();
        while z.len() < q {
            z.insert(stream.next_below(n_vars as u64) as u32);
        }
        let num = 1 + stream.next_below(8);
        let den = 1 + stream.next_below(4);
        poly.add_term(z, ratio(num as i64, den as i64));
    }
    poly
}

#[test]
fn criterion_03_union_moment_inequality() {
    let src = BitSource::new(0x51);
    let mut stream = src.stream(1);
    let mut checked = 0usize;
    while checked < 500 {
        let q = 1 + stream.next_below(3) as usize;
        let w = stream.next_below(4) as usize;
        let poly = random_poly(&mut stream, q, 6, 8);
        for p in [ratio(1, 2), ratio(1, 4)] {
            let lhs = union_moment_sum(&poly, w, &p, 1 << 20).unwrap();
            let rhs = union_moment_bound(&poly, w, &p);
            assert!(lhs <= rhs, "q={q} w={w} p={p}: {lhs} > {rhs}");
        }
        checked += 1;
    }
    println!("PASS union-moment inequality: 500 exact-rational instances, zero violations");
}

#[test]
fn criterion_04_moment_bounds_vs_exhaustive_expectation() {
    // Part 1: iid Bernoulli-p over full cubes up to 12 variables.
    let src = BitSource::new(0x52);
    let mut stream = src.stream(2);
    let mut part1 = 0usize;
    for _ in 0..30 {
        let q = 1 + stream.next_below(3) as usize;
        let w = 1 + stream.next_below(3) as usize;
        let n_vars = 6 + stream.next_below(7) as usize;
        let poly = random_poly(&mut stream, q, 5, n_vars as u32);
        for p in [ratio(1, 2), ratio(1, 4)] {
            let exact = expectation_power_iid(&poly, w, &p, n_vars);
            let bound = union_moment_bound(&poly, w, &p);
            assert!(exact <= bound, "cube n={n_vars} q={q} w={w}: {exact} > {bound}");
            part1 += 1;
        }
    }

    // Part 2: every constructed approximate space with support <= 2^18,
    // with the all-ones excess measured exactly from the space itself.
    let budget = SpaceBudget::default();
    let spaces = vec![
        SampleSpace::build_q1(8, 4, 0.0, &budget).unwrap(),
        SampleSpace::build_q1(8, 3, 1.0 / 16.0, &budget).unwrap(),
        SampleSpace::build_q1(8, 4, 1.0 / 32.0, &budget).unwrap(),
        SampleSpace::build_q1(12, 3, 1.0 / 16.0, &budget).unwrap(),
    ];
    let mut part2 = 0usize;
    for space in &spaces {
        assert!(space.support_len() <= 1 << 18);
        let l = space.meta.l.unwrap();
        let report = space.verify_q1(l, &budget).unwrap();
        let eps = Rational::new(
            (report.max_allones_excess_num as i64).into(),
            (report.max_allones_excess_den as i64).into(),
        );
        for _ in 0..6 {
            let q = 1 + stream.next_below(2) as usize;
            let w = 1 + stream.next_below(2) as usize;
            if w * q > l {
                continue;
            }
            let poly = random_poly(&mut stream, q, 4, space.n_bits() as u32);
            let exact = expectation_power_over_space(&poly, w, space);
            let bound = approx_indep_moment_bound(&poly, w, &eps);
            assert!(
                exact <= bound,
                "space {} q={q} w={w}: {exact} > {bound}",
                space.meta.construction
            );
            part2 += 1;
        }
    }
    println!("PASS moment bounds: {part1} cube checks, {part2} approximate-space checks, exact");
}

#[test]
fn criterion_05_space_certification() {
    let budget = SpaceBudget::default();
    let mut certified = 0usize;

    // Exact cubes.
    for n in [3usize, 6, 10] {
        let s = SampleSpace::full_cube(n, &budget).unwrap();
        let rep = s.verify_q1(n.min(6), &budget).unwrap();
        assert!(rep.pass && rep.max_deviation.abs() < 1e-12, "cube n={n}");
        certified += 1;
    }
    // Small-bias powering spaces at their declared (L, epsilon).
    for (n, l) in [(8usize, 3usize), (8, 4), (8, 5), (16, 3), (12, 4)] {
        let eps = (-(l as f64) - 1.0).exp2();
        let s = SampleSpace::build_q1(n, l, eps, &budget).unwrap();
        let rep = s.verify_q1(l, &budget).unwrap();
        assert!(rep.pass, "powering n={n} l={l} ceiling failed");
        assert!(
            rep.max_deviation <= s.meta.epsilon.unwrap() + 1e-12,
            "powering n={n} l={l}: deviation {} above declared {}",
            rep.max_deviation,
            s.meta.epsilon.unwrap()
        );
        certified += 1;
    }
    // Linear spaces against the edge-pair family of generated graphs.
    for seed in [11u64, 12, 13, 14] {
        let g = generate(InstanceKind::UniformRandom, 14, 18, 3, seed).unwrap();
        let unions = edge_pair_unions(&g);
        let s = SampleSpace::build_q2(14, &unions, &budget).unwrap();
        assert!(s.verify_q2(&unions, &budget).unwrap(), "q2 seed {seed}");
        certified += 1;
    }
    // Compositions satisfy both properties at once.
    let q1 = SampleSpace::build_q1(8, 2, 1.0 / 8.0, &budget).unwrap();
    let g = generate(InstanceKind::UniformRandom, 8, 8, 3, 15).unwrap();
    let unions = edge_pair_unions(&g);
    let q2 = SampleSpace::build_q2(8, &unions, &budget).unwrap();
    let omega = SampleSpace::xor_compose(&q1, &q2).unwrap();
    assert!(omega.support_len() <= 1 << 18, "composed support {}", omega.support_len());
    assert!(omega.verify_q1(2, &budget).unwrap().pass, "composed ceiling");
    assert!(omega.verify_q2(&unions, &budget).unwrap(), "composed exactness");
    certified += 1;

    println!("PASS space certification: {certified} spaces, exact counting");
}

#[test]
fn criterion_06_potential_monotonicity_stored_runs() {
    let mut stages_checked = 0usize;
    for i in 1..=20 {
        let name = format!("det{i:02}.json");
        let g = fixture(&name);
        // Alternate the space construction between the exact cube and the
        // linear certificate so both paths are exercised.
        let constants_base = if i % 2 == 0 {
            DetConstants { cube_bits: 0, ..DetConstants::default() }
        } else {
            DetConstants::default()
        };
        let omega = build_default_omega(&g, &constants_base).unwrap();
        let v = min_constraining_v(&g, g.n().max(3) as f64, Regime::Plain).max(2.0);
        for exact in [true, false] {
            let constants = DetConstants { exact, ..constants_base.clone() };
            let (_, trace) = det_reduce(&g, v, &omega, &constants)
                .unwrap_or_else(|e| panic!("{name} exact={exact}: {e}"));
            assert_eq!(
                trace.phi_violations, 0,
                "{name} exact={exact}: potential increased at some stage"
            );
            for round in &trace.rounds {
                for stage in &round.stages {
                    // ln comparison with the float-mode tolerance.
                    assert!(
                        stage.ln_phi_after <= stage.ln_phi_before + 1e-9
                            || (stage.ln_phi_after.is_infinite() && stage.ln_phi_after < 0.0),
                        "{name} exact={exact} t={} i={}: {} > {}",
                        round.t,
                        stage.i,
                        stage.ln_phi_after,
                        stage.ln_phi_before
                    );
                    stages_checked += 1;
                }
            }
        }
    }
    // Full-schedule solves on a subset, both modes: every stage of every
    // reduction call stays monotone.
    for i in 1..=5 {
        let name = format!("det{i:02}.json");
        let g = fixture(&name);
        for exact in [true, false] {
            let constants = DetConstants { exact, ..DetConstants::default() };
            let out = find_mis_det(&g, None, &constants).unwrap();
            assert!(out.trace.verified, "{name} exact={exact}");
            assert_eq!(out.phi_violations, 0, "{name} exact={exact} full solve");
            stages_checked += out.stages_total;
        }
    }
    println!("PASS potential monotonicity: 20 stored reductions + 5 full solves x 2 modes, {stages_checked} stages, zero violations");
}

#[test]
fn criterion_07_h_estimator_properties() {
    let budget = SpaceBudget::default();
    let mut value_checks = 0usize;
    let mut expectation_checks = 0usize;

    for i in 1..=5 {
        let g = fixture(&format!("det{i:02}.json"));
        let src = BitSource::new(900 + i as u64);
        let mut cur = g.residualize(&VertexSet::new()).unwrap();
        for t in 1..=6u64 {
            let p = Dyadic::new(1, 2);
            let (round, next) = mark(&cur, p, &src, t);
            for x in cur.edge_subsets(cur.rank().saturating_sub(1)) {
                for k in 1..=cur.rank().saturating_sub(x.len()) {
                    let est = HEstimator::build(&cur, &x, k);
                    if est.terms.is_empty() {
                        continue;
                    }
                    let h = est.value(&round.initial);
                    assert!(h <= 1, "h = {h} above 1");
                    if h == 1 {
                        for j in 1..=next.rank() {
                            assert_eq!(
                                next.degree(&x, j),
                                0,
                                "h=1 but N_{j}({x:?}) survived the round"
                            );
                        }
                    }
                    value_checks += 1;
                }
            }
            cur = next;
            if cur.all_singletons() {
                break;
            }
        }
    }

    // Exact conditional expectations vs exhaustive enumeration over the
    // support: one remaining stage on the cube, two on a linear space.
    for i in 1..=3 {
        let g = fixture(&format!("det{i:02}.json"));
        let cube = SampleSpace::full_cube(g.n() as usize, &budget).unwrap();
        let unions = edge_pair_unions(&g);
        let linear = SampleSpace::build_q2(g.n() as usize, &unions, &budget).unwrap();
        let marks = vec![true; g.n() as usize];
        for x in g.edge_subsets(1) {
            for k in 1..=g.rank().saturating_sub(x.len()) {
                let est = HEstimator::build(&g, &x, k);
                if est.terms.is_empty() {
                    continue;
                }
                // One stage remaining, enumerate the cube support.
                let formula = est.expectation::<ExactArith, _>(&marks, 1);
                let brute = brute_h_expectation(&est, &marks, &cube, 1);
                assert_eq!(formula, brute, "cube one-stage mismatch at X={x:?} k={k}");
                expectation_checks += 1;
                // Two stages remaining over the linear space (support^2).
                if linear.support_len() * linear.support_len() <= 1 << 16 {
                    let formula = est.expectation::<ExactArith, _>(&marks, 2);
                    let brute = brute_h_expectation(&est, &marks, &linear, 2);
                    assert_eq!(formula, brute, "linear two-stage mismatch at X={x:?} k={k}");
                    expectation_checks += 1;
                }
            }
        }
    }
    println!("PASS h-estimator: {value_checks} per-round value checks, {expectation_checks} exact expectation matches");
}

fn brute_h_expectation(
    est: &HEstimator,
    marks: &[bool],
    space: &SampleSpace,
    stages: usize,
) -> Rational {
    let n = marks.len();
    let support = space.support_len();
    let mut total = Rational::zero();
    let mut count = 0u64;
    let mut idx = vec![0usize; stages];
    loop {
        let mut joined = marks.to_vec();
        for &i in &idx {
            for (v, slot) in joined.iter_mut().enumerate().take(n) {
                *slot = *slot && space.bit(i, v);
            }
        }
        total += Rational::from_integer(est.value(&joined).into());
        count += 1;
        // Odometer over the stage tuple.
        let mut pos = 0;
        loop {
            if pos == stages {
                let denom = Rational::from_integer(count.into());
                assert_eq!(count, (support as u64).pow(stages as u32));
                return total / denom;
            }
            idx[pos] += 1;
            if idx[pos] < support {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[test]
fn criterion_08_collapse_probability_floor() {
    // Configurations with pairwise-disjoint completions and no other edges:
    // X of size x, D disjoint k-completions, p = 2^-s. The collapse event
    // is exactly (some completion fully marked) and (X not fully marked).
    // The floor's constants presume per-completion mass p^k <= 0.01 and a
    // negligible chance of X self-marking, so s*k >= 7 and s*x >= 6 here.
    let mut configs = Vec::new();
    for &(x_size, k, s) in &[(2usize, 2usize, 4u32), (3, 2, 4), (2, 3, 3), (3, 3, 3), (2, 2, 5)] {
        for d in 1..=4usize {
            configs.push((x_size, k, s, d));
        }
    }
    assert_eq!(configs.len(), 20);
    let mut probed = 0usize;
    for (ci, &(x_size, k, s, d)) in configs.iter().enumerate() {
        let n = (x_size + k * d) as u32;
        let x = VertexSet::from_sorted((0..x_size as u32).collect());
        let mut edges = Vec::new();
        for i in 0..d {
            let y = VertexSet::from_sorted(
                (0..k as u32).map(|j| (x_size + i * k) as u32 + j).collect(),
            );
            edges.push(x.union(&y));
        }
        let g = Hypergraph::from_edges(n, edges).unwrap();
        let p = Dyadic::new(1, s);

        // Exact probability two ways: enumeration and the closed form
        // (1 - p^x)(1 - (1 - p^k)^D).
        let exact = exact_collapse_probability(&g, &x, k, p);
        let pr = p.to_rational();
        let closed = (Rational::one() - pow(&pr, x_size))
            * (Rational::one() - pow(&(Rational::one() - pow(&pr, k)), d));
        assert_eq!(exact, closed, "config {ci}: enumeration vs closed form");

        // The proof-level floor at these parameters.
        let floor = ratio(99, 100)
            * pow(&ratio(1, 1 << s.min(20)), k).clone()
            * Rational::from_integer((d as i64).into())
            * (Rational::one() - ratio(102, 10_000) * Rational::from_integer((d as i64).into()));
        assert!(
            exact >= floor,
            "config {ci} (x={x_size},k={k},s={s},D={d}): exact {} below floor {}",
            exact.to_f64().unwrap(),
            floor.to_f64().unwrap()
        );

        // Monte-Carlo estimate within 3 sigma of the exact value.
        let trials = 100_000u64;
        let est = collapse_frequency_probe(&g, &x, k, p, trials, 0xC0FFEE + ci as u64);
        let p_true = exact.to_f64().unwrap();
        let sigma = (p_true * (1.0 - p_true) / trials as f64).sqrt();
        assert!(
            (est - p_true).abs() <= 3.0 * sigma.max(1e-9),
            "config {ci}: MC {est} vs exact {p_true} (3 sigma {})",
            3.0 * sigma
        );
        probed += 1;
    }
    println!("PASS collapse floor: {probed} configurations, exact + Monte-Carlo agreement");
}

fn pow(x: &Rational, e: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x.clone();
    }
    acc
}

#[test]
fn criterion_09_migration_bound_structure() {
    let mut rounds_checked = 0usize;
    let mut pairs_checked = 0usize;
    for i in 1..=5 {
        let g = fixture(&format!("rand{i:02}.json"));
        let src = BitSource::new(700 + i as u64);
        let mut cur = g.residualize(&VertexSet::new()).unwrap();
        let v = min_constraining_v(&cur, cur.n().max(3) as f64, Regime::Plain).max(2.0);
        for t in 1..=30u64 {
            let p = marking_probability(v);
            let (round, next) = mark(&cur, p, &src, t);
            let migration = measure_migration(&cur, &round, &next);
            // D_j^{t+1}(X) <= D_j^t(X) + sum_{k>j} M_{j,k}(X), exactly.
            for x in cur.edge_subsets(cur.rank().saturating_sub(1)) {
                for j in 1..cur.rank() {
                    let before = cur.degree(&x, j);
                    let after = next.degree(&x, j);
                    let inflow: u64 = migration
                        .iter()
                        .filter(|((mx, mj, mk), _)| *mx == x && *mj == j && *mk > j)
                        .map(|(_, c)| *c)
                        .sum();
                    assert!(
                        after as u64 <= before as u64 + inflow,
                        "round {t}: D_{j}({x:?}) grew {before} -> {after} with inflow {inflow}"
                    );
                    pairs_checked += 1;
                }
            }
            // M_{j,k}(X) <= S(C), the initial-mark surrogate.
            for ((x, j, k), count) in &migration {
                let surrogate = migration_surrogate(&cur, &round, x, *j, *k);
                assert!(
                    count <= &surrogate,
                    "round {t}: M_{{{j},{k}}}({x:?}) = {count} > surrogate {surrogate}"
                );
            }
            rounds_checked += 1;
            cur = next;
            if cur.all_singletons() {
                break;
            }
        }
    }
    println!("PASS migration structure: {rounds_checked} rounds, {pairs_checked} degree pairs, zero violations");
}

#[test]
fn criterion_10_dsbl_floor_and_iterations() {
    let det_constants = DetConstants::fast();
    let mut iterations_total = 0usize;
    for i in 1..=6 {
        let name = format!("sparse{i:02}.json");
        let g = fixture(&name);
        for r in [2usize, 3] {
            let out = dsbl(&g, r, &det_constants).unwrap_or_else(|e| panic!("{name} r={r}: {e}"));
            assert!(g.verify_mis(&out.mis), "{name} r={r}");
            let cap = iteration_cap(g.num_edges(), g.n(), r);
            assert!(
                out.iterations.len() <= cap,
                "{name} r={r}: {} iterations above cap {cap}",
                out.iterations.len()
            );
            for (ti, it) in out.iterations.iter().enumerate() {
                assert!(it.floor_ok, "{name} r={r} iteration {ti}: selection below n_t*p/2");
            }
            // Every selected vertex leaves the free set (committed or
            // blocked), so the free count obeys the contraction recurrence.
            for w in out.iterations.windows(2) {
                assert!(
                    w[1].free_before <= w[0].free_before - w[0].chosen,
                    "{name} r={r}: free count shrank less than the selection"
                );
            }
            iterations_total += out.iterations.len();
        }
    }
    println!("PASS sparse loop: per-iteration floors exact, {iterations_total} iterations within caps");
}

#[test]
fn criterion_11_determinism() {
    let instances: Vec<Hypergraph> =
        (1..=3).map(|i| fixture(&format!("det{i:02}.json"))).collect();
    let sparse = fixture("sparse01.json");
    let det_constants = DetConstants::default();

    let run_all = || -> String {
        let mut blob = String::new();
        for g in &instances {
            let out = find_mis_det(g, None, &det_constants).unwrap();
            blob.push_str(&serde_json::to_string(&out.mis).unwrap());
            blob.push_str(&out.trace.to_jsonl());
            let round = derand_mark(g, 2);
            blob.push_str(&serde_json::to_string(&round.chosen).unwrap());
        }
        let ds = dsbl(&sparse, 2, &det_constants).unwrap();
        blob.push_str(&serde_json::to_string(&ds.mis).unwrap());
        blob.push_str(&serde_json::to_string(&ds.iterations).unwrap());
        blob
    };

    // Three re-runs in the ambient pool.
    let base = run_all();
    for rerun in 0..2 {
        assert_eq!(base, run_all(), "re-run {rerun} diverged");
    }
    // Across thread counts.
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let got = pool.install(run_all);
        assert_eq!(base, got, "thread count {threads} diverged");
    }
    println!("PASS determinism: byte-identical across 3 re-runs and thread counts 1/4/8");
}

#[test]
fn golden_generator_output_is_pinned() {
    let g = fixture("golden_uniform_n30_m40_r3_seed7.json");
    let regenerated = generate(InstanceKind::UniformRandom, 30, 40, 3, 7).unwrap();
    assert_eq!(g, regenerated, "generator output drifted from the pinned golden file");
    println!("PASS golden instance: generator reproduces the pinned file");
}
