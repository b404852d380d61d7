//! Explicit probability spaces over n-bit vectors with certified
//! independence properties.
//!
//! Two properties matter here. Approximate L-wise independence: for every
//! `w <= L` indices and every assignment, `P(match) <= 2 * 2^-w`. Exact
//! independence on declared constraint sets: `P(all bits of X = 1) =
//! 2^-|X|`. The marking pipelines draw stage vectors from a space satisfying
//! both, built as the XOR of a small-bias space and a linear-code space.
//!
//! Everything is enumerable by design: supports are explicit vector lists,
//! verification is exhaustive counting, and enumeration order is canonical
//! so downstream argmin selections reproduce bit-for-bit.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SpaceError;
use crate::hypergraph::Hypergraph;
use crate::vset::VertexSet;

/// Resource limits for construction and verification.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpaceBudget {
    /// Maximum number of support vectors a construction may emit.
    pub max_support: usize,
    /// Maximum message length (rows) for linear-code spaces.
    pub max_message_bits: u32,
    /// Cap on (tuples x support) work during verification.
    pub max_verify_ops: u64,
}

impl Default for SpaceBudget {
    fn default() -> Self {
        SpaceBudget { max_support: 1 << 18, max_message_bits: 16, max_verify_ops: 4_000_000_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub construction: String,
    /// Declared approximate-independence width, if any.
    pub l: Option<usize>,
    /// Declared deviation bound for the L-wise property.
    pub epsilon: Option<f64>,
    /// Sets certified for exact independence (all subsets included implicitly).
    pub constraints: Vec<VertexSet>,
    pub seed: Option<u64>,
}

/// An explicit, uniformly weighted multiset of n-bit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpace {
    n: usize,
    words: usize,
    data: Vec<u64>,
    pub meta: SpaceMeta,
}

impl SampleSpace {
    fn with_capacity(n: usize, vectors: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        SampleSpace { n, words, data: Vec::with_capacity(vectors * words), meta: SpaceMeta::default() }
    }

    pub fn n_bits(&self) -> usize {
        self.n
    }

    pub fn words_per_vector(&self) -> usize {
        self.words
    }

    pub fn support_len(&self) -> usize {
        self.data.len() / self.words
    }

    pub fn vector(&self, idx: usize) -> &[u64] {
        &self.data[idx * self.words..(idx + 1) * self.words]
    }

    #[inline]
    pub fn bit(&self, idx: usize, v: usize) -> bool {
        self.data[idx * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn push_vector(&mut self, vec: &[u64]) {
        debug_assert_eq!(vec.len(), self.words);
        self.data.extend_from_slice(vec);
    }

    /// The exact product space on `n` bits: every property holds with zero
    /// deviation. Only viable for small `n`.
    pub fn full_cube(n: usize, budget: &SpaceBudget) -> Result<SampleSpace, SpaceError> {
        if n >= 64 || (1usize << n) > budget.max_support {
            return Err(SpaceError::ParamsInfeasible(format!(
                "full cube on {n} bits exceeds support budget {}",
                budget.max_support
            )));
        }
        let mut s = SampleSpace::with_capacity(n, 1 << n);
        for x in 0u64..(1 << n) {
            s.push_vector(&[x]);
        }
        s.meta = SpaceMeta {
            construction: "cube".into(),
            l: Some(n),
            epsilon: Some(0.0),
            constraints: vec![],
            seed: None,
        };
        Ok(s)
    }

    /// Builds a space that is approximately L-wise independent with
    /// deviation at most `epsilon`. `epsilon = 0` requests the exact cube;
    /// positive `epsilon` uses the field-powering small-bias family, whose
    /// support grows like `(n/epsilon)^2`.
    pub fn build_q1(
        n: usize,
        l: usize,
        epsilon: f64,
        budget: &SpaceBudget,
    ) -> Result<SampleSpace, SpaceError> {
        if l == 0 || l > n {
            return Err(SpaceError::ParamsInfeasible(format!("need 1 <= L <= n, got L={l}, n={n}")));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(SpaceError::ParamsInfeasible(format!("epsilon {epsilon} outside [0,1)")));
        }
        if epsilon == 0.0 {
            let mut s = Self::full_cube(n, budget)?;
            s.meta.l = Some(l);
            return Ok(s);
        }
        let mut s = Self::powering(n, epsilon, budget)?;
        s.meta.l = Some(l);
        Ok(s)
    }

    /// The field-powering small-bias space: sample `(x, y)` over
    /// `GF(2^deg)^2`, bit `i` is `<x^i, y>`. Every nonzero character has
    /// bias at most `(n-1)/2^deg`, hence every `w`-index marginal deviates
    /// from uniform by at most that amount.
    fn powering(n: usize, epsilon: f64, budget: &SpaceBudget) -> Result<SampleSpace, SpaceError> {
        let need = ((n.saturating_sub(1)) as f64 / epsilon).max(1.0);
        let deg = (need.log2().ceil() as u32).max(1);
        if deg > 16 {
            return Err(SpaceError::ParamsInfeasible(format!(
                "powering construction needs GF(2^{deg}); max supported degree is 16"
            )));
        }
        let support = 1usize << (2 * deg);
        if support > budget.max_support {
            return Err(SpaceError::ParamsInfeasible(format!(
                "powering support {support} exceeds budget {}",
                budget.max_support
            )));
        }
        let mut s = SampleSpace::with_capacity(n, support);
        let mut row = vec![0u64; s.words];
        // Precompute x^i representations once per x.
        let mut powers = vec![0u32; n];
        for x in 0u32..(1 << deg) {
            let mut p = 1u32;
            for slot in powers.iter_mut() {
                *slot = p;
                p = gf2::mul(p, x, deg);
            }
            for y in 0u32..(1 << deg) {
                for w in row.iter_mut() {
                    *w = 0;
                }
                for (i, &xi) in powers.iter().enumerate() {
                    if (xi & y).count_ones() & 1 == 1 {
                        row[i / 64] |= 1u64 << (i % 64);
                    }
                }
                s.push_vector(&row);
            }
        }
        s.meta = SpaceMeta {
            construction: format!("powering-gf{deg}"),
            l: None,
            epsilon: Some((n.saturating_sub(1)) as f64 / (1u64 << deg) as f64),
            constraints: vec![],
            seed: None,
        };
        Ok(s)
    }

    /// Builds a linear-code space whose columns are linearly independent on
    /// every constraint set, giving exact `2^-|X|` probabilities there. The
    /// support is the row space sampled by all messages, so its size is
    /// `2^k` for the chosen message length `k`.
    pub fn build_q2(
        n: usize,
        constraints: &[VertexSet],
        budget: &SpaceBudget,
    ) -> Result<SampleSpace, SpaceError> {
        for c in constraints {
            if c.iter().any(|v| v as usize >= n) {
                return Err(SpaceError::ParamsInfeasible(format!(
                    "constraint {c:?} references bits outside 0..{n}"
                )));
            }
        }
        if n == 0 {
            return Err(SpaceError::ParamsInfeasible("empty space".into()));
        }
        if constraints.is_empty() {
            // Vacuously exact: the single all-zeros vector.
            let mut s = SampleSpace::with_capacity(n, 1);
            s.push_vector(&vec![0u64; n.div_ceil(64).max(1)]);
            s.meta = SpaceMeta {
                construction: "linear-k0".into(),
                l: None,
                epsilon: None,
                constraints: vec![],
                seed: None,
            };
            return Ok(s);
        }
        // Constrained vertices additionally need uniform marginals one at a
        // time, which singleton sets encode; unconstrained vertices get them
        // too so every bit is usable as a mark.
        let mut family: Vec<VertexSet> = constraints.to_vec();
        for v in 0..n {
            family.push(VertexSet::singleton(v as u32));
        }
        family.sort_unstable_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        family.dedup();
        // Drop sets contained in another: independence of the superset covers them.
        let maximal: Vec<VertexSet> = family
            .iter()
            .filter(|c| !family.iter().any(|d| d.as_slice() != c.as_slice() && c.is_subset_of(d)))
            .cloned()
            .collect();

        let kmin = maximal.iter().map(|c| c.len()).max().unwrap_or(1) as u32;
        let kmax = budget.max_message_bits.min(30);
        let mut k = kmin;
        let columns = loop {
            if k > kmax {
                return Err(SpaceError::ParamsInfeasible(format!(
                    "greedy column assignment failed within message length {kmax}"
                )));
            }
            if let Some(cols) = greedy_columns(n, &maximal, k) {
                break cols;
            }
            k += 1;
        };
        let support = 1usize << k;
        if support > budget.max_support {
            return Err(SpaceError::ParamsInfeasible(format!(
                "linear space support {support} exceeds budget {}",
                budget.max_support
            )));
        }
        let words = n.div_ceil(64).max(1);
        let mut s = SampleSpace::with_capacity(n, support);
        let mut row = vec![0u64; words];
        for msg in 0u32..(1u32 << k) {
            for w in row.iter_mut() {
                *w = 0;
            }
            for (v, &col) in columns.iter().enumerate() {
                if (col & msg).count_ones() & 1 == 1 {
                    row[v / 64] |= 1u64 << (v % 64);
                }
            }
            s.push_vector(&row);
        }
        s.meta = SpaceMeta {
            construction: format!("linear-k{k}"),
            l: None,
            epsilon: None,
            constraints: maximal,
            seed: None,
        };
        Ok(s)
    }

    /// XOR composition: the product distribution of `a + b` over both
    /// supports. Inherits the approximate-independence ceiling of either
    /// factor and the exact-independence certificates of either factor.
    pub fn xor_compose(a: &SampleSpace, b: &SampleSpace) -> Result<SampleSpace, SpaceError> {
        if a.n != b.n {
            return Err(SpaceError::SizeMismatch(a.n, b.n));
        }
        let mut s = SampleSpace::with_capacity(a.n, a.support_len() * b.support_len());
        let mut row = vec![0u64; s.words];
        for i in 0..a.support_len() {
            let va = a.vector(i);
            for j in 0..b.support_len() {
                let vb = b.vector(j);
                for (w, slot) in row.iter_mut().enumerate() {
                    *slot = va[w] ^ vb[w];
                }
                s.push_vector(&row);
            }
        }
        let mut constraints = a.meta.constraints.clone();
        constraints.extend(b.meta.constraints.iter().cloned());
        constraints.sort_unstable_by(|x, y| (x.len(), x.as_slice()).cmp(&(y.len(), y.as_slice())));
        constraints.dedup();
        s.meta = SpaceMeta {
            construction: format!("xor({},{})", a.meta.construction, b.meta.construction),
            l: a.meta.l.or(b.meta.l),
            epsilon: match (a.meta.epsilon, b.meta.epsilon) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            constraints,
            seed: None,
        };
        Ok(s)
    }

    /// Exhaustive check of the factor-2 ceiling: for every `w <= l` indices
    /// and every assignment, `P(match) <= 2 * 2^-w`. Reports the exact
    /// maximum deviation `P - 2^-w` over all tuples.
    pub fn verify_q1(&self, l: usize, budget: &SpaceBudget) -> Result<Q1Report, SpaceError> {
        let support = self.support_len() as u64;
        let mut tuples = 0u64;
        let mut choose = 1u64;
        for w in 1..=l.min(self.n) {
            choose = choose * (self.n - w + 1) as u64 / w as u64;
            tuples = tuples.saturating_add(choose);
        }
        let ops = tuples.saturating_mul(support);
        if ops > budget.max_verify_ops {
            return Err(SpaceError::BudgetExceeded(format!(
                "verify_q1 needs ~{ops} ops, budget {}",
                budget.max_verify_ops
            )));
        }
        let mut report = Q1Report {
            pass: true,
            max_deviation: f64::NEG_INFINITY,
            worst_indices: vec![],
            worst_width: 0,
            max_allones_excess_num: 0,
            max_allones_excess_den: support.max(1),
        };
        let mut idx: Vec<usize> = Vec::new();
        self.q1_scan(l.min(self.n), &mut idx, &mut report);
        Ok(report)
    }

    fn q1_scan(&self, l: usize, idx: &mut Vec<usize>, report: &mut Q1Report) {
        let start = idx.last().map_or(0, |&i| i + 1);
        for v in start..self.n {
            idx.push(v);
            self.q1_count(idx, report);
            if idx.len() < l {
                self.q1_scan(l, idx, report);
            }
            idx.pop();
        }
    }

    fn q1_count(&self, idx: &[usize], report: &mut Q1Report) {
        let w = idx.len();
        let support = self.support_len();
        let mut counts = vec![0u64; 1 << w];
        for s in 0..support {
            let mut pat = 0usize;
            for (bit, &v) in idx.iter().enumerate() {
                if self.bit(s, v) {
                    pat |= 1 << bit;
                }
            }
            counts[pat] += 1;
        }
        let uniform = 1.0 / (1u64 << w) as f64;
        for (pat, &c) in counts.iter().enumerate() {
            let p = c as f64 / support as f64;
            if p - uniform > report.max_deviation {
                report.max_deviation = p - uniform;
                report.worst_indices = idx.iter().map(|&v| v as u32).collect();
                report.worst_width = w;
            }
            // Exact ceiling test: count * 2^w <= 2 * support.
            if (c as u128) << w > 2 * support as u128 {
                report.pass = false;
            }
            if pat == (1 << w) - 1 {
                // All-ones excess (count * 2^w - support) / support, kept as
                // integers so moment bounds can use it exactly.
                let excess = ((c as i128) << w) - support as i128;
                if excess * report.max_allones_excess_den as i128
                    > report.max_allones_excess_num as i128 * support as i128
                {
                    report.max_allones_excess_num = excess.max(0) as u64;
                    report.max_allones_excess_den = support as u64;
                }
            }
        }
    }

    /// Exact equality check `P(all bits of X = 1) = 2^-|X|` for every
    /// constraint (and implicitly every subset of each constraint).
    pub fn verify_q2(&self, constraints: &[VertexSet], budget: &SpaceBudget) -> Result<bool, SpaceError> {
        let mut sets: Vec<VertexSet> = Vec::new();
        for c in constraints {
            for s in c.subsets() {
                if !s.is_empty() {
                    sets.push(s);
                }
            }
        }
        sets.sort_unstable_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        sets.dedup();
        let ops = (sets.len() as u64).saturating_mul(self.support_len() as u64);
        if ops > budget.max_verify_ops {
            return Err(SpaceError::BudgetExceeded(format!(
                "verify_q2 needs ~{ops} ops, budget {}",
                budget.max_verify_ops
            )));
        }
        let support = self.support_len();
        for x in &sets {
            if x.len() >= 64 {
                return Err(SpaceError::BudgetExceeded("constraint wider than 63 bits".into()));
            }
            let mut count = 0u64;
            for s in 0..support {
                if x.iter().all(|v| self.bit(s, v as usize)) {
                    count += 1;
                }
            }
            if (count as u128) << x.len() != support as u128 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Writes packed support vectors plus a JSON sidecar describing the
    /// construction. The binary layout is the in-memory layout, so the
    /// round-trip is bit-exact.
    pub fn save(&self, bin_path: &Path, sidecar_path: &Path) -> std::io::Result<()> {
        let mut f = fs::File::create(bin_path)?;
        let bytes_per = self.n.div_ceil(8);
        for i in 0..self.support_len() {
            let vec = self.vector(i);
            let mut bytes = vec![0u8; bytes_per];
            for (b, byte) in bytes.iter_mut().enumerate() {
                *byte = (vec[b / 8] >> (8 * (b % 8))) as u8;
            }
            f.write_all(&bytes)?;
        }
        let sidecar = Sidecar {
            n: self.n,
            support: self.support_len(),
            meta: self.meta.clone(),
        };
        fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(bin_path: &Path, sidecar_path: &Path) -> std::io::Result<SampleSpace> {
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?)?;
        let bytes_per = sidecar.n.div_ceil(8);
        let mut buf = Vec::new();
        fs::File::open(bin_path)?.read_to_end(&mut buf)?;
        if buf.len() != bytes_per * sidecar.support {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("expected {} bytes, found {}", bytes_per * sidecar.support, buf.len()),
            ));
        }
        let mut s = SampleSpace::with_capacity(sidecar.n, sidecar.support);
        let mut row = vec![0u64; s.words];
        for chunk in buf.chunks(bytes_per) {
            for w in row.iter_mut() {
                *w = 0;
            }
            for (b, &byte) in chunk.iter().enumerate() {
                row[b / 8] |= (byte as u64) << (8 * (b % 8));
            }
            s.push_vector(&row);
        }
        s.meta = sidecar.meta;
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    support: usize,
    meta: SpaceMeta,
}

#[derive(Clone, Debug)]
pub struct Q1Report {
    pub pass: bool,
    pub max_deviation: f64,
    pub worst_indices: Vec<u32>,
    pub worst_width: usize,
    /// Numerator/denominator of the largest all-ones excess
    /// `P * 2^w - 1`, exact, for moment-bound consumers.
    pub max_allones_excess_num: u64,
    pub max_allones_excess_den: u64,
}

/// The exact-independence family a marking space must certify for a graph:
/// one set per unordered edge pair (their union), which covers every subset
/// of every pair.
pub fn edge_pair_unions(g: &Hypergraph) -> Vec<VertexSet> {
    let mut out: Vec<VertexSet> = Vec::new();
    let edges = g.edges();
    for i in 0..edges.len() {
        for e in edges.iter().skip(i) {
            out.push(edges[i].union(e));
        }
    }
    out.sort_unstable_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
    out.dedup();
    // Keep only maximal unions; subsets are implied.
    let keep: Vec<VertexSet> = out
        .iter()
        .filter(|c| !out.iter().any(|d| d.as_slice() != c.as_slice() && c.is_subset_of(d)))
        .cloned()
        .collect();
    keep
}

/// Greedy column assignment: for each vertex pick the first nonzero column
/// that stays independent of the already-assigned columns inside every
/// constraint containing the vertex.
fn greedy_columns(n: usize, constraints: &[VertexSet], k: u32) -> Option<Vec<u32>> {
    // Row-echelon basis per constraint.
    let mut bases: Vec<Vec<u32>> = vec![Vec::new(); constraints.len()];
    let mut owner: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, c) in constraints.iter().enumerate() {
        for v in c.iter() {
            owner[v as usize].push(ci);
        }
    }
    // Candidates are scanned in a spread order (odd-multiplier bijection of
    // 1..2^k) so early assignments do not crowd the low bits.
    let size = 1u32 << k;
    let mut cols = vec![0u32; n];
    for v in 0..n {
        let mut chosen = None;
        'cand: for i in 1..size {
            let cand = i.wrapping_mul(0x9E37_79B1) & (size - 1);
            if cand == 0 {
                continue;
            }
            for &ci in &owner[v] {
                if reduce(&bases[ci], cand) == 0 {
                    continue 'cand;
                }
            }
            chosen = Some(cand);
            break;
        }
        let cand = chosen?;
        cols[v] = cand;
        for &ci in &owner[v] {
            insert_into_basis(&mut bases[ci], cand);
        }
    }
    Some(cols)
}

fn reduce(basis: &[u32], mut x: u32) -> u32 {
    for &b in basis {
        if x == 0 {
            break;
        }
        if x.leading_zeros() == b.leading_zeros() {
            x ^= b;
        }
    }
    x
}

fn insert_into_basis(basis: &mut Vec<u32>, x: u32) {
    let r = reduce(basis, x);
    if r != 0 {
        basis.push(r);
        basis.sort_unstable_by_key(|b| b.leading_zeros());
    }
}

/// GF(2^deg) arithmetic for the powering construction.
pub mod gf2 {
    /// Irreducible polynomials for degrees 1..=16, bit `deg` included.
    pub const POLY: [u32; 17] = [
        0, 3, 7, 11, 19, 37, 67, 131, 283, 529, 1033, 2053, 4179, 8219, 17475, 32771, 69643,
    ];

    /// Carry-less multiply reduced mod the degree's polynomial.
    pub fn mul(a: u32, b: u32, deg: u32) -> u32 {
        let mut acc: u64 = 0;
        let (a, b) = (a as u64, b as u64);
        for i in 0..deg {
            if b >> i & 1 == 1 {
                acc ^= a << i;
            }
        }
        let poly = POLY[deg as usize] as u64;
        for i in (deg..2 * deg).rev() {
            if acc >> i & 1 == 1 {
                acc ^= poly << (i - deg);
            }
        }
        acc as u32
    }

    /// Square-and-multiply in the field.
    pub fn pow(mut base: u32, mut e: u64, deg: u32) -> u32 {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base, deg);
            }
            base = mul(base, base, deg);
            e >>= 1;
        }
        acc
    }
}
