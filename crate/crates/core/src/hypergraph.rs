//! Hypergraph representation, residual-graph reduction, and neighborhood
//! queries.
//!
//! A hypergraph is a vertex count `n` together with a family of edges, each a
//! non-empty subset of `0..n` of cardinality at most the rank `r`. The
//! residual graph of a committed independent set `I` re-expresses the
//! instance relative to `I`: singletons for committed vertices, edges
//! shrunken by `I`, and nested edges removed so that the result is *reduced*
//! (no edge contains another). Reduction is what makes the collapse
//! phenomenon work: once a shrunken edge lands inside `X`, every edge
//! strictly containing `X` disappears.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::vset::VertexSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: u32,
    r: usize,
    edges: Vec<VertexSet>,
    reduced: bool,
    /// vertex -> indices of incident edges, rebuilt on construction.
    incidence: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct HypergraphWire {
    n: u32,
    r: usize,
    edges: Vec<Vec<u32>>,
}

impl Serialize for Hypergraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HypergraphWire {
            n: self.n,
            r: self.r,
            edges: self.edges.iter().map(|e| e.as_slice().to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = HypergraphWire::deserialize(d)?;
        let edges: Vec<VertexSet> = wire.edges.into_iter().map(VertexSet::from).collect();
        Hypergraph::new(wire.n, wire.r, edges).map_err(serde::de::Error::custom)
    }
}

impl Hypergraph {
    /// Builds a hypergraph with declared rank `r`, canonicalizing edge order
    /// and dropping exact duplicates. Edges must be non-empty subsets of
    /// `0..n` with `|e| <= r`.
    pub fn new(n: u32, r: usize, edges: Vec<VertexSet>) -> Result<Self, GraphError> {
        if r == 0 {
            return Err(GraphError::RankExceeded { r, edge: VertexSet::new() });
        }
        for e in &edges {
            if e.is_empty() {
                return Err(GraphError::EmptyEdge);
            }
            if e.iter().any(|v| v >= n) {
                return Err(GraphError::BadEdge { n, edge: e.clone() });
            }
            if e.len() > r {
                return Err(GraphError::RankExceeded { r, edge: e.clone() });
            }
        }
        let mut edges: Vec<VertexSet> = edges;
        edges.sort_unstable_by(|a, b| a.as_slice().cmp(b.as_slice()));
        edges.dedup();
        let reduced = Self::scan_reduced(&edges);
        Ok(Self::assemble(n, r, edges, reduced))
    }

    /// Builds with the rank inferred from the longest edge (at least 1).
    pub fn from_edges(n: u32, edges: Vec<VertexSet>) -> Result<Self, GraphError> {
        let r = edges.iter().map(|e| e.len()).max().unwrap_or(1).max(1);
        Self::new(n, r, edges)
    }

    pub fn edgeless(n: u32, r: usize) -> Self {
        Self::assemble(n, r.max(1), Vec::new(), true)
    }

    fn assemble(n: u32, r: usize, edges: Vec<VertexSet>, reduced: bool) -> Self {
        let mut incidence = vec![Vec::new(); n as usize];
        for (i, e) in edges.iter().enumerate() {
            for v in e.iter() {
                incidence[v as usize].push(i as u32);
            }
        }
        Hypergraph { n, r, edges, reduced, incidence }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[VertexSet] {
        &self.edges
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn incident_edges(&self, v: u32) -> &[u32] {
        &self.incidence[v as usize]
    }

    fn scan_reduced(edges: &[VertexSet]) -> bool {
        for (i, e) in edges.iter().enumerate() {
            for (j, f) in edges.iter().enumerate() {
                if i != j && e.is_subset_of(f) {
                    return false;
                }
            }
        }
        true
    }

    /// Removes nested edges (keeping minimal ones) and returns a reduced
    /// graph. Sorting by size first means each edge only needs subset tests
    /// against smaller edges.
    pub fn reduce(&self) -> Hypergraph {
        let mut by_size: Vec<&VertexSet> = self.edges.iter().collect();
        by_size.sort_unstable_by_key(|e| e.len());
        let mut kept: Vec<VertexSet> = Vec::with_capacity(by_size.len());
        'next: for e in by_size {
            for f in &kept {
                if f.is_subset_of(e) {
                    continue 'next;
                }
            }
            kept.push(e.clone());
        }
        kept.sort_unstable_by(|a, b| a.as_slice().cmp(b.as_slice()));
        Self::assemble(self.n, self.r, kept, true)
    }

    /// Residual graph of `self` with respect to the independent set `I`:
    /// singleton `{v}` for each committed `v`, every edge shrunk by `I`, and
    /// nested edges removed. Fails if some edge is contained in `I` (that
    /// edge would shrink to the empty edge).
    pub fn residualize(&self, committed: &VertexSet) -> Result<Hypergraph, GraphError> {
        let mut edges: Vec<VertexSet> = Vec::with_capacity(self.edges.len() + committed.len());
        for e in &self.edges {
            let shrunk = e.minus(committed);
            if shrunk.is_empty() {
                return Err(GraphError::NotIndependent(committed.clone(), e.clone()));
            }
            edges.push(shrunk);
        }
        for v in committed.iter() {
            edges.push(VertexSet::singleton(v));
        }
        let pre = Self::assemble(self.n, self.r, edges, false);
        Ok(pre.reduce())
    }

    /// The j-neighborhood of `X`: every `Y ⊆ V−X` with `X ∪ Y ∈ E` and
    /// `|Y| = j`. For `j = 0` this is `{∅}` exactly when `X` itself is an
    /// edge. Computed on demand from the incidence index.
    pub fn neighborhood(&self, x: &VertexSet, j: usize) -> Vec<VertexSet> {
        let mut out: Vec<VertexSet> = Vec::new();
        let want = x.len() + j;
        if x.is_empty() {
            for e in &self.edges {
                if e.len() == want {
                    out.push(e.clone());
                }
            }
            return out;
        }
        let Some(first) = x.iter().next() else { return out };
        for &ei in self.incident_edges(first) {
            let e = &self.edges[ei as usize];
            if e.len() == want && x.is_subset_of(e) {
                out.push(e.minus(x));
            }
        }
        out.sort_unstable_by(|a, b| a.as_slice().cmp(b.as_slice()));
        out
    }

    /// `D_j(X) = |N_j(X)|`.
    pub fn degree(&self, x: &VertexSet, j: usize) -> usize {
        if x.is_empty() {
            return self.edges.iter().filter(|e| e.len() == j).count();
        }
        let want = x.len() + j;
        let Some(first) = x.iter().next() else { return 0 };
        self.incident_edges(first)
            .iter()
            .filter(|&&ei| {
                let e = &self.edges[ei as usize];
                e.len() == want && x.is_subset_of(e)
            })
            .count()
    }

    pub fn contains_edge(&self, e: &VertexSet) -> bool {
        self.edges.binary_search_by(|f| f.as_slice().cmp(e.as_slice())).is_ok()
    }

    /// All non-zero degrees `(X, j) -> D_j(X)` over edge subsets up to
    /// `max_x` vertices.
    pub fn degree_profile(&self, max_x: usize) -> BTreeMap<(VertexSet, usize), usize> {
        let mut out = BTreeMap::new();
        for x in self.edge_subsets(max_x) {
            for j in 0..=self.r.saturating_sub(x.len()) {
                let d = self.degree(&x, j);
                if d > 0 {
                    out.insert((x.clone(), j), d);
                }
            }
        }
        out
    }

    /// Every non-empty `X` that is a subset of at least one edge, in
    /// (size, lex) order. Only these can have `D_j(X) > 0` for some `j >= 1`,
    /// so degree scans range over this family.
    pub fn edge_subsets(&self, max_size: usize) -> Vec<VertexSet> {
        let mut seen: BTreeSet<VertexSet> = BTreeSet::new();
        for e in &self.edges {
            for s in e.subsets() {
                if !s.is_empty() && s.len() <= max_size {
                    seen.insert(s);
                }
            }
        }
        let mut out: Vec<VertexSet> = seen.into_iter().collect();
        out.sort_unstable_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        out
    }

    /// Vertices not yet decided: no singleton edge and not inside `committed`.
    pub fn free_vertices(&self, committed: &VertexSet) -> VertexSet {
        let mut blocked = vec![false; self.n as usize];
        for e in &self.edges {
            if e.len() == 1 {
                blocked[e.iter().next().unwrap() as usize] = true;
            }
        }
        VertexSet::from_sorted(
            (0..self.n)
                .filter(|&v| !blocked[v as usize] && !committed.contains(v))
                .collect(),
        )
    }

    /// True when every edge is a singleton (the terminal state of the
    /// marking pipelines).
    pub fn all_singletons(&self) -> bool {
        self.edges.iter().all(|e| e.len() == 1)
    }

    /// Completes a committed set into an MIS once the residual graph consists
    /// solely of singletons: every vertex without a singleton edge is free to
    /// join.
    pub fn finalize_mis(residual: &Hypergraph, committed: &VertexSet) -> Result<VertexSet, GraphError> {
        if let Some(e) = residual.edges.iter().find(|e| e.len() >= 2) {
            return Err(GraphError::NotSingletonResidual(e.clone()));
        }
        let mut has_singleton = vec![false; residual.n as usize];
        for e in &residual.edges {
            has_singleton[e.iter().next().unwrap() as usize] = true;
        }
        let mut out = committed.clone();
        for v in 0..residual.n {
            if !has_singleton[v as usize] {
                out.insert(v);
            }
        }
        Ok(out)
    }

    /// Checks the MIS definition directly: `S` contains no edge, and every
    /// outside vertex would close some edge if added.
    pub fn verify_mis(&self, s: &VertexSet) -> bool {
        for e in &self.edges {
            if e.is_subset_of(s) {
                return false;
            }
        }
        for v in 0..self.n {
            if s.contains(v) {
                continue;
            }
            let extended = s.union(&VertexSet::singleton(v));
            let closes = self
                .incident_edges(v)
                .iter()
                .any(|&ei| self.edges[ei as usize].is_subset_of(&extended));
            if !closes {
                return false;
            }
        }
        true
    }

    /// Sub-hypergraph induced by `keep`: edges entirely inside `keep`,
    /// vertices reindexed to `0..keep.len()`. Returns the graph and the map
    /// from new ids back to original ids.
    pub fn induced(&self, keep: &VertexSet) -> (Hypergraph, Vec<u32>) {
        let back: Vec<u32> = keep.iter().collect();
        let mut fwd = vec![u32::MAX; self.n as usize];
        for (new, &old) in back.iter().enumerate() {
            fwd[old as usize] = new as u32;
        }
        let edges: Vec<VertexSet> = self
            .edges
            .iter()
            .filter(|e| e.is_subset_of(keep))
            .map(|e| VertexSet::from_iter(e.iter().map(|v| fwd[v as usize])))
            .collect();
        let r = edges.iter().map(|e| e.len()).max().unwrap_or(1).max(1);
        let g = Hypergraph::new(back.len() as u32, r, edges).expect("induced edges are valid");
        (g, back)
    }

    /// Exhaustively enumerates every maximal independent set. Exponential in
    /// `n`; the cross-check oracle for small instances.
    pub fn enumerate_all_mis(&self) -> Vec<VertexSet> {
        assert!(self.n <= 20, "brute-force enumeration is for small instances");
        let mut out = Vec::new();
        for mask in 0u32..(1 << self.n) {
            let s = VertexSet::from_sorted((0..self.n).filter(|&v| mask >> v & 1 == 1).collect());
            if self.verify_mis(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("hypergraph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
