//! Seeded instance generation for benchmarks and tests.

use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::hypergraph::Hypergraph;
use crate::rng::BitSource;
use crate::vset::VertexSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    /// Distinct random edges of size 2..=r, none nested in another.
    UniformRandom,
    /// Edge-heavy instances (m >= n intended) with small edges covering
    /// every vertex, the regime the sparse loops target.
    PlantedSparse,
    /// Deliberately nested edge families, exercising reduction: the
    /// constructed graph always has strictly fewer edges than requested.
    WorstNested,
}

pub fn generate(
    kind: InstanceKind,
    n: u32,
    m: usize,
    r: usize,
    seed: u64,
) -> Result<Hypergraph, GenError> {
    if n == 0 || r == 0 {
        return Err(GenError::Infeasible("need n >= 1 and r >= 1".into()));
    }
    if m == 0 {
        return Ok(Hypergraph::edgeless(n, r));
    }
    let src = BitSource::new(seed);
    match kind {
        InstanceKind::UniformRandom => uniform_random(n, m, r, &src),
        InstanceKind::PlantedSparse => planted_sparse(n, m, r, &src),
        InstanceKind::WorstNested => worst_nested(n, m, r, &src),
    }
}

fn draw_edge(stream: &mut crate::rng::Stream, n: u32, size: usize) -> VertexSet {
    let mut edge = VertexSet::new();
    while edge.len() < size {
        edge.insert(stream.next_below(n as u64) as u32);
    }
    edge
}

fn uniform_random(n: u32, m: usize, r: usize, src: &BitSource) -> Result<Hypergraph, GenError> {
    let min_size = if r == 1 { 1 } else { 2 };
    if (n as usize) < min_size {
        return Err(GenError::Infeasible(format!("n={n} too small for edges of size {min_size}")));
    }
    let mut stream = src.stream(1);
    let mut edges: Vec<VertexSet> = Vec::with_capacity(m);
    let mut attempts = 0usize;
    while edges.len() < m {
        attempts += 1;
        if attempts > 200 * m + 1000 {
            return Err(GenError::Infeasible(format!(
                "could not place {m} non-nested edges on {n} vertices (rank {r})"
            )));
        }
        let size = min_size + stream.next_below((r - min_size + 1) as u64) as usize;
        let size = size.min(n as usize);
        let e = draw_edge(&mut stream, n, size);
        let nested = edges.iter().any(|f| f.is_subset_of(&e) || e.is_subset_of(f));
        if !nested {
            edges.push(e);
        }
    }
    Hypergraph::new(n, r, edges).map_err(|e| GenError::Infeasible(e.to_string()))
}

fn planted_sparse(n: u32, m: usize, r: usize, src: &BitSource) -> Result<Hypergraph, GenError> {
    if n < 2 {
        return Err(GenError::Infeasible("planted-sparse needs n >= 2".into()));
    }
    let mut stream = src.stream(2);
    let mut edges: Vec<VertexSet> = Vec::with_capacity(m);
    // Cover every vertex first so the whole instance stays live.
    let mut v = 0u32;
    while (v as usize) < n as usize && edges.len() < m {
        let mut e = VertexSet::singleton(v);
        while e.len() < 2.min(n as usize) {
            e.insert(stream.next_below(n as u64) as u32);
        }
        if !edges.iter().any(|f| f.is_subset_of(&e) || e.is_subset_of(f)) {
            edges.push(e);
        }
        v += 2;
    }
    let mut attempts = 0usize;
    while edges.len() < m {
        attempts += 1;
        if attempts > 200 * m + 1000 {
            return Err(GenError::Infeasible(format!(
                "could not place {m} small edges on {n} vertices"
            )));
        }
        let size = 2 + stream.next_below(r.clamp(2, 3) as u64 - 1) as usize;
        let e = draw_edge(&mut stream, n, size.min(n as usize));
        if !edges.iter().any(|f| f.is_subset_of(&e) || e.is_subset_of(f)) {
            edges.push(e);
        }
    }
    Hypergraph::new(n, r.max(3), edges).map_err(|e| GenError::Infeasible(e.to_string()))
}

fn worst_nested(n: u32, m: usize, r: usize, src: &BitSource) -> Result<Hypergraph, GenError> {
    if r < 2 || n < 3 {
        return Err(GenError::Infeasible("worst-nested needs r >= 2 and n >= 3".into()));
    }
    let mut stream = src.stream(3);
    let mut edges: Vec<VertexSet> = Vec::with_capacity(m);
    while edges.len() < m {
        let base = draw_edge(&mut stream, n, 2.min(n as usize));
        edges.push(base.clone());
        // A chain of supersets above the base edge; all get reduced away.
        let mut cur = base;
        while cur.len() < r && edges.len() < m {
            let mut next = cur.clone();
            next.insert(stream.next_below(n as u64) as u32);
            if next.len() > cur.len() {
                edges.push(next.clone());
                cur = next;
            }
        }
    }
    edges.truncate(m);
    let pre = Hypergraph::new(n, r, edges).map_err(|e| GenError::Infeasible(e.to_string()))?;
    Ok(pre.reduce())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_edges_gives_edgeless() {
        let g = generate(InstanceKind::UniformRandom, 5, 0, 3, 1).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn uniform_is_reduced_and_seeded() {
        let a = generate(InstanceKind::UniformRandom, 20, 30, 3, 7).unwrap();
        assert_eq!(a.num_edges(), 30);
        assert!(a.is_reduced());
        let b = generate(InstanceKind::UniformRandom, 20, 30, 3, 7).unwrap();
        assert_eq!(a, b);
        let c = generate(InstanceKind::UniformRandom, 20, 30, 3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn worst_nested_reduces_strictly() {
        let g = generate(InstanceKind::WorstNested, 15, 40, 4, 3).unwrap();
        assert!(g.is_reduced());
        assert!(g.num_edges() < 40);
    }

    #[test]
    fn planted_sparse_is_dense_in_edges() {
        let g = generate(InstanceKind::PlantedSparse, 12, 30, 3, 9).unwrap();
        assert_eq!(g.num_edges(), 30);
        assert!(g.is_reduced());
    }

    #[test]
    fn infeasible_when_no_room() {
        assert!(generate(InstanceKind::UniformRandom, 3, 100, 2, 1).is_err());
    }
}
