//! Randomized and fully deterministic parallel-style algorithms for maximal
//! independent set in bounded-rank hypergraphs.
//!
//! The crate is organized around the marking loop: a round marks vertices,
//! clears fully marked edges, commits the survivors, and residualizes the
//! graph. [`rand_mis`] draws marks from a seeded counter-based source;
//! [`det`] derandomizes the draw by fixing bit levels against a pessimistic
//! estimator evaluated over explicit sample spaces ([`spaces`]); [`sparse`]
//! wraps either pipeline in an outer loop for edge-heavy instances.
//! [`moments`] holds the polynomial moment bounds the analysis quantities
//! are checked against, and [`envelope`] the degree-envelope definitions.

pub mod det;
pub mod envelope;
pub mod error;
pub mod gen;
pub mod hypergraph;
pub mod moments;
pub mod rand_mis;
pub mod rng;
pub mod sparse;
pub mod spaces;
pub mod trace;
pub mod vset;

pub use error::{GenError, GraphError, SolveError, SpaceError};
pub use hypergraph::Hypergraph;
pub use vset::VertexSet;
