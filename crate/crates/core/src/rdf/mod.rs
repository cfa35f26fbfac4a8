//! RDF terms, graphs, N-Triples I/O, basic graph pattern matching and the
//! mapping algebra used by query evaluation.

pub mod algebra;
pub mod filter;
pub mod graph;
pub mod ntriples;
pub mod pattern;
pub mod term;

pub use algebra::{algebra_combine, CombineMode, Mapping, MappingSet};
pub use filter::{eval_filter, CmpOp, FilterExpr};
pub use graph::Graph;
pub use ntriples::{parse_ntriples, parse_term, serialize_ntriples};
pub use pattern::{match_bgp, PatternConfig, TermPattern, TriplePattern};
pub use term::{Literal, Term, Triple, Variable};
