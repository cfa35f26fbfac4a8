//! Native query evaluation.

pub(crate) mod engine;
mod results;
mod scope;

pub use engine::{change_patterns, eval, eval_pattern, eval_text, materialize_resource, record_patterns, temporary_graphs, Evaluator};
pub use results::{apply_modifiers, compare_terms, ResultTable};
pub use scope::{change_candidates, data_candidates, resolve_scopes, Candidate, Path, Scope, ScopeKind, ScopePlan};
