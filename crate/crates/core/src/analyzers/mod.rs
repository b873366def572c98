//! Trace consumers rebuilding known debugging views.
//!
//! Every analyzer is a fold with private state over the ordered event
//! stream, usable both attached live to the engine (each implements
//! [`TraceSink`](crate::trace::TraceSink)) and replayed over a parsed
//! `.fdtrace.jsonl` file. Several analyzers can consume the same run by
//! fanning the immutable events out.

mod evolution;
mod oracle;
mod stats;
mod tree;
mod useless;
mod validate;

pub use evolution::{evolution_matrix, rows_to_csv, EvolutionBuilder, EvolutionRow, Trigger};
pub use oracle::{oracle_solve, OracleError, ORACLE_SIZE_LIMIT};
pub use stats::{StatsCollector, TraceStats};
pub use tree::{build_search_tree, emit_dot, NodeKind, SearchTree, StreamError, TreeBuilder, TreeNode};
pub use useless::{detect_useless_activations, ActivationRecord, UselessTracker};
pub use validate::{validate_trace, ValidationReport, Validator, Violation};
