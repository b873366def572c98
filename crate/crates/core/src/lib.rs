//! fdtrace — a traceable finite-domain constraint solver.
//!
//! The crate implements an eight-port operational semantics for finite
//! domain propagation and control, and the toolchain around the generic
//! trace it emits:
//!
//! * [`domain`] — finite integer domains and update classification;
//! * [`constraint`] — the catalog of eight primitive constraints
//!   (reduction operators, solved and awakening conditions);
//! * [`engine`] — the prioritized rule machine over the partitioned store
//!   `<A, S, Q, T, R>` with snapshot-based tell/told control;
//! * [`trace`] — the event model, JSON Lines and compact formats, sinks;
//! * [`model`] — the `.fd` model language and built-in problem generators;
//! * [`search`] — depth-first labelling with variable/value strategies;
//! * [`analyzers`] — stream folds rebuilding debugging views from traces:
//!   search tree (DOT), domain evolution (CSV), statistics, useless
//!   activations, validation, and the brute-force oracle.

pub mod analyzers;
pub mod constraint;
pub mod domain;
pub mod engine;
pub mod model;
pub mod search;
pub mod trace;

pub use constraint::{ConstraintForm, ConstraintInstance};
pub use domain::{classify_update, Domain, DomainState, UpdateType, VarRef};
pub use engine::{SolverState, StepOutcome, StorePartition};
pub use model::Model;
pub use search::{Solution, ValStrategy, VarStrategy};
pub use trace::{Port, TraceEvent, TraceSink};
