//! Double-pushout rewriting on finite multigraphs, rule composition, the
//! associative rule algebra with its canonical representation on graph
//! states, and continuous-time Markov chains built from rewriting rules.

/// Version of the engine, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod algebra;
pub mod canon;
pub mod category;
pub mod compose;
pub mod corpus;
pub mod dpo;
pub mod error;
pub mod graph;
pub mod io;
pub mod monos;
pub mod rep;
pub mod rule;
pub mod stochastic;
pub mod verify;

pub use canon::{canonical_form, canonical_key, is_isomorphic, CanonicalForm, CanonicalKey};
pub use category::{compose_spans, pullback, pushout, pushout_complement, Cospan, Span};
pub use error::{Error, Result};
pub use graph::{Edge, GraphKind, GraphMorphism, Multigraph};
pub use monos::{count_monos, enumerate_monos, for_each_mono};
pub use dpo::{count_matches, derive, derive_detailed, find_matches, Derivation};
pub use rule::{LinearRule, RuleKey};
pub use compose::{analyze, compose_rules, enumerate_rule_overlaps, synthesize, RuleOverlap};
pub use algebra::{check_associativity, hw_normal_order, RuleVector};
pub use rep::{apply_rep, correlator, hw_sequence, ExactState, FloatState, Observable, StateVector};
