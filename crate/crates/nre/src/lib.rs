//! Nested regular expressions (NREs) over edge-labeled graph databases:
//! parsing, linear-time evaluation, and containment checking.
//!
//! NREs extend two-way regular path queries with an existential nesting
//! test `[e]`. Containment is decided over two restricted graph shapes:
//!
//! * simple semipaths (`containment::sp_contains`), and
//! * k-branch semipaths (`containment::gen_contains`), trees whose
//!   branching is bounded by the nesting depth of the left query.
//!
//! Both decisions compile queries into alternating two-way finite
//! automata over marker-delimited words, reduce to language emptiness
//! via a one-way conversion, and decode any witness back into a concrete
//! counterexample graph, which is independently re-verified against the
//! brute-force semantics in [`oracle`] before being reported.

pub mod automata;
pub mod containment;
pub mod corpus;
pub mod eval;
pub mod fixtures;
pub mod graph;
pub mod oracle;
pub mod par;
pub mod syntax;
pub mod translate;

pub use containment::{ContainOpts, Strategy, Verdict};
pub use graph::{GraphDb, KBranchSemipath, Semipath};
pub use syntax::{parse, render, Nre, Symbol};
