//! Decides whether a set of project-select views determines a
//! project-select-join query without self joins, and builds a
//! counterexample pair of instances when it does not.
//!
//! The pipeline is [`parser`] → [`normalize`] → [`formula`] → [`solver`] →
//! [`counterexample`]; [`check::check`] runs it end to end. [`oracle`] is an
//! independent brute-force decider over bounded instances.

pub mod check;
pub mod corpus;
pub mod counterexample;
pub mod eval;
pub mod explain;
pub mod formula;
pub mod normalize;
pub mod oracle;
pub mod par;
pub mod parser;
pub mod relational;
pub mod solver;

pub use check::{check, CheckError, CheckOptions, Status, Verdict};
pub use normalize::{normalize, NormalizedProblem};
pub use parser::{parse_problem, ParseDiagnostic, SourceFile};
pub use relational::{Instance, Problem, Schema, Tuple, Value};
