//! Model checking and synthesis for networks of Boolean lookup-table blocks
//! against finite-trace temporal specifications.
//!
//! A network is a chain of blocks, each a total function over fixed-width
//! 0-1 vectors. Specifications are written in a linear temporal logic over
//! finite traces whose atoms compare vector-valued terms; a term may defer
//! part of its evaluation to blocks that the network has not yet applied,
//! which is what makes the logic useful both for checking a concrete
//! network and for synthesizing one from scratch.
//!
//! The crate is organized bottom-up:
//!
//! * [`bits`]: bit vectors, lookup tables, network models, JSON formats.
//! * [`term`]: terms with deferred block applications, instantiation,
//!   collapse, evaluation.
//! * [`formula`]: formula AST, negation normal form, quantifier expansion,
//!   subformula closure, proper closures.
//! * [`semantics`]: direct satisfaction of a formula by a model.
//! * [`automaton`]: the tableau automaton over block alphabets and its
//!   word acceptance test.
//! * [`tableau`]: the on-the-fly tableau engine used for both checking
//!   and synthesis, with depth threshold and isomorphism pruning.
//! * [`solver`]: integer difference-logic constraint encoding, a complete
//!   solver for the disjunctive fragment the tableau produces, SMT-LIB
//!   export, and extraction of partial block mappings.
//! * [`synth`]: the synthesis driver, block completion policies, and
//!   evaluation metrics.
//! * [`frontend`]: the specification file format, generated robustness
//!   and fairness specs, and CSV ingestion.
//! * [`corpus`]: seeded random generators for formulas, models, and
//!   solver problems, shared by the test suites.

pub mod automaton;
pub mod bits;
pub mod corpus;
pub mod formula;
pub mod frontend;
pub mod semantics;
pub mod solver;
pub mod synth;
pub mod tableau;
pub mod term;

pub use bits::{BitVec, BnnModel, BoolFn, Relation, VectorOrder};
pub use formula::{Formula, FormulaSet};
pub use term::Term;
