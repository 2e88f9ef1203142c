//! Evaluator, exact-equality checker, and test harness for a small cubical
//! language with booleans, a circle, and negation lines.
//!
//! The language has terms that depend on dimension names. A term over `n`
//! dimension names is an `n`-cube; substituting `0`, `1`, or other names into
//! it yields its faces and degeneracies. Evaluation is weak-head and
//! deterministic. Equality of closed terms at a type is checked by running
//! both sides under all substitutions of the ambient dimension context and
//! comparing the resulting values structurally, type by type.
//!
//! Modules:
//! - [`syntax`]: terms, dimensions, substitution, alpha equivalence.
//! - [`opsem`]: values, single steps, evaluation, traces.
//! - [`semantics`]: exact equality and pretype checks, canonicity.
//! - [`laws`]: executable suites for typing rules and composition laws.
//! - [`gen`]: seeded generation of well-typed terms and filling problems.
//! - [`frontend`]: concrete syntax, printer, command-line interface.

pub mod frontend;
pub mod gen;
pub mod laws;
pub mod opsem;
pub mod semantics;
pub mod syntax;
