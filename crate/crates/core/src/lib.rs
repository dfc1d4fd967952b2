//! A small language built from three cores: objects with stateful fields,
//! a total functional core (System T), and a process calculus for
//! coordination. Includes a checker, an evaluator, a seeded process engine
//! and a bounded state-space explorer.

pub mod cli;
pub mod compile;
pub mod diagnostics;
pub mod engine;
pub mod eval;
pub mod explorer;
pub mod par;
pub mod prelude;
pub mod store;
pub mod syntax;
pub mod typecheck;
pub mod value;
