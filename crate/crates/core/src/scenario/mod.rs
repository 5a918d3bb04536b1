//! Declarative scenarios: a JSON document names a grid, a potential, an
//! initial state, a solver and the residual checks to evaluate.

mod builtin;
mod config;
mod run;

pub use builtin::{builtin, list_scenarios, run_suite};
pub use config::*;
pub use run::*;
