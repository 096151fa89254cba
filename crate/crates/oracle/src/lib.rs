//! Exhaustive reference procedures used as test oracles, and generators
//! for test instances. Everything here is deliberately naive.

pub mod enumerate;
pub mod generate;
pub mod states;

pub use enumerate::{refinements, solvable, Refinements};
pub use generate::{random_problem, wide_choice, RandomParams};
pub use states::reachable_states;
