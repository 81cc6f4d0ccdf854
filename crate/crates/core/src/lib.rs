//! Faculty-to-course allocation over a 36-slot week.
//!
//! The crate scores candidate allocations against five hard and five soft
//! constraints and improves them with a local-repair + modified-GA hybrid,
//! alongside five standard metaheuristics for comparison.

pub mod baselines;
pub mod constraints;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod io;
pub mod model;
mod search;
pub mod seeding;
pub mod solvers;
pub mod trace;
pub mod units;

pub use baselines::{run_baseline, BaselineConfig, BaselineKind};
pub use constraints::{count_hard_violations, soft_penalties, HardViolations, PenaltyConfig};
pub use error::{Error, Result};
pub use evaluation::{evaluate, evaluate_delta, EvaluationReport};
pub use harness::{compare, solve, Algorithm, AlgorithmConfig};
pub use model::{eligible_faculty, slot_index, Instance, SlotIndex, Solution};
pub use seeding::{generate_instance, initial_solution, GeneratorSpec, RngSeed};
pub use solvers::{hybrid, lra, mga, SolveResult, SolverConfig, Termination};
pub use trace::{Phase, TracePoint};
pub use units::{Fixed, Score};
