//! Delta debugging for mixed-integer programming solvers.
//!
//! Given an instance, a settings file, a feasible reference solution and a
//! solver that misbehaves on them, a reduction run repeatedly applies
//! batches of simplifying modifications and keeps every batch under which
//! the misbehavior still reproduces. The result is a sequence of ever
//! smaller (settings, problem) pairs, each written to disk.
//!
//! Module map:
//!
//! * [`model`]: problems, solutions, tolerances and feasibility checks.
//! * [`io`]: free-MPS, solution and settings files.
//! * [`modifiers`]: the nine reduction strategies and batch handling.
//! * [`solver`]: outcome record, fail checks and the backend trait.
//! * [`builtin`]: a small branch-and-bound solver with injectable faults.
//! * [`external`]: drives an external solver process.
//! * [`controller`]: the stage/round driver and run log.
//! * [`fixtures`]: seeded instance generators used by tests and demos.

pub mod builtin;
pub mod controller;
pub mod external;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod modifiers;
pub mod solver;

pub use model::{Constraint, Problem, ProblemSize, Settings, Solution, Tolerances, VarType, Variable};
pub use solver::{Backend, BackendError, FailCode, Passcodes, SolveLimits, SolveOutcome, SolveStatus};
