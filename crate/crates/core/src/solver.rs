//! Solver-independent view of a solve: the outcome record, the fail checks
//! run on it, and the signed return-code convention.
//!
//! `0` means the solver finished and nothing is wrong. Positive codes come
//! from the checks in this module; negative codes are backend-internal
//! errors.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::io::{self, IoError};
use crate::model::{evaluate_objective, is_feasible, verify_ray, Problem, Settings, Solution, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
    Error,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitReached => "limit-reached",
            SolveStatus::Error => "error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_iterations: u64,
}

/// Everything a backend reports about one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub dual_bound: f64,
    pub primal_bound: f64,
    /// Best solution first.
    pub solutions: Vec<Solution>,
    pub ray: Option<Solution>,
    pub internal_code: i32,
    pub stats: SolveStats,
    pub wall_time: Duration,
}

impl SolveOutcome {
    /// An outcome carrying no information beyond `status`.
    pub fn bare(status: SolveStatus) -> Self {
        let (dual_bound, primal_bound) = match status {
            SolveStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
            SolveStatus::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Self {
            status,
            dual_bound,
            primal_bound,
            solutions: Vec::new(),
            ray: None,
            internal_code: 0,
            stats: SolveStats::default(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn error(code: i32) -> Self {
        Self {
            internal_code: if code < 0 { code } else { -1 },
            ..Self::bare(SolveStatus::Error)
        }
    }

    /// Optimal outcome whose bounds both equal `value`.
    pub fn optimal(value: f64, solution: Solution) -> Self {
        Self {
            dual_bound: value,
            primal_bound: value,
            solutions: vec![solution],
            ..Self::bare(SolveStatus::Optimal)
        }
    }
}

/// Signed return code of one evaluated solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct FailCode(pub i32);

impl FailCode {
    pub const PASS: FailCode = FailCode(0);
    pub const DUAL: FailCode = FailCode(1);
    pub const PRIMAL: FailCode = FailCode(2);
    pub const OBJECTIVE: FailCode = FailCode(3);
    pub const RAY: FailCode = FailCode(4);

    pub fn is_pass(self) -> bool {
        self.0 == 0
    }

    pub fn is_internal(self) -> bool {
        self.0 < 0
    }

    pub fn describe(self) -> &'static str {
        match self.0 {
            0 => "pass",
            1 => "dual fail",
            2 => "primal fail",
            3 => "objective fail",
            4 => "invalid ray",
            c if c < 0 => "internal error",
            _ => "unknown",
        }
    }
}

impl fmt::Display for FailCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.describe())
    }
}

/// Codes that count as correct results.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Passcodes(pub BTreeSet<i32>);

impl Passcodes {
    pub fn contains(&self, code: FailCode) -> bool {
        self.0.contains(&code.0)
    }
}

impl FromIterator<i32> for Passcodes {
    fn from_iter<I: IntoIterator<Item = i32>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Optional limits handed to a backend.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveLimits {
    /// Seconds.
    pub time: Option<f64>,
    pub nodes: Option<u64>,
}

/// How solve outcomes are judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Run all fail checks.
    #[default]
    Bugs,
    /// Only an infeasibility claim counts, reported as code 1.
    Infeasibility,
}

fn scaled(value: f64, tol: &Tolerances) -> f64 {
    tol.delta * 1f64.max(value.abs())
}

/// The dual bound cuts off the objective value of the reference solution.
pub fn check_dual_fail(outcome: &SolveOutcome, problem: &Problem, reference: &Solution, tol: &Tolerances) -> bool {
    if outcome.dual_bound == f64::NEG_INFINITY || outcome.dual_bound.is_nan() {
        return false;
    }
    match evaluate_objective(problem, reference) {
        Ok(value) => outcome.dual_bound > value + scaled(value, tol),
        Err(_) => false,
    }
}

/// Primal-side check. Returns the code of the violation found: a returned
/// solution that is infeasible (or an optimal claim without any solution)
/// yields [`FailCode::PRIMAL`], an invalid unboundedness ray
/// [`FailCode::RAY`].
pub fn check_primal(outcome: &SolveOutcome, problem: &Problem, tol: &Tolerances) -> Option<FailCode> {
    if outcome.status == SolveStatus::Unbounded {
        if let Some(ray) = &outcome.ray {
            if !verify_ray(problem, ray, tol) {
                return Some(FailCode::RAY);
            }
        }
    }
    if outcome.status == SolveStatus::Optimal && outcome.solutions.is_empty() {
        return Some(FailCode::PRIMAL);
    }
    if outcome.solutions.iter().any(|s| !is_feasible(problem, s, tol).feasible) {
        return Some(FailCode::PRIMAL);
    }
    None
}

/// `true` when [`check_primal`] finds anything.
pub fn check_primal_fail(outcome: &SolveOutcome, problem: &Problem, tol: &Tolerances) -> bool {
    check_primal(outcome, problem, tol).is_some()
}

/// The claimed primal bound is better than the objective value of the
/// solver's own best solution.
pub fn check_objective_fail(outcome: &SolveOutcome, problem: &Problem, tol: &Tolerances) -> bool {
    let Some(best) = outcome.solutions.first() else {
        return false;
    };
    if outcome.primal_bound.is_nan() {
        return false;
    }
    match evaluate_objective(problem, best) {
        Ok(value) => outcome.primal_bound < value - scaled(value, tol),
        Err(_) => false,
    }
}

/// Runs the checks in order internal, ray, primal, dual, objective and
/// returns the first triggered code not listed in `passcodes`.
///
/// The dual check needs a reference; without one it is skipped.
pub fn evaluate(
    outcome: &SolveOutcome,
    problem: &Problem,
    reference: Option<&Solution>,
    passcodes: &Passcodes,
    tol: &Tolerances,
) -> FailCode {
    let mut triggered = Vec::with_capacity(2);
    if outcome.status == SolveStatus::Error || outcome.internal_code < 0 {
        let code = if outcome.internal_code < 0 { outcome.internal_code } else { -1 };
        triggered.push(FailCode(code));
    } else {
        match check_primal(outcome, problem, tol) {
            Some(FailCode::RAY) => {
                triggered.push(FailCode::RAY);
                if check_primal_fail(&SolveOutcome { ray: None, ..outcome.clone() }, problem, tol) {
                    triggered.push(FailCode::PRIMAL);
                }
            }
            Some(code) => triggered.push(code),
            None => {}
        }
        if let Some(reference) = reference {
            if check_dual_fail(outcome, problem, reference, tol) {
                triggered.push(FailCode::DUAL);
            }
        }
        if check_objective_fail(outcome, problem, tol) {
            triggered.push(FailCode::OBJECTIVE);
        }
    }
    triggered
        .into_iter()
        .find(|code| !passcodes.contains(*code))
        .unwrap_or(FailCode::PASS)
}

/// Evaluation used when searching for an infeasible subsystem.
pub fn evaluate_infeasibility(outcome: &SolveOutcome) -> FailCode {
    if outcome.status == SolveStatus::Infeasible {
        FailCode::DUAL
    } else {
        FailCode::PASS
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("solve called before setup")]
    NotSetUp,
    #[error("failed to launch solver: {0}")]
    Launch(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Lifecycle every solver integration implements: load a pair, solve it,
/// and write it back out.
///
/// Errors returned here are fatal for a reduction run. Failures of the
/// solver itself belong in the outcome as negative internal codes.
pub trait Backend {
    fn setup(&mut self, problem: &Problem, settings: &Settings, limits: &SolveLimits) -> Result<(), BackendError>;

    fn solve(&mut self) -> Result<SolveOutcome, BackendError>;

    /// Writes the currently loaded pair.
    fn write(&self, instance: &Path, settings: &Path) -> Result<(), BackendError>;
}

/// Writes a pair the way every backend does by default.
pub fn write_pair(problem: &Problem, settings: &Settings, instance: &Path, settings_path: &Path) -> Result<(), BackendError> {
    io::write_instance(problem, instance)?;
    io::write_settings(settings, settings_path)?;
    Ok(())
}
