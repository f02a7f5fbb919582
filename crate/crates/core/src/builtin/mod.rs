//! A small deterministic MIP solver with switchable faults.
//!
//! Presolve, a dense primal simplex and best-first branch-and-bound. With
//! no fault enabled the solver is exact on small pure-integer instances,
//! which the enumeration oracle in [`oracle`] checks. Each fault reproduces
//! a known class of solver bug:
//!
//! * F1: activity bounds in propagation use the first entry's bounds for
//!   every term.
//! * F2: the integral-objective cutoff is derived from an interior point
//!   rather than the LP optimum.
//! * F3: integer bound rounding in propagation floors and ceils against the
//!   zero tolerance only.
//! * F4: normalizing a row by a huge leading coefficient snaps a side that
//!   falls below the feasibility tolerance to zero.
//! * F5: when presolve solves the instance, optimality is claimed without a
//!   solution.
//!
//! Recognized settings keys:
//!
//! | key | default |
//! |---|---|
//! | `presolve/enabled` | `true` |
//! | `presolve/propagation` | `true` |
//! | `presolve/normalization` | `true` |
//! | `presolve/maxrounds` | `20` (`-1` for no limit) |
//! | `separation/objcut` | `true` |
//! | `branching/rule` | `mostfractional` (or `first`) |
//! | `fault/f1` .. `fault/f5` | `false` |
//! | `fault/f4threshold` | `1e6` |
//! | `limits/time` | none (seconds) |
//! | `limits/nodes` | none |
//! | `randomseed` | `0` |
//!
//! Any other key is rejected at setup.

pub mod bnb;
pub mod lp;
pub mod oracle;
pub mod presolve;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::model::{evaluate_objective, is_feasible, Problem, Settings, Solution, Tolerances};
use crate::solver::{write_pair, Backend, BackendError, SolveLimits, SolveOutcome, SolveStats, SolveStatus};

pub use bnb::{BnbOptions, BranchRule};
pub use oracle::{enumerate_oracle, OracleError, OracleResult};
pub use presolve::{presolve, shifted_max_activity, shifted_min_activity, PresolveOptions, PresolveStatus, Presolved};

/// Enabled faults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec {
    pub f1: bool,
    pub f2: bool,
    pub f3: bool,
    pub f4: bool,
    pub f5: bool,
    /// Smallest total normalization divisor of a row at which F4 fires.
    pub f4_threshold: f64,
}

impl Default for FaultSpec {
    fn default() -> Self {
        Self {
            f1: false,
            f2: false,
            f3: false,
            f4: false,
            f5: false,
            f4_threshold: 1e6,
        }
    }
}

impl FaultSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn only(fault: u8) -> Self {
        let mut spec = Self::default();
        spec.enable(fault);
        spec
    }

    fn enable(&mut self, fault: u8) -> bool {
        match fault {
            1 => self.f1 = true,
            2 => self.f2 = true,
            3 => self.f3 = true,
            4 => self.f4 = true,
            5 => self.f5 = true,
            _ => return false,
        }
        true
    }

    pub fn is_empty(&self) -> bool {
        !(self.f1 || self.f2 || self.f3 || self.f4 || self.f5)
    }

    /// Faults enabled in either.
    pub fn union(&self, other: &FaultSpec) -> FaultSpec {
        FaultSpec {
            f1: self.f1 || other.f1,
            f2: self.f2 || other.f2,
            f3: self.f3 || other.f3,
            f4: self.f4 || other.f4,
            f5: self.f5 || other.f5,
            f4_threshold: self.f4_threshold.min(other.f4_threshold),
        }
    }
}

impl FromStr for FaultSpec {
    type Err = String;

    /// Parses a comma-separated list such as `F1,f4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = FaultSpec::default();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let digit = item
                .strip_prefix(['F', 'f'])
                .and_then(|d| d.parse::<u8>().ok())
                .ok_or_else(|| format!("unknown fault `{item}`"))?;
            if !spec.enable(digit) {
                return Err(format!("unknown fault `{item}`"));
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for FaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.f1, "F1"),
            (self.f2, "F2"),
            (self.f3, "F3"),
            (self.f4, "F4"),
            (self.f5, "F5"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        f.write_str(&names.join(","))
    }
}

pub const SETTINGS_KEYS: &[&str] = &[
    "presolve/enabled",
    "presolve/propagation",
    "presolve/normalization",
    "presolve/maxrounds",
    "separation/objcut",
    "branching/rule",
    "fault/f1",
    "fault/f2",
    "fault/f3",
    "fault/f4",
    "fault/f5",
    "fault/f4threshold",
    "limits/time",
    "limits/nodes",
    "randomseed",
];

/// Solver configuration after settings, backend faults and limits are
/// combined.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub presolve_enabled: bool,
    pub presolve: PresolveOptions,
    pub faults: FaultSpec,
    pub bnb: BnbOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            presolve_enabled: true,
            presolve: PresolveOptions::default(),
            faults: FaultSpec::default(),
            bnb: BnbOptions::default(),
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, BackendError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(BackendError::InvalidSettings(format!("{key}: expected a boolean, got `{value}`"))),
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, BackendError> {
    value
        .parse()
        .map_err(|_| BackendError::InvalidSettings(format!("{key}: invalid value `{value}`")))
}

impl SolverConfig {
    /// Reads `settings` on top of the defaults. `faults` are enabled in
    /// addition to any `fault/*` keys and `seed` is mixed with
    /// `randomseed`.
    pub fn from_settings(settings: &Settings, faults: FaultSpec, seed: u64) -> Result<Self, BackendError> {
        let mut config = SolverConfig::default();
        let mut from_keys = FaultSpec::default();
        let mut random_seed = 0u64;
        for (key, value) in settings.iter() {
            match key {
                "presolve/enabled" => config.presolve_enabled = parse_bool(key, value)?,
                "presolve/propagation" => config.presolve.propagation = parse_bool(key, value)?,
                "presolve/normalization" => config.presolve.normalization = parse_bool(key, value)?,
                "presolve/maxrounds" => {
                    let rounds: i64 = parse_value(key, value)?;
                    config.presolve.max_rounds = if rounds < 0 { 1000 } else { rounds as usize };
                }
                "separation/objcut" => config.bnb.objcut = parse_bool(key, value)?,
                "branching/rule" => {
                    config.bnb.rule = match value {
                        "mostfractional" => BranchRule::MostFractional,
                        "first" => BranchRule::First,
                        _ => return Err(BackendError::InvalidSettings(format!("{key}: unknown rule `{value}`"))),
                    }
                }
                "fault/f1" => from_keys.f1 = parse_bool(key, value)?,
                "fault/f2" => from_keys.f2 = parse_bool(key, value)?,
                "fault/f3" => from_keys.f3 = parse_bool(key, value)?,
                "fault/f4" => from_keys.f4 = parse_bool(key, value)?,
                "fault/f5" => from_keys.f5 = parse_bool(key, value)?,
                "fault/f4threshold" => from_keys.f4_threshold = parse_value(key, value)?,
                "limits/time" => {
                    let secs: f64 = parse_value(key, value)?;
                    if !(secs >= 0.0) {
                        return Err(BackendError::InvalidSettings(format!("{key}: negative time limit")));
                    }
                    config.bnb.time_limit = Some(Duration::from_secs_f64(secs.min(1e9)));
                }
                "limits/nodes" => config.bnb.node_limit = Some(parse_value(key, value)?),
                "randomseed" => random_seed = parse_value(key, value)?,
                _ => return Err(BackendError::InvalidSettings(format!("unknown parameter `{key}`"))),
            }
        }
        config.faults = from_keys.union(&faults);
        config.bnb.interior_cutoff = config.faults.f2;
        config.bnb.seed = seed ^ random_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Ok(config)
    }

    /// Tightens the limits to `limits` where those are stricter.
    pub fn apply_limits(&mut self, limits: &SolveLimits) {
        if let Some(t) = limits.time {
            let t = Duration::from_secs_f64(t.clamp(0.0, 1e9));
            self.bnb.time_limit = Some(self.bnb.time_limit.map_or(t, |c| c.min(t)));
        }
        if let Some(n) = limits.nodes {
            self.bnb.node_limit = Some(self.bnb.node_limit.map_or(n, |c| c.min(n)));
        }
    }
}

/// Accepts a reduced LP point as a solution of `problem`: integer values
/// are snapped when the snapped point stays feasible.
fn accept_point(problem: &Problem, presolved: &Presolved, reduced: &[f64], tol: &Tolerances) -> Option<(Vec<f64>, f64)> {
    let raw = presolved.postsolve(reduced);
    let snapped: Vec<f64> = raw
        .iter()
        .zip(&problem.variables)
        .map(|(&x, v)| if v.is_integer() { x.round() } else { x })
        .collect();
    for candidate in [snapped, raw] {
        let sol = Solution::from_dense(problem, &candidate);
        if is_feasible(problem, &sol, tol).feasible {
            let value = evaluate_objective(problem, &sol).ok()?;
            return Some((candidate, value));
        }
    }
    None
}

/// Solves `problem` under `config`.
pub fn solve(problem: &Problem, config: &SolverConfig) -> SolveOutcome {
    let started = Instant::now();
    let tol = Tolerances::default();
    let presolved = if config.presolve_enabled {
        presolve(problem, &config.presolve, &config.faults)
    } else {
        Presolved::identity(problem)
    };
    let mut outcome = match presolved.status {
        PresolveStatus::Infeasible => SolveOutcome::bare(SolveStatus::Infeasible),
        PresolveStatus::Solved => {
            let x = presolved.postsolve(&[]);
            let sol = Solution::from_dense(problem, &x);
            let value = evaluate_objective(problem, &sol).unwrap_or(f64::NAN);
            if config.faults.f5 {
                SolveOutcome {
                    dual_bound: value,
                    primal_bound: value,
                    ..SolveOutcome::bare(SolveStatus::Optimal)
                }
            } else {
                SolveOutcome::optimal(value, sol)
            }
        }
        PresolveStatus::Reduced => {
            let mut accept = |x: &[f64]| accept_point(problem, &presolved, x, &tol);
            let result = bnb::branch_and_bound(&presolved.problem, &config.bnb, &mut accept);
            let status = match result.status {
                bnb::BnbStatus::Optimal => SolveStatus::Optimal,
                bnb::BnbStatus::Infeasible => SolveStatus::Infeasible,
                bnb::BnbStatus::Unbounded => SolveStatus::Unbounded,
                bnb::BnbStatus::LimitReached => SolveStatus::LimitReached,
                bnb::BnbStatus::Error => SolveStatus::Error,
            };
            let mut outcome = if status == SolveStatus::Error {
                SolveOutcome::error(-1)
            } else {
                SolveOutcome::bare(status)
            };
            if let Some((x, value)) = result.incumbent {
                outcome.primal_bound = value;
                outcome.solutions.push(Solution::from_dense(problem, &x));
            }
            if status != SolveStatus::Error {
                outcome.dual_bound = result.dual_bound;
            }
            if let Some(ray) = result.ray {
                outcome.ray = Some(Solution::from_dense(problem, &presolved.postsolve_ray(&ray)));
            }
            outcome.stats = SolveStats {
                nodes: result.nodes,
                lp_iterations: result.lp_iterations,
            };
            outcome
        }
    };
    outcome.wall_time = started.elapsed();
    outcome
}

/// The builtin solver behind the backend lifecycle.
#[derive(Debug, Clone, Default)]
pub struct BuiltinSolver {
    faults: FaultSpec,
    seed: u64,
    loaded: Option<(Problem, Settings, SolverConfig)>,
}

impl BuiltinSolver {
    pub fn new(faults: FaultSpec, seed: u64) -> Self {
        Self {
            faults,
            seed,
            loaded: None,
        }
    }

    pub fn faults(&self) -> FaultSpec {
        self.faults
    }
}

impl Backend for BuiltinSolver {
    fn setup(&mut self, problem: &Problem, settings: &Settings, limits: &SolveLimits) -> Result<(), BackendError> {
        let mut config = SolverConfig::from_settings(settings, self.faults, self.seed)?;
        config.apply_limits(limits);
        self.loaded = Some((problem.clone(), settings.clone(), config));
        Ok(())
    }

    fn solve(&mut self) -> Result<SolveOutcome, BackendError> {
        let (problem, _, config) = self.loaded.as_ref().ok_or(BackendError::NotSetUp)?;
        Ok(solve(problem, config))
    }

    fn write(&self, instance: &Path, settings: &Path) -> Result<(), BackendError> {
        let (problem, s, _) = self.loaded.as_ref().ok_or(BackendError::NotSetUp)?;
        write_pair(problem, s, instance, settings)
    }
}
