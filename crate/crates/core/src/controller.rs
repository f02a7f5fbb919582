//! The stage/round driver.
//!
//! A round calls the modifiers of priority at most `s` in order. A round
//! that changes nothing moves to the next stage; a round that changes the
//! pair ends with a snapshot and starts the next round at the same stage.
//! `r` counts productive rounds only, so `max_rounds` bounds the number of
//! snapshots.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde_json::json;
use thiserror::Error;

use crate::io::{self, IoError};
use crate::model::{is_feasible, FeasibilityReport, Problem, ProblemSize, Settings, Solution, Tolerances};
use crate::modifiers::{run_modifier, solve_and_evaluate, Modifier, ModifierOptions, ReductionState, SolveEvent};
use crate::solver::{Backend, BackendError, EvalMode, FailCode, Passcodes, SolveLimits};

/// Highest stage; one per modifier priority.
pub const MAX_STAGE: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub initial_stage: usize,
    pub last_stage: usize,
    pub max_rounds: usize,
    pub nbatches: Option<usize>,
    pub passcodes: Passcodes,
    pub iis: bool,
    pub output_dir: Option<PathBuf>,
    pub limits: SolveLimits,
    /// Re-read every snapshot and solve it once more.
    pub verify_snapshots: bool,
    /// Write wall times to the run log. Without them the log of a
    /// deterministic backend is byte-identical across runs.
    pub log_timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            initial_stage: 1,
            last_stage: MAX_STAGE,
            max_rounds: 100,
            nbatches: None,
            passcodes: Passcodes::default(),
            iis: false,
            output_dir: None,
            limits: SolveLimits::default(),
            verify_snapshots: false,
            log_timing: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if !(1..=MAX_STAGE).contains(&self.initial_stage) {
            return Err(RunError::Config(format!("initial stage must be in 1..={MAX_STAGE}")));
        }
        if self.last_stage < self.initial_stage {
            return Err(RunError::Config("last stage is below the initial stage".into()));
        }
        if self.nbatches == Some(0) {
            return Err(RunError::Config("nbatches must be at least 1".into()));
        }
        if self.limits.time.is_some_and(|t| !(t >= 0.0)) {
            return Err(RunError::Config("time limit must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("no failure reproduced on the initial pair")]
    NoFailure,
    #[error("infeasible reference: {0} violations on the initial problem")]
    InfeasibleReference(usize),
    #[error("reference solution required outside IIS mode")]
    MissingReference,
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("snapshot of round {0} does not reproduce the failure")]
    SnapshotNotReproduced(usize),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("cannot write run log: {0}")]
    Log(#[from] std::io::Error),
}

/// Visits the `(r, s)` states of the stage/round loop. `round(r, s)` runs
/// one round and reports whether it changed the pair. Returns the visited
/// states followed by the final one.
pub fn stage_round_loop<E>(
    initial_stage: usize,
    last_stage: usize,
    max_rounds: usize,
    round: &mut dyn FnMut(usize, usize) -> Result<bool, E>,
) -> Result<Vec<(usize, usize)>, E> {
    let (mut r, mut s) = (1, initial_stage);
    let mut trajectory = Vec::new();
    while r <= max_rounds && s <= last_stage {
        trajectory.push((r, s));
        if round(r, s)? {
            r += 1;
        } else {
            s += 1;
        }
    }
    trajectory.push((r, s));
    Ok(trajectory)
}

/// One written (or kept in memory) reduced pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub round: usize,
    pub problem: Problem,
    pub settings: Settings,
    /// Instance and settings paths, when an output directory was given.
    pub files: Option<(PathBuf, PathBuf)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub initial_code: FailCode,
    pub original: ProblemSize,
    pub reduced: ProblemSize,
    pub snapshots: Vec<Snapshot>,
    /// Productive rounds.
    pub rounds: usize,
    pub trajectory: Vec<(usize, usize)>,
    /// Solver calls including the initial check and snapshot verification.
    pub solves: usize,
    pub kept_batches: usize,
    pub wall_time: Duration,
    pub problem: Problem,
    pub settings: Settings,
}

pub fn snapshot_paths(dir: &Path, round: usize) -> (PathBuf, PathBuf) {
    (dir.join(format!("round_{round}.mps")), dir.join(format!("round_{round}.set")))
}

/// Writes `round_<r>.mps` and `round_<r>.set` into `dir`, replacing older
/// files of the same name.
pub fn emit_snapshot(problem: &Problem, settings: &Settings, dir: &Path, round: usize) -> Result<(PathBuf, PathBuf), RunError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::File {
        path: dir.to_path_buf(),
        source,
    })?;
    let (instance, set) = snapshot_paths(dir, round);
    io::write_instance(problem, &instance)?;
    io::write_settings(settings, &set)?;
    Ok((instance, set))
}

fn options(config: &RunConfig) -> ModifierOptions {
    ModifierOptions {
        nbatches: config.nbatches,
        passcodes: config.passcodes.clone(),
        eval: if config.iis { EvalMode::Infeasibility } else { EvalMode::Bugs },
        limits: config.limits,
    }
}

/// Solves the initial pair once. Fails when the reference is infeasible
/// (outside IIS mode) or when nothing reproduces.
pub fn verify_initial(
    backend: &mut dyn Backend,
    problem: &Problem,
    settings: &Settings,
    reference: Option<&Solution>,
    config: &RunConfig,
) -> Result<FailCode, RunError> {
    let tol = Tolerances::default();
    if !config.iis {
        let reference = reference.ok_or(RunError::MissingReference)?;
        let report: FeasibilityReport = is_feasible(problem, reference, &tol);
        if !report.feasible {
            return Err(RunError::InfeasibleReference(report.violated));
        }
    }
    let reference = if config.iis { None } else { reference };
    let code = solve_and_evaluate(backend, problem, settings, reference, &options(config), &tol)?;
    if code.is_pass() {
        return Err(RunError::NoFailure);
    }
    Ok(code)
}

fn size_json(size: &ProblemSize) -> serde_json::Value {
    json!({"vars": size.vars, "conss": size.conss, "nonzeros": size.nonzeros})
}

/// What a finished round reports to [`RunIo::on_round`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    pub stage: usize,
    pub changed: bool,
    pub size: ProblemSize,
    /// Solver calls so far.
    pub solves: usize,
}

/// Optional observers of a run.
#[derive(Default)]
pub struct RunIo<'a> {
    /// JSON-lines run log.
    pub log: Option<&'a mut dyn Write>,
    pub on_round: Option<&'a mut dyn FnMut(&RoundReport)>,
}

struct Log<'a> {
    out: Option<&'a mut dyn Write>,
    timing: bool,
}

impl Log<'_> {
    fn record(&mut self, mut value: serde_json::Value, time: Duration) -> std::io::Result<()> {
        let Some(out) = self.out.as_mut() else {
            return Ok(());
        };
        value["wall_time"] = if self.timing { json!(time.as_secs_f64()) } else { serde_json::Value::Null };
        serde_json::to_writer(&mut *out, &value)?;
        out.write_all(b"\n")
    }
}

/// Reduces `(problem, settings)` while `backend` keeps failing on it.
///
/// `target_settings` drives the Setting modifier. The log receives one JSON
/// object per line: a `start` record, one `solve` record per solver call,
/// one `round` record per round and an `end` record.
#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    modifiers: &[Modifier],
    backend: &mut dyn Backend,
    problem: &Problem,
    settings: &Settings,
    target_settings: &Settings,
    reference: Option<&Solution>,
    observers: RunIo<'_>,
) -> Result<RunSummary, RunError> {
    config.validate()?;
    let started = Instant::now();
    let RunIo { log, mut on_round } = observers;
    let mut log = Log {
        out: log,
        timing: config.log_timing,
    };
    let original = problem.size();
    log.record(
        json!({
            "event": "start",
            "instance": problem.name,
            "mode": if config.iis { "iis" } else { "reduce" },
            "size": size_json(&original),
        }),
        Duration::ZERO,
    )?;
    let initial_code = verify_initial(backend, problem, settings, reference, config)?;
    log.record(
        json!({"event": "solve", "round": 0, "stage": 0, "modifier": "initial", "batch": 0, "batch_size": 0, "code": initial_code.0, "kept": true}),
        started.elapsed(),
    )?;

    let opts = options(config);
    let mut state = ReductionState {
        problem: problem.clone(),
        settings: settings.clone(),
        target_settings: target_settings.clone(),
        reference: if config.iis { None } else { reference.cloned() },
        tol: Tolerances::default(),
    };
    let mut solves = 1;
    let mut kept_batches = 0;
    let mut snapshots = Vec::new();
    let last_stage = config.last_stage.min(MAX_STAGE);

    let trajectory = stage_round_loop(config.initial_stage, last_stage, config.max_rounds, &mut |r, s| {
        let before = (state.problem.clone(), state.settings.clone());
        for modifier in modifiers.iter().filter(|m| m.kind.priority() <= s) {
            let mut pending: Option<std::io::Error> = None;
            let report = run_modifier(*modifier, backend, &mut state, &opts, &mut |event: &SolveEvent| {
                if pending.is_some() {
                    return;
                }
                let record = json!({
                    "event": "solve",
                    "round": r,
                    "stage": s,
                    "modifier": event.kind.name(),
                    "batch": event.batch,
                    "batch_size": event.batch_size,
                    "code": event.code.0,
                    "kept": event.kept,
                });
                if let Err(e) = log.record(record, event.wall_time) {
                    pending = Some(e);
                }
            })?;
            if let Some(e) = pending {
                return Err(RunError::Log(e));
            }
            solves += report.solves;
            kept_batches += report.kept_batches;
        }
        let changed = (&state.problem, &state.settings) != (&before.0, &before.1);
        if let Some(reference) = &state.reference {
            debug_assert!(is_feasible(&state.problem, reference, &state.tol).feasible);
        }
        let size = state.problem.size();
        log.record(
            json!({"event": "round", "round": r, "stage": s, "changed": changed, "size": size_json(&size), "solves": solves}),
            started.elapsed(),
        )?;
        if let Some(f) = on_round.as_mut() {
            f(&RoundReport {
                round: r,
                stage: s,
                changed,
                size,
                solves,
            });
        }
        if changed {
            let files = match &config.output_dir {
                Some(dir) => Some(emit_snapshot(&state.problem, &state.settings, dir, r)?),
                None => None,
            };
            if config.verify_snapshots {
                let (p, st) = match &files {
                    Some((inst, set)) => (io::read_instance(inst)?, io::read_settings(set)?),
                    None => (state.problem.clone(), state.settings.clone()),
                };
                let code = solve_and_evaluate(backend, &p, &st, state.reference.as_ref(), &opts, &state.tol)?;
                solves += 1;
                if code.is_pass() {
                    return Err(RunError::SnapshotNotReproduced(r));
                }
            }
            snapshots.push(Snapshot {
                round: r,
                problem: state.problem.clone(),
                settings: state.settings.clone(),
                files,
            });
        }
        Ok(changed)
    })?;

    let reduced = state.problem.size();
    let wall_time = started.elapsed();
    log.record(
        json!({
            "event": "end",
            "rounds": snapshots.len(),
            "solves": solves,
            "kept_batches": kept_batches,
            "size": size_json(&reduced),
        }),
        wall_time,
    )?;
    Ok(RunSummary {
        initial_code,
        original,
        reduced,
        rounds: snapshots.len(),
        snapshots,
        trajectory,
        solves,
        kept_batches,
        wall_time,
        problem: state.problem,
        settings: state.settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{BuiltinSolver, FaultSpec};
    use crate::fixtures;

    /// The loop as written in pseudocode, with rounds changing the pair
    /// according to `changes`.
    fn literal(s0: usize, last: usize, rounds: usize, changes: &mut dyn FnMut() -> bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut r = 1;
        let mut s = s0;
        loop {
            if !(r <= rounds && s <= last) {
                out.push((r, s));
                return out;
            }
            out.push((r, s));
            let unchanged = !changes();
            if unchanged {
                s += 1;
            } else {
                r += 1;
            }
        }
    }

    #[test]
    fn zero_rounds_do_nothing() {
        let t = stage_round_loop::<()>(1, 9, 0, &mut |_, _| panic!("no round expected")).unwrap();
        assert_eq!(t, vec![(1, 1)]);
    }

    #[test]
    fn unproductive_round_advances_stage() {
        let mut calls = Vec::new();
        stage_round_loop::<()>(3, 9, 5, &mut |r, s| {
            calls.push((r, s));
            Ok(calls.len() > 1 && calls.len() < 3)
        })
        .unwrap();
        assert_eq!(&calls[..3], &[(1, 3), (1, 4), (2, 4)]);
    }

    #[test]
    fn trajectory_matches_literal_loop() {
        for pattern in 0u32..64 {
            let bits = |k: &mut u32| {
                let b = pattern >> (*k % 6) & 1 == 1;
                *k += 1;
                b
            };
            let mut k1 = 0;
            let mut k2 = 0;
            let got = stage_round_loop::<()>(2, 6, 4, &mut |_, _| Ok(bits(&mut k1))).unwrap();
            let want = literal(2, 6, 4, &mut || bits(&mut k2));
            assert_eq!(got, want);
        }
    }

    fn small_case() -> (Problem, Solution) {
        let p = fixtures::small_binary();
        let reference: Solution = [("x1", 1.0), ("x2", 0.0)].into_iter().collect();
        (p, reference)
    }

    #[test]
    fn verify_initial_aborts() {
        let (p, reference) = small_case();
        let config = RunConfig::default();
        let mut clean = BuiltinSolver::new(FaultSpec::none(), 0);
        let err = verify_initial(&mut clean, &p, &Settings::new(), Some(&reference), &config).unwrap_err();
        assert!(matches!(err, RunError::NoFailure));
        let bad: Solution = [("x1", 1.0), ("x2", 1.0)].into_iter().collect();
        let mut faulty = BuiltinSolver::new(FaultSpec::only(2), 0);
        let err = verify_initial(&mut faulty, &p, &Settings::new(), Some(&bad), &config).unwrap_err();
        assert!(matches!(err, RunError::InfeasibleReference(1)));
    }

    #[test]
    fn small_run_keeps_failing_and_logs() {
        let (p, reference) = small_case();
        let settings: Settings = [("presolve/enabled", "false")].into_iter().collect();
        let mut backend = BuiltinSolver::new(FaultSpec::only(2), 0);
        let mut log = Vec::new();
        let config = RunConfig {
            log_timing: false,
            ..RunConfig::default()
        };
        let summary = run(
            &config,
            &Modifier::standard(),
            &mut backend,
            &p,
            &settings,
            &settings,
            Some(&reference),
            RunIo {
                log: Some(&mut log),
                on_round: None,
            },
        )
        .unwrap();
        assert_eq!(summary.initial_code, FailCode::DUAL);
        assert!(summary.reduced.dominated_by(&summary.original));
        let text = String::from_utf8(log).unwrap();
        assert!(text.lines().next().unwrap().contains("\"start\""));
        assert!(text.lines().last().unwrap().contains("\"end\""));
        assert_eq!(text.lines().filter(|l| l.contains("\"solve\"")).count(), summary.solves);
    }
}
