//! Reduction strategies.
//!
//! Each [`ModifierKind`] enumerates candidate [`Modification`]s on the
//! current pair, in stored constraint/variable order. Candidates are grouped
//! into consecutive batches; each batch is one hypothesis tested by a single
//! solve. A batch is kept when the failure still reproduces and discarded
//! otherwise.
//!
//! Every modification keeps the reference solution feasible. Variables that
//! get removed from the problem are taken to be fixed at their reference
//! value.

use std::fmt;
use std::time::{Duration, Instant};

use crate::model::{activity, Constraint, Problem, Settings, Solution, Tolerances};
use crate::solver::{evaluate, evaluate_infeasibility, Backend, BackendError, EvalMode, FailCode, Passcodes, SolveLimits};

/// The nine reduction strategies, in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum ModifierKind {
    Constraint,
    Variable,
    Coefficient,
    Fixing,
    Setting,
    Side,
    Objective,
    VarRound,
    ConsRound,
}

impl ModifierKind {
    pub const ALL: [ModifierKind; 9] = [
        ModifierKind::Constraint,
        ModifierKind::Variable,
        ModifierKind::Coefficient,
        ModifierKind::Fixing,
        ModifierKind::Setting,
        ModifierKind::Side,
        ModifierKind::Objective,
        ModifierKind::VarRound,
        ModifierKind::ConsRound,
    ];

    /// 1-based priority.
    pub fn priority(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            ModifierKind::Constraint => "constraint",
            ModifierKind::Variable => "variable",
            ModifierKind::Coefficient => "coefficient",
            ModifierKind::Fixing => "fixing",
            ModifierKind::Setting => "setting",
            ModifierKind::Side => "side",
            ModifierKind::Objective => "objective",
            ModifierKind::VarRound => "varround",
            ModifierKind::ConsRound => "consround",
        }
    }
}

impl fmt::Display for ModifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A modifier as scheduled by the controller. `relax_only` restricts
/// [`ModifierKind::VarRound`] to rounding bounds outward, which is the only
/// bound change allowed when searching for an infeasible subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modifier {
    pub kind: ModifierKind,
    pub relax_only: bool,
}

impl Modifier {
    pub fn new(kind: ModifierKind) -> Self {
        Self { kind, relax_only: false }
    }

    pub fn relaxing(kind: ModifierKind) -> Self {
        Self { kind, relax_only: true }
    }

    /// All nine modifiers in priority order.
    pub fn standard() -> Vec<Modifier> {
        ModifierKind::ALL.into_iter().map(Modifier::new).collect()
    }

    /// Constraint deletion followed by outward bound rounding.
    pub fn relaxing_only() -> Vec<Modifier> {
        vec![
            Modifier::new(ModifierKind::Constraint),
            Modifier::relaxing(ModifierKind::VarRound),
        ]
    }

    pub fn candidates(&self, ctx: &Context<'_>) -> Vec<Modification> {
        if self.relax_only && self.kind == ModifierKind::VarRound {
            enumerate_relaxations(ctx)
        } else {
            enumerate_candidates(self.kind, ctx)
        }
    }
}

/// What a modification acts on. Indices refer to the problem the
/// modification was enumerated on; the name guards against applying it to a
/// different one.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Constraint { index: usize, name: String },
    Variable { index: usize, name: String },
    Parameter(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Edit {
    DeleteConstraint,
    FixVariable { value: f64 },
    /// Drop the entry of a fixed variable, moving its contribution at
    /// `value` into the sides.
    DeleteCoefficient { var: usize, value: f64 },
    /// Remove a fixed variable from the problem, folding it in at `value`.
    RemoveVariable { value: f64 },
    SetParameter { value: String },
    FixSide { value: f64 },
    ZeroObjective,
    RoundVariable { objective: f64, lower: f64, upper: f64 },
    RoundConstraint { coefficients: Vec<(usize, f64)>, lhs: f64, rhs: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modification {
    pub kind: ModifierKind,
    pub target: Target,
    pub edit: Edit,
}

/// Inputs for candidate enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub problem: &'a Problem,
    pub settings: &'a Settings,
    pub target_settings: &'a Settings,
    pub reference: Option<&'a Solution>,
    pub tol: &'a Tolerances,
}

fn is_fractional(value: f64) -> bool {
    value.is_finite() && value != value.round()
}

fn cons_target(problem: &Problem, i: usize) -> Target {
    Target::Constraint {
        index: i,
        name: problem.constraints[i].name.clone(),
    }
}

fn var_target(problem: &Problem, j: usize) -> Target {
    Target::Variable {
        index: j,
        name: problem.variables[j].name.clone(),
    }
}

/// Lists every admissible modification of `kind`, in stored order.
///
/// Kinds that move data onto the reference solution yield nothing when no
/// reference is given.
pub fn enumerate_candidates(kind: ModifierKind, ctx: &Context<'_>) -> Vec<Modification> {
    let p = ctx.problem;
    let tol = ctx.tol;
    let reference_value = |j: usize| ctx.reference.and_then(|r| r.get(&p.variables[j].name));
    let mut out = Vec::new();
    let mut push = |target: Target, edit: Edit| out.push(Modification { kind, target, edit });
    match kind {
        ModifierKind::Constraint => {
            for i in 0..p.num_conss() {
                push(cons_target(p, i), Edit::DeleteConstraint);
            }
        }
        ModifierKind::Variable => {
            for (j, var) in p.variables.iter().enumerate() {
                if var.is_fixed(tol) {
                    continue;
                }
                if let Some(value) = reference_value(j) {
                    push(var_target(p, j), Edit::FixVariable { value });
                }
            }
        }
        ModifierKind::Coefficient => {
            for (i, cons) in p.constraints.iter().enumerate() {
                for &(j, _) in &cons.coefficients {
                    if !p.variables[j].is_fixed(tol) {
                        continue;
                    }
                    if let Some(value) = reference_value(j) {
                        push(cons_target(p, i), Edit::DeleteCoefficient { var: j, value });
                    }
                }
            }
        }
        ModifierKind::Fixing => {
            for (j, var) in p.variables.iter().enumerate() {
                if !var.is_fixed(tol) {
                    continue;
                }
                if let Some(value) = reference_value(j) {
                    push(var_target(p, j), Edit::RemoveVariable { value });
                }
            }
        }
        ModifierKind::Setting => {
            for (key, value) in ctx.target_settings.iter() {
                if ctx.settings.get(key) != Some(value) {
                    push(
                        Target::Parameter(key.to_string()),
                        Edit::SetParameter {
                            value: value.to_string(),
                        },
                    );
                }
            }
        }
        ModifierKind::Side => {
            let Some(reference) = ctx.reference else {
                return out;
            };
            for (i, cons) in p.constraints.iter().enumerate() {
                if !(cons.lhs < cons.rhs - tol.epsilon) {
                    continue;
                }
                if let Ok(value) = activity(p, i, reference) {
                    push(cons_target(p, i), Edit::FixSide { value });
                }
            }
        }
        ModifierKind::Objective => {
            for (j, var) in p.variables.iter().enumerate() {
                if var.objective != 0.0 {
                    push(var_target(p, j), Edit::ZeroObjective);
                }
            }
        }
        ModifierKind::VarRound => {
            for (j, var) in p.variables.iter().enumerate() {
                if !(is_fractional(var.objective) || is_fractional(var.lower) || is_fractional(var.upper)) {
                    continue;
                }
                let Some(x) = reference_value(j) else {
                    continue;
                };
                let mut lower = var.lower.round();
                if lower > x {
                    lower = x;
                }
                let mut upper = var.upper.round();
                if upper < x {
                    upper = x;
                }
                let objective = var.objective.round();
                if (objective, lower, upper) != (var.objective, var.lower, var.upper) {
                    push(var_target(p, j), Edit::RoundVariable { objective, lower, upper });
                }
            }
        }
        ModifierKind::ConsRound => {
            let Some(reference) = ctx.reference else {
                return out;
            };
            for (i, cons) in p.constraints.iter().enumerate() {
                if !cons.coefficients.iter().any(|&(_, a)| is_fractional(a)) {
                    continue;
                }
                let coefficients: Vec<(usize, f64)> = cons
                    .coefficients
                    .iter()
                    .map(|&(j, a)| (j, a.round()))
                    .filter(|&(_, a)| a != 0.0)
                    .collect();
                let mut act = 0.0;
                let mut covered = true;
                for &(j, a) in &coefficients {
                    match reference.get(&p.variables[j].name) {
                        Some(x) => act += a * x,
                        None => covered = false,
                    }
                }
                if !covered {
                    continue;
                }
                let rhs = if cons.rhs.is_finite() { cons.rhs.round().max(act) } else { cons.rhs };
                let lhs = if cons.lhs.is_finite() { cons.lhs.round().min(act) } else { cons.lhs };
                push(
                    cons_target(p, i),
                    Edit::RoundConstraint {
                        coefficients,
                        lhs,
                        rhs,
                    },
                );
            }
        }
    }
    out
}

/// Outward rounding of fractional bounds. Needs no reference solution, and
/// only ever enlarges the feasible region.
pub fn enumerate_relaxations(ctx: &Context<'_>) -> Vec<Modification> {
    let p = ctx.problem;
    p.variables
        .iter()
        .enumerate()
        .filter(|(_, v)| is_fractional(v.lower) || is_fractional(v.upper))
        .map(|(j, v)| Modification {
            kind: ModifierKind::VarRound,
            target: var_target(p, j),
            edit: Edit::RoundVariable {
                objective: v.objective,
                lower: v.lower.floor(),
                upper: v.upper.ceil(),
            },
        })
        .collect()
}

/// Splits `candidates` into at most `nbatches` consecutive batches of
/// `ceil(len / nbatches)` elements; only the last may be smaller.
pub fn plan_batches<T>(candidates: Vec<T>, nbatches: usize) -> Vec<Vec<T>> {
    let nbatches = nbatches.max(1);
    if candidates.is_empty() {
        return Vec::new();
    }
    let size = candidates.len().div_ceil(nbatches);
    let mut batches = Vec::with_capacity(candidates.len().div_ceil(size));
    let mut iter = candidates.into_iter();
    loop {
        let batch: Vec<T> = iter.by_ref().take(size).collect();
        if batch.is_empty() {
            break;
        }
        batches.push(batch);
    }
    batches
}

/// Result of [`apply_batch`].
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub problem: Problem,
    pub settings: Settings,
    /// Modifications skipped because their target no longer matched.
    pub stale: usize,
}

/// Applies `batch` in order to copies of `problem` and `settings`.
///
/// All targets are resolved against `problem` as given: deletions are
/// recorded first and carried out once every edit has been applied.
pub fn apply_batch(problem: &Problem, settings: &Settings, batch: &[Modification]) -> Applied {
    let mut p = problem.clone();
    let mut s = settings.clone();
    let mut row_gone = vec![false; p.num_conss()];
    let mut var_gone = vec![false; p.num_vars()];
    let mut stale = 0;

    for m in batch {
        let ok = match (&m.target, &m.edit) {
            (Target::Parameter(key), Edit::SetParameter { value }) => {
                s.set(key.clone(), value.clone());
                true
            }
            (Target::Constraint { index, name }, edit) => {
                let i = *index;
                if i >= p.num_conss() || row_gone[i] || p.constraints[i].name != *name {
                    false
                } else {
                    apply_row_edit(&mut p, &var_gone, i, edit, &mut row_gone)
                }
            }
            (Target::Variable { index, name }, edit) => {
                let j = *index;
                if j >= p.num_vars() || var_gone[j] || p.variables[j].name != *name {
                    false
                } else {
                    apply_var_edit(&mut p, &row_gone, j, edit, &mut var_gone)
                }
            }
            _ => false,
        };
        if !ok {
            stale += 1;
        }
    }

    if row_gone.iter().any(|&g| g) {
        let mut i = 0;
        p.constraints.retain(|_| {
            let keep = !row_gone[i];
            i += 1;
            keep
        });
    }
    if var_gone.iter().any(|&g| g) {
        let mut remap = vec![usize::MAX; var_gone.len()];
        let mut next = 0;
        for (j, &gone) in var_gone.iter().enumerate() {
            if !gone {
                remap[j] = next;
                next += 1;
            }
        }
        let mut j = 0;
        p.variables.retain(|_| {
            let keep = !var_gone[j];
            j += 1;
            keep
        });
        for cons in &mut p.constraints {
            if cons.coefficients.iter().any(|&(j, _)| remap[j] != j) {
                let cons = std::sync::Arc::make_mut(cons);
                for entry in &mut cons.coefficients {
                    entry.0 = remap[entry.0];
                }
            }
        }
    }
    Applied {
        problem: p,
        settings: s,
        stale,
    }
}

fn shift_sides(cons: &mut Constraint, amount: f64) {
    if cons.lhs.is_finite() {
        cons.lhs -= amount;
    }
    if cons.rhs.is_finite() {
        cons.rhs -= amount;
    }
}

fn apply_row_edit(p: &mut Problem, var_gone: &[bool], i: usize, edit: &Edit, row_gone: &mut [bool]) -> bool {
    match edit {
        Edit::DeleteConstraint => {
            row_gone[i] = true;
            true
        }
        Edit::DeleteCoefficient { var, value } => {
            let j = *var;
            let tol = Tolerances::default();
            if j >= p.num_vars() || var_gone[j] || !p.variables[j].is_fixed(&tol) {
                return false;
            }
            let Some(pos) = p.constraints[i].coefficients.iter().position(|&(k, _)| k == j) else {
                return false;
            };
            let cons = std::sync::Arc::make_mut(&mut p.constraints[i]);
            let (_, a) = cons.coefficients.remove(pos);
            shift_sides(cons, a * value);
            true
        }
        Edit::FixSide { value } => {
            let cons = std::sync::Arc::make_mut(&mut p.constraints[i]);
            cons.lhs = *value;
            cons.rhs = *value;
            true
        }
        Edit::RoundConstraint { coefficients, lhs, rhs } => {
            if coefficients.iter().any(|&(j, _)| j >= p.num_vars() || var_gone[j]) {
                return false;
            }
            let cons = std::sync::Arc::make_mut(&mut p.constraints[i]);
            cons.coefficients = coefficients.clone();
            cons.lhs = *lhs;
            cons.rhs = *rhs;
            true
        }
        _ => false,
    }
}

fn apply_var_edit(p: &mut Problem, row_gone: &[bool], j: usize, edit: &Edit, var_gone: &mut [bool]) -> bool {
    match edit {
        Edit::FixVariable { value } => {
            let var = &mut p.variables[j];
            var.lower = *value;
            var.upper = *value;
            true
        }
        Edit::RemoveVariable { value } => {
            if !p.variables[j].is_fixed(&Tolerances::default()) {
                return false;
            }
            for (i, cons) in p.constraints.iter_mut().enumerate() {
                if row_gone[i] {
                    continue;
                }
                if let Ok(pos) = cons.coefficients.binary_search_by_key(&j, |&(k, _)| k) {
                    let cons = std::sync::Arc::make_mut(cons);
                    let (_, a) = cons.coefficients.remove(pos);
                    shift_sides(cons, a * value);
                }
            }
            p.offset += p.variables[j].objective * value;
            var_gone[j] = true;
            true
        }
        Edit::ZeroObjective => {
            p.variables[j].objective = 0.0;
            true
        }
        Edit::RoundVariable { objective, lower, upper } => {
            let var = &mut p.variables[j];
            var.objective = *objective;
            var.lower = *lower;
            var.upper = *upper;
            true
        }
        _ => false,
    }
}

/// The pair being reduced plus everything needed to judge a solve.
#[derive(Debug, Clone)]
pub struct ReductionState {
    pub problem: Problem,
    pub settings: Settings,
    pub target_settings: Settings,
    pub reference: Option<Solution>,
    pub tol: Tolerances,
}

impl ReductionState {
    pub fn context(&self) -> Context<'_> {
        Context {
            problem: &self.problem,
            settings: &self.settings,
            target_settings: &self.target_settings,
            reference: self.reference.as_ref(),
            tol: &self.tol,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ModifierOptions {
    /// Upper bound on solves per invocation; `None` tests every candidate
    /// on its own.
    pub nbatches: Option<usize>,
    pub passcodes: Passcodes,
    pub eval: EvalMode,
    pub limits: SolveLimits,
}

/// One solve performed by [`run_modifier`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveEvent {
    pub kind: ModifierKind,
    pub batch: usize,
    pub batch_size: usize,
    pub code: FailCode,
    pub kept: bool,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModifierReport {
    pub candidates: usize,
    pub batches: usize,
    pub solves: usize,
    pub kept_batches: usize,
    pub kept_modifications: usize,
    pub stale: usize,
}

/// Solves `problem`/`settings` once and judges the result.
pub fn solve_and_evaluate(
    backend: &mut dyn Backend,
    problem: &Problem,
    settings: &Settings,
    reference: Option<&Solution>,
    options: &ModifierOptions,
    tol: &Tolerances,
) -> Result<FailCode, BackendError> {
    backend.setup(problem, settings, &options.limits)?;
    let outcome = backend.solve()?;
    Ok(match options.eval {
        EvalMode::Bugs => evaluate(&outcome, problem, reference, &options.passcodes, tol),
        EvalMode::Infeasibility => evaluate_infeasibility(&outcome),
    })
}

/// Runs one modifier invocation: enumerate, batch, and for each batch apply,
/// solve, evaluate, then keep or revert.
///
/// The batch plan is fixed up front. Later batches are applied on top of
/// the kept ones, so a batch whose targets were already removed is skipped
/// and counted as stale.
pub fn run_modifier(
    modifier: Modifier,
    backend: &mut dyn Backend,
    state: &mut ReductionState,
    options: &ModifierOptions,
    on_solve: &mut dyn FnMut(&SolveEvent),
) -> Result<ModifierReport, BackendError> {
    let candidates = modifier.candidates(&state.context());
    let mut report = ModifierReport {
        candidates: candidates.len(),
        ..ModifierReport::default()
    };
    if candidates.is_empty() {
        return Ok(report);
    }
    let nbatches = options.nbatches.unwrap_or(candidates.len());
    let batches = plan_batches(candidates, nbatches);
    report.batches = batches.len();

    let base_problem = state.problem.clone();
    let base_settings = state.settings.clone();
    let mut kept: Vec<Modification> = Vec::new();

    for (index, batch) in batches.into_iter().enumerate() {
        let mut trial = kept.clone();
        trial.extend(batch.iter().cloned());
        let applied = apply_batch(&base_problem, &base_settings, &trial);
        if applied.problem == state.problem && applied.settings == state.settings {
            report.stale += batch.len();
            continue;
        }
        let started = Instant::now();
        let code = solve_and_evaluate(
            backend,
            &applied.problem,
            &applied.settings,
            state.reference.as_ref(),
            options,
            &state.tol,
        )?;
        report.solves += 1;
        let reproduced = !code.is_pass();
        on_solve(&SolveEvent {
            kind: modifier.kind,
            batch: index,
            batch_size: batch.len(),
            code,
            kept: reproduced,
            wall_time: started.elapsed(),
        });
        if reproduced {
            report.kept_batches += 1;
            report.kept_modifications += batch.len();
            kept.extend(batch);
            state.problem = applied.problem;
            state.settings = applied.settings;
        }
    }
    if !kept.is_empty() {
        report.stale = apply_batch(&base_problem, &base_settings, &kept).stale;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_feasible, Variable};
    use crate::solver::{SolveOutcome, SolveStatus};

    fn small_binary() -> Problem {
        let mut p = Problem::new("small");
        p.add_variable(Variable::binary("x1", -1.0));
        p.add_variable(Variable::binary("x2", 0.0));
        p.add_constraint(Constraint::new("c1", vec![(0, 1.0), (1, 1.0)], f64::NEG_INFINITY, 1.0));
        p
    }

    fn ctx<'a>(p: &'a Problem, s: &'a Settings, t: &'a Settings, r: &'a Solution, tol: &'a Tolerances) -> Context<'a> {
        Context {
            problem: p,
            settings: s,
            target_settings: t,
            reference: Some(r),
            tol,
        }
    }

    #[test]
    fn priorities_follow_listing() {
        let priorities: Vec<_> = ModifierKind::ALL.iter().map(|k| k.priority()).collect();
        assert_eq!(priorities, (1..=9).collect::<Vec<_>>());
    }

    #[test]
    fn variable_fixes_to_reference() {
        let p = small_binary();
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x1", 1.0), ("x2", 1.0)].into_iter().collect();
        let cands = enumerate_candidates(ModifierKind::Variable, &ctx(&p, &s, &s, &reference, &tol));
        assert_eq!(cands.len(), 2);
        assert_eq!(
            cands[1],
            Modification {
                kind: ModifierKind::Variable,
                target: Target::Variable {
                    index: 1,
                    name: "x2".into()
                },
                edit: Edit::FixVariable { value: 1.0 },
            }
        );
    }

    #[test]
    fn side_fixes_to_reference_activity() {
        let mut p = small_binary();
        std::sync::Arc::make_mut(&mut p.constraints[0]).lhs = 0.0;
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x1", 1.0), ("x2", 0.0)].into_iter().collect();
        let cands = enumerate_candidates(ModifierKind::Side, &ctx(&p, &s, &s, &reference, &tol));
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].edit, Edit::FixSide { value: 1.0 });
        let applied = apply_batch(&p, &s, &cands);
        assert_eq!((applied.problem.constraints[0].lhs, applied.problem.constraints[0].rhs), (1.0, 1.0));
    }

    #[test]
    fn equality_rows_have_no_side_candidate() {
        let mut p = small_binary();
        std::sync::Arc::make_mut(&mut p.constraints[0]).lhs = 1.0;
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x1", 1.0), ("x2", 0.0)].into_iter().collect();
        assert!(enumerate_candidates(ModifierKind::Side, &ctx(&p, &s, &s, &reference, &tol)).is_empty());
    }

    #[test]
    fn setting_candidates_only_for_differing_keys() {
        let p = small_binary();
        let tol = Tolerances::default();
        let reference: Solution = [("x1", 1.0), ("x2", 0.0)].into_iter().collect();
        let current: Settings = [("a", "1"), ("b", "2")].into_iter().collect();
        assert!(enumerate_candidates(ModifierKind::Setting, &ctx(&p, &current, &current, &reference, &tol)).is_empty());
        let target: Settings = [("a", "1"), ("b", "3"), ("c", "x")].into_iter().collect();
        let cands = enumerate_candidates(ModifierKind::Setting, &ctx(&p, &current, &target, &reference, &tol));
        assert_eq!(cands.len(), 2);
        let applied = apply_batch(&p, &current, &cands);
        assert_eq!(applied.settings, target);
    }

    #[test]
    fn batch_arithmetic() {
        let sizes = |n: usize, k: usize| plan_batches((0..n).collect(), k).iter().map(Vec::len).collect::<Vec<_>>();
        assert_eq!(sizes(7, 3), vec![3, 3, 1]);
        assert_eq!(sizes(5, 100), vec![1; 5]);
        assert_eq!(sizes(100_000, 100), vec![1000; 100]);
        assert!(sizes(0, 4).is_empty());
        let flat: Vec<usize> = plan_batches((0..10).collect(), 4).concat();
        assert_eq!(flat, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn empty_batch_copies() {
        let p = small_binary();
        let s: Settings = [("k", "v")].into_iter().collect();
        let applied = apply_batch(&p, &s, &[]);
        assert_eq!(applied.problem, p);
        assert_eq!(applied.settings, s);
        assert_eq!(applied.stale, 0);
    }

    #[test]
    fn constraint_batch_deletes_rows() {
        let mut p = Problem::new("three");
        p.add_variable(Variable::continuous("x", 0.0, 1.0, 0.0));
        for i in 0..3 {
            p.add_constraint(Constraint::new(format!("r{i}"), vec![(0, 1.0)], 0.0, 1.0));
        }
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x", 0.5)].into_iter().collect();
        let cands = enumerate_candidates(ModifierKind::Constraint, &ctx(&p, &s, &s, &reference, &tol));
        let applied = apply_batch(&p, &s, &cands[1..3]);
        assert_eq!(applied.problem.num_conss(), 1);
        assert_eq!(applied.problem.constraints[0].name, "r0");
        // The original is untouched.
        assert_eq!(p.num_conss(), 3);
    }

    #[test]
    fn fixing_folds_variable_into_sides() {
        let mut p = Problem::new("fold");
        p.add_variable(Variable::integer("x", 3.0, 3.0, 2.0));
        p.add_variable(Variable::continuous("y", 0.0, 10.0, 1.0));
        p.add_constraint(Constraint::new("r", vec![(0, 2.0), (1, 1.0)], f64::NEG_INFINITY, 10.0));
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x", 3.0), ("y", 1.0)].into_iter().collect();
        let cands = enumerate_candidates(ModifierKind::Fixing, &ctx(&p, &s, &s, &reference, &tol));
        assert_eq!(cands.len(), 1);
        let applied = apply_batch(&p, &s, &cands);
        let q = applied.problem;
        assert_eq!(q.num_vars(), 1);
        assert_eq!(q.variables[0].name, "y");
        assert_eq!(q.constraints[0].coefficients, vec![(0, 1.0)]);
        assert_eq!(q.constraints[0].rhs, 4.0);
        assert_eq!(q.offset, 6.0);
    }

    #[test]
    fn coefficient_balances_sides() {
        let mut p = Problem::new("coef");
        p.add_variable(Variable::continuous("x", 2.5, 2.5, 0.0));
        p.add_variable(Variable::continuous("y", 0.0, 10.0, 0.0));
        p.add_constraint(Constraint::new("r", vec![(0, 2.0), (1, 1.0)], 1.0, 8.0));
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x", 2.5), ("y", 1.0)].into_iter().collect();
        let cands = enumerate_candidates(ModifierKind::Coefficient, &ctx(&p, &s, &s, &reference, &tol));
        assert_eq!(cands.len(), 1);
        let q = apply_batch(&p, &s, &cands).problem;
        assert_eq!(q.num_vars(), 2);
        assert_eq!(q.constraints[0].coefficients, vec![(1, 1.0)]);
        assert_eq!((q.constraints[0].lhs, q.constraints[0].rhs), (-4.0, 3.0));
    }

    #[test]
    fn rounding_relaxes_to_reference() {
        let mut p = Problem::new("round");
        p.add_variable(Variable::continuous("x", 0.4, 2.6, 1.5));
        p.add_variable(Variable::continuous("y", 0.0, 3.0, 2.0));
        p.add_constraint(Constraint::new("r", vec![(0, 0.5), (1, 1.25)], 0.3, 2.5));
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x", 0.45), ("y", 1.0)].into_iter().collect();
        let c = ctx(&p, &s, &s, &reference, &tol);
        let var = enumerate_candidates(ModifierKind::VarRound, &c);
        assert_eq!(var.len(), 1);
        assert_eq!(
            var[0].edit,
            Edit::RoundVariable {
                objective: 2.0,
                lower: 0.0,
                upper: 3.0
            }
        );
        let reference_high: Solution = [("x", 2.55), ("y", 1.0)].into_iter().collect();
        let c_high = ctx(&p, &s, &s, &reference_high, &tol);
        assert_eq!(
            enumerate_candidates(ModifierKind::VarRound, &c_high)[0].edit,
            Edit::RoundVariable {
                objective: 2.0,
                lower: 0.0,
                upper: 3.0
            }
        );

        let cons = enumerate_candidates(ModifierKind::ConsRound, &c);
        assert_eq!(cons.len(), 1);
        // Halves round away from zero: 0.5 -> 1, 1.25 -> 1, 2.5 -> 3.
        assert_eq!(
            cons[0].edit,
            Edit::RoundConstraint {
                coefficients: vec![(0, 1.0), (1, 1.0)],
                lhs: 0.0,
                rhs: 3.0
            }
        );
        let q = apply_batch(&p, &s, &[var[0].clone(), cons[0].clone()]).problem;
        assert!(is_feasible(&q, &reference, &tol).feasible);
    }

    #[test]
    fn integral_data_has_no_rounding_candidates() {
        let mut p = Problem::new("int");
        p.add_variable(Variable::integer("x", 0.0, 3.0, 2.0));
        p.add_constraint(Constraint::new("r", vec![(0, 2.0)], 1.0, 5.0));
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x", 1.0)].into_iter().collect();
        let c = ctx(&p, &s, &s, &reference, &tol);
        assert!(enumerate_candidates(ModifierKind::VarRound, &c).is_empty());
        assert!(enumerate_candidates(ModifierKind::ConsRound, &c).is_empty());
    }

    #[test]
    fn relaxations_round_outward() {
        let mut p = Problem::new("relax");
        p.add_variable(Variable::continuous("x", 0.4, 2.6, 1.5));
        let s = Settings::new();
        let tol = Tolerances::default();
        let c = Context {
            problem: &p,
            settings: &s,
            target_settings: &s,
            reference: None,
            tol: &tol,
        };
        let r = enumerate_relaxations(&c);
        assert_eq!(
            r[0].edit,
            Edit::RoundVariable {
                objective: 1.5,
                lower: 0.0,
                upper: 3.0
            }
        );
        assert!(enumerate_candidates(ModifierKind::Variable, &c).is_empty());
    }

    #[test]
    fn stale_candidates_are_skipped() {
        let mut p = Problem::new("stale");
        p.add_variable(Variable::continuous("x", 1.0, 1.0, 0.0));
        p.add_constraint(Constraint::new("r", vec![(0, 1.0)], 0.0, 2.0));
        let s = Settings::new();
        let tol = Tolerances::default();
        let reference: Solution = [("x", 1.0)].into_iter().collect();
        let c = ctx(&p, &s, &s, &reference, &tol);
        let del = enumerate_candidates(ModifierKind::Constraint, &c);
        let coef = enumerate_candidates(ModifierKind::Coefficient, &c);
        let applied = apply_batch(&p, &s, &[del[0].clone(), del[0].clone(), coef[0].clone()]);
        assert_eq!(applied.stale, 2);
        assert_eq!(applied.problem.num_conss(), 0);
    }

    /// Replays a fixed list of outcomes.
    struct Scripted {
        outcomes: Vec<SolveOutcome>,
        calls: usize,
    }

    impl Backend for Scripted {
        fn setup(&mut self, _: &Problem, _: &Settings, _: &SolveLimits) -> Result<(), BackendError> {
            Ok(())
        }
        fn solve(&mut self) -> Result<SolveOutcome, BackendError> {
            let o = self.outcomes[self.calls % self.outcomes.len()].clone();
            self.calls += 1;
            Ok(o)
        }
        fn write(&self, _: &std::path::Path, _: &std::path::Path) -> Result<(), BackendError> {
            Ok(())
        }
    }

    fn state_for(p: Problem) -> ReductionState {
        let reference = Solution::from_dense(&p, &vec![0.0; p.num_vars()]);
        ReductionState {
            problem: p,
            settings: Settings::new(),
            target_settings: Settings::new(),
            reference: Some(reference),
            tol: Tolerances::default(),
        }
    }

    fn rows(n: usize) -> Problem {
        let mut p = Problem::new("rows");
        p.add_variable(Variable::continuous("x", 0.0, 1.0, 0.0));
        for i in 0..n {
            p.add_constraint(Constraint::new(format!("r{i}"), vec![(0, 1.0)], f64::NEG_INFINITY, 1.0));
        }
        p
    }

    #[test]
    fn passing_batches_are_reverted() {
        let mut backend = Scripted {
            outcomes: vec![SolveOutcome::bare(SolveStatus::LimitReached)],
            calls: 0,
        };
        let mut state = state_for(rows(4));
        let before = state.problem.clone();
        let report = run_modifier(
            Modifier::new(ModifierKind::Constraint),
            &mut backend,
            &mut state,
            &ModifierOptions::default(),
            &mut |_| {},
        )
        .unwrap();
        assert_eq!(report.solves, 4);
        assert_eq!(report.kept_batches, 0);
        assert_eq!(state.problem, before);
    }

    #[test]
    fn failing_batches_are_kept() {
        // A claimed infeasibility cuts off the all-zero reference: dual fail.
        let mut backend = Scripted {
            outcomes: vec![
                SolveOutcome::bare(SolveStatus::Infeasible),
                SolveOutcome::bare(SolveStatus::LimitReached),
            ],
            calls: 0,
        };
        let mut state = state_for(rows(4));
        let mut codes = Vec::new();
        let report = run_modifier(
            Modifier::new(ModifierKind::Constraint),
            &mut backend,
            &mut state,
            &ModifierOptions {
                nbatches: Some(4),
                ..ModifierOptions::default()
            },
            &mut |e| codes.push(e.code),
        )
        .unwrap();
        assert_eq!(codes, vec![FailCode::DUAL, FailCode::PASS, FailCode::DUAL, FailCode::PASS]);
        assert_eq!(report.kept_batches, 2);
        let names: Vec<_> = state.problem.constraints.iter().map(|c| c.name.clone()).collect();
        assert_eq!(names, ["r1", "r3"]);
    }
}
