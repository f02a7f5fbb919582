//! Presolve: fixed-variable substitution, row normalization, empty and
//! singleton rows, redundancy detection and bound propagation on integer
//! variables, repeated in rounds until nothing changes.

use super::FaultSpec;
use crate::model::{Constraint, Problem, VarType, Variable};

/// Presolve switches taken from the solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresolveOptions {
    pub propagation: bool,
    pub normalization: bool,
    pub max_rounds: usize,
}

impl Default for PresolveOptions {
    fn default() -> Self {
        Self {
            propagation: true,
            normalization: true,
            max_rounds: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresolveStatus {
    Infeasible,
    /// Every variable was fixed and every row removed.
    Solved,
    Reduced,
}

/// Presolved problem plus what is needed to map solutions back.
#[derive(Debug, Clone, PartialEq)]
pub struct Presolved {
    pub status: PresolveStatus,
    pub problem: Problem,
    /// Original index of each reduced variable.
    pub origin: Vec<usize>,
    /// Value of every original variable removed by presolve.
    pub fixed: Vec<Option<f64>>,
}

impl Presolved {
    /// Leaves the problem untouched.
    pub fn identity(problem: &Problem) -> Self {
        Self {
            status: PresolveStatus::Reduced,
            problem: problem.clone(),
            origin: (0..problem.num_vars()).collect(),
            fixed: vec![None; problem.num_vars()],
        }
    }

    /// Expands a reduced point to the original variables.
    pub fn postsolve(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (k, &j) in self.origin.iter().enumerate() {
            full[j] = reduced[k];
        }
        full
    }

    /// Expands a reduced direction; removed variables do not move.
    pub fn postsolve_ray(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.fixed.len()];
        for (k, &j) in self.origin.iter().enumerate() {
            full[j] = reduced[k];
        }
        full
    }
}

const DELTA: f64 = 1e-6;
const EPSILON: f64 = 1e-9;

struct Row {
    coefs: Vec<(usize, f64)>,
    lhs: f64,
    rhs: f64,
    alive: bool,
    /// Product of the normalization divisors; tolerance checks undo it so a
    /// scaled row is judged like the original.
    scale: f64,
}

struct Work {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    integer: Vec<bool>,
    alive: Vec<bool>,
    fixed: Vec<Option<f64>>,
    rows: Vec<Row>,
    offset: f64,
}

enum Infeasible {
    Yes,
}

fn relative_excess(act: f64, side: f64) -> f64 {
    (act - side) / 1f64.max(side.abs()).max(act.abs())
}

/// Activity bounds of a row. With `shifted`, every term uses the bounds of
/// the row's first entry instead of its own.
fn activity_bounds(row: &Row, lower: &[f64], upper: &[f64], excluded: Option<usize>, shifted: bool) -> (f64, f64) {
    let mut min = 0.0;
    let mut max = 0.0;
    let first = row.coefs.first().map(|&(j, _)| j);
    for &(j, a) in &row.coefs {
        if Some(j) == excluded {
            continue;
        }
        let src = if shifted { first.unwrap_or(j) } else { j };
        let (l, u) = (lower[src], upper[src]);
        if a > 0.0 {
            min += a * l;
            max += a * u;
        } else {
            min += a * u;
            max += a * l;
        }
    }
    // inf - inf cannot occur: each sum only collects one sign of infinity.
    (if min.is_nan() { f64::NEG_INFINITY } else { min }, if max.is_nan() { f64::INFINITY } else { max })
}

/// Maximal activity of `row` in `problem` computed with the bounds of the
/// row's first entry for every term.
pub fn shifted_max_activity(problem: &Problem, row: usize, excluded: Option<usize>) -> f64 {
    let cons = &problem.constraints[row];
    let r = Row {
        coefs: cons.coefficients.clone(),
        lhs: cons.lhs,
        rhs: cons.rhs,
        alive: true,
        scale: 1.0,
    };
    let lower: Vec<f64> = problem.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = problem.variables.iter().map(|v| v.upper).collect();
    activity_bounds(&r, &lower, &upper, excluded, true).1
}

/// Mirror of [`shifted_max_activity`].
pub fn shifted_min_activity(problem: &Problem, row: usize, excluded: Option<usize>) -> f64 {
    let cons = &problem.constraints[row];
    let r = Row {
        coefs: cons.coefficients.clone(),
        lhs: cons.lhs,
        rhs: cons.rhs,
        alive: true,
        scale: 1.0,
    };
    let lower: Vec<f64> = problem.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = problem.variables.iter().map(|v| v.upper).collect();
    activity_bounds(&r, &lower, &upper, excluded, true).0
}

/// Integer upper bound from `a x <= rhs - rest` with quotient `q`.
///
/// The safe variant rounds `q` up against the feasibility tolerance and
/// keeps that value when it still satisfies the row within tolerance;
/// otherwise the floor is valid. The unsafe variant floors unless `q` is
/// within the zero tolerance of an integer.
pub fn round_upper(q: f64, unsafe_rounding: bool, satisfies: impl Fn(f64) -> bool) -> f64 {
    if unsafe_rounding {
        return (q + EPSILON).floor();
    }
    let c = (q - DELTA).ceil();
    if c <= q || satisfies(c) {
        c
    } else {
        q.floor()
    }
}

/// Mirror of [`round_upper`] for lower bounds.
pub fn round_lower(q: f64, unsafe_rounding: bool, satisfies: impl Fn(f64) -> bool) -> f64 {
    if unsafe_rounding {
        return (q - EPSILON).ceil();
    }
    let c = (q + DELTA).floor();
    if c >= q || satisfies(c) {
        c
    } else {
        q.ceil()
    }
}

/// Whether bound candidate `x` of a variable with coefficient `a` satisfies
/// the row side it was derived from, with the rest of the row at the
/// activity bound (`min` for the right side, `max` for the left side).
#[allow(clippy::too_many_arguments)]
fn side_fits(a: f64, x: f64, upper: bool, min: f64, max: f64, lhs: f64, rhs: f64, scale: f64) -> bool {
    if upper == (a > 0.0) {
        relative_excess((min + a * x) * scale, rhs * scale) < DELTA
    } else {
        relative_excess(lhs * scale, (max + a * x) * scale) < DELTA
    }
}

impl Work {
    fn new(problem: &Problem) -> Self {
        let n = problem.num_vars();
        let mut w = Work {
            lower: problem.variables.iter().map(|v| v.lower).collect(),
            upper: problem.variables.iter().map(|v| v.upper).collect(),
            cost: problem.variables.iter().map(|v| v.objective).collect(),
            integer: problem.variables.iter().map(Variable::is_integer).collect(),
            alive: vec![true; n],
            fixed: vec![None; n],
            rows: problem
                .constraints
                .iter()
                .map(|c| Row {
                    coefs: c.coefficients.clone(),
                    lhs: c.lhs,
                    rhs: c.rhs,
                    alive: true,
                    scale: 1.0,
                })
                .collect(),
            offset: problem.offset,
        };
        for j in 0..n {
            if w.integer[j] {
                w.lower[j] = (w.lower[j] - DELTA).ceil();
                w.upper[j] = (w.upper[j] + DELTA).floor();
            }
        }
        w
    }

    fn check_bounds(&self, j: usize) -> Result<(), Infeasible> {
        let (l, u) = (self.lower[j], self.upper[j]);
        let slack = if self.integer[j] { 0.0 } else { DELTA * 1f64.max(l.abs()).max(u.abs()) };
        if l > u + slack {
            Err(Infeasible::Yes)
        } else {
            Ok(())
        }
    }

    fn substitute_fixed(&mut self) -> bool {
        let mut changed = false;
        for j in 0..self.lower.len() {
            if !self.alive[j] || self.upper[j] - self.lower[j] >= EPSILON {
                continue;
            }
            let v = self.lower[j];
            for row in self.rows.iter_mut().filter(|r| r.alive) {
                if let Ok(pos) = row.coefs.binary_search_by_key(&j, |&(k, _)| k) {
                    let (_, a) = row.coefs.remove(pos);
                    if row.lhs.is_finite() {
                        row.lhs -= a * v;
                    }
                    if row.rhs.is_finite() {
                        row.rhs -= a * v;
                    }
                }
            }
            self.offset += self.cost[j] * v;
            self.fixed[j] = Some(v);
            self.alive[j] = false;
            changed = true;
        }
        changed
    }

    fn normalize(&mut self, faults: &FaultSpec) -> bool {
        let mut changed = false;
        for row in self.rows.iter_mut().filter(|r| r.alive) {
            let Some(&(_, lead)) = row.coefs.first() else {
                continue;
            };
            let s = lead.abs();
            let vanishes = |side: f64| side.is_finite() && side != 0.0 && (side / s).abs() < DELTA;
            let (mut lhs, mut rhs) = (row.lhs / s, row.rhs / s);
            if vanishes(row.lhs) || vanishes(row.rhs) {
                // The threshold applies to the total divisor, so a row
                // normalized in an earlier round still counts as scaled.
                if !(faults.f4 && s * row.scale >= faults.f4_threshold) {
                    continue;
                }
                if vanishes(row.lhs) {
                    lhs = 0.0;
                }
                if vanishes(row.rhs) {
                    rhs = 0.0;
                }
            }
            if s == 1.0 && lhs == row.lhs && rhs == row.rhs {
                continue;
            }
            for entry in &mut row.coefs {
                entry.1 /= s;
            }
            row.lhs = lhs;
            row.rhs = rhs;
            row.scale *= s;
            changed = true;
        }
        changed
    }

    /// Tightens the bounds of `j` to `[lo, hi]`, rounding safely (or not)
    /// for integer variables. `fits(x, upper)` tells whether value `x`, as an
    /// upper or lower bound candidate, satisfies the generating row side
    /// within tolerance.
    fn tighten(
        &mut self,
        j: usize,
        lo: Option<f64>,
        hi: Option<f64>,
        faults: &FaultSpec,
        fits: &dyn Fn(f64, bool) -> bool,
    ) -> Result<bool, Infeasible> {
        let mut changed = false;
        if let Some(q) = hi.filter(|q| q.is_finite()) {
            let q = if self.integer[j] { round_upper(q, faults.f3, |x| fits(x, true)) } else { q };
            if q < self.upper[j] - EPSILON * 1f64.max(q.abs()) {
                self.upper[j] = q;
                changed = true;
            }
        }
        if let Some(q) = lo.filter(|q| q.is_finite()) {
            let q = if self.integer[j] { round_lower(q, faults.f3, |x| fits(x, false)) } else { q };
            if q > self.lower[j] + EPSILON * 1f64.max(q.abs()) {
                self.lower[j] = q;
                changed = true;
            }
        }
        if changed {
            self.check_bounds(j)?;
        }
        Ok(changed)
    }

    fn empty_and_singleton_rows(&mut self, faults: &FaultSpec) -> Result<bool, Infeasible> {
        let mut changed = false;
        for i in 0..self.rows.len() {
            if !self.rows[i].alive {
                continue;
            }
            match self.rows[i].coefs.len() {
                0 => {
                    let row = &self.rows[i];
                    if relative_excess(0.0, row.rhs * row.scale) >= DELTA || relative_excess(row.lhs * row.scale, 0.0) >= DELTA {
                        return Err(Infeasible::Yes);
                    }
                    self.rows[i].alive = false;
                    changed = true;
                }
                1 => {
                    let (j, a) = self.rows[i].coefs[0];
                    let (lhs, rhs, scale) = (self.rows[i].lhs, self.rows[i].rhs, self.rows[i].scale);
                    let fits = move |x: f64, upper: bool| side_fits(a, x, upper, 0.0, 0.0, lhs, rhs, scale);
                    let (lo, hi) = if a > 0.0 { (lhs / a, rhs / a) } else { (rhs / a, lhs / a) };
                    self.tighten(j, Some(lo), Some(hi), faults, &fits)?;
                    self.rows[i].alive = false;
                    changed = true;
                }
                _ => {}
            }
        }
        Ok(changed)
    }

    fn redundancy(&mut self) -> Result<bool, Infeasible> {
        let mut changed = false;
        for row in self.rows.iter_mut().filter(|r| r.alive) {
            let (min, max) = activity_bounds(row, &self.lower, &self.upper, None, false);
            if row.rhs.is_finite() && min.is_finite() && relative_excess(min * row.scale, row.rhs * row.scale) >= DELTA {
                return Err(Infeasible::Yes);
            }
            if row.lhs.is_finite() && max.is_finite() && relative_excess(row.lhs * row.scale, max * row.scale) >= DELTA {
                return Err(Infeasible::Yes);
            }
            if row.rhs.is_finite() && max <= row.rhs + EPSILON * 1f64.max(row.rhs.abs()) {
                row.rhs = f64::INFINITY;
                changed = true;
            }
            if row.lhs.is_finite() && min >= row.lhs - EPSILON * 1f64.max(row.lhs.abs()) {
                row.lhs = f64::NEG_INFINITY;
                changed = true;
            }
            if row.lhs == f64::NEG_INFINITY && row.rhs == f64::INFINITY {
                row.alive = false;
                changed = true;
            }
        }
        Ok(changed)
    }

    fn propagate(&mut self, faults: &FaultSpec) -> Result<bool, Infeasible> {
        let mut changed = false;
        for i in 0..self.rows.len() {
            if !self.rows[i].alive {
                continue;
            }
            let coefs = self.rows[i].coefs.clone();
            let (lhs, rhs, scale) = (self.rows[i].lhs, self.rows[i].rhs, self.rows[i].scale);
            for &(k, a) in &coefs {
                if !self.integer[k] || !self.alive[k] {
                    continue;
                }
                let (min, max) = activity_bounds(&self.rows[i], &self.lower, &self.upper, Some(k), faults.f1);
                let mut lo = None;
                let mut hi = None;
                if rhs.is_finite() && min.is_finite() {
                    let q = (rhs - min) / a;
                    if a > 0.0 {
                        hi = Some(q);
                    } else {
                        lo = Some(q);
                    }
                }
                if lhs.is_finite() && max.is_finite() {
                    let q = (lhs - max) / a;
                    if a > 0.0 {
                        lo = Some(q);
                    } else {
                        hi = Some(q);
                    }
                }
                if lo.is_none() && hi.is_none() {
                    continue;
                }
                let fits = move |x: f64, upper: bool| side_fits(a, x, upper, min, max, lhs, rhs, scale);
                if self.tighten(k, lo, hi, faults, &fits)? {
                    changed = true;
                }
            }
        }
        Ok(changed)
    }

    fn run(&mut self, options: &PresolveOptions, faults: &FaultSpec) -> Result<(), Infeasible> {
        for j in 0..self.lower.len() {
            self.check_bounds(j)?;
        }
        for _ in 0..options.max_rounds {
            let mut changed = self.substitute_fixed();
            if options.normalization {
                changed |= self.normalize(faults);
            }
            changed |= self.empty_and_singleton_rows(faults)?;
            changed |= self.redundancy()?;
            // Propagation is the expensive step; it only runs once the cheap
            // reductions have stalled.
            if options.propagation && !changed {
                changed |= self.propagate(faults)?;
            }
            if !changed {
                break;
            }
        }
        self.substitute_fixed();
        self.empty_and_singleton_rows(faults)?;
        self.substitute_fixed();
        Ok(())
    }
}

/// Presolves `problem`.
pub fn presolve(problem: &Problem, options: &PresolveOptions, faults: &FaultSpec) -> Presolved {
    let mut w = Work::new(problem);
    let n = problem.num_vars();
    if w.run(options, faults).is_err() {
        return Presolved {
            status: PresolveStatus::Infeasible,
            problem: Problem::new(problem.name.clone()),
            origin: Vec::new(),
            fixed: vec![None; n],
        };
    }
    let mut reduced = Problem::new(problem.name.clone());
    reduced.offset = w.offset;
    let mut map = vec![usize::MAX; n];
    let mut origin = Vec::new();
    for j in 0..n {
        if !w.alive[j] {
            continue;
        }
        let v = &problem.variables[j];
        map[j] = origin.len();
        origin.push(j);
        reduced.add_variable(Variable {
            name: v.name.clone(),
            lower: w.lower[j],
            upper: w.upper[j],
            objective: w.cost[j],
            var_type: if w.integer[j] { VarType::Integer } else { VarType::Continuous },
        });
    }
    for (i, row) in w.rows.iter().enumerate() {
        if !row.alive {
            continue;
        }
        let coefs = row.coefs.iter().map(|&(j, a)| (map[j], a)).collect();
        reduced.add_constraint(Constraint::new(problem.constraints[i].name.clone(), coefs, row.lhs, row.rhs));
    }
    let status = if reduced.num_vars() == 0 && reduced.num_conss() == 0 {
        PresolveStatus::Solved
    } else {
        PresolveStatus::Reduced
    };
    Presolved {
        status,
        problem: reduced,
        origin,
        fixed: w.fixed,
    }
}
