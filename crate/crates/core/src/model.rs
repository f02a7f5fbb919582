//! Core mixed-integer program data model.
//!
//! Problems are always stored in minimization form. Every numeric comparison
//! the rest of the crate performs goes through [`Tolerances`]: `epsilon` is
//! the zero tolerance (two numbers closer than it are equal) and `delta` is
//! the relative feasibility tolerance. A row `a^T x <= b` is feasible for a
//! point `x*` when
//!
//! ```text
//! (a^T x* - b) / max{1, |b|, |a^T x*|} < delta
//! ```
//!
//! and the mirrored expression holds for the left-hand side.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("solution has no value for variable `{0}`")]
    MissingValue(String),
    #[error("variable index {index} out of range for problem with {count} variables")]
    VariableIndex { index: usize, count: usize },
    #[error("constraint index {index} out of range for problem with {count} constraints")]
    ConstraintIndex { index: usize, count: usize },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
}

/// Numeric tolerances shared by every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Zero tolerance: `|a - b| < epsilon` means equal.
    pub epsilon: f64,
    /// Relative feasibility tolerance.
    pub delta: f64,
    /// Magnitudes at or above this are treated as infinite on input.
    pub infinity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            epsilon: 1e-9,
            delta: 1e-6,
            infinity: 1e20,
        }
    }
}

impl Tolerances {
    pub fn is_eq(&self, a: f64, b: f64) -> bool {
        if a.is_infinite() || b.is_infinite() {
            return a == b;
        }
        (a - b).abs() < self.epsilon
    }

    /// Maps values beyond the infinity threshold onto `±inf`.
    pub fn clamp_infinite(&self, value: f64) -> f64 {
        if value >= self.infinity {
            f64::INFINITY
        } else if value <= -self.infinity {
            f64::NEG_INFINITY
        } else {
            value
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Continuous,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    pub var_type: VarType,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            objective,
            var_type: VarType::Continuous,
        }
    }

    pub fn integer(name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> Self {
        Self {
            var_type: VarType::Integer,
            ..Self::continuous(name, lower, upper, objective)
        }
    }

    pub fn binary(name: impl Into<String>, objective: f64) -> Self {
        Self::integer(name, 0.0, 1.0, objective)
    }

    pub fn is_integer(&self) -> bool {
        self.var_type == VarType::Integer
    }

    /// A variable is fixed when its domain is narrower than `epsilon`.
    pub fn is_fixed(&self, tol: &Tolerances) -> bool {
        self.upper - self.lower < tol.epsilon
    }
}

/// A linear row `lhs <= sum a_j x_j <= rhs`.
///
/// Coefficients are kept sorted by variable index, without duplicates and
/// without explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coefficients: Vec<(usize, f64)>,
    pub lhs: f64,
    pub rhs: f64,
}

impl Constraint {
    /// Builds a row, sorting entries and merging duplicates. Zero entries
    /// are dropped.
    pub fn new(name: impl Into<String>, coefficients: Vec<(usize, f64)>, lhs: f64, rhs: f64) -> Self {
        let mut coefficients = coefficients;
        coefficients.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coefficients.len());
        for (j, a) in coefficients {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Self {
            name: name.into(),
            coefficients: merged,
            lhs,
            rhs,
        }
    }

    pub fn is_equality(&self, tol: &Tolerances) -> bool {
        tol.is_eq(self.lhs, self.rhs)
    }

    pub fn is_free(&self) -> bool {
        self.lhs == f64::NEG_INFINITY && self.rhs == f64::INFINITY
    }

    pub fn coefficient(&self, var: usize) -> Option<f64> {
        self.coefficients
            .binary_search_by_key(&var, |&(j, _)| j)
            .ok()
            .map(|pos| self.coefficients[pos].1)
    }
}

/// Objective sense of the source file. Problems are stored as minimization
/// regardless; this only controls how an instance is written back out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjSense {
    #[default]
    Minimize,
    Maximize,
}

/// A mixed-integer program in minimization form.
///
/// Constraints are reference counted so that the many trial copies a
/// reduction run creates share untouched rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Problem {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Arc<Constraint>>,
    pub offset: f64,
    pub sense: ObjSense,
}

impl Problem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn add_variable(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, cons: Constraint) -> usize {
        self.constraints.push(Arc::new(cons));
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_conss(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.coefficients.len()).sum()
    }

    pub fn size(&self) -> ProblemSize {
        ProblemSize {
            vars: self.num_vars(),
            conss: self.num_conss(),
            nonzeros: self.num_nonzeros(),
        }
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn constraint_index(&self, name: &str) -> Option<usize> {
        self.constraints.iter().position(|c| c.name == name)
    }

    /// Checks cross references and name uniqueness.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
        }
        seen.clear();
        for c in &self.constraints {
            if !seen.insert(c.name.as_str()) {
                return Err(ModelError::DuplicateName(c.name.clone()));
            }
            for &(j, _) in &c.coefficients {
                if j >= self.variables.len() {
                    return Err(ModelError::VariableIndex {
                        index: j,
                        count: self.variables.len(),
                    });
                }
            }
        }
        Ok(())
    }

    fn row(&self, index: usize) -> Result<&Constraint, ModelError> {
        self.constraints
            .get(index)
            .map(|c| c.as_ref())
            .ok_or(ModelError::ConstraintIndex {
                index,
                count: self.constraints.len(),
            })
    }
}

/// Counts used when reporting reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct ProblemSize {
    pub vars: usize,
    pub conss: usize,
    pub nonzeros: usize,
}

impl ProblemSize {
    /// Component-wise `<=`.
    pub fn dominated_by(&self, other: &ProblemSize) -> bool {
        self.vars <= other.vars && self.conss <= other.conss && self.nonzeros <= other.nonzeros
    }
}

impl fmt::Display for ProblemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vars, {} conss, {} nonzeros", self.vars, self.conss, self.nonzeros)
    }
}

/// Solver parameters as an ordered `name -> value` map. Values are opaque
/// strings here; only solver backends interpret them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Settings {
    pub entries: IndexMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Settings {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

/// Variable name to value. Values for variables that have since been removed
/// from a problem are kept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub values: IndexMap<String, f64>,
}

impl Solution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs problem variables positionally with `values`.
    pub fn from_dense(problem: &Problem, values: &[f64]) -> Self {
        Self {
            values: problem
                .variables
                .iter()
                .zip(values)
                .map(|(v, &x)| (v.name.clone(), x))
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn value_of(&self, problem: &Problem, var: usize) -> Result<f64, ModelError> {
        let name = &problem.variables[var].name;
        self.get(name).ok_or_else(|| ModelError::MissingValue(name.clone()))
    }

    /// Values in problem variable order.
    pub fn dense(&self, problem: &Problem) -> Result<Vec<f64>, ModelError> {
        (0..problem.num_vars()).map(|j| self.value_of(problem, j)).collect()
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for Solution {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        Self {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

/// Row activity `sum a_j x_j`, accumulated left to right in stored order.
pub fn activity(problem: &Problem, row: usize, solution: &Solution) -> Result<f64, ModelError> {
    let cons = problem.row(row)?;
    let mut sum = 0.0;
    for &(j, a) in &cons.coefficients {
        sum += a * solution.value_of(problem, j)?;
    }
    Ok(sum)
}

/// Dense counterpart of [`activity`].
pub fn dense_activity(cons: &Constraint, x: &[f64]) -> f64 {
    let mut sum = 0.0;
    for &(j, a) in &cons.coefficients {
        sum += a * x[j];
    }
    sum
}

/// Relative violation of a single side given the row activity.
fn side_violation(excess: f64, side: f64, activity: f64) -> f64 {
    let scale = 1f64.max(side.abs()).max(activity.abs());
    (excess / scale).max(0.0)
}

/// Relative violation of a row for a given activity; infinite sides
/// contribute nothing.
pub fn violation_for_activity(cons: &Constraint, act: f64) -> f64 {
    let mut worst = 0.0f64;
    if cons.rhs.is_finite() {
        worst = worst.max(side_violation(act - cons.rhs, cons.rhs, act));
    }
    if cons.lhs.is_finite() {
        worst = worst.max(side_violation(cons.lhs - act, cons.lhs, act));
    }
    worst
}

/// Scaled constraint violation of `solution` on row `row`, clipped at zero.
pub fn relative_violation(problem: &Problem, row: usize, solution: &Solution) -> Result<f64, ModelError> {
    let act = activity(problem, row, solution)?;
    Ok(violation_for_activity(problem.row(row)?, act))
}

/// Relative bound violation of value `x` for `var`.
pub fn bound_violation(var: &Variable, x: f64) -> f64 {
    let mut worst = 0.0f64;
    if var.lower.is_finite() {
        worst = worst.max((var.lower - x) / 1f64.max(var.lower.abs()));
    }
    if var.upper.is_finite() {
        worst = worst.max((x - var.upper) / 1f64.max(var.upper.abs()));
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    Row(usize),
    Bound(usize),
    Integrality(usize),
    Missing(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub amount: f64,
}

/// Outcome of [`is_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Largest violation found, whether or not it exceeds the tolerance.
    pub worst: Option<Violation>,
    pub violated: usize,
}

impl FeasibilityReport {
    fn record(&mut self, kind: ViolationKind, amount: f64, violated: bool) {
        if violated {
            self.feasible = false;
            self.violated += 1;
        }
        if amount > 0.0 && self.worst.is_none_or(|w| amount > w.amount) {
            self.worst = Some(Violation { kind, amount });
        }
    }
}

/// Checks rows, bounds and integrality of `solution` against `problem`.
pub fn is_feasible(problem: &Problem, solution: &Solution, tol: &Tolerances) -> FeasibilityReport {
    let mut report = FeasibilityReport {
        feasible: true,
        worst: None,
        violated: 0,
    };
    let mut dense = Vec::with_capacity(problem.num_vars());
    let mut complete = true;
    for (j, var) in problem.variables.iter().enumerate() {
        match solution.get(&var.name) {
            Some(x) if x.is_finite() => {
                let v = bound_violation(var, x);
                report.record(ViolationKind::Bound(j), v, v > tol.delta);
                if var.is_integer() {
                    let frac = (x - x.round()).abs();
                    report.record(ViolationKind::Integrality(j), frac, frac >= tol.delta);
                }
                dense.push(x);
            }
            _ => {
                report.record(ViolationKind::Missing(j), f64::INFINITY, true);
                complete = false;
                dense.push(0.0);
            }
        }
    }
    if complete {
        for (i, cons) in problem.constraints.iter().enumerate() {
            let v = violation_for_activity(cons, dense_activity(cons, &dense));
            report.record(ViolationKind::Row(i), v, v >= tol.delta);
        }
    }
    report
}

/// `sum c_j x_j + offset`.
pub fn evaluate_objective(problem: &Problem, solution: &Solution) -> Result<f64, ModelError> {
    let mut sum = 0.0;
    for (j, var) in problem.variables.iter().enumerate() {
        if var.objective != 0.0 {
            sum += var.objective * solution.value_of(problem, j)?;
        }
    }
    Ok(sum + problem.offset)
}

/// Maximal activity of a row over the variable bounds, leaving out variable
/// `excluded` if given. Returns `+inf` as soon as a contributing bound is
/// infinite.
pub fn max_activity(problem: &Problem, row: usize, excluded: Option<usize>) -> f64 {
    let cons = &problem.constraints[row];
    let mut sum = 0.0;
    for &(j, a) in &cons.coefficients {
        if Some(j) == excluded {
            continue;
        }
        let var = &problem.variables[j];
        let bound = if a > 0.0 { var.upper } else { var.lower };
        if bound.is_infinite() {
            return f64::INFINITY;
        }
        sum += a * bound;
    }
    sum
}

/// Mirror of [`max_activity`]; returns `-inf` on an unbounded contribution.
pub fn min_activity(problem: &Problem, row: usize, excluded: Option<usize>) -> f64 {
    let cons = &problem.constraints[row];
    let mut sum = 0.0;
    for &(j, a) in &cons.coefficients {
        if Some(j) == excluded {
            continue;
        }
        let var = &problem.variables[j];
        let bound = if a > 0.0 { var.lower } else { var.upper };
        if bound.is_infinite() {
            return f64::NEG_INFINITY;
        }
        sum += a * bound;
    }
    sum
}

/// Checks that `ray` is a nonzero improving direction of the feasible region
/// (minimization). Variables missing from `ray` count as zero.
pub fn verify_ray(problem: &Problem, ray: &Solution, tol: &Tolerances) -> bool {
    let dir: Vec<f64> = problem
        .variables
        .iter()
        .map(|v| ray.get(&v.name).unwrap_or(0.0))
        .collect();
    if dir.iter().any(|d| !d.is_finite()) {
        return false;
    }
    let norm = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if norm <= tol.epsilon {
        return false;
    }
    let slope: f64 = problem.variables.iter().zip(&dir).map(|(v, d)| v.objective * d).sum();
    if slope >= -tol.epsilon {
        return false;
    }
    for cons in &problem.constraints {
        let ad = dense_activity(cons, &dir);
        if cons.rhs.is_finite() && ad > tol.epsilon {
            return false;
        }
        if cons.lhs.is_finite() && ad < -tol.epsilon {
            return false;
        }
    }
    problem.variables.iter().zip(&dir).all(|(v, &d)| {
        !(v.lower.is_finite() && d < -tol.epsilon) && !(v.upper.is_finite() && d > tol.epsilon)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min -x1 s.t. x1 + x2 <= 1, x binary.
    fn small_binary() -> Problem {
        let mut p = Problem::new("small");
        p.add_variable(Variable::binary("x1", -1.0));
        p.add_variable(Variable::binary("x2", 0.0));
        p.add_constraint(Constraint::new("c1", vec![(0, 1.0), (1, 1.0)], f64::NEG_INFINITY, 1.0));
        p
    }

    fn sol(pairs: &[(&str, f64)]) -> Solution {
        pairs.iter().map(|&(n, v)| (n, v)).collect()
    }

    #[test]
    fn activity_examples() {
        let p = small_binary();
        assert_eq!(activity(&p, 0, &sol(&[("x1", 1.0), ("x2", 0.0)])).unwrap(), 1.0);

        let mut q = Problem::new("q");
        q.add_constraint(Constraint::new("empty", vec![], f64::NEG_INFINITY, 0.0));
        assert_eq!(activity(&q, 0, &Solution::new()).unwrap(), 0.0);

        let mut r = Problem::new("r");
        for j in 0..5 {
            r.add_variable(Variable::continuous(format!("x{j}"), 0.0, 10.0, 0.0));
        }
        let coefs = [4.0, 5.0, -8.0, -1.0, -2.0];
        r.add_constraint(Constraint::new(
            "row",
            coefs.iter().copied().enumerate().collect(),
            f64::NEG_INFINITY,
            0.0,
        ));
        let x = [1.0, 1.0, 1.0, 0.0, 0.0];
        let s = Solution::from_dense(&r, &x);
        // Second accumulator in reverse order.
        let reversed: f64 = coefs.iter().zip(&x).rev().map(|(a, v)| a * v).sum();
        assert_eq!(reversed, 1.0);
        assert_eq!(activity(&r, 0, &s).unwrap(), 1.0);
    }

    #[test]
    fn activity_unknown_variable() {
        let p = small_binary();
        let err = activity(&p, 0, &sol(&[("x1", 1.0)])).unwrap_err();
        assert_eq!(err, ModelError::MissingValue("x2".into()));
    }

    #[test]
    fn relative_violation_examples() {
        let p = small_binary();
        assert_eq!(relative_violation(&p, 0, &sol(&[("x1", 1.0), ("x2", 1.0)])).unwrap(), 0.5);
        assert_eq!(relative_violation(&p, 0, &sol(&[("x1", 1.0), ("x2", 0.0)])).unwrap(), 0.0);

        let mut free = small_binary();
        free.constraints[0] = Arc::new(Constraint::new("f", vec![(0, 1.0)], f64::NEG_INFINITY, f64::INFINITY));
        assert_eq!(relative_violation(&free, 0, &sol(&[("x1", 1e9), ("x2", 0.0)])).unwrap(), 0.0);
    }

    #[test]
    fn feasibility_examples() {
        let p = small_binary();
        let tol = Tolerances::default();
        assert!(is_feasible(&p, &sol(&[("x1", 1.0), ("x2", 0.0)]), &tol).feasible);
        let bad = is_feasible(&p, &sol(&[("x1", 1.0), ("x2", 1.0)]), &tol);
        assert!(!bad.feasible);
        assert_eq!(
            bad.worst,
            Some(Violation {
                kind: ViolationKind::Row(0),
                amount: 0.5
            })
        );
        assert!(is_feasible(&Problem::new("empty"), &Solution::new(), &tol).feasible);
    }

    #[test]
    fn feasibility_integrality_and_bounds() {
        let p = small_binary();
        let tol = Tolerances::default();
        let frac = is_feasible(&p, &sol(&[("x1", 0.5), ("x2", 0.0)]), &tol);
        assert!(!frac.feasible);
        assert_eq!(frac.worst.unwrap().kind, ViolationKind::Integrality(0));
        let out = is_feasible(&p, &sol(&[("x1", 0.0), ("x2", -1.0)]), &tol);
        assert!(!out.feasible);
        let near = is_feasible(&p, &sol(&[("x1", 1.0 + 1e-8), ("x2", 0.0)]), &tol);
        assert!(near.feasible);
        let missing = is_feasible(&p, &sol(&[("x1", 0.0)]), &tol);
        assert_eq!(missing.worst.unwrap().kind, ViolationKind::Missing(1));
    }

    #[test]
    fn objective_examples() {
        let mut p = small_binary();
        assert_eq!(evaluate_objective(&p, &sol(&[("x1", 1.0), ("x2", 0.0)])).unwrap(), -1.0);
        for v in &mut p.variables {
            v.objective = 0.0;
        }
        p.offset = 4.5;
        assert_eq!(evaluate_objective(&p, &Solution::new()).unwrap(), 4.5);

        let mut q = Problem::new("q");
        q.add_variable(Variable::continuous("x0", 0.0, 1000.0, 25.0));
        assert_eq!(evaluate_objective(&q, &sol(&[("x0", 0.0)])).unwrap(), 0.0);
        assert!(evaluate_objective(&q, &Solution::new()).is_err());
    }

    #[test]
    fn activity_bounds_small_cases() {
        let mut p = Problem::new("p");
        p.add_variable(Variable::continuous("x", 0.0, f64::INFINITY, 0.0));
        p.add_variable(Variable::continuous("y", 0.0, 2.0, 0.0));
        p.add_constraint(Constraint::new("empty", vec![], 0.0, 0.0));
        p.add_constraint(Constraint::new("inf", vec![(0, 2.0)], 0.0, 0.0));
        p.add_constraint(Constraint::new("neg", vec![(1, -3.0)], 0.0, 0.0));
        assert_eq!(max_activity(&p, 0, None), 0.0);
        assert_eq!(min_activity(&p, 0, None), 0.0);
        assert_eq!(max_activity(&p, 1, None), f64::INFINITY);
        assert_eq!(max_activity(&p, 1, Some(0)), 0.0);
        assert_eq!(min_activity(&p, 2, None), -6.0);
        assert_eq!(max_activity(&p, 2, None), 0.0);
    }

    #[test]
    fn ray_examples() {
        let tol = Tolerances::default();
        let mut p = Problem::new("unbounded");
        p.add_variable(Variable::continuous("x", 0.0, f64::INFINITY, -1.0));
        assert!(verify_ray(&p, &sol(&[("x", 1.0)]), &tol));
        assert!(!verify_ray(&p, &sol(&[("x", 0.0)]), &tol));
        assert!(!verify_ray(&p, &sol(&[("x", -1.0)]), &tol));
        p.variables[0].upper = 5.0;
        assert!(!verify_ray(&p, &sol(&[("x", 1.0)]), &tol));
        p.variables[0].upper = f64::INFINITY;
        p.add_constraint(Constraint::new("cap", vec![(0, 1.0)], f64::NEG_INFINITY, 3.0));
        assert!(!verify_ray(&p, &sol(&[("x", 1.0)]), &tol));
    }

    #[test]
    fn constraint_new_normalizes_entries() {
        let c = Constraint::new("c", vec![(3, 1.0), (1, 2.0), (3, -1.0), (2, 0.0)], 0.0, 1.0);
        assert_eq!(c.coefficients, vec![(1, 2.0)]);
        assert_eq!(c.coefficient(1), Some(2.0));
        assert_eq!(c.coefficient(3), None);
    }
}
