//! Exhaustive enumeration for small pure-integer problems.

use thiserror::Error;

use crate::model::{dense_activity, violation_for_activity, Problem, Tolerances};

/// Largest number of lattice points the oracle will visit.
pub const MAX_BOX_VOLUME: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("variable `{0}` is not integer")]
    Continuous(String),
    #[error("variable `{0}` has an infinite bound")]
    Unbounded(String),
    #[error("bound box holds {0} points, more than the oracle enumerates")]
    TooLarge(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `None` when no lattice point is feasible.
    pub value: Option<f64>,
    /// Every optimal point, in lexicographic order.
    pub optima: Vec<Vec<f64>>,
    pub visited: u64,
}

struct Search<'a> {
    problem: &'a Problem,
    tol: Tolerances,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Per row: suffix minimum and maximum of the activity over variables
    /// `j..n`, used to prune partial assignments.
    suffix_min: Vec<Vec<f64>>,
    suffix_max: Vec<Vec<f64>>,
    x: Vec<f64>,
    best: Option<f64>,
    optima: Vec<Vec<f64>>,
    visited: u64,
}

impl Search<'_> {
    fn objective(&self) -> f64 {
        let mut sum = 0.0;
        for (j, var) in self.problem.variables.iter().enumerate() {
            if var.objective != 0.0 {
                sum += var.objective * self.x[j];
            }
        }
        sum + self.problem.offset
    }

    /// Could any completion of `x[..depth]` satisfy every row? Uses exact
    /// sums with a generous margin, so it never rejects a feasible point.
    fn promising(&self, depth: usize) -> bool {
        for (i, cons) in self.problem.constraints.iter().enumerate() {
            let mut partial = 0.0;
            for &(j, a) in &cons.coefficients {
                if j < depth {
                    partial += a * self.x[j];
                }
            }
            let lo = partial + self.suffix_min[i][depth];
            let hi = partial + self.suffix_max[i][depth];
            let slack = 1e-3 * 1f64.max(lo.abs()).max(hi.abs());
            if cons.rhs.is_finite() && lo > cons.rhs + slack {
                return false;
            }
            if cons.lhs.is_finite() && hi < cons.lhs - slack {
                return false;
            }
        }
        true
    }

    fn leaf(&mut self) {
        self.visited += 1;
        for cons in &self.problem.constraints {
            if violation_for_activity(cons, dense_activity(cons, &self.x)) >= self.tol.delta {
                return;
            }
        }
        let value = self.objective();
        match self.best {
            Some(b) if value > b => {}
            Some(b) if value == b => self.optima.push(self.x.clone()),
            _ => {
                self.best = Some(value);
                self.optima.clear();
                self.optima.push(self.x.clone());
            }
        }
    }

    fn descend(&mut self, depth: usize) {
        if depth == self.x.len() {
            self.leaf();
            return;
        }
        if !self.promising(depth) {
            return;
        }
        let mut v = self.lower[depth];
        while v <= self.upper[depth] {
            self.x[depth] = v;
            self.descend(depth + 1);
            v += 1.0;
        }
        self.x[depth] = 0.0;
    }
}

/// Scans every integer point of the bound box and returns the optimal value
/// and all optimal points. Feasibility uses the same tolerances as
/// [`crate::model::is_feasible`].
pub fn enumerate_oracle(problem: &Problem) -> Result<OracleResult, OracleError> {
    let mut volume = 1.0f64;
    let mut lower = Vec::with_capacity(problem.num_vars());
    let mut upper = Vec::with_capacity(problem.num_vars());
    for var in &problem.variables {
        if !var.is_integer() {
            return Err(OracleError::Continuous(var.name.clone()));
        }
        if !var.lower.is_finite() || !var.upper.is_finite() {
            return Err(OracleError::Unbounded(var.name.clone()));
        }
        let (l, u) = (var.lower.ceil(), var.upper.floor());
        volume *= (u - l + 1.0).max(0.0);
        lower.push(l);
        upper.push(u);
    }
    if volume > MAX_BOX_VOLUME {
        return Err(OracleError::TooLarge(volume));
    }
    let n = problem.num_vars();
    let mut suffix_min = Vec::with_capacity(problem.num_conss());
    let mut suffix_max = Vec::with_capacity(problem.num_conss());
    for cons in &problem.constraints {
        let mut mins = vec![0.0; n + 1];
        let mut maxs = vec![0.0; n + 1];
        let mut contrib_min = vec![0.0; n];
        let mut contrib_max = vec![0.0; n];
        for &(j, a) in &cons.coefficients {
            let (p, q) = (a * lower[j], a * upper[j]);
            contrib_min[j] = p.min(q);
            contrib_max[j] = p.max(q);
        }
        for j in (0..n).rev() {
            mins[j] = mins[j + 1] + contrib_min[j];
            maxs[j] = maxs[j + 1] + contrib_max[j];
        }
        suffix_min.push(mins);
        suffix_max.push(maxs);
    }
    let mut search = Search {
        problem,
        tol: Tolerances::default(),
        lower,
        upper,
        suffix_min,
        suffix_max,
        x: vec![0.0; n],
        best: None,
        optima: Vec::new(),
        visited: 0,
    };
    if volume > 0.0 {
        search.descend(0);
    }
    Ok(OracleResult {
        value: search.best,
        optima: search.optima,
        visited: search.visited,
    })
}
