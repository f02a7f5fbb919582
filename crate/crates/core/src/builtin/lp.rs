//! Dense bounded-variable primal simplex.
//!
//! Rows `lhs <= a x <= rhs` get a slack `s = a x` carrying the row bounds,
//! so the working system is `[A | -I] (x, s) = 0` plus artificials for rows
//! violated by the starting point. Pivoting follows Bland's rule: the
//! lowest-index improving column enters, ties in the ratio test leave by
//! lowest basic index. Slow but deterministic and free of cycling.

/// A linear program `min c x` over `lhs <= a x <= rhs`, `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coefficients: Vec<(usize, f64)>,
    pub lhs: f64,
    pub rhs: f64,
}

impl LpProblem {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    /// `ray` is an improving direction in the structural columns.
    Unbounded { ray: Vec<f64> },
    /// The iteration guard fired.
    IterationLimit,
}

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const PHASE1_TOL: f64 = 1e-7;

struct Tableau {
    /// `rows x cols`, row-major: `B^-1 [A | -I | R]`.
    t: Vec<f64>,
    cols: usize,
    rows: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Current value of every column; basic entries are recomputed.
    value: Vec<f64>,
    basis: Vec<usize>,
    /// Row of a basic column, `usize::MAX` otherwise.
    row_of: Vec<usize>,
    iterations: u64,
    limit: u64,
}

enum Step {
    Optimal,
    Unbounded(Vec<f64>),
    Limit,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn refresh_basics(&mut self) {
        for i in 0..self.rows {
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            let mut sum = 0.0;
            for (j, &tij) in row.iter().enumerate() {
                if self.row_of[j] == usize::MAX && tij != 0.0 {
                    sum += tij * self.value[j];
                }
            }
            self.value[self.basis[i]] = -sum;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + q];
        for j in 0..cols {
            self.t[r * cols + j] /= p;
        }
        self.t[r * cols + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_mut(cols).chain(after.chunks_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * y;
                }
                row[q] = 0.0;
            }
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = usize::MAX;
        self.basis[r] = q;
        self.row_of[q] = r;
    }

    /// Runs simplex iterations for `cost` until optimal or unbounded.
    /// `frozen` columns never enter.
    fn optimize(&mut self, cost: &[f64], structural: usize, frozen: &[bool]) -> Step {
        let mut d = vec![0.0; self.cols];
        loop {
            if self.iterations >= self.limit {
                return Step::Limit;
            }
            self.refresh_basics();
            // Reduced costs.
            d.copy_from_slice(cost);
            for i in 0..self.rows {
                let cb = cost[self.basis[i]];
                if cb != 0.0 {
                    let row = &self.t[i * self.cols..(i + 1) * self.cols];
                    for (dj, &tij) in d.iter_mut().zip(row) {
                        *dj -= cb * tij;
                    }
                }
            }
            let mut entering = None;
            for j in 0..self.cols {
                if self.row_of[j] != usize::MAX || frozen[j] || self.lower[j] == self.upper[j] {
                    continue;
                }
                let v = self.value[j];
                let can_up = v < self.upper[j];
                let can_down = v > self.lower[j];
                if d[j] < -COST_TOL && can_up {
                    entering = Some((j, 1.0));
                    break;
                }
                if d[j] > COST_TOL && can_down {
                    entering = Some((j, -1.0));
                    break;
                }
            }
            let Some((q, dir)) = entering else {
                return Step::Optimal;
            };
            self.iterations += 1;

            // Ratio test. A basic column changes by `alpha * theta`.
            let mut theta = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None;
            let own = self.upper[q] - self.lower[q];
            for i in 0..self.rows {
                let tiq = self.at(i, q);
                if tiq.abs() <= PIVOT_TOL {
                    continue;
                }
                let alpha = -dir * tiq;
                let b = self.basis[i];
                let x = self.value[b];
                let (limit, to_upper) = if alpha < 0.0 {
                    if self.lower[b] == f64::NEG_INFINITY {
                        continue;
                    }
                    (((x - self.lower[b]) / -alpha).max(0.0), false)
                } else {
                    if self.upper[b] == f64::INFINITY {
                        continue;
                    }
                    (((self.upper[b] - x) / alpha).max(0.0), true)
                };
                let better = match leave {
                    None => true,
                    Some((r, _)) => limit < theta || (limit == theta && b < self.basis[r]),
                };
                if better {
                    theta = limit;
                    leave = Some((i, to_upper));
                }
            }
            if own.is_finite() && own <= theta {
                // Bound flip, basis unchanged.
                self.value[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                continue;
            }
            let Some((r, to_upper)) = leave else {
                let mut ray = vec![0.0; structural];
                if q < structural {
                    ray[q] = dir;
                }
                for i in 0..self.rows {
                    let b = self.basis[i];
                    if b < structural {
                        ray[b] = -dir * self.at(i, q);
                    }
                }
                return Step::Unbounded(ray);
            };
            let leaving = self.basis[r];
            self.value[q] += dir * theta;
            self.value[leaving] = if to_upper { self.upper[leaving] } else { self.lower[leaving] };
            self.pivot(r, q);
        }
    }
}

fn starting_value(lower: f64, upper: f64) -> f64 {
    if lower.is_finite() {
        lower
    } else if upper.is_finite() {
        upper
    } else {
        0.0
    }
}

/// Solves `lp`, returning the result and the number of simplex iterations.
pub fn solve_lp(lp: &LpProblem) -> (LpResult, u64) {
    let n = lp.num_cols();
    let m = lp.rows.len();
    if (0..n).any(|j| lp.lower[j] > lp.upper[j]) || lp.rows.iter().any(|r| r.lhs > r.rhs) {
        return (LpResult::Infeasible, 0);
    }
    let x0: Vec<f64> = (0..n).map(|j| starting_value(lp.lower[j], lp.upper[j])).collect();

    // Rows the starting point violates get an artificial column.
    let mut artificial_rows = Vec::new();
    let mut start = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let act: f64 = row.coefficients.iter().map(|&(j, a)| a * x0[j]).sum();
        let target = if act < row.lhs {
            Some(row.lhs)
        } else if act > row.rhs {
            Some(row.rhs)
        } else {
            None
        };
        if let Some(b) = target {
            artificial_rows.push(i);
            start.push((act, Some(b)));
        } else {
            start.push((act, None));
        }
    }
    let k = artificial_rows.len();
    let cols = n + m + k;
    let mut t = vec![0.0; m * cols];
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut value = x0;
    let mut basis = vec![0; m];
    let mut row_of = vec![usize::MAX; cols];
    for row in &lp.rows {
        lower.push(row.lhs);
        upper.push(row.rhs);
    }
    lower.extend(std::iter::repeat_n(0.0, k));
    upper.extend(std::iter::repeat_n(f64::INFINITY, k));
    value.extend(std::iter::repeat_n(0.0, m + k));

    let mut next_art = 0;
    for (i, row) in lp.rows.iter().enumerate() {
        let (act, target) = start[i];
        let base = i * cols;
        for &(j, a) in &row.coefficients {
            t[base + j] += a;
        }
        t[base + n + i] = -1.0;
        match target {
            None => {
                // Slack basic: divide the row by its -1 pivot.
                for x in &mut t[base..base + cols] {
                    *x = -*x;
                }
                basis[i] = n + i;
                row_of[n + i] = i;
                value[n + i] = act;
            }
            Some(b) => {
                let col = n + m + next_art;
                next_art += 1;
                let sigma = if b - act >= 0.0 { 1.0 } else { -1.0 };
                t[base + col] = sigma;
                for x in &mut t[base..base + cols] {
                    *x *= sigma;
                }
                basis[i] = col;
                row_of[col] = i;
                value[n + i] = b;
            }
        }
    }

    let mut tab = Tableau {
        t,
        cols,
        rows: m,
        lower,
        upper,
        value,
        basis,
        row_of,
        iterations: 0,
        limit: 10_000 + 100 * (m + cols) as u64,
    };

    let mut frozen = vec![false; cols];
    if k > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in &mut phase1[n + m..] {
            *c = 1.0;
        }
        match tab.optimize(&phase1, n, &frozen) {
            Step::Limit => return (LpResult::IterationLimit, tab.iterations),
            // The phase-one objective is bounded below by zero.
            Step::Unbounded(_) => return (LpResult::IterationLimit, tab.iterations),
            Step::Optimal => {}
        }
        tab.refresh_basics();
        let infeasibility: f64 = tab.value[n + m..].iter().sum();
        if infeasibility > PHASE1_TOL {
            return (LpResult::Infeasible, tab.iterations);
        }
        for j in n + m..cols {
            tab.lower[j] = 0.0;
            tab.upper[j] = 0.0;
            frozen[j] = true;
            if tab.row_of[j] == usize::MAX {
                tab.value[j] = 0.0;
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(&lp.cost);
    match tab.optimize(&phase2, n, &frozen) {
        Step::Limit => (LpResult::IterationLimit, tab.iterations),
        Step::Unbounded(ray) => (LpResult::Unbounded { ray }, tab.iterations),
        Step::Optimal => {
            tab.refresh_basics();
            let x: Vec<f64> = tab.value[..n].to_vec();
            let value = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
            (LpResult::Optimal { x, value }, tab.iterations)
        }
    }
}
