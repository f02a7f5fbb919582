//! Best-first branch-and-bound over LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lp::{solve_lp, LpProblem, LpResult, LpRow};
use crate::model::Problem;

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    #[default]
    MostFractional,
    /// Lowest-index fractional variable.
    First,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOptions {
    /// Objective cutoff at the root when the objective is integral.
    pub objcut: bool,
    /// Derive the cutoff from an interior point instead of the LP optimum.
    pub interior_cutoff: bool,
    pub rule: BranchRule,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub seed: u64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            objcut: true,
            interior_cutoff: false,
            rule: BranchRule::MostFractional,
            node_limit: None,
            time_limit: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
    /// LP iteration guard fired.
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult<S> {
    pub status: BnbStatus,
    /// Accepted incumbent and its objective value.
    pub incumbent: Option<(S, f64)>,
    pub dual_bound: f64,
    /// Improving direction in the variables of the searched problem.
    pub ray: Option<Vec<f64>>,
    pub nodes: u64,
    pub lp_iterations: u64,
}

struct Node {
    bound: f64,
    id: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

fn integral_objective(problem: &Problem) -> bool {
    problem
        .variables
        .iter()
        .all(|v| v.objective == 0.0 || (v.is_integer() && v.objective == v.objective.round()))
}

fn to_lp(problem: &Problem) -> LpProblem {
    LpProblem {
        cost: problem.variables.iter().map(|v| v.objective).collect(),
        lower: problem.variables.iter().map(|v| v.lower).collect(),
        upper: problem.variables.iter().map(|v| v.upper).collect(),
        rows: problem
            .constraints
            .iter()
            .map(|c| LpRow {
                coefficients: c.coefficients.clone(),
                lhs: c.lhs,
                rhs: c.rhs,
            })
            .collect(),
    }
}

/// Searches `problem`. Every LP point that is integral within tolerance is
/// offered to `accept`, which returns the point to store together with its
/// objective value, or `None` to reject it.
pub fn branch_and_bound<S>(
    problem: &Problem,
    options: &BnbOptions,
    accept: &mut dyn FnMut(&[f64]) -> Option<(S, f64)>,
) -> BnbResult<S> {
    let started = Instant::now();
    let mut lp = to_lp(problem);
    let mut result = BnbResult {
        status: BnbStatus::Infeasible,
        incumbent: None,
        dual_bound: f64::INFINITY,
        ray: None,
        nodes: 0,
        lp_iterations: 0,
    };
    let offset = problem.offset;
    let integral = integral_objective(problem);

    // Root relaxation.
    let (root, iters) = solve_lp(&lp);
    result.lp_iterations += iters;
    let root_value = match root {
        LpResult::Infeasible => return result,
        LpResult::IterationLimit => {
            result.status = BnbStatus::Error;
            result.dual_bound = f64::NEG_INFINITY;
            return result;
        }
        LpResult::Unbounded { ray } => {
            result.status = BnbStatus::Unbounded;
            result.dual_bound = f64::NEG_INFINITY;
            result.ray = Some(ray);
            return result;
        }
        LpResult::Optimal { value, .. } => value,
    };

    if options.objcut && integral {
        let mut cutoff = None;
        if options.interior_cutoff {
            // Objective value at a point between the LP optimum and the LP
            // maximum. Rounding it up is only valid at the LP optimum.
            let worst = LpProblem {
                cost: lp.cost.iter().map(|c| -c).collect(),
                ..lp.clone()
            };
            let (res, iters) = solve_lp(&worst);
            result.lp_iterations += iters;
            if let LpResult::Optimal { value, .. } = res {
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                let lambda: f64 = rng.gen_range(0.3..=0.7);
                let v = lambda * root_value + (1.0 - lambda) * -value;
                if v != v.floor() {
                    cutoff = Some(v.ceil());
                }
            }
        } else if root_value - root_value.floor() > INTEGRALITY_TOL {
            cutoff = Some((root_value - INTEGRALITY_TOL).ceil());
        }
        if let Some(lhs) = cutoff {
            lp.rows.push(LpRow {
                coefficients: problem
                    .variables
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.objective != 0.0)
                    .map(|(j, v)| (j, v.objective))
                    .collect(),
                lhs,
                rhs: f64::INFINITY,
            });
        }
    }

    let prune = |bound: f64, incumbent: Option<f64>| -> bool {
        let Some(best) = incumbent else {
            return false;
        };
        let bound = if integral {
            (bound - offset - INTEGRALITY_TOL).ceil() + offset
        } else {
            bound
        };
        bound >= best - 1e-9 * 1f64.max(best.abs())
    };

    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        bound: root_value + offset,
        id: next_id,
        lower: lp.lower.clone(),
        upper: lp.upper.clone(),
    });
    next_id += 1;
    let mut limit_hit = false;

    while let Some(node) = heap.pop() {
        let best = result.incumbent.as_ref().map(|(_, v)| *v);
        if prune(node.bound, best) {
            continue;
        }
        let over_nodes = options.node_limit.is_some_and(|n| result.nodes >= n);
        let over_time = options.time_limit.is_some_and(|t| started.elapsed() >= t);
        if over_nodes || over_time {
            heap.push(node);
            limit_hit = true;
            break;
        }
        result.nodes += 1;
        lp.lower.clone_from(&node.lower);
        lp.upper.clone_from(&node.upper);
        let (res, iters) = solve_lp(&lp);
        result.lp_iterations += iters;
        let (x, value) = match res {
            LpResult::Optimal { x, value } => (x, value + offset),
            LpResult::Infeasible | LpResult::Unbounded { .. } => continue,
            LpResult::IterationLimit => {
                result.status = BnbStatus::Error;
                result.dual_bound = f64::NEG_INFINITY;
                return result;
            }
        };
        if prune(value, best) {
            continue;
        }
        let mut branch: Option<(usize, f64)> = None;
        for (j, var) in problem.variables.iter().enumerate() {
            if !var.is_integer() {
                continue;
            }
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= INTEGRALITY_TOL {
                continue;
            }
            match (options.rule, branch) {
                (_, None) => branch = Some((j, dist)),
                (BranchRule::MostFractional, Some((_, d))) if dist > d => branch = Some((j, dist)),
                _ => {}
            }
            if options.rule == BranchRule::First {
                break;
            }
        }
        match branch {
            None => {
                if let Some((point, v)) = accept(&x) {
                    if best.is_none_or(|b| v < b) {
                        result.incumbent = Some((point, v));
                    }
                }
            }
            Some((j, _)) => {
                let down = x[j].floor();
                let mut upper = node.upper.clone();
                upper[j] = down;
                heap.push(Node {
                    bound: value,
                    id: next_id,
                    lower: node.lower.clone(),
                    upper,
                });
                let mut lower = node.lower;
                lower[j] = down + 1.0;
                heap.push(Node {
                    bound: value,
                    id: next_id + 1,
                    lower,
                    upper: node.upper,
                });
                next_id += 2;
            }
        }
    }

    let best = result.incumbent.as_ref().map(|(_, v)| *v);
    if limit_hit {
        result.status = BnbStatus::LimitReached;
        let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        result.dual_bound = best.map_or(open, |b| b.min(open));
    } else if let Some(b) = best {
        result.status = BnbStatus::Optimal;
        result.dual_bound = b;
    }
    result
}
