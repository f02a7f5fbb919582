//! Seeded instance generators.
//!
//! Every generator takes a caller-owned RNG so a single seed determines a
//! whole test run.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Constraint, Problem, Settings, Solution, Variable};

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `min -x1` subject to `x1 + x2 <= 1` over binaries.
pub fn small_binary() -> Problem {
    let mut p = Problem::new("small_binary");
    p.add_variable(Variable::binary("x1", -1.0));
    p.add_variable(Variable::binary("x2", 0.0));
    p.add_constraint(Constraint::new("c1", vec![(0, 1.0), (1, 1.0)], f64::NEG_INFINITY, 1.0));
    p
}

/// Five continuous variables with the bounds and rows of the reduced
/// instance that exposed the shifted residual activity bug.
pub fn dual_infer_instance() -> Problem {
    let mut p = Problem::new("dualinfer");
    let uppers = [1000.0, 3000.0, 2000.0, 800.0, 2600.0];
    for (j, &u) in uppers.iter().enumerate() {
        let cost = if j == 0 { 25.0 } else { 0.0 };
        p.add_variable(Variable::continuous(format!("x{j}"), 0.0, u, cost));
    }
    let rows: [([f64; 5], f64, f64); 3] = [
        ([51.2, 25.6, 44.8, 38.4, 44.8], 192000.0, 192000.0),
        ([4.0, 5.0, -8.0, -1.0, -2.0], f64::NEG_INFINITY, 0.0),
        ([-1.024, 2.688, -0.896, -0.768, 5.504], f64::NEG_INFINITY, 0.0),
    ];
    for (i, (coefs, lhs, rhs)) in rows.into_iter().enumerate() {
        p.add_constraint(Constraint::new(
            format!("c{i}"),
            coefs.iter().copied().enumerate().collect(),
            lhs,
            rhs,
        ));
    }
    p
}

fn box_point(rng: &mut FixtureRng, p: &Problem) -> Vec<f64> {
    p.variables
        .iter()
        .map(|v| rng.gen_range(v.lower as i64..=v.upper as i64) as f64)
        .collect()
}

/// Random pure-integer problem with bounds inside `[0, max_bound]`,
/// integer coefficients in `[-5, 5]`, integer sides and objective.
pub fn random_pure_integer(rng: &mut FixtureRng, max_vars: usize, max_conss: usize, max_bound: f64) -> Problem {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_conss);
    let mut p = Problem::new("random");
    let bound = max_bound as i64;
    for j in 0..n {
        let l = rng.gen_range(0..=bound);
        let u = rng.gen_range(l..=bound);
        let c = rng.gen_range(-5..=5) as f64;
        p.add_variable(Variable::integer(format!("x{j}"), l as f64, u as f64, c));
    }
    let anchor = box_point(rng, &p);
    for i in 0..m {
        let mut coefs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                let a = rng.gen_range(-5..=5);
                if a != 0 {
                    coefs.push((j, a as f64));
                }
            }
        }
        // Sides around the activity of a box point, usually one shared
        // anchor so that most instances stay feasible.
        let anchored = rng.gen_bool(0.7);
        let point = if anchored { anchor.clone() } else { box_point(rng, &p) };
        // Anchored rows never cut off the anchor.
        let slack = if anchored { 0 } else { -2 };
        let act: f64 = coefs.iter().map(|&(j, a)| a * point[j]).sum();
        let (lhs, rhs) = match rng.gen_range(0..4) {
            0 => (f64::NEG_INFINITY, act + rng.gen_range(slack..=3) as f64),
            1 => (act - rng.gen_range(slack..=3) as f64, f64::INFINITY),
            2 if anchored => (act - rng.gen_range(0..=2) as f64, act + rng.gen_range(0..=2) as f64),
            2 => {
                let lo = act - rng.gen_range(0..=2) as f64;
                (lo, lo + rng.gen_range(0..=3) as f64)
            }
            _ => (act, act),
        };
        p.add_constraint(Constraint::new(format!("c{i}"), coefs, lhs, rhs));
    }
    p
}

/// A problem, a settings pair and a reference solution that is exactly
/// feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub problem: Problem,
    pub settings: Settings,
    pub target_settings: Settings,
    pub reference: Solution,
}

fn fractional(rng: &mut FixtureRng, lo: f64, hi: f64) -> f64 {
    // Two decimals, so rounding candidates show up regularly.
    (rng.gen_range(lo..hi) * 100.0).round() / 100.0
}

/// Mixed-integer problem with a feasible reference, fixed variables,
/// fractional data, infinite bounds, equality, ranged and one-sided rows,
/// and settings that differ from the target in some keys.
pub fn random_feasible_pair(rng: &mut FixtureRng) -> Pair {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=6);
    let mut p = Problem::new("pair");
    let mut x = Vec::with_capacity(n);
    for j in 0..n {
        let integer = rng.gen_bool(0.5);
        let value = if integer {
            rng.gen_range(-3..=3) as f64
        } else {
            fractional(rng, -3.0, 3.0)
        };
        let (lower, upper) = match rng.gen_range(0..5) {
            0 => (value, value),
            1 => (f64::NEG_INFINITY, f64::INFINITY),
            2 => (value - fractional(rng, 0.0, 2.0), f64::INFINITY),
            3 => (f64::NEG_INFINITY, value + fractional(rng, 0.0, 2.0)),
            _ => (value - fractional(rng, 0.0, 2.0), value + fractional(rng, 0.0, 2.0)),
        };
        let objective = match rng.gen_range(0..3) {
            0 => 0.0,
            1 => rng.gen_range(-4..=4) as f64,
            _ => fractional(rng, -4.0, 4.0),
        };
        let var = if integer {
            Variable::integer(format!("v{j}"), lower, upper, objective)
        } else {
            Variable::continuous(format!("v{j}"), lower, upper, objective)
        };
        p.add_variable(var);
        x.push(value);
    }
    for i in 0..m {
        let mut coefs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                let a = if rng.gen_bool(0.5) {
                    rng.gen_range(-5..=5) as f64
                } else {
                    fractional(rng, -5.0, 5.0)
                };
                if a != 0.0 {
                    coefs.push((j, a));
                }
            }
        }
        let cons = Constraint::new(format!("r{i}"), coefs, 0.0, 0.0);
        let act = crate::model::dense_activity(&cons, &x);
        let slack = |rng: &mut FixtureRng| if rng.gen_bool(0.3) { 0.0 } else { fractional(rng, 0.0, 3.0) };
        let (lhs, rhs) = match rng.gen_range(0..5) {
            0 => (act, act),
            1 => (f64::NEG_INFINITY, act + slack(rng)),
            2 => (act - slack(rng), f64::INFINITY),
            3 => (act - slack(rng), act + slack(rng)),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        p.add_constraint(Constraint { lhs, rhs, ..cons });
    }
    let mut settings = Settings::new();
    let mut target = Settings::new();
    for k in 0..rng.gen_range(0..4) {
        let key = format!("param/p{k}");
        let value = rng.gen_range(0..3).to_string();
        settings.set(key.clone(), value.clone());
        let tv = if rng.gen_bool(0.5) { value } else { rng.gen_range(3..6).to_string() };
        target.set(key, tv);
    }
    let reference = Solution::from_dense(&p, &x);
    Pair {
        problem: p,
        settings,
        target_settings: target,
        reference,
    }
}

fn fuzz_name(rng: &mut FixtureRng, prefix: &str, index: usize) -> String {
    const CHARS: &[u8] = b"abcXYZ019_.-[]()@$/:";
    let len = rng.gen_range(0..6);
    let tail: String = (0..len).map(|_| *CHARS.choose(rng).unwrap() as char).collect();
    // The separator keeps `x1` + `0` apart from `x10`.
    if tail.is_empty() {
        format!("{prefix}{index}")
    } else {
        format!("{prefix}{index}~{tail}")
    }
}

fn fuzz_value(rng: &mut FixtureRng) -> f64 {
    match rng.gen_range(0..6) {
        0 => rng.gen_range(-10..=10) as f64,
        1 => rng.gen_range(-1e6..1e6),
        2 => rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-12..12)),
        3 => fractional(rng, -100.0, 100.0),
        4 => 0.1 + rng.gen_range(0..10) as f64 * 0.2,
        _ => rng.gen::<f64>() / 3.0,
    }
}

/// Instance for format round trips: odd names, infinite bounds, ranged and
/// free rows, integer markers, offsets and empty columns.
pub fn random_mps_problem(rng: &mut FixtureRng) -> Problem {
    let n = rng.gen_range(0..=12);
    let m = rng.gen_range(0..=10);
    let mut p = Problem::new(fuzz_name(rng, "inst", 0));
    for j in 0..n {
        let a = fuzz_value(rng);
        let b = fuzz_value(rng);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (lower, upper) = match rng.gen_range(0..6) {
            0 => (f64::NEG_INFINITY, f64::INFINITY),
            1 => (lo, f64::INFINITY),
            2 => (f64::NEG_INFINITY, hi),
            3 => (lo, lo),
            4 => (0.0, hi.abs()),
            _ => (lo, hi),
        };
        let objective = if rng.gen_bool(0.3) { 0.0 } else { fuzz_value(rng) };
        let name = fuzz_name(rng, "x", j);
        let var = if rng.gen_bool(0.4) {
            Variable::integer(name, lower, upper, objective)
        } else {
            Variable::continuous(name, lower, upper, objective)
        };
        p.add_variable(var);
    }
    for i in 0..m {
        let mut coefs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.4) {
                let a = fuzz_value(rng);
                if a != 0.0 {
                    coefs.push((j, a));
                }
            }
        }
        let a = fuzz_value(rng);
        let b = fuzz_value(rng);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (lhs, rhs) = match rng.gen_range(0..5) {
            0 => (lo, lo),
            1 => (f64::NEG_INFINITY, hi),
            2 => (lo, f64::INFINITY),
            3 => (lo, hi),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        p.add_constraint(Constraint::new(fuzz_name(rng, "r", i), coefs, lhs, rhs));
    }
    if rng.gen_bool(0.5) {
        p.offset = fuzz_value(rng);
    }
    p
}

/// A reduction scenario: the pair, a reference, and the faults to enable.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub problem: Problem,
    pub settings: Settings,
    pub reference: Solution,
}

/// Value pinned by the planted gadget's equality row.
pub const GADGET_VALUE: f64 = 0.599028894874692;
/// Leading coefficient of the planted gadget's critical row.
pub const GADGET_COEFFICIENT: f64 = 20000007.0;

/// Adds `count` easy rows over `vars` (indices into `p`): every row holds
/// at the all-lower-bounds point and at `x`.
fn background_rows(rng: &mut FixtureRng, p: &mut Problem, vars: &[usize], x: &[f64], count: usize, prefix: &str) {
    for i in 0..count {
        let k = rng.gen_range(3..=8).min(vars.len());
        let chosen: Vec<usize> = vars.choose_multiple(rng, k).copied().collect();
        let coefs: Vec<(usize, f64)> = chosen.iter().map(|&j| (j, fractional(rng, -9.0, 9.0))).collect();
        let cons = Constraint::new(format!("{prefix}{i}"), coefs, 0.0, 0.0);
        let at_ref = crate::model::dense_activity(&cons, x);
        let lows: Vec<f64> = p.variables.iter().map(|v| v.lower).collect();
        let at_low = crate::model::dense_activity(&cons, &lows);
        let hi = at_ref.max(at_low) + fractional(rng, 0.5, 5.0);
        let lo = at_ref.min(at_low) - fractional(rng, 0.5, 5.0);
        let (lhs, rhs) = match rng.gen_range(0..3) {
            0 => (f64::NEG_INFINITY, hi),
            1 => (lo, f64::INFINITY),
            _ => (lo, hi),
        };
        p.add_constraint(Constraint { lhs, rhs, ..cons });
    }
}

/// 200 variables and 100 rows hiding a two-variable, three-row gadget on
/// which F4 makes the solver return an infeasible point. Everything else is
/// satisfied by putting the background at its lower bounds, which its
/// positive costs also favor.
pub fn planted_normalization(rng: &mut FixtureRng) -> Planted {
    const VARS: usize = 200;
    const CONSS: usize = 100;
    let mut p = Problem::new("planted");
    let mut x = Vec::with_capacity(VARS);
    let gadget_at = rng.gen_range(0..VARS - 1);
    let mut background = Vec::new();
    for j in 0..VARS {
        if j == gadget_at {
            p.add_variable(Variable::binary("gx", 1.0));
            x.push(1.0);
        } else if j == gadget_at + 1 {
            p.add_variable(Variable::continuous("gy", 0.0, f64::INFINITY, 0.0));
            x.push(GADGET_VALUE);
        } else {
            let cost = fractional(rng, 0.5, 3.0);
            if rng.gen_bool(0.5) {
                let u = rng.gen_range(1..=5) as f64;
                p.add_variable(Variable::integer(format!("b{j}"), 0.0, u, cost));
                x.push(rng.gen_range(0..=u as i64) as f64);
            } else {
                let u = fractional(rng, 1.0, 10.0);
                p.add_variable(Variable::continuous(format!("b{j}"), 0.0, u, cost));
                x.push(fractional(rng, 0.0, u));
            }
            background.push(j);
        }
    }
    let (gx, gy) = (gadget_at, gadget_at + 1);
    let gadget = [
        Constraint::new("g1", vec![(gy, 1.0)], GADGET_VALUE, GADGET_VALUE),
        Constraint::new("g2", vec![(gx, -GADGET_COEFFICIENT), (gy, 2.0)], f64::NEG_INFINITY, 0.0),
        Constraint::new("g3", vec![(gx, 1.0), (gy, 1.0)], f64::NEG_INFINITY, 2.0),
    ];
    let before = rng.gen_range(0..=CONSS - gadget.len());
    background_rows(rng, &mut p, &background, &x, before, "a");
    for cons in gadget {
        p.add_constraint(cons);
    }
    background_rows(rng, &mut p, &background, &x, CONSS - 3 - before, "z");
    let reference = Solution::from_dense(&p, &x);
    Planted {
        problem: p,
        settings: Settings::new(),
        reference,
    }
}

/// Infeasible problem whose only infeasible subsystem is
/// `{x + y >= 4, x <= 1, y <= 1}`, hidden among 50 rows that hold on the
/// whole bound box.
pub fn planted_iis(rng: &mut FixtureRng) -> Problem {
    const EXTRA_VARS: usize = 10;
    let mut p = Problem::new("iis");
    p.add_variable(Variable::continuous("x", 0.0, 10.0, 1.0));
    p.add_variable(Variable::continuous("y", 0.0, 10.0, 1.0));
    for k in 0..EXTRA_VARS {
        p.add_variable(Variable::continuous(format!("z{k}"), 0.0, 10.0, fractional(rng, 0.0, 2.0)));
    }
    let planted = [
        Constraint::new("sum", vec![(0, 1.0), (1, 1.0)], 4.0, f64::INFINITY),
        Constraint::new("capx", vec![(0, 1.0)], f64::NEG_INFINITY, 1.0),
        Constraint::new("capy", vec![(1, 1.0)], f64::NEG_INFINITY, 1.0),
    ];
    let mut redundant = Vec::new();
    for i in 0..50 {
        let k = rng.gen_range(2..=5);
        let all: Vec<usize> = (0..p.num_vars()).collect();
        let coefs: Vec<(usize, f64)> = all
            .choose_multiple(rng, k)
            .map(|&j| (j, fractional(rng, -3.0, 3.0)))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        let cons = Constraint::new(format!("red{i}"), coefs, 0.0, 0.0);
        let (mut min, mut max) = (0.0, 0.0);
        for &(j, a) in &cons.coefficients {
            let v = &p.variables[j];
            let (lo, hi) = (a * v.lower, a * v.upper);
            min += lo.min(hi);
            max += lo.max(hi);
        }
        let (lhs, rhs) = if rng.gen_bool(0.5) {
            (f64::NEG_INFINITY, max + fractional(rng, 0.0, 4.0))
        } else {
            (min - fractional(rng, 0.0, 4.0), f64::INFINITY)
        };
        redundant.push(Constraint { lhs, rhs, ..cons });
    }
    let mut slots: Vec<usize> = (0..redundant.len() + planted.len()).collect();
    slots.shuffle(rng);
    let planted_slots: Vec<usize> = slots[..planted.len()].to_vec();
    let mut planted = planted.into_iter();
    let mut redundant = redundant.into_iter();
    for s in 0..redundant.len() + planted.len() {
        let cons = if planted_slots.contains(&s) { planted.next() } else { redundant.next() };
        p.add_constraint(cons.expect("slot count matches"));
    }
    p
}

/// One instance of a per-fault family.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultCase {
    pub problem: Problem,
    pub reference: Solution,
    pub settings: Settings,
}

/// Generates an instance on which fault `fault` (1 to 5) is expected to
/// produce a positive fail code. References are feasible; for F2 the
/// reference is optimal, which the caller should confirm with the oracle.
pub fn fault_case(fault: u8, rng: &mut FixtureRng) -> FaultCase {
    match fault {
        1 => shifted_activity_case(rng),
        2 => interior_cutoff_case(rng),
        3 => unsafe_rounding_case(rng),
        4 => vanishing_side_case(rng),
        5 => presolved_case(rng),
        _ => panic!("no fault F{fault}"),
    }
}

/// One row that pins every variable at its upper bound, led by a variable
/// with a small domain. Residual activities computed with the leader's
/// bounds make the row look infeasible.
fn shifted_activity_case(rng: &mut FixtureRng) -> FaultCase {
    let n = rng.gen_range(3..=6);
    let mut p = Problem::new("f1");
    let mut x = Vec::new();
    for j in 0..n {
        let u = if j == 0 { 1.0 } else { rng.gen_range(3..=6) as f64 };
        p.add_variable(Variable::integer(format!("x{j}"), 0.0, u, rng.gen_range(1..=5) as f64));
        x.push(u);
    }
    let coefs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(1..=7) as f64)).collect();
    let cons = Constraint::new("pin", coefs, 0.0, f64::INFINITY);
    let lhs = crate::model::dense_activity(&cons, &x);
    p.add_constraint(Constraint { lhs, ..cons });
    let reference = Solution::from_dense(&p, &x);
    FaultCase {
        problem: p,
        reference,
        settings: Settings::new(),
    }
}

/// Covering knapsack over binaries with integral costs.
fn interior_cutoff_case(rng: &mut FixtureRng) -> FaultCase {
    let n = rng.gen_range(4..=8);
    let mut p = Problem::new("f2");
    let mut weights = Vec::new();
    for j in 0..n {
        p.add_variable(Variable::binary(format!("x{j}"), rng.gen_range(1..=20) as f64));
        weights.push(rng.gen_range(1..=20) as f64);
    }
    let total: f64 = weights.iter().sum();
    let demand = (total * rng.gen_range(0.3..0.6)).round().max(1.0);
    p.add_constraint(Constraint::new(
        "cover",
        weights.iter().copied().enumerate().collect(),
        demand,
        f64::INFINITY,
    ));
    let optimum = crate::builtin::enumerate_oracle(&p)
        .expect("small binary instance")
        .optima
        .into_iter()
        .next()
        .expect("all ones covers the demand");
    let reference = Solution::from_dense(&p, &optimum);
    FaultCase {
        problem: p,
        reference,
        settings: Settings::new(),
    }
}

/// A row with a tiny coefficient on `z` whose right side falls short of the
/// fixed part by less than the feasibility tolerance.
fn unsafe_rounding_case(rng: &mut FixtureRng) -> FaultCase {
    let mut p = Problem::new("f3");
    let a = rng.gen_range(1e-8..5e-8);
    let b = fractional(rng, 1.0, 10.0);
    let d = 10f64.powf(rng.gen_range(-14.0..-10.0));
    p.add_variable(Variable::binary("z", 0.0));
    p.add_variable(Variable::integer("y", 1.0, 1.0, 0.0));
    p.add_constraint(Constraint::new("tiny", vec![(0, a), (1, b)], f64::NEG_INFINITY, b - d));
    let mut x = vec![0.0, 1.0];
    let extra = rng.gen_range(0..=3);
    for k in 0..extra {
        p.add_variable(Variable::integer(format!("w{k}"), 0.0, 3.0, 1.0));
        x.push(rng.gen_range(0..=3) as f64);
    }
    let vars: Vec<usize> = (2..p.num_vars()).collect();
    if vars.len() >= 3 {
        background_rows(rng, &mut p, &vars, &x, 2, "bg");
    }
    let reference = Solution::from_dense(&p, &x);
    FaultCase {
        problem: p,
        reference,
        settings: Settings::new(),
    }
}

/// The normalization gadget with a random large coefficient and pinned
/// value, plus a few easy rows.
fn vanishing_side_case(rng: &mut FixtureRng) -> FaultCase {
    let mut p = Problem::new("f4");
    let k = rng.gen_range(2e6..5e7f64).round();
    let v = fractional(rng, 0.1, 0.9);
    p.add_variable(Variable::binary("x", rng.gen_range(1..=5) as f64));
    p.add_variable(Variable::continuous("y", 0.0, f64::INFINITY, 0.0));
    p.add_constraint(Constraint::new("pin", vec![(1, 1.0)], v, v));
    p.add_constraint(Constraint::new("big", vec![(0, -k), (1, 2.0)], f64::NEG_INFINITY, 0.0));
    let mut x = vec![1.0, v];
    for j in 0..rng.gen_range(3..=6) {
        p.add_variable(Variable::continuous(format!("w{j}"), 0.0, 4.0, fractional(rng, 0.5, 2.0)));
        x.push(fractional(rng, 0.0, 4.0));
    }
    let vars: Vec<usize> = (2..p.num_vars()).collect();
    background_rows(rng, &mut p, &vars, &x, 3, "bg");
    let reference = Solution::from_dense(&p, &x);
    FaultCase {
        problem: p,
        reference,
        settings: Settings::new(),
    }
}

/// Every variable fixed by its bounds; presolve finishes the instance.
fn presolved_case(rng: &mut FixtureRng) -> FaultCase {
    let n = rng.gen_range(0..=5);
    let mut p = Problem::new("f5");
    let mut x = Vec::new();
    for j in 0..n {
        let v = rng.gen_range(-3..=3) as f64;
        p.add_variable(Variable::integer(format!("x{j}"), v, v, rng.gen_range(-3..=3) as f64));
        x.push(v);
    }
    for i in 0..rng.gen_range(0..=3) {
        let coefs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(1..=4) as f64)).collect();
        let cons = Constraint::new(format!("c{i}"), coefs, 0.0, 0.0);
        let act = crate::model::dense_activity(&cons, &x);
        p.add_constraint(Constraint {
            lhs: f64::NEG_INFINITY,
            rhs: act + rng.gen_range(0..=2) as f64,
            ..cons
        });
    }
    let reference = Solution::from_dense(&p, &x);
    FaultCase {
        problem: p,
        reference,
        settings: Settings::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_feasible, Tolerances};

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_feasible_pair(&mut rng(3)), random_feasible_pair(&mut rng(3)));
        assert_eq!(planted_normalization(&mut rng(1)), planted_normalization(&mut rng(1)));
    }

    #[test]
    fn planted_shapes_and_references() {
        let planted = planted_normalization(&mut rng(11));
        assert_eq!(planted.problem.size().vars, 200);
        assert_eq!(planted.problem.size().conss, 100);
        assert!(planted.problem.validate().is_ok());
        assert!(is_feasible(&planted.problem, &planted.reference, &Tolerances::default()).feasible);
        let iis = planted_iis(&mut rng(11));
        assert_eq!(iis.num_conss(), 53);
    }

    #[test]
    fn fault_references_are_feasible() {
        let tol = Tolerances::default();
        for fault in 1..=5 {
            for seed in 0..20 {
                let case = fault_case(fault, &mut rng(seed));
                assert!(
                    is_feasible(&case.problem, &case.reference, &tol).feasible,
                    "F{fault} seed {seed}"
                );
            }
        }
    }
}
