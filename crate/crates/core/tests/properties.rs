use mipdelta::builtin::{enumerate_oracle, presolve, solve, FaultSpec, PresolveOptions, PresolveStatus, SolverConfig};
use mipdelta::controller::{run, RunConfig, RunIo};
use mipdelta::fixtures::{self, FixtureRng};
use mipdelta::io::{parse_instance, parse_settings, settings_to_string, write_instance_string};
use mipdelta::model::{
    activity, evaluate_objective, is_feasible, max_activity, relative_violation, verify_ray, Constraint, Problem, Settings,
    Solution, Tolerances, Variable, ViolationKind,
};
use mipdelta::modifiers::{
    apply_batch, enumerate_candidates, plan_batches, run_modifier, Context, Modifier, ModifierKind, ModifierOptions,
    ReductionState,
};
use mipdelta::solver::{check_dual_fail, evaluate, Backend, BackendError, FailCode, Passcodes, SolveLimits, SolveOutcome, SolveStatus};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn box_point(rng: &mut FixtureRng, p: &Problem) -> Vec<f64> {
    p.variables.iter().map(|v| rng.gen_range(v.lower..=v.upper)).collect()
}

/// 10 variables, 10 rows, finite bounds, real data.
fn bounded_problem(rng: &mut FixtureRng) -> Problem {
    let mut p = Problem::new("bounded");
    for j in 0..10 {
        let l = rng.gen_range(-50.0..50.0);
        let u = l + rng.gen_range(0.0..100.0);
        p.add_variable(Variable::continuous(format!("x{j}"), l, u, rng.gen_range(-10.0..10.0)));
    }
    for i in 0..10 {
        let mut coefs = Vec::new();
        for j in 0..10 {
            if rng.gen_bool(0.7) {
                coefs.push((j, rng.gen_range(-1000.0..1000.0)));
            }
        }
        p.add_constraint(Constraint::new(format!("c{i}"), coefs, f64::NEG_INFINITY, f64::INFINITY));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn violation_is_nonnegative_and_consistent(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let pair = fixtures::random_feasible_pair(&mut rng);
        let p = &pair.problem;
        // Perturb the reference so some rows break.
        let mut x = pair.reference.clone();
        for v in &p.variables {
            if rng.gen_bool(0.5) {
                let old = x.get(&v.name).unwrap();
                x.set(v.name.clone(), old + rng.gen_range(-3.0..3.0));
            }
        }
        let report = is_feasible(p, &x, &tol());
        for i in 0..p.num_conss() {
            let viol = relative_violation(p, i, &x).unwrap();
            prop_assert!(viol >= 0.0);
            if viol == 0.0 {
                prop_assert!(report.worst.is_none_or(|w| w.kind != ViolationKind::Row(i)));
            }
        }
    }

    #[test]
    fn max_activity_bounds_sampled_points(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let p = bounded_problem(&mut rng);
        for _ in 0..1000 {
            let x = Solution::from_dense(&p, &box_point(&mut rng, &p));
            for i in 0..p.num_conss() {
                let act = activity(&p, i, &x).unwrap();
                let scale = p.constraints[i]
                    .coefficients
                    .iter()
                    .map(|&(j, a)| (a * p.variables[j].lower).abs().max((a * p.variables[j].upper).abs()))
                    .fold(1.0f64, f64::max);
                let slack = p.num_vars() as f64 * tol().epsilon * scale;
                prop_assert!(max_activity(&p, i, None) >= act - slack);
            }
        }
    }

    #[test]
    fn excluded_variable_equals_zeroed_bounds(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let p = fixtures::random_feasible_pair(&mut rng).problem;
        for k in 0..p.num_vars() {
            let mut zeroed = p.clone();
            zeroed.variables[k].lower = 0.0;
            zeroed.variables[k].upper = 0.0;
            for i in 0..p.num_conss() {
                prop_assert_eq!(max_activity(&p, i, Some(k)), max_activity(&zeroed, i, None));
            }
        }
    }

    #[test]
    fn objective_is_affine(seed: u64, alpha in -10.0f64..10.0, beta in -10.0f64..10.0) {
        let mut rng = fixtures::rng(seed);
        let mut p = bounded_problem(&mut rng);
        p.offset = rng.gen_range(-100.0..100.0);
        let x = box_point(&mut rng, &p);
        let y = box_point(&mut rng, &p);
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let f = |v: &[f64]| evaluate_objective(&p, &Solution::from_dense(&p, v)).unwrap() - p.offset;
        let lhs = f(&z);
        let rhs = alpha * f(&x) + beta * f(&y);
        let magnitude: f64 = p.variables.iter().zip(&z).map(|(v, zj)| (v.objective * zj).abs()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * magnitude.max(1.0) * 10.0, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn valid_rays_keep_points_feasible(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let n = rng.gen_range(1..=5);
        let mut p = Problem::new("cont");
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=5) as f64).collect();
        for j in 0..n {
            let upper = if rng.gen_bool(0.5) { f64::INFINITY } else { x[j] + rng.gen_range(0..=3) as f64 };
            p.add_variable(Variable::continuous(format!("x{j}"), 0.0, upper, rng.gen_range(-3..=1) as f64));
        }
        for i in 0..rng.gen_range(0..=4) {
            let coefs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-2..=2) as f64)).collect();
            let act: f64 = coefs.iter().map(|&(j, a)| a * x[j]).sum();
            let (lhs, rhs) = if rng.gen_bool(0.5) {
                (act - rng.gen_range(0..=2) as f64, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, act + rng.gen_range(0..=2) as f64)
            };
            p.add_constraint(Constraint::new(format!("c{i}"), coefs, lhs, rhs));
        }
        let start = Solution::from_dense(&p, &x);
        prop_assert!(is_feasible(&p, &start, &tol()).feasible);
        for _ in 0..20 {
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1..=2) as f64).collect();
            if !verify_ray(&p, &Solution::from_dense(&p, &r), &tol()) {
                continue;
            }
            for t in [1.0, 10.0, 100.0] {
                let moved: Vec<f64> = x.iter().zip(&r).map(|(a, b)| a + t * b).collect();
                prop_assert!(is_feasible(&p, &Solution::from_dense(&p, &moved), &tol()).feasible);
            }
        }
    }

    #[test]
    fn io_round_trips(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let p = fixtures::random_mps_problem(&mut rng);
        let first = write_instance_string(&p).unwrap();
        prop_assert_eq!(&first, &write_instance_string(&p).unwrap());
        let back = parse_instance(&first).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(write_instance_string(&back).unwrap(), first);

        let pair = fixtures::random_feasible_pair(&mut rng);
        let text = settings_to_string(&pair.settings).unwrap();
        prop_assert_eq!(parse_settings(&text).unwrap(), pair.settings);
    }

    #[test]
    fn candidates_preserve_reference_and_shrink(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let pair = fixtures::random_feasible_pair(&mut rng);
        let t = tol();
        let ctx = Context {
            problem: &pair.problem,
            settings: &pair.settings,
            target_settings: &pair.target_settings,
            reference: Some(&pair.reference),
            tol: &t,
        };
        let before = pair.problem.size();
        let serialized = write_instance_string(&pair.problem).unwrap();
        for kind in ModifierKind::ALL {
            for m in enumerate_candidates(kind, &ctx) {
                let applied = apply_batch(&pair.problem, &pair.settings, std::slice::from_ref(&m));
                let report = is_feasible(&applied.problem, &pair.reference, &t);
                prop_assert!(report.feasible, "{:?} broke the reference: {:?}", m, report.worst);
                let after = applied.problem.size();
                prop_assert!(after.dominated_by(&before), "{:?} grew the problem", m);
                match kind {
                    ModifierKind::Constraint => prop_assert!(after.conss < before.conss),
                    ModifierKind::Fixing => prop_assert!(after.vars < before.vars),
                    ModifierKind::Coefficient => prop_assert!(after.nonzeros < before.nonzeros),
                    _ => {}
                }
            }
        }
        // The base pair is never touched by applying a batch.
        prop_assert_eq!(write_instance_string(&pair.problem).unwrap(), serialized);
    }

    #[test]
    fn passing_modifier_runs_revert_exactly(seed: u64, nbatches in 1usize..6) {
        let mut rng = fixtures::rng(seed);
        let pair = fixtures::random_feasible_pair(&mut rng);
        let serialized = write_instance_string(&pair.problem).unwrap();
        let settings = settings_to_string(&pair.settings).unwrap();
        let mut state = ReductionState {
            problem: pair.problem.clone(),
            settings: pair.settings.clone(),
            target_settings: pair.target_settings.clone(),
            reference: Some(pair.reference.clone()),
            tol: tol(),
        };
        let options = ModifierOptions { nbatches: Some(nbatches), ..ModifierOptions::default() };
        for kind in ModifierKind::ALL {
            run_modifier(Modifier::new(kind), &mut AlwaysPass, &mut state, &options, &mut |_| {}).unwrap();
        }
        prop_assert_eq!(write_instance_string(&state.problem).unwrap(), serialized);
        prop_assert_eq!(settings_to_string(&state.settings).unwrap(), settings);
    }

    #[test]
    fn batches_partition_candidates(len in 0usize..500, nbatches in 1usize..60) {
        let items: Vec<usize> = (0..len).collect();
        let batches = plan_batches(items.clone(), nbatches);
        prop_assert!(batches.len() <= nbatches);
        prop_assert_eq!(batches.concat(), items);
        if let Some((last, full)) = batches.split_last() {
            let size = len.div_ceil(nbatches);
            prop_assert!(full.iter().all(|b| b.len() == size));
            prop_assert!(!last.is_empty() && last.len() <= size);
        }
    }

    #[test]
    fn integral_data_has_nothing_to_round(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let p = fixtures::random_pure_integer(&mut rng, 8, 8, 3.0);
        let lower: Vec<f64> = p.variables.iter().map(|v| v.lower).collect();
        let reference = Solution::from_dense(&p, &lower);
        let (s, t) = (Settings::new(), tol());
        let ctx = Context { problem: &p, settings: &s, target_settings: &s, reference: Some(&reference), tol: &t };
        prop_assert!(enumerate_candidates(ModifierKind::VarRound, &ctx).is_empty());
        prop_assert!(enumerate_candidates(ModifierKind::ConsRound, &ctx).is_empty());
    }

    #[test]
    fn evaluate_is_deterministic(seed: u64, faults in 0u8..=5) {
        let mut rng = fixtures::rng(seed);
        let case = fixtures::fault_case(faults.max(1), &mut rng);
        let spec = if faults == 0 { FaultSpec::none() } else { FaultSpec::only(faults) };
        let out = solve(&case.problem, &SolverConfig::from_settings(&case.settings, spec, seed).unwrap());
        let codes: Vec<FailCode> = (0..3)
            .map(|_| evaluate(&out, &case.problem, Some(&case.reference), &Passcodes::default(), &tol()))
            .collect();
        prop_assert!(codes.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn dual_check_is_monotone(seed: u64, low in -100.0f64..100.0, step in 0.0f64..50.0) {
        let mut rng = fixtures::rng(seed);
        let pair = fixtures::random_feasible_pair(&mut rng);
        let at = |bound: f64| {
            let outcome = SolveOutcome { dual_bound: bound, ..SolveOutcome::bare(SolveStatus::LimitReached) };
            check_dual_fail(&outcome, &pair.problem, &pair.reference, &tol())
        };
        prop_assert!(!at(low) || at(low + step));
    }

    #[test]
    fn presolve_keeps_feasible_points(seed: u64) {
        let mut rng = fixtures::rng(seed);
        let p = fixtures::random_pure_integer(&mut rng, 8, 8, 3.0);
        let reduced = presolve(&p, &PresolveOptions::default(), &FaultSpec::none());
        let t = tol();
        for _ in 0..300 {
            let x: Vec<f64> = p.variables.iter().map(|v| rng.gen_range(v.lower as i64..=v.upper as i64) as f64).collect();
            let point = Solution::from_dense(&p, &x);
            if !is_feasible(&p, &point, &t).feasible {
                continue;
            }
            prop_assert_ne!(reduced.status, PresolveStatus::Infeasible);
            for (j, fixed) in reduced.fixed.iter().enumerate() {
                if let Some(v) = fixed {
                    prop_assert_eq!(*v, x[j]);
                }
            }
            let inner: Vec<f64> = reduced.origin.iter().map(|&j| x[j]).collect();
            let mapped = Solution::from_dense(&reduced.problem, &inner);
            prop_assert!(is_feasible(&reduced.problem, &mapped, &t).feasible);
            let original = evaluate_objective(&p, &point).unwrap();
            let image = evaluate_objective(&reduced.problem, &mapped).unwrap();
            prop_assert!((original - image).abs() <= 1e-9 * original.abs().max(1.0));
        }
    }

    #[test]
    fn builtin_solve_is_deterministic(seed: u64, faults in 0u8..=5) {
        let mut rng = fixtures::rng(seed);
        let pair = fixtures::random_feasible_pair(&mut rng);
        let spec = if faults == 0 { FaultSpec::none() } else { FaultSpec::only(faults) };
        let config = SolverConfig::from_settings(&Settings::new(), spec, seed).unwrap();
        let mut a = solve(&pair.problem, &config);
        let mut b = solve(&pair.problem, &config);
        a.wall_time = Default::default();
        b.wall_time = Default::default();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn snapshots_shrink_and_keep_failing(seed: u64, fault in 1u8..=5) {
        let case = fixtures::fault_case(fault, &mut fixtures::rng(seed));
        let mut backend = mipdelta::builtin::BuiltinSolver::new(FaultSpec::only(fault), seed);
        let config = RunConfig { verify_snapshots: true, log_timing: false, ..RunConfig::default() };
        let summary = match run(
            &config,
            &Modifier::standard(),
            &mut backend,
            &case.problem,
            &case.settings,
            &case.settings,
            Some(&case.reference),
            RunIo::default(),
        ) {
            Ok(summary) => summary,
            // An instance on which the fault happens not to fire is no counterexample.
            Err(mipdelta::controller::RunError::NoFailure) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let mut previous = summary.original;
        for snap in &summary.snapshots {
            let size = snap.problem.size();
            prop_assert!(size.dominated_by(&previous));
            prop_assert!(is_feasible(&snap.problem, &case.reference, &tol()).feasible);
            previous = size;
        }
    }
}

/// Backend whose every solve passes, so every batch is reverted.
struct AlwaysPass;

impl Backend for AlwaysPass {
    fn setup(&mut self, _: &Problem, _: &Settings, _: &SolveLimits) -> Result<(), BackendError> {
        Ok(())
    }
    fn solve(&mut self) -> Result<SolveOutcome, BackendError> {
        Ok(SolveOutcome::bare(SolveStatus::LimitReached))
    }
    fn write(&self, _: &std::path::Path, _: &std::path::Path) -> Result<(), BackendError> {
        Ok(())
    }
}

#[test]
fn fault_free_never_fails_with_oracle_references() {
    let mut rng = fixtures::rng(77);
    let config = SolverConfig::from_settings(&Settings::new(), FaultSpec::none(), 0).unwrap();
    let mut checked = 0;
    while checked < 1000 {
        let p = fixtures::random_pure_integer(&mut rng, 10, 8, 2.0);
        let oracle = enumerate_oracle(&p).unwrap();
        let Some(optimum) = oracle.optima.first() else {
            continue;
        };
        let reference = Solution::from_dense(&p, optimum);
        let out = solve(&p, &config);
        let code = evaluate(&out, &p, Some(&reference), &Passcodes::default(), &tol());
        assert_eq!(code, FailCode::PASS, "instance {checked}: {p:?}");
        checked += 1;
    }
}

#[test]
fn fault_free_passes_on_mixed_pairs() {
    let mut rng = fixtures::rng(78);
    let config = SolverConfig::from_settings(&Settings::new(), FaultSpec::none(), 0).unwrap();
    for k in 0..500 {
        let pair = fixtures::random_feasible_pair(&mut rng);
        let out = solve(&pair.problem, &config);
        let code = evaluate(&out, &pair.problem, Some(&pair.reference), &Passcodes::default(), &tol());
        assert_eq!(code, FailCode::PASS, "pair {k}: {:?} {:?}", pair.problem, out);
    }
}
