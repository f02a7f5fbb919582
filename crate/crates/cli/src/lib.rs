//! Command-line front end. Every subcommand is a library call so tests can
//! drive it without spawning the binary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mipdelta::builtin::{BuiltinSolver, FaultSpec};
use mipdelta::controller::{self, RoundReport, RunConfig, RunError, RunIo};
use mipdelta::external::{AdapterConfig, ExternalSolver};
use mipdelta::fixtures;
use mipdelta::io;
use mipdelta::model::{Problem, Settings, Solution, Tolerances};
use mipdelta::modifiers::Modifier;
use mipdelta::solver::{evaluate, Backend, FailCode, Passcodes, SolveLimits, SolveOutcome, SolveStatus};
use thiserror::Error;

mod summary;

pub use summary::{summarize, SummaryError};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MIPDELTA_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "mipdelta-out";
/// Run log written next to the snapshots.
pub const RUN_LOG: &str = "run.jsonl";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_REPRODUCED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mipdelta", version, about = "Delta debugging for MIP solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shrink a (settings, problem) pair while the solver keeps failing.
    Reduce(ReduceArgs),
    /// Shrink an infeasible problem to an irreducible infeasible subset.
    Iis(ReduceArgs),
    /// Solve once and print the fail code.
    Check(CheckArgs),
    /// Solve with the builtin solver and report in the external adapter's
    /// line format; usable as the target of an adapter config.
    MockSolve(MockSolveArgs),
    /// Print the size and statistics table of run logs.
    Summarize {
        logs: Vec<PathBuf>,
    },
    /// Write a generated demo case (instance, settings, reference).
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// `builtin` or `external:<adapter.toml>`.
    #[arg(long, default_value = "builtin")]
    pub backend: String,
    /// Faults of the builtin solver, e.g. `F2,F4`.
    #[arg(long)]
    pub faults: Option<String>,
    /// Seed of the builtin solver.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time limit per solve in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Node limit per solve.
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Fail codes treated as passing, e.g. `-3,2`.
    #[arg(long, allow_hyphen_values = true)]
    pub passcodes: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub instance: PathBuf,
    pub settings: PathBuf,
    /// Feasible reference solution; required unless in IIS mode.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Settings the Setting modifier moves toward; defaults to the input
    /// settings.
    #[arg(long)]
    pub target_settings: Option<PathBuf>,
    /// Maximum solves per modifier invocation; one per candidate if unset.
    #[arg(long)]
    pub nbatches: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub initial_stage: usize,
    #[arg(long, default_value_t = controller::MAX_STAGE)]
    pub last_stage: usize,
    /// Maximum number of productive rounds.
    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
    /// Snapshot directory; defaults to $MIPDELTA_OUTPUT_DIR or `mipdelta-out`.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Re-read and re-solve every snapshot.
    #[arg(long)]
    pub verify_snapshots: bool,
    /// Leave wall times out of the run log.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub instance: PathBuf,
    pub settings: PathBuf,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct MockSolveArgs {
    pub instance: PathBuf,
    pub settings: PathBuf,
    #[arg(long)]
    pub solution_out: Option<PathBuf>,
    #[arg(long)]
    pub ray_out: Option<PathBuf>,
    #[arg(long)]
    pub faults: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DemoCase {
    /// 200 variables hiding a normalization fault gadget; use `--faults F4`.
    Planted,
    /// Infeasible problem with a planted three-row IIS.
    Iis,
    /// Two binaries, `min -x1` with `x1 + x2 <= 1`; fails with `--faults F2`.
    Small,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub case: DemoCase,
    /// Directory receiving `<case>.mps`, `<case>.set` and, when a reference
    /// exists, `<case>.sol`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] mipdelta::io::IoError),
    #[error(transparent)]
    Backend(#[from] mipdelta::BackendError),
    #[error(transparent)]
    Adapter(#[from] mipdelta::external::AdapterError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error("{0}")]
    File(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(RunError::NoFailure) => EXIT_NOT_REPRODUCED,
            _ => EXIT_CONFIG,
        }
    }
}

fn parse_passcodes(csv: Option<&str>) -> Result<Passcodes, CliError> {
    let Some(csv) = csv else {
        return Ok(Passcodes::default());
    };
    csv.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i32>()
                .map_err(|_| CliError::Usage(format!("invalid passcode `{t}`")))
        })
        .collect()
}

fn parse_faults(csv: Option<&str>) -> Result<FaultSpec, CliError> {
    csv.map_or(Ok(FaultSpec::none()), |s| {
        s.parse().map_err(|e| CliError::Usage(format!("{e}")))
    })
}

pub fn make_backend(args: &BackendArgs) -> Result<Box<dyn Backend>, CliError> {
    if args.backend == "builtin" {
        return Ok(Box::new(BuiltinSolver::new(parse_faults(args.faults.as_deref())?, args.seed)));
    }
    let Some(config) = args.backend.strip_prefix("external:") else {
        return Err(CliError::Usage(format!(
            "unknown backend `{}`; use `builtin` or `external:<config>`",
            args.backend
        )));
    };
    if args.faults.is_some() {
        return Err(CliError::Usage("--faults only applies to the builtin backend".into()));
    }
    Ok(Box::new(ExternalSolver::new(AdapterConfig::load(Path::new(config))?)))
}

fn limits(args: &BackendArgs) -> SolveLimits {
    SolveLimits {
        time: args.time_limit,
        nodes: args.node_limit,
    }
}

fn output_dir(arg: Option<&Path>) -> PathBuf {
    arg.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn read_reference(path: Option<&Path>, problem: &Problem) -> Result<Option<Solution>, CliError> {
    Ok(match path {
        Some(p) => Some(io::read_solution(p, problem)?.solution),
        None => None,
    })
}

fn reduce(args: &ReduceArgs, iis: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = io::read_instance(&args.instance)?;
    let settings = io::read_settings(&args.settings)?;
    let target = match &args.target_settings {
        Some(p) => io::read_settings(p)?,
        None => settings.clone(),
    };
    let reference = read_reference(args.reference.as_deref(), &problem)?;
    if !iis && reference.is_none() {
        return Err(CliError::Usage("reduce needs --reference".into()));
    }
    let mut backend = make_backend(&args.backend)?;
    let dir = output_dir(args.output_dir.as_deref());
    let config = RunConfig {
        initial_stage: args.initial_stage,
        last_stage: args.last_stage,
        max_rounds: args.max_rounds,
        nbatches: args.nbatches,
        passcodes: parse_passcodes(args.backend.passcodes.as_deref())?,
        iis,
        output_dir: Some(dir.clone()),
        limits: limits(&args.backend),
        verify_snapshots: args.verify_snapshots,
        log_timing: !args.no_timing,
    };
    config.validate()?;
    std::fs::create_dir_all(&dir)?;
    let log_path = dir.join(RUN_LOG);
    let mut log = BufWriter::new(File::create(&log_path)?);
    let modifiers = if iis { Modifier::relaxing_only() } else { Modifier::standard() };
    let mut write_error = None;
    let mut header = false;
    let mut on_round = |report: &RoundReport| {
        if !report.changed {
            return;
        }
        if !std::mem::replace(&mut header, true) {
            let line = writeln!(out, "{:>5} {:>5} {:>8} {:>8} {:>10} {:>8}", "round", "stage", "vars", "conss", "nonzeros", "solves");
            if let Err(e) = line {
                write_error.get_or_insert(e);
            }
        }
        let line = writeln!(
            out,
            "{:>5} {:>5} {:>8} {:>8} {:>10} {:>8}",
            report.round, report.stage, report.size.vars, report.size.conss, report.size.nonzeros, report.solves
        );
        if let Err(e) = line {
            write_error.get_or_insert(e);
        }
    };
    let summary = controller::run(
        &config,
        &modifiers,
        backend.as_mut(),
        &problem,
        &settings,
        &target,
        reference.as_ref(),
        RunIo {
            log: Some(&mut log),
            on_round: Some(&mut on_round),
        },
    );
    log.flush()?;
    let summary = summary?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    writeln!(
        out,
        "initial code {}; {} -> {}; {} rounds, {} solves",
        summary.initial_code.0, summary.original, summary.reduced, summary.rounds, summary.solves
    )?;
    match summary.snapshots.last().and_then(|s| s.files.as_ref()) {
        Some((inst, set)) => writeln!(out, "final snapshot: {} {}", inst.display(), set.display())?,
        None => writeln!(out, "no reduction found; no snapshot written")?,
    }
    writeln!(out, "run log: {}", log_path.display())?;
    Ok(())
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<FailCode, CliError> {
    let problem = io::read_instance(&args.instance)?;
    let settings = io::read_settings(&args.settings)?;
    let reference = read_reference(args.reference.as_deref(), &problem)?;
    let mut backend = make_backend(&args.backend)?;
    backend.setup(&problem, &settings, &limits(&args.backend))?;
    let outcome = backend.solve()?;
    let code = evaluate(
        &outcome,
        &problem,
        reference.as_ref(),
        &parse_passcodes(args.backend.passcodes.as_deref())?,
        &Tolerances::default(),
    );
    writeln!(
        out,
        "status {}; dual bound {}; primal bound {}",
        outcome.status,
        io::format_number(outcome.dual_bound),
        io::format_number(outcome.primal_bound)
    )?;
    writeln!(out, "code {} ({})", code.0, code.describe())?;
    Ok(code)
}

/// Prints `outcome` in the format of the sample adapter config.
fn report_outcome(outcome: &SolveOutcome, out: &mut dyn Write) -> std::io::Result<()> {
    if outcome.status == SolveStatus::Error {
        return writeln!(out, "ERROR {}", outcome.internal_code.unsigned_abs());
    }
    writeln!(out, "status: {}", outcome.status)?;
    writeln!(out, "dual bound: {}", io::format_number(outcome.dual_bound))?;
    writeln!(out, "primal bound: {}", io::format_number(outcome.primal_bound))
}

fn mock_solve(args: &MockSolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = io::read_instance(&args.instance)?;
    let settings = io::read_settings(&args.settings)?;
    let mut backend = BuiltinSolver::new(parse_faults(args.faults.as_deref())?, args.seed);
    // Limits arrive through the settings file; the builtin keys are checked
    // by setup like any other.
    backend.setup(&problem, &settings, &SolveLimits::default())?;
    let outcome = backend.solve()?;
    if let (Some(path), Some(sol)) = (&args.solution_out, outcome.solutions.first()) {
        io::write_solution(sol, path)?;
    }
    if let (Some(path), Some(ray)) = (&args.ray_out, &outcome.ray) {
        io::write_solution(ray, path)?;
    }
    report_outcome(&outcome, out)?;
    Ok(())
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rng = fixtures::rng(args.seed);
    let (name, problem, settings, reference) = match args.case {
        DemoCase::Planted => {
            let p = fixtures::planted_normalization(&mut rng);
            ("planted", p.problem, p.settings, Some(p.reference))
        }
        DemoCase::Iis => ("iis", fixtures::planted_iis(&mut rng), Settings::new(), None),
        DemoCase::Small => {
            let p = fixtures::small_binary();
            let reference = Solution::from_dense(&p, &[1.0, 0.0]);
            let settings: Settings = [("presolve/enabled", "false")].into_iter().collect();
            ("small", p, settings, Some(reference))
        }
    };
    std::fs::create_dir_all(&args.out)?;
    let base = args.out.join(name);
    io::write_instance(&problem, &base.with_extension("mps"))?;
    io::write_settings(&settings, &base.with_extension("set"))?;
    if let Some(r) = reference {
        io::write_solution(&r, &base.with_extension("sol"))?;
    }
    writeln!(out, "wrote {}.*", base.display())?;
    Ok(())
}

/// Runs one invocation and returns the process exit code. Errors are
/// printed to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Reduce(args) => reduce(args, false, out),
        Command::Iis(args) => reduce(args, true, out),
        Command::Check(args) => check(args, out).map(|_| ()),
        Command::MockSolve(args) => mock_solve(args, out),
        Command::Summarize { logs } => logs
            .iter()
            .map(|p| std::fs::read_to_string(p).map_err(CliError::from))
            .collect::<Result<Vec<_>, _>>()
            .and_then(|texts| Ok(summarize(&texts.concat())?))
            .and_then(|table| Ok(out.write_all(table.as_bytes())?)),
        Command::Generate(args) => generate(args, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
