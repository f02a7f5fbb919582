//! Drives an external solver through files and a child process.
//!
//! The adapter is configured by one TOML file:
//!
//! ```toml
//! # argv of the solver; placeholders are replaced per run
//! command = ["mysolver", "--read", "{instance}", "--set", "{settings}", "--sol", "{solution_out}"]
//! working_dir = "/tmp"              # optional
//! env_passthrough = ["PATH", "HOME"] # optional; other variables are cleared
//! time_limit_key = "limits/time"    # optional settings key receiving the time limit
//! node_limit_key = "limits/nodes"   # optional settings key receiving the node limit
//! grace_seconds = 10                # kill delay past the time limit
//!
//! [[status]]                        # first matching pattern wins
//! pattern = "^SOLVED optimal"
//! status = "optimal"                # optimal | infeasible | unbounded | limit-reached | error
//!
//! [values]                          # one capture group each, all optional
//! dual_bound = "dual bound: (\\S+)"
//! primal_bound = "primal bound: (\\S+)"
//! error_code = "ERROR (\\d+)"
//! ```
//!
//! Placeholders are `{instance}`, `{settings}`, `{solution_out}` and
//! `{ray_out}`. The solution and ray files use the `name value` format.
//! Patterns are matched against stdout in multi-line mode.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::{Regex, RegexBuilder};
use serde::Deserialize;
use thiserror::Error;

use crate::io::{self, parse_number};
use crate::model::{evaluate_objective, Problem, Settings};
use crate::solver::{write_pair, Backend, BackendError, SolveLimits, SolveOutcome, SolveStatus};

/// Internal code for a run that ended without a recognized status.
pub const CODE_NO_STATUS: i32 = -1;
/// Internal code for output that matched but could not be parsed.
pub const CODE_UNPARSEABLE: i32 = -2;

const DEFAULT_GRACE: f64 = 10.0;
const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("cannot read adapter config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid adapter config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid pattern `{pattern}`: {source}")]
    Pattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("invalid adapter config: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Vec<String>,
    working_dir: Option<PathBuf>,
    #[serde(default)]
    env_passthrough: Vec<String>,
    time_limit_key: Option<String>,
    node_limit_key: Option<String>,
    grace_seconds: Option<f64>,
    temp_root: Option<PathBuf>,
    #[serde(default)]
    status: Vec<RawStatus>,
    #[serde(default)]
    values: RawValues,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatus {
    pattern: String,
    status: SolveStatus,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValues {
    dual_bound: Option<String>,
    primal_bound: Option<String>,
    error_code: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AdapterConfig {
    pub command: Vec<String>,
    pub working_dir: Option<PathBuf>,
    pub env_passthrough: Vec<String>,
    pub time_limit_key: Option<String>,
    pub node_limit_key: Option<String>,
    pub grace: Duration,
    /// Parent of the per-run temporary directories; the system default when
    /// unset.
    pub temp_root: Option<PathBuf>,
    pub status_patterns: Vec<(Regex, SolveStatus)>,
    pub dual_bound: Option<Regex>,
    pub primal_bound: Option<Regex>,
    pub error_code: Option<Regex>,
}

fn compile(pattern: &str) -> Result<Regex, AdapterError> {
    RegexBuilder::new(pattern)
        .multi_line(true)
        .build()
        .map_err(|source| AdapterError::Pattern {
            pattern: pattern.to_string(),
            source,
        })
}

fn check_captures(re: &Regex, what: &str) -> Result<(), AdapterError> {
    if re.captures_len() != 2 {
        return Err(AdapterError::Invalid(format!("`{what}` needs exactly one capture group")));
    }
    Ok(())
}

impl AdapterConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, AdapterError> {
        let raw: RawConfig = toml::from_str(text)?;
        if raw.command.is_empty() {
            return Err(AdapterError::Invalid("`command` is empty".into()));
        }
        if !raw.command.iter().any(|arg| arg.contains("{instance}")) {
            return Err(AdapterError::Invalid("`command` must contain {instance}".into()));
        }
        let grace = raw.grace_seconds.unwrap_or(DEFAULT_GRACE);
        if !(grace.is_finite() && grace >= 0.0) {
            return Err(AdapterError::Invalid("`grace_seconds` must be nonnegative".into()));
        }
        let status_patterns = raw
            .status
            .iter()
            .map(|s| Ok((compile(&s.pattern)?, s.status)))
            .collect::<Result<Vec<_>, AdapterError>>()?;
        let value = |pattern: &Option<String>, what: &str| -> Result<Option<Regex>, AdapterError> {
            pattern
                .as_deref()
                .map(|p| {
                    let re = compile(p)?;
                    check_captures(&re, what)?;
                    Ok(re)
                })
                .transpose()
        };
        Ok(Self {
            dual_bound: value(&raw.values.dual_bound, "dual_bound")?,
            primal_bound: value(&raw.values.primal_bound, "primal_bound")?,
            error_code: value(&raw.values.error_code, "error_code")?,
            command: raw.command,
            working_dir: raw.working_dir,
            env_passthrough: raw.env_passthrough,
            time_limit_key: raw.time_limit_key,
            node_limit_key: raw.node_limit_key,
            grace: Duration::from_secs_f64(grace),
            temp_root: raw.temp_root,
            status_patterns,
        })
    }

    pub fn load(path: &Path) -> Result<Self, AdapterError> {
        let text = std::fs::read_to_string(path).map_err(|source| AdapterError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}

/// Settings sent to the solver: the user's pair plus injected limits.
fn with_limits(config: &AdapterConfig, settings: &Settings, limits: &SolveLimits) -> Settings {
    let mut out = settings.clone();
    if let (Some(key), Some(t)) = (&config.time_limit_key, limits.time) {
        out.set(key.clone(), io::format_number(t));
    }
    if let (Some(key), Some(n)) = (&config.node_limit_key, limits.nodes) {
        out.set(key.clone(), n.to_string());
    }
    out
}

struct Finished {
    stdout: String,
    exit_ok: bool,
    killed: bool,
}

fn launch(config: &AdapterConfig, paths: &BTreeMap<&str, PathBuf>, deadline: Option<Duration>) -> Result<Finished, BackendError> {
    let args: Vec<String> = config
        .command
        .iter()
        .map(|arg| {
            paths
                .iter()
                .fold(arg.clone(), |acc, (key, path)| acc.replace(key, &path.to_string_lossy()))
        })
        .collect();
    let mut cmd = Command::new(&args[0]);
    cmd.args(&args[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null());
    if let Some(dir) = &config.working_dir {
        cmd.current_dir(dir);
    }
    if !config.env_passthrough.is_empty() {
        cmd.env_clear();
        for key in &config.env_passthrough {
            if let Some(v) = std::env::var_os(key) {
                cmd.env(key, v);
            }
        }
    }
    let mut child = cmd
        .spawn()
        .map_err(|e| BackendError::Launch(format!("{}: {e}", args[0])))?;
    // Drain stdout on a thread so a chatty solver cannot block on a full pipe.
    let mut pipe = child.stdout.take().expect("stdout is piped");
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        buf
    });
    let started = Instant::now();
    let mut killed = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {}
            Err(e) => return Err(BackendError::Launch(e.to_string())),
        }
        if deadline.is_some_and(|d| started.elapsed() >= d) {
            let _ = child.kill();
            killed = true;
            break child.wait().map_err(|e| BackendError::Launch(e.to_string()))?;
        }
        std::thread::sleep(POLL);
    };
    // A killed solver may leave grandchildren holding the pipe open, so the
    // reader is abandoned rather than joined in that case.
    let stdout = if killed {
        String::new()
    } else {
        String::from_utf8_lossy(&reader.join().unwrap_or_default()).into_owned()
    };
    Ok(Finished {
        stdout,
        exit_ok: status.success(),
        killed,
    })
}

fn capture(re: &Option<Regex>, text: &str) -> Option<String> {
    re.as_ref()?
        .captures(text)
        .and_then(|c| c.get(1))
        .map(|m| m.as_str().to_string())
}

/// Maps a finished run to an outcome. `solution_file` and `ray_file` are
/// read only when they exist and are nonempty.
fn interpret(
    config: &AdapterConfig,
    problem: &Problem,
    run: &Finished,
    solution_file: &Path,
    ray_file: &Path,
) -> SolveOutcome {
    if run.killed {
        return SolveOutcome::bare(SolveStatus::LimitReached);
    }
    let text = &run.stdout;
    if let Some(code) = capture(&config.error_code, text) {
        return match code.trim().parse::<i64>() {
            Ok(n) if n != 0 => SolveOutcome::error(-(n.unsigned_abs().min(i32::MAX as u64) as i32)),
            _ => SolveOutcome::error(CODE_UNPARSEABLE),
        };
    }
    let Some(status) = config
        .status_patterns
        .iter()
        .find(|(re, _)| re.is_match(text))
        .map(|&(_, s)| s)
    else {
        log::debug!("no status recognized (exit {})", if run.exit_ok { "ok" } else { "failed" });
        return SolveOutcome::error(CODE_NO_STATUS);
    };
    if status == SolveStatus::Error {
        return SolveOutcome::error(CODE_NO_STATUS);
    }
    let mut outcome = SolveOutcome::bare(status);
    let nonempty = |p: &Path| std::fs::metadata(p).is_ok_and(|m| m.len() > 0);
    if nonempty(solution_file) {
        match io::read_solution(solution_file, problem) {
            Ok(read) => outcome.solutions.push(read.solution),
            Err(_) => return SolveOutcome::error(CODE_UNPARSEABLE),
        }
    }
    if nonempty(ray_file) {
        match io::read_solution(ray_file, problem) {
            Ok(read) => outcome.ray = Some(read.solution),
            Err(_) => return SolveOutcome::error(CODE_UNPARSEABLE),
        }
    }
    // Without reported bounds an optimal run vouches for its own solution.
    if status == SolveStatus::Optimal {
        if let Some(v) = outcome.solutions.first().and_then(|s| evaluate_objective(problem, s).ok()) {
            outcome.dual_bound = v;
            outcome.primal_bound = v;
        }
    }
    for (re, slot) in [
        (&config.dual_bound, &mut outcome.dual_bound),
        (&config.primal_bound, &mut outcome.primal_bound),
    ] {
        if let Some(raw) = capture(re, text) {
            match parse_number(raw.trim()) {
                Some(v) => *slot = v,
                None => return SolveOutcome::error(CODE_UNPARSEABLE),
            }
        }
    }
    outcome
}

/// Writes the pair to a fresh temporary directory, runs the solver and
/// parses what it reports. The directory is removed on every path.
pub fn run_external(
    config: &AdapterConfig,
    problem: &Problem,
    settings: &Settings,
    limits: &SolveLimits,
) -> Result<SolveOutcome, BackendError> {
    let dir = match &config.temp_root {
        Some(root) => tempfile::Builder::new().prefix("run").tempdir_in(root),
        None => tempfile::Builder::new().prefix("mipdelta").tempdir(),
    }
    .map_err(|e| BackendError::Launch(format!("temporary directory: {e}")))?;
    let paths: BTreeMap<&str, PathBuf> = [
        ("{instance}", dir.path().join("instance.mps")),
        ("{settings}", dir.path().join("instance.set")),
        ("{solution_out}", dir.path().join("solution.sol")),
        ("{ray_out}", dir.path().join("ray.sol")),
    ]
    .into_iter()
    .collect();
    write_pair(
        problem,
        &with_limits(config, settings, limits),
        &paths["{instance}"],
        &paths["{settings}"],
    )?;
    let deadline = limits
        .time
        .map(|t| Duration::from_secs_f64(t.max(0.0)) + config.grace);
    let started = Instant::now();
    let run = launch(config, &paths, deadline)?;
    let mut outcome = interpret(config, problem, &run, &paths["{solution_out}"], &paths["{ray_out}"]);
    outcome.wall_time = started.elapsed();
    Ok(outcome)
}

/// Backend wrapper around [`run_external`].
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    config: AdapterConfig,
    loaded: Option<(Problem, Settings, SolveLimits)>,
}

impl ExternalSolver {
    pub fn new(config: AdapterConfig) -> Self {
        Self { config, loaded: None }
    }
}

impl Backend for ExternalSolver {
    fn setup(&mut self, problem: &Problem, settings: &Settings, limits: &SolveLimits) -> Result<(), BackendError> {
        self.loaded = Some((problem.clone(), settings.clone(), *limits));
        Ok(())
    }

    fn solve(&mut self) -> Result<SolveOutcome, BackendError> {
        let (problem, settings, limits) = self.loaded.as_ref().ok_or(BackendError::NotSetUp)?;
        run_external(&self.config, problem, settings, limits)
    }

    fn write(&self, instance: &Path, settings: &Path) -> Result<(), BackendError> {
        let (problem, s, _) = self.loaded.as_ref().ok_or(BackendError::NotSetUp)?;
        write_pair(problem, s, instance, settings)
    }
}
