use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use mipdelta::io;
use mipdelta_cli::{execute, summarize, Cli, EXIT_CONFIG, EXIT_NOT_REPRODUCED, EXIT_OK};

const BIN: &str = env!("CARGO_BIN_EXE_mipdelta");

fn run(args: &[&str]) -> (i32, String, String) {
    let cli = Cli::try_parse_from(std::iter::once("mipdelta").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = execute(&cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn generate(case: &str, dir: &Path) -> [String; 3] {
    let (code, _, _) = run(&["generate", case, "--out", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    ["mps", "set", "sol"].map(|ext| dir.join(format!("{case}.{ext}")).to_str().unwrap().to_string())
}

fn last_snapshot(dir: &Path) -> PathBuf {
    let mut rounds: Vec<usize> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.strip_prefix("round_")?.strip_suffix(".mps")?.parse().ok()
        })
        .collect();
    rounds.sort();
    dir.join(format!("round_{}.mps", rounds.last().expect("at least one snapshot")))
}

#[test]
fn reduce_planted_fault() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, sol] = generate("planted", dir.path());
    let out_dir = dir.path().join("out");
    let (code, out, err) = run(&[
        "reduce", &inst, &set, "--reference", &sol, "--faults", "F4", "--nbatches", "50",
        "--output-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("round stage"));
    let last = io::read_instance(&last_snapshot(&out_dir)).unwrap();
    assert!(last.num_vars() <= 12);
    assert!(out_dir.join("run.jsonl").exists());
}

#[test]
fn fault_free_reduce_reports_no_failure() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, sol] = generate("small", dir.path());
    let out_dir = dir.path().join("out");
    let (code, _, err) = run(&["reduce", &inst, &set, "--reference", &sol, "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_NOT_REPRODUCED);
    assert!(err.contains("no failure reproduced"));
}

#[test]
fn check_prints_code() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, sol] = generate("small", dir.path());
    let (code, out, _) = run(&["check", &inst, &set, "--reference", &sol, "--faults", "F2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("code 1 (dual fail)"), "{out}");
    let (_, out, _) = run(&["check", &inst, &set, "--reference", &sol]);
    assert!(out.contains("code 0"), "{out}");
    let (_, out, _) = run(&["check", &inst, &set, "--reference", &sol, "--faults", "F2", "--passcodes", "1"]);
    assert!(out.contains("code 0"), "{out}");
}

#[test]
fn iis_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, _] = generate("iis", dir.path());
    let out_dir = dir.path().join("out");
    let (code, _, err) = run(&["iis", &inst, &set, "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let last = io::read_instance(&last_snapshot(&out_dir)).unwrap();
    assert_eq!(last.num_conss(), 3);
}

#[test]
fn configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, sol] = generate("small", dir.path());
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["reduce", &inst, &set, "--output-dir", out],
        vec!["reduce", &inst, &set, "--reference", &sol, "--backend", "bogus", "--output-dir", out],
        vec!["reduce", &inst, &set, "--reference", &sol, "--faults", "F9", "--output-dir", out],
        vec!["reduce", &inst, &set, "--reference", &sol, "--passcodes", "x", "--output-dir", out],
        vec!["reduce", &inst, &set, "--reference", &sol, "--nbatches", "0", "--faults", "F2", "--output-dir", out],
        vec!["reduce", &inst, &set, "--reference", &sol, "--initial-stage", "0", "--faults", "F2", "--output-dir", out],
        vec!["reduce", &inst, &set, "--reference", &sol, "--backend", "external:/nonexistent.toml", "--output-dir", out],
        vec!["check", "/nonexistent.mps", &set],
    ];
    for args in cases {
        let (code, _, err) = run(&args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}: {err}");
        assert!(err.starts_with("error: "));
    }
    // An infeasible reference is rejected before any reduction.
    let bad = dir.path().join("bad.sol");
    std::fs::write(&bad, "x1 1\nx2 1\n").unwrap();
    let (code, _, err) = run(&["reduce", &inst, &set, "--reference", bad.to_str().unwrap(), "--faults", "F2", "--output-dir", out]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("infeasible reference"));
}

#[test]
fn external_backend_through_mock_solve() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, sol] = generate("small", dir.path());
    let template = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("adapters/mock-solve.toml")).unwrap();
    let config = template.replacen(
        r#"command = ["mipdelta", "mock-solve", "{instance}", "{settings}", "--solution-out", "{solution_out}", "--ray-out", "{ray_out}"]"#,
        &format!(
            r#"command = ["{BIN}", "mock-solve", "{{instance}}", "{{settings}}", "--solution-out", "{{solution_out}}", "--ray-out", "{{ray_out}}", "--faults", "F2"]"#
        ),
        1,
    );
    assert_ne!(config, template);
    let cfg = dir.path().join("adapter.toml");
    std::fs::write(&cfg, config).unwrap();
    let backend = format!("external:{}", cfg.display());
    let (code, out, err) = run(&["check", &inst, &set, "--reference", &sol, "--backend", &backend]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("code 1"), "{out}");
    let out_dir = dir.path().join("out");
    let (code, _, err) = run(&[
        "reduce", &inst, &set, "--reference", &sol, "--backend", &backend, "--time-limit", "30",
        "--output-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, _, err) = run(&["check", &inst, &set, "--backend", &backend, "--faults", "F2"]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let [inst, set, sol] = generate("planted", dir.path());
    let mut logs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("out{k}"));
        let status = Command::new(BIN)
            .args(["reduce", &inst, &set, "--reference", &sol, "--faults", "F2,F4", "--nbatches", "20", "--seed", "7", "--no-timing"])
            .env("MIPDELTA_OUTPUT_DIR", &out_dir)
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&status.stderr));
        logs.push((
            std::fs::read(out_dir.join("run.jsonl")).unwrap(),
            std::fs::read(last_snapshot(&out_dir)).unwrap(),
        ));
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn summary_matches_golden() {
    let log = include_str!("golden/two_runs.jsonl");
    let golden = include_str!("golden/summary.txt");
    assert_eq!(summarize(log).unwrap(), golden);
    let (code, out, _) = run(&["summarize", concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/two_runs.jsonl")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, golden);
}
