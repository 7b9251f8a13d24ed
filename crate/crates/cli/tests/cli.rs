//! End-to-end checks of the command-line surface: flag validation and exit
//! codes, output formats, the CSV schema, and the determinism contracts
//! (thread count, disk-vs-RAM, seeded estimates) as observed through the
//! binary itself.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cs-bounds"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to run binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Full-precision lower bound from the report line.
fn parse_bound(text: &str) -> f64 {
    let marker = "full precision ";
    let at = text.find(marker).expect("no full-precision bound in output");
    let rest = &text[at + marker.len()..];
    let end = rest.find(')').unwrap();
    rest[..end].parse().unwrap()
}

#[test]
fn bound_reproduces_published_cells() {
    let out = run(&["bound", "--sigma", "3", "--d", "2", "--ell", "3"]);
    assert!(out.status.success());
    let b = parse_bound(&stdout(&out));
    assert!((b - 0.644966).abs() <= 2e-6, "got {b}");

    let out = run(&["bound", "--sigma", "2", "--d", "6", "--ell", "1"]);
    assert!(out.status.success());
    let b = parse_bound(&stdout(&out));
    assert!((b - 0.592592).abs() <= 2e-6, "got {b}");
}

#[test]
fn bound_usage_errors_exit_2() {
    let out = run(&["bound", "--sigma", "1", "--d", "2", "--ell", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // missing required flag goes through clap, also exit 2
    let out = run(&["bound", "--sigma", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_3() {
    let out = run(&[
        "bound", "--sigma", "2", "--d", "2", "--ell", "25", "--memory-limit", "1MiB",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("required") && err.contains("bytes"), "{err}");
}

#[test]
fn binary_bound_reproduces_table_cell() {
    let out = run(&["binary-bound", "--ell", "6"]);
    assert!(out.status.success());
    let b = parse_bound(&stdout(&out));
    assert!((b - 0.770273).abs() <= 2e-6, "got {b}");
}

#[test]
fn thread_count_does_not_change_output() {
    let a = run(&["binary-bound", "--ell", "2", "--threads", "1"]);
    let b = run(&["binary-bound", "--ell", "2", "--threads", "8"]);
    assert!(a.status.success() && b.status.success());
    let strip = |s: String| {
        s.lines()
            .filter(|l| !l.contains("wall") && !l.contains("threads"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn disk_mode_equals_ram_mode_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let ram = run(&["binary-bound", "--ell", "8", "--iters", "60"]);
    let disk = run(&[
        "binary-bound",
        "--ell",
        "8",
        "--iters",
        "60",
        "--mode",
        "disk",
        "--budget",
        "16MiB",
        "--dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(ram.status.success(), "{}", String::from_utf8_lossy(&ram.stderr));
    assert!(disk.status.success(), "{}", String::from_utf8_lossy(&disk.stderr));
    let pick = |s: &str| {
        s.lines()
            .filter(|l| l.contains("r =") || l.contains("epsilon =") || l.contains("lower bound"))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(pick(&stdout(&ram)), pick(&stdout(&disk)));
}

#[test]
fn disk_mode_requires_dir_and_checks_space() {
    let out = run(&["binary-bound", "--ell", "4", "--mode", "disk"]);
    assert_eq!(out.status.code(), Some(2));
    // an absuraly large run must fail the free-space precheck with a
    // required-bytes report
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "binary-bound",
        "--ell",
        "31",
        "--mode",
        "disk",
        "--dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("required"), "{err}");
}

#[test]
fn resume_matches_uninterrupted_run() {
    let dir_a = tempfile::tempdir().unwrap();
    let full = run(&[
        "binary-bound", "--ell", "3", "--iters", "30", "--mode", "disk",
        "--dir", dir_a.path().to_str().unwrap(),
    ]);
    let dir_b = tempfile::tempdir().unwrap();
    let part = run(&[
        "binary-bound", "--ell", "3", "--iters", "12", "--mode", "disk",
        "--dir", dir_b.path().to_str().unwrap(),
    ]);
    assert!(part.status.success());
    let resumed = run(&[
        "binary-bound", "--ell", "3", "--iters", "30", "--mode", "disk",
        "--dir", dir_b.path().to_str().unwrap(), "--resume",
    ]);
    assert!(resumed.status.success(), "{}", String::from_utf8_lossy(&resumed.stderr));
    assert_eq!(
        parse_bound(&stdout(&full)).to_bits(),
        parse_bound(&stdout(&resumed)).to_bits()
    );
}

#[test]
fn csv_rows_have_stable_schema() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let csv_str = csv.to_str().unwrap();
    assert!(run(&["bound", "--sigma", "2", "--d", "2", "--ell", "1", "--csv", csv_str])
        .status
        .success());
    assert!(run(&["binary-bound", "--ell", "2", "--csv", csv_str]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "sigma,d,ell,iterations,r,epsilon,lower_bound,wall_seconds,threads,mode"
    );
    assert_eq!(lines.len(), 3);
    let row: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(row.len(), 10);
    assert_eq!((row[0], row[1], row[2]), ("2", "2", "2"));
    assert_eq!(row[9], "ram");
    let bound: f64 = row[6].parse().unwrap();
    assert!((bound - 0.727272).abs() < 2e-6);
}

#[test]
fn estimate_is_seed_reproducible() {
    let args = &["estimate", "--sigma", "2", "--d", "2", "--n", "500", "--samples", "20",
                 "--seed", "7"];
    let a = run(args);
    let b = run(args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("ChaCha8"));
    let c = run(&["estimate", "--sigma", "2", "--d", "2", "--n", "500", "--samples", "20",
                  "--seed", "8"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn estimate_rejects_zero_n() {
    let out = run(&["estimate", "--sigma", "2", "--d", "2", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_quick_subset_passes() {
    let out = run(&["verify", "--max-states", "256", "--max-ell", "2"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("[PASS] binary ell=1"));
    assert!(text.contains("checks passed"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn progress_lines_go_to_stderr() {
    let out = run(&["binary-bound", "--ell", "2", "--iters", "8", "--progress"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.lines().filter(|l| l.contains("iteration")).count() >= 7, "{err}");
    assert!(err.contains("best bound"));
}

#[test]
fn help_lists_subcommands() {
    let out = run(&["--help"]);
    let text = stdout(&out);
    for sub in ["bound", "binary-bound", "estimate", "verify"] {
        assert!(text.contains(sub), "missing {sub} in help");
    }
    let _ = Path::new("unused");
}
