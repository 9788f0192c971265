//! End-to-end checks of the batch interface: outputs, exit codes, error
//! reporting and the oracle mode.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowtw"))
        .args(args)
        .env_remove("LOWTW_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_and_exit_codes() {
    let ok = run(&["validate", &fixture("p4.gr"), &fixture("p4.td")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "valid true\n");

    let bad = run(&["validate", &fixture("p4.gr"), &fixture("bad.td")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).starts_with("valid false\nviolation"));

    let missing = run(&["validate", "/nonexistent.gr", &fixture("p4.td")]);
    assert_eq!(missing.status.code(), Some(1));

    let usage = run(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn parse_error_names_line() {
    let dir = tempdir();
    let bad = dir.join("dup.gr");
    std::fs::write(&bad, "p tw 2 2\n1 2\n1 2\n").unwrap();
    let out = run(&["validate", bad.to_str().unwrap(), &fixture("p4.td")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line 3"), "stderr was: {err}");
}

#[test]
fn rank_det_solve_routes() {
    // tree-decomposition route (path-shaped, runs the path ordering)
    let out = run(&["rank", &fixture("tri8.mtx"), &fixture("tri8.td"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("rank 8\n"));

    // tree-partition route
    let out = run(&["det", &fixture("tri8.mtx"), &fixture("tri8.tpd"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out);
    assert!(line.starts_with("det "), "got: {line}");

    // solve against the td route, then verify the echoed solution
    let out = run(&[
        "solve",
        &fixture("tri8.mtx"),
        &fixture("tri8.td"),
        "--rhs",
        &fixture("rhs8.txt"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 8);

    // rational matrix through the splitting route
    let out = run(&["det", &fixture("rat3.mtx"), &fixture("rat3.td"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("det "));

    // det on a non-square slice is refused
    let dir = tempdir();
    let wide = dir.join("wide.mtx");
    std::fs::write(&wide, "m 1 2 7\n1 1 1\n1 2 2\n").unwrap();
    let wide_td = dir.join("wide.td");
    std::fs::write(&wide_td, "s td 1 3 3\nb 1 1 2 3\n").unwrap();
    let out = run(&["det", wide.to_str().unwrap(), wide_td.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_inconsistent_is_a_verdict() {
    let dir = tempdir();
    let m = dir.join("ones.mtx");
    std::fs::write(&m, "m 2 1 7\n1 1 1\n2 1 1\n").unwrap();
    let td = dir.join("ones.td");
    std::fs::write(&td, "s td 1 3 3\nb 1 1 2 3\n").unwrap();
    let rhs = dir.join("r.txt");
    std::fs::write(&rhs, "1\n2\n").unwrap();
    let out = run(&[
        "solve",
        m.to_str().unwrap(),
        td.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out), "inconsistent true\n");
}

#[test]
fn matching_commands() {
    let out = run(&["matching-size", &fixture("p4.gr"), &fixture("p4.td"), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "size 2\n");

    let out = run(&["matching-size", &fixture("petersen.gr"), &fixture("petersen.td"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("size 5\n"));

    let out = run(&["matching", &fixture("c6.gr"), &fixture("c6.td"), "--seed", "1", "--oracle"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("size 3\n"), "got: {text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("edge ")).count(), 3);
}

#[test]
fn maxflow_command() {
    let out = run(&[
        "maxflow",
        &fixture("grid3.gr"),
        &fixture("grid3.td"),
        "--source",
        "1",
        "--sink",
        "9",
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("flow 2\n"), "got: {text}");
    assert!(text.contains("oracle_agrees true"));
}

#[test]
fn tw_approx_writes_a_valid_file() {
    let dir = tempdir();
    let out_td = dir.join("out.td");
    let out = run(&["tw-approx", "-k", "2", &fixture("p4.gr"), "-o", out_td.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let check = run(&["validate", &fixture("p4.gr"), out_td.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));

    // K5 has more than kn edges for k = 1, which forces the verdict
    let k5 = dir.join("k5.gr");
    let mut body = String::from("p tw 5 10\n");
    for u in 1..=5 {
        for v in (u + 1)..=5 {
            body.push_str(&format!("{u} {v}\n"));
        }
    }
    std::fs::write(&k5, body).unwrap();
    let out_td = dir.join("k5.td");
    let out = run(&["tw-approx", "-k", "1", k5.to_str().unwrap(), "-o", out_td.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out), "treewidth >= 1\n");
}

#[test]
fn seed_env_variable_is_honored() {
    let with_flag = run(&["matching", &fixture("c6.gr"), &fixture("c6.td"), "--seed", "9"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_lowtw"))
        .args(["matching", &fixture("c6.gr"), &fixture("c6.td")])
        .env("LOWTW_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(stdout(&with_flag), String::from_utf8_lossy(&with_env.stdout));
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lowtw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
