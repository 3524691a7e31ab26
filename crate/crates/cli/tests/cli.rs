use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const LO: &str = "(E x E y E z lo2(x,y,z)) <|> (E x E y E z lo3(x,y,z))";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, content).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eval_lo_sentence_exit_codes() {
    let dir = TempDir::new().unwrap();
    let m4 = write(&dir, "m4.model", "universe = 4\n");
    let m5 = write(&dir, "m5.model", "universe = 5\n");
    let out = run(&["eval", "--model", s(&m4), "--formula", LO, "--strategy", "opt"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "true\n");
    let out = run(&["eval", "--model", s(&m5), "--formula", LO, "--strategy", "opt"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "false\n");
}

#[test]
fn eval_with_team_file() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.model", "universe = 2\nrel P/1 = {0}\n");
    let team = write(&dir, "t.team", "vars = v w\nrow 0 0\nrow 0 1\n");
    let out = run(&["eval", "--model", s(&model), "--team", s(&team), "--formula", "const(v) & P(v)"]);
    assert_eq!(code(&out), 0);
    let out = run(&["eval", "--model", s(&model), "--team", s(&team), "--formula", "const(w)", "--format", "machine"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "EVAL VERDICT false STRATEGY brute\n");
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let model = write(&dir, "m.model", "universe = 3\n");
    let missing = dir.path().join("missing.model");
    assert_eq!(code(&run(&["eval", "--model", s(&missing), "--formula", "TT"])), 66);
    assert_eq!(code(&run(&["eval", "--model", s(&model), "--formula", "E x"])), 65);
    assert_eq!(code(&run(&["eval", "--model", s(&model), "--formula", "Q(x)"])), 64);
    assert_eq!(code(&run(&["eval", "--model", s(&model), "--formula", "E x Q(x)"])), 65);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["eval", "--formula", "TT"])), 64);
    assert_eq!(code(&run(&["equiv", "--left", "P(x)", "--right", "P(y)"])), 65);
    let bad = write(&dir, "bad.model", "universe = 3\nrel P/1 = {7}\n");
    assert_eq!(code(&run(&["eval", "--model", s(&bad), "--formula", "TT"])), 65);
    let out = run(&["eval", "--model", s(&model), "--formula", LO, "--budget", "5"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn classify_reports() {
    let out = run(&["classify", "--dep", "indep", "--max-n", "3", "--format", "machine"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("PROPERTY downwards VERDICT fail"));
    assert!(text.contains("PROPERTY union VERDICT fail"));

    let text = stdout(&run(&["classify", "--dep", "ne", "--max-n", "3", "--format", "machine"]));
    assert!(text.contains("PROPERTY upwards VERDICT ok"));
    assert!(text.contains("PROPERTY empty-team VERDICT fail"));

    let text = stdout(&run(&["classify", "--dep", "neq1", "--nonjumping", "--max-n", "3", "--format", "machine"]));
    assert!(text.ends_with("NONJUMPING VERDICT fail WITNESS n=2 {}\n"), "{text}");
    let text = stdout(&run(&["classify", "--dep", "const", "--nonjumping", "--dmax", "--format", "machine"]));
    assert!(text.contains("NONJUMPING VERDICT ok"));
    assert!(text.contains("DMAX n=2 {0} {1}"), "{text}");
}

#[test]
fn classify_fo_dependency_file() {
    let dir = TempDir::new().unwrap();
    let dep = write(&dir, "nonempty.dep", "carrier R/1\nE x R(x)\n");
    let out = run(&["classify", "--fo-dep", s(&dep), "--format", "machine"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("PROPERTY upwards VERDICT ok"));
    let model = write(&dir, "m.model", "universe = 2\n");
    let team = write(&dir, "t.team", "vars = x\nrow 1\n");
    let out = run(&["eval", "--fo-dep", s(&dep), "--model", s(&model), "--team", s(&team), "--formula", "fo:nonempty(x)"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&run(&["classify", "--dep", "nosuch"])), 65);
}

#[test]
fn equiv_u_definition() {
    let out = run(&["equiv", "--left", "u(v)", "--right", "FF <|> all(v)", "--max-n", "3"]);
    assert_eq!(code(&out), 0);
    let out = run(&["equiv", "--left", "const(x)", "--right", "x = x", "--format", "machine"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains(" WITNESS universe = 2 / vars = x; row 0; row 1"));
}

#[test]
fn rewrite_pulls_global_disjunction() {
    let out = run(&["rewrite", "--pull-sqcup", "E v (P(v) <|> ~P(v))"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "E v P(v)\nE v ~P(v)\n");
    let out = run(&["rewrite", "--pull-sqcup", "<> (P(v) <|> TT)"]);
    assert_eq!(code(&out), 65);
    let out = run(&["rewrite", "--encode-sqcup", "ne(v) <|> TT"]);
    assert!(stdout(&out).starts_with("E _p0 E _q0 (const(_p0) & const(_q0)"));
}

#[test]
fn rewrite_definability_file() {
    let dir = TempDir::new().unwrap();
    let form = write(&dir, "const.form", "arity 1\nparams 1\npsi+ TT\ntheta x1 = z1\n");
    let out = run(&["rewrite", "--definability", s(&form)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("fo:E(x1,_z0)"), "{}", stdout(&out));
}

#[test]
fn verify_single_property() {
    let out = run(&["verify", "--property", "union", "--formula", "inc(x ; y)", "--max-n", "2", "--format", "machine"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "PROPERTY closure-union VERDICT ok BOUNDS n=2 rows=4\n");
    let out = run(&["verify", "--property", "downwards", "--formula", "inc(x ; y)"]);
    assert_eq!(code(&out), 65);
}

#[test]
fn verify_paper_suite_is_deterministic() {
    let first = run(&["verify", "--suite", "paper", "--format", "machine", "--seed", "3"]);
    assert_eq!(code(&first), 0, "{}", stdout(&first));
    let lines = stdout(&first);
    assert_eq!(lines.lines().count(), 12);
    assert!(lines.lines().all(|l| l.contains("VERDICT ok")));
    let second = run(&["verify", "--suite", "paper", "--format", "machine", "--seed", "3"]);
    assert_eq!(first.stdout, second.stdout);
}
