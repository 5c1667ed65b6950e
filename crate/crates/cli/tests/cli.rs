//! End-to-end runs of the `intcon` binary.

use std::path::Path;
use std::process::{Command, Output};

use intcon_cli::boxes_from_json;
use intcon_core::{csp_from_text, parse_problem, solve, var, Propagator};
use serde_json::Value;
use tempfile::TempDir;

const PARABOLA_CIRCLE: &str =
    "var x in [0,1]; var y in [0,1];\nconstraint y = x^2;\nconstraint x^2 + y^2 = 1;\n";
const TWO_ROOTS: &str =
    "var x in [-2,2]; var y in [-2,2];\nconstraint y = x^2;\nconstraint x^2 + y^2 = 1;\n";
const NEGATIVE_SQUARE: &str = "var x in [-2,2]; var y in [-3,-1];\nconstraint y = x^2;\n";
const ROOT: f64 = 0.7861513777574233;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn intcon(dir: &TempDir, source: &str, args: &[&str]) -> Run {
    let file = dir.path().join("problem.txt");
    std::fs::write(&file, source).unwrap();
    run_on(&file, args)
}

fn run_on(file: &Path, args: &[&str]) -> Run {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_intcon"))
        .arg(file)
        .args(args)
        .output()
        .unwrap();
    Run {
        code: status.code().unwrap(),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

#[test]
fn parabola_circle_prints_one_enclosure() {
    let dir = TempDir::new().unwrap();
    let r = intcon(&dir, PARABOLA_CIRCLE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let boxes: Vec<&str> = r.stdout.lines().filter(|l| l.starts_with("box ")).collect();
    assert_eq!(boxes.len(), 1, "{}", r.stdout);
    assert!(
        boxes[0].starts_with("box 1: {x=[0.78615137775742"),
        "{}",
        boxes[0]
    );
    assert!(!boxes[0].contains("_t"));
    assert!(r.stdout.contains("boxes emitted: 1\n"));
    assert!(r.stdout.contains("boxes pruned: 1\n"));
    assert!(r.stdout.contains("contractor applications: "));
}

#[test]
fn infeasible_problems_exit_one() {
    let dir = TempDir::new().unwrap();
    let r = intcon(&dir, NEGATIVE_SQUARE, &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("proved infeasible"));
    assert!(r.stdout.starts_with("infeasible (pruned 1 subboxes)\n"));
    let r = intcon(&dir, NEGATIVE_SQUARE, &["--format", "json"]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["status"], "infeasible");
    assert_eq!(v["boxes"], Value::Array(vec![]));
}

#[test]
fn parse_errors_exit_two_with_a_position() {
    let dir = TempDir::new().unwrap();
    let r = intcon(&dir, "var x in [0,1]\nconstraint x = 1;\n", &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2, column 1"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["--eps", "0"][..],
        &["--eps", "-1e-3"],
        &["--max-boxes", "0"],
        &["--order", "random:x"],
        &["--order", "depthfirst"],
        &["--format", "yaml"],
        &["--check-grid", "1"],
    ] {
        let r = intcon(&dir, PARABOLA_CIRCLE, args);
        assert_eq!(r.code, 2, "{args:?}");
        assert!(!r.stderr.is_empty());
    }
    let r = run_on(&dir.path().join("missing.txt"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("cannot read"));
    let r = intcon(&dir, "var x; constraint x = x^2;", &["--check-grid", "5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("unbounded"));
}

#[test]
fn exhausted_budget_exits_three_with_partial_output() {
    let dir = TempDir::new().unwrap();
    let r = intcon(&dir, TWO_ROOTS, &["--max-boxes", "1"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("incomplete"));
    assert_eq!(
        r.stdout.lines().filter(|l| l.starts_with("box ")).count(),
        1
    );
    assert!(r.stdout.contains("incomplete: box budget exhausted\n"));
    let r = intcon(&dir, TWO_ROOTS, &["--max-boxes", "1", "--format", "json"]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["status"], "incomplete");
}

#[test]
fn json_bounds_round_trip_exactly() {
    let dir = TempDir::new().unwrap();
    let r = intcon(&dir, TWO_ROOTS, &["--format", "json", "--eps", "1e-12"]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let expected = solve(&csp_from_text(TWO_ROOTS).unwrap(), 1e-12, 4096).unwrap();
    let got = boxes_from_json(&v).unwrap();
    assert_eq!(got.len(), expected.atomic_boxes.len());
    for (g, e) in got.iter().zip(&expected.atomic_boxes) {
        let user = e.bx.project([&var("x"), &var("y")]);
        assert_eq!(g, &user);
    }
    let paths: Vec<&str> = v["boxes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["path"].as_str().unwrap())
        .collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);
    assert!(got[0].interval("x").contains(-ROOT));
    assert!(got[1].interval("x").contains(ROOT));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for args in [
        &[][..],
        &["--format", "json"],
        &["--trace"],
        &["--order", "random:7", "--format", "json", "--trace"],
    ] {
        let a = intcon(&dir, TWO_ROOTS, args);
        let b = intcon(&dir, TWO_ROOTS, args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.code, 0);
    }
}

#[test]
fn propagate_only_prints_the_fixpoint() {
    let dir = TempDir::new().unwrap();
    let r = intcon(
        &dir,
        PARABOLA_CIRCLE,
        &["--propagate-only", "--show-aux", "--format", "json"],
    );
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let csp = csp_from_text(PARABOLA_CIRCLE).unwrap();
    let fix = Propagator::new(&csp).run(csp.initial_box()).unwrap();
    let printed = intcon_core::IntervalBox::from_json(&v["fixpoint"]).unwrap();
    assert_eq!(printed, fix.fixpoint);
    assert_eq!(v["stats"]["contractor_applications"], fix.steps);
    assert_eq!(v["status"], "feasible_unknown");

    let r = intcon(&dir, PARABOLA_CIRCLE, &["--propagate-only"]);
    assert_eq!(
        r.stdout.lines().next(),
        Some("fixpoint: {x=[0,1], y=[0,1]}")
    );
    let r = intcon(&dir, NEGATIVE_SQUARE, &["--propagate-only"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("infeasible"));
}

#[test]
fn trace_lines_follow_the_record_format() {
    let dir = TempDir::new().unwrap();
    let r = intcon(
        &dir,
        PARABOLA_CIRCLE,
        &["--propagate-only", "--trace", "--order", "roundrobin"],
    );
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert!(lines[0].starts_with("#0 sq(x,y) {"), "{}", lines[0]);
    assert!(lines[0].ends_with("unchanged") || lines[0].ends_with("changed"));
    assert!(lines[3].starts_with("#3 const[1](_t1) "), "{}", lines[3]);
    let r = intcon(&dir, PARABOLA_CIRCLE, &["--trace"]);
    assert!(r.stdout.starts_with("node root\n  #"), "{}", r.stdout);
}

#[test]
fn echo_reparses_to_the_same_problem() {
    let dir = TempDir::new().unwrap();
    let source =
        "var a in [-1, 2.5]; var b;\nconstraint a*a - 3*b = -(a + 0.1);\nconstraint b^3 = 2;\n";
    let r = intcon(&dir, source, &["--echo"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        parse_problem(&r.stdout).unwrap(),
        parse_problem(source).unwrap()
    );
    assert_eq!(
        csp_from_text(&r.stdout).unwrap(),
        csp_from_text(source).unwrap()
    );
    let again = intcon(&dir, &r.stdout, &["--echo"]);
    assert_eq!(again.stdout, r.stdout);
}

#[test]
fn show_aux_reveals_auxiliaries() {
    let dir = TempDir::new().unwrap();
    let r = intcon(&dir, PARABOLA_CIRCLE, &["--show-aux"]);
    let line = r.stdout.lines().find(|l| l.starts_with("box ")).unwrap();
    assert!(
        line.contains("_t0=") && line.contains("_t1=[1,1]"),
        "{line}"
    );
}

#[test]
fn grid_check_reports_agreement() {
    let dir = TempDir::new().unwrap();
    // no float grid point solves the irrational system to 1e-7
    let r = intcon(&dir, PARABOLA_CIRCLE, &["--check-grid", "401"]);
    assert_eq!(r.code, 0);
    assert!(
        r.stdout
            .ends_with("grid check: 0 solutions, all enclosed\n"),
        "{}",
        r.stdout
    );
    let exact = "var x in [-1,1]; var y in [-1,1];\nconstraint x^2 + y^2 = 1;\nconstraint x = y^2 + y - 1;\n";
    let r = intcon(
        &dir,
        exact,
        &["--check-grid", "9", "--eps", "1e-6", "--format", "json"],
    );
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["grid_check"]["agrees"], true, "{}", r.stdout);
    // (-1, 0) is the only grid root
    assert_eq!(v["grid_check"]["points"], 1);
}
