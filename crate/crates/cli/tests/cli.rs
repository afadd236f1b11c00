use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use plateau_core::fixtures::{self, Fixture};
use tempfile::TempDir;

fn write_fixture(dir: &Path, f: &Fixture) -> (PathBuf, PathBuf) {
    let d = dir.join(format!("{}-domain.pddl", f.name));
    let p = dir.join(format!("{}-problem.pddl", f.name));
    fs::write(&d, f.domain).unwrap();
    fs::write(&p, &f.problem).unwrap();
    (d, p)
}

fn plateau(args: &[&Path], extra: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_plateau"));
    cmd.arg("--domain").arg(args[0]).arg("--problem").arg(args[1]);
    cmd.args(extra);
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn evaluated(o: &Output) -> u64 {
    let err = stderr(o);
    let line = err.lines().find(|l| l.starts_with("evaluated ")).expect("stats line");
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn solves_and_validates() {
    let dir = TempDir::new().unwrap();
    for f in fixtures::suite() {
        let (d, p) = write_fixture(dir.path(), &f);
        let out = plateau(&[&d, &p], &[]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", f.name, stderr(&out));
        let plan = dir.path().join(format!("{}.plan", f.name));
        fs::write(&plan, &out.stdout).unwrap();
        let check = plateau(&[&d, &p], &["--validate", plan.to_str().unwrap()]);
        assert_eq!(check.status.code(), Some(0), "{}", f.name);
        assert!(String::from_utf8_lossy(&check.stdout).starts_with("plan valid"));
    }
}

#[test]
fn output_file_and_trace() {
    let dir = TempDir::new().unwrap();
    let (d, p) = write_fixture(dir.path(), &fixtures::trap());
    let plan = dir.path().join("trap.plan");
    let trace = dir.path().join("trap.csv");
    let out = plateau(&[&d, &p], &["-o", plan.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("used fallback search"));
    let text = fs::read_to_string(&plan).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");
    let csv = fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("event,phase,h,evaluated"));
    let phases: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(phases.contains(&"EHC-FAIL"));
    assert_eq!(phases.last(), Some(&"GBFS"));
}

#[test]
fn invalid_plan_exits_one() {
    let dir = TempDir::new().unwrap();
    let (d, p) = write_fixture(dir.path(), &fixtures::gripper(2));
    let plan = dir.path().join("bad.plan");
    fs::write(&plan, "(pickup ball1 room1 left)\n(drop ball1 room2 left)\n").unwrap();
    let out = plateau(&[&d, &p], &["--validate", plan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("step 1 (drop ball1 room2 left)"), "{text}");

    fs::write(&plan, "(pickup ball1 room1 left)\n").unwrap();
    let out = plateau(&[&d, &p], &["--validate", plan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("goal not satisfied"));
}

const TOGGLE_DOMAIN: &str = "(define (domain toggle)
  (:requirements :strips :negative-preconditions)
  (:predicates (a) (b) (c))
  (:action set-a :parameters () :precondition (not (b)) :effect (a))
  (:action set-b :parameters () :precondition (not (a)) :effect (b)))";

#[test]
fn unsolvable_tasks_exit_one() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("toggle.pddl");
    fs::write(&d, TOGGLE_DOMAIN).unwrap();
    for (goal, message) in [("(and (a) (b))", "no plan"), ("(c)", "goal unreachable")] {
        let p = dir.path().join("problem.pddl");
        fs::write(&p, format!("(define (problem t) (:domain toggle) (:init) (:goal {goal}))")).unwrap();
        let out = plateau(&[&d, &p], &[]);
        assert_eq!(out.status.code(), Some(1), "{goal}: {}", stderr(&out));
        assert!(stderr(&out).contains(message), "{goal}: {}", stderr(&out));
    }
}

#[test]
fn errors_exit_two_and_name_the_file() {
    let dir = TempDir::new().unwrap();
    let (d, _) = write_fixture(dir.path(), &fixtures::gripper(2));
    let missing = dir.path().join("missing.pddl");
    let out = plateau(&[&d, &missing], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.pddl"), "{}", stderr(&out));

    let broken = dir.path().join("broken.pddl");
    fs::write(&broken, "(define (problem p) (:domain gripper) (:init (at-robby").unwrap();
    let out = plateau(&[&d, &broken], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("broken.pddl"), "{}", stderr(&out));
}

#[test]
fn time_budget_exits_two() {
    let dir = TempDir::new().unwrap();
    let (d, p) = write_fixture(dir.path(), &fixtures::philosophers(32));
    let out = plateau(&[&d, &p], &["--no-macros", "--max-seconds", "0"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn macros_reduce_evaluations() {
    let dir = TempDir::new().unwrap();
    let (d, p) = write_fixture(dir.path(), &fixtures::philosophers(8));
    let with = plateau(&[&d, &p], &["--dump-macros"]);
    let without = plateau(&[&d, &p], &["--no-macros"]);
    assert_eq!(with.status.code(), Some(0));
    assert_eq!(without.status.code(), Some(0));
    assert!(evaluated(&with) < evaluated(&without));
    assert!(stderr(&with).lines().any(|l| l.starts_with("macro ")));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = TempDir::new().unwrap();
    let (d, p) = write_fixture(dir.path(), &fixtures::gripper(6));
    let run = |tag: &str| {
        let trace = dir.path().join(format!("{tag}.csv"));
        let out = plateau(&[&d, &p], &["--plateau", "breadth", "--trace", trace.to_str().unwrap()]);
        (out.stdout, fs::read(trace).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
