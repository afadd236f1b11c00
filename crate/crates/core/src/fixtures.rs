//! Bundled benchmark domains and problem generators.

use std::fmt::Write as _;

use crate::pddl::{parse_domain, parse_problem, DomainModel, ParseError, ProblemModel};

pub const GRIPPER_DOMAIN: &str = include_str!("../fixtures/gripper-domain.pddl");
pub const BLOCKSWORLD_DOMAIN: &str = include_str!("../fixtures/blocksworld-domain.pddl");
pub const TRAP_DOMAIN: &str = include_str!("../fixtures/trap-domain.pddl");
pub const TRAP_PROBLEM: &str = include_str!("../fixtures/trap-problem.pddl");
pub const PHILOSOPHERS_DOMAIN: &str = include_str!("../fixtures/philosophers-domain.pddl");

/// Gripper with `n` balls, all starting in `room1` and wanted in `room2`.
pub fn gripper_problem(n: usize) -> String {
    let balls: Vec<String> = (1..=n).map(|i| format!("ball{i}")).collect();
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem gripper-{n})");
    let _ = writeln!(s, "  (:domain gripper)");
    let _ = writeln!(s, "  (:objects room1 room2 - room {} - ball left right - gripper)", balls.join(" "));
    let _ = write!(s, "  (:init (at-robby room1) (free left) (free right)");
    for b in &balls {
        let _ = write!(s, " (at {b} room1)");
    }
    let _ = writeln!(s, ")");
    let _ = write!(s, "  (:goal (and");
    for b in &balls {
        let _ = write!(s, " (at {b} room2)");
    }
    let _ = writeln!(s, ")))");
    s
}

/// Blocks world problem. Each tower is listed bottom first; `goal` is a formula.
pub fn blocks_problem(name: &str, towers: &[&[&str]], goal: &str) -> String {
    let blocks: Vec<&str> = towers.iter().flat_map(|t| t.iter().copied()).collect();
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {name})");
    let _ = writeln!(s, "  (:domain blocksworld)");
    let _ = writeln!(s, "  (:objects {} - block)", blocks.join(" "));
    let _ = write!(s, "  (:init (handempty)");
    for tower in towers {
        let _ = write!(s, " (ontable {})", tower[0]);
        for pair in tower.windows(2) {
            let _ = write!(s, " (on {} {})", pair[1], pair[0]);
        }
        let _ = write!(s, " (clear {})", tower[tower.len() - 1]);
    }
    let _ = writeln!(s, ")");
    let _ = writeln!(s, "  (:goal {goal}))");
    s
}

/// `k` philosophers in a ring; philosopher `i` has fork `i` on the left and
/// fork `i+1` (wrapping) on the right.
pub fn philosophers_problem(k: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem philosophers-{k})");
    let _ = writeln!(s, "  (:domain philosophers)");
    let phils: Vec<String> = (1..=k).map(|i| format!("phil{i}")).collect();
    let forks: Vec<String> = (1..=k).map(|i| format!("fork{i}")).collect();
    let _ = writeln!(
        s,
        "  (:objects {} - philosopher {} - fork)",
        phils.join(" "),
        forks.join(" ")
    );
    let _ = write!(s, "  (:init");
    for i in 0..k {
        let _ = write!(s, " (left-of {} {})", phils[i], forks[i]);
        let _ = write!(s, " (right-of {} {})", phils[i], forks[(i + 1) % k]);
    }
    for f in &forks {
        let _ = write!(s, " (on-table {f})");
    }
    let _ = writeln!(s, ")");
    let _ = write!(s, "  (:goal (and");
    for p in &phils {
        let _ = write!(s, " (eaten {p})");
    }
    let _ = writeln!(s, " (forall (?f - fork) (on-table ?f)))))");
    s
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub domain: &'static str,
    pub problem: String,
}

impl Fixture {
    pub fn new(name: impl Into<String>, domain: &'static str, problem: impl Into<String>) -> Self {
        Fixture {
            name: name.into(),
            domain,
            problem: problem.into(),
        }
    }

    pub fn parse(&self) -> Result<(DomainModel, ProblemModel), ParseError> {
        let d = parse_domain(self.domain)?;
        let p = parse_problem(&self.problem, &d)?;
        Ok((d, p))
    }
}

pub fn gripper(n: usize) -> Fixture {
    Fixture::new(format!("gripper-{n}"), GRIPPER_DOMAIN, gripper_problem(n))
}

pub fn philosophers(k: usize) -> Fixture {
    Fixture::new(format!("philosophers-{k}"), PHILOSOPHERS_DOMAIN, philosophers_problem(k))
}

pub fn trap() -> Fixture {
    Fixture::new("trap", TRAP_DOMAIN, TRAP_PROBLEM)
}

/// Three blocks on the table.
pub fn blocks3(goal: &str) -> Fixture {
    Fixture::new(
        "blocks-3",
        BLOCKSWORLD_DOMAIN,
        blocks_problem("blocks-3", &[&["a"], &["b"], &["c"]], goal),
    )
}

/// Five blocks in one tower (`a` at the bottom), to be reversed using `above` goals.
pub fn blocks5() -> Fixture {
    Fixture::new(
        "blocks-5",
        BLOCKSWORLD_DOMAIN,
        blocks_problem(
            "blocks-5",
            &[&["a", "b", "c", "d", "e"]],
            "(and (above a b) (above b c) (above c d) (above d e))",
        ),
    )
}

/// The desk-scale suite used for end-to-end and property checks.
pub fn suite() -> Vec<Fixture> {
    vec![
        gripper(2),
        gripper(4),
        blocks3("(and (above a b) (above b c))"),
        blocks5(),
        trap(),
        philosophers(4),
    ]
}
