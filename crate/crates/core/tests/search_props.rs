mod common;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use common::*;
use plateau_core::applicability::{Applicability, State};
use plateau_core::fixtures::{self, Fixture};
use plateau_core::ground::GroundTask;
use plateau_core::plan::{format_plan, parse_plan, validate_plan, Verdict};
use plateau_core::search::{solve, Budget, Fallback, Phase, PlateauMode, SearchConfig, Searcher, SolveResult, Status};
use plateau_core::ground::GroundOptions;
use plateau_core::load_task;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> SearchConfig {
    SearchConfig {
        budget: Budget::unlimited(),
        ..SearchConfig::default()
    }
}

fn run(f: &Fixture, cfg: SearchConfig) -> (GroundTask, SolveResult) {
    let task = ground_bootstrapped(f);
    let r = solve(&task, cfg);
    (task, r)
}

fn assert_valid(task: &GroundTask, r: &SolveResult, what: &str) {
    let plan = r.plan().unwrap_or_else(|| panic!("{what}: no plan ({:?})", r.status));
    assert!(only_normal(task, &plan.steps), "{what}");
    let text = format_plan(task, &plan.steps);
    assert_eq!(validate_plan(task, &parse_plan(&text).unwrap()), Ok(Verdict::Valid), "{what}");
}

fn task_from(spec: &StripsSpec) -> GroundTask {
    load_task(&spec.domain_pddl(), &spec.problem_pddl(), GroundOptions::default()).unwrap()
}

fn names(task: &GroundTask, s: &State) -> BTreeSet<String> {
    s.facts().map(|p| task.prop_name(p)).collect()
}

#[test]
fn gripper2_plan_is_valid_and_not_shorter_than_optimal() {
    let f = fixtures::gripper(2);
    let (task, r) = run(&f, cfg());
    assert_valid(&task, &r, "gripper-2");

    // Breadth-first search over the lifted semantics.
    let init: BTreeSet<String> = {
        let mut app = Applicability::new(&task);
        fact_names(&task, &app.initial_state()).into_iter().collect()
    };
    let goal: Vec<String> = (1..=2).map(|i| format!("(at ball{i} room2)")).collect();
    let mut dist: HashMap<BTreeSet<String>, usize> = HashMap::from([(init.clone(), 0)]);
    let mut queue = VecDeque::from([init]);
    let mut optimal = None;
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if goal.iter().all(|g| s.contains(g)) {
            optimal = Some(d);
            break;
        }
        let facts: HashSet<String> = s.iter().cloned().collect();
        for a in lifted_applicable_in(&task, &facts) {
            let n: BTreeSet<String> = lifted_successor(&task, &a, &facts).into_iter().collect();
            if !dist.contains_key(&n) {
                dist.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    assert_eq!(optimal, Some(5));
    assert!(r.plan().unwrap().len() >= 5);
}

#[test]
fn solved_at_init_gives_empty_plan_and_single_trace_row() {
    let f = fixtures::blocks3("(and)");
    let (_, r) = run(&f, cfg());
    assert_eq!(r.plan().map(|p| p.len()), Some(0));
    assert_eq!(r.trace.len(), 1);
    assert_eq!((r.trace[0].phase, r.trace[0].h), (Phase::Ehc, 0));
}

#[test]
fn relaxed_unreachable_goal_is_immediate() {
    let f = Fixture::new(
        "unreachable",
        fixtures::GRIPPER_DOMAIN,
        // A gripper that starts busy can never be freed, even ignoring deletes.
        fixtures::gripper_problem(1)
            .replace("left right - gripper", "left right middle - gripper")
            .replace("(at ball1 room2)", "(at ball1 room2) (free middle)"),
    );
    let task = ground(&f);
    let r = solve(&task, cfg());
    assert_eq!(r.status, Status::Unreachable);
    assert_eq!(r.stats.evaluated, 1);
}

#[test]
fn trap_fails_hill_climbing_and_fallback_solves() {
    for fallback in [Fallback::Greedy, Fallback::PlainBfs] {
        let (task, r) = run(&fixtures::trap(), SearchConfig { fallback, ..cfg() });
        assert!(r.stats.ehc_failed);
        assert!(r.trace.iter().any(|e| e.phase == Phase::EhcFail));
        assert_valid(&task, &r, "trap");
        let names: Vec<String> = r.plan().unwrap().steps.iter().map(|&a| task.action_name(a)).collect();
        assert_eq!(names, ["(walk1)", "(walk2)", "(walk3)", "(walk4)"]);
    }
}

#[test]
fn gripper5_solved_by_hill_climbing() {
    let (task, r) = run(&fixtures::gripper(5), cfg());
    assert_valid(&task, &r, "gripper-5");
    assert!(!r.stats.ehc_failed);
}

/// Accepted hill-climbing values strictly decrease, and every exit beats its root.
fn check_trajectory(r: &SolveResult, what: &str) {
    let accepted: Vec<usize> = r
        .trace
        .iter()
        .take_while(|e| e.phase != Phase::EhcFail)
        .filter(|e| matches!(e.phase, Phase::Ehc | Phase::MacroExit))
        .map(|e| e.h)
        .collect();
    assert!(accepted.windows(2).all(|w| w[1] < w[0]), "{what}: {accepted:?}");
    for ep in &r.stats.episodes {
        if let Some(x) = ep.exit_h {
            assert!(x < ep.root_h, "{what}: {ep:?}");
        }
    }
    for ev in r.trace.windows(2) {
        assert!(ev[1].index == ev[0].index + 1 && ev[1].evaluated >= ev[0].evaluated);
    }
}

#[test]
fn suite_in_both_plateau_modes() {
    for f in fixtures::suite() {
        for plateau in [PlateauMode::LeastBad, PlateauMode::Breadth] {
            for use_macros in [true, false] {
                let (task, r) = run(&f, SearchConfig { plateau, use_macros, ..cfg() });
                let what = format!("{} {plateau:?} macros={use_macros}", f.name);
                assert_valid(&task, &r, &what);
                check_trajectory(&r, &what);
                for (range, m) in &r.plan().unwrap().segments {
                    let expansion = &r.plan().unwrap().steps[range.clone()];
                    assert_eq!(r.library.macros()[*m].steps.len(), expansion.len(), "{what}");
                }
            }
        }
    }
}

#[test]
fn plateau_modes_agree_on_fixtures() {
    for f in fixtures::suite() {
        let (_, a) = run(&f, SearchConfig { plateau: PlateauMode::LeastBad, ..cfg() });
        let (_, b) = run(&f, SearchConfig { plateau: PlateauMode::Breadth, ..cfg() });
        assert_eq!(a.stats.ehc_failed, b.stats.ehc_failed, "{}", f.name);
    }
}

#[test]
fn gripper_later_plateaux_exit_through_macros() {
    let (task, r) = run(&fixtures::gripper(6), cfg());
    let first = &r.stats.episodes[0];
    assert_eq!((first.root_h, first.exit_h, first.depth), (12, Some(11), 2));
    let macro_exits: Vec<_> = r.stats.episodes.iter().filter(|e| e.via_macro).collect();
    assert!(!macro_exits.is_empty());
    assert!(macro_exits.iter().all(|e| e.extra_expansions == 0 && e.depth == 1));
    assert!(r.library.macros().iter().all(|m| m.steps.len() == 2));
    assert_valid(&task, &r, "gripper-6");
}

#[test]
fn exhausted_plateau_fails() {
    let (_, r) = run(&fixtures::trap(), cfg());
    let ep = &r.stats.episodes[0];
    assert_eq!(ep.exit_h, None);
    assert_eq!(ep.root_h, 2);
}

#[test]
fn output_is_deterministic() {
    for f in fixtures::suite() {
        let render = || {
            let (task, r) = run(&f, cfg());
            let mut trace = Vec::new();
            plateau_core::search::write_trace(&r.trace, &mut trace).unwrap();
            (format_plan(&task, &r.plan().unwrap().steps), trace)
        };
        assert_eq!(render(), render(), "{}", f.name);
    }
}

#[test]
fn gbfs_matches_bfs_on_random_tasks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut solvable, mut unsolvable) = (0, 0);
    for _ in 0..60 {
        let spec = StripsSpec::random(&mut rng);
        let oracle = spec.bfs();
        assert!(oracle.states <= 100_000);
        let task = task_from(&spec);
        for fallback in [Fallback::Greedy, Fallback::PlainBfs] {
            let mut s = Searcher::new(&task, cfg());
            let plan = match fallback {
                Fallback::Greedy => s.greedy_bfs(&mut |_, _| {}),
                Fallback::PlainBfs => s.plain_bfs(&mut |_, _| {}),
            }
            .unwrap();
            assert_eq!(plan.is_some(), oracle.shortest.is_some(), "{fallback:?}\n{}\n{}", spec.domain_pddl(), spec.problem_pddl());
            if let Some(p) = plan {
                let names: Vec<String> = p.steps.iter().map(|&a| task.action_name(a)).collect();
                assert!(spec.plan_valid(&names));
                assert!(names.len() >= oracle.shortest.unwrap());
            }
        }
        let full = solve(&task, cfg());
        assert_eq!(full.plan().is_some(), oracle.shortest.is_some());
        if let Some(p) = full.plan() {
            let names: Vec<String> = p.steps.iter().map(|&a| task.action_name(a)).collect();
            assert!(spec.plan_valid(&names));
            solvable += 1;
        } else {
            unsolvable += 1;
        }
    }
    assert!(solvable > 0 && unsolvable > 0, "{solvable} solvable, {unsolvable} unsolvable");
}

/// A state as fact names plus the action applied in it.
type Edge = (BTreeSet<String>, String);

fn edge_sets(spec: &StripsSpec) -> (HashSet<Edge>, Vec<Edge>, Vec<Edge>) {
    let task = task_from(spec);
    let universe: HashSet<String> = (0..task.num_props()).map(|p| task.prop_name(p)).collect();
    let oracle: HashSet<(BTreeSet<String>, String)> = spec
        .bfs()
        .edges
        .into_iter()
        .map(|(s, a)| (s.into_iter().filter(|f| universe.contains(f)).collect(), a))
        .collect();
    let mut greedy = Vec::new();
    let mut s = Searcher::new(&task, cfg());
    let found = s.greedy_bfs(&mut |st, a| greedy.push((names(&task, st), task.action_name(a)))).unwrap();
    assert!(found.is_none());
    let mut plain = Vec::new();
    let mut s = Searcher::new(&task, cfg());
    s.plain_bfs(&mut |st, a| plain.push((names(&task, st), task.action_name(a)))).unwrap();
    (oracle, greedy, plain)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_generates_every_reachable_edge_once(seed in any::<u64>()) {
        let mut spec = StripsSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        spec.impossible_goal = true;
        let (oracle, greedy, plain) = edge_sets(&spec);
        let greedy_set: HashSet<_> = greedy.iter().cloned().collect();
        prop_assert_eq!(greedy_set.len(), greedy.len(), "an edge was generated twice");
        prop_assert_eq!(&greedy_set, &oracle);
        let plain_set: HashSet<_> = plain.into_iter().collect();
        prop_assert_eq!(&plain_set, &oracle);
    }

    #[test]
    fn solve_is_complete_on_random_tasks(seed in any::<u64>()) {
        let spec = StripsSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let oracle = spec.bfs();
        let task = task_from(&spec);
        for plateau in [PlateauMode::LeastBad, PlateauMode::Breadth] {
            let r = solve(&task, SearchConfig { plateau, ..cfg() });
            prop_assert_eq!(r.plan().is_some(), oracle.shortest.is_some());
            if let Some(p) = r.plan() {
                let names: Vec<String> = p.steps.iter().map(|&a| task.action_name(a)).collect();
                prop_assert!(spec.plan_valid(&names));
                prop_assert!(r.library.sources().iter().all(|s| s.len() >= 2));
            }
        }
    }
}
