//! Shared helpers for integration tests: a lifted applicability oracle, a
//! random STRIPS task generator with its own simulator, and walk utilities.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use plateau_core::applicability::{Applicability, State};
use plateau_core::fixtures::Fixture;
use plateau_core::ground::{ground_task, ActionKind, GroundOptions, GroundTask};
use plateau_core::heuristic::bootstrap;
use plateau_core::pddl::{Atom, Effect, Formula, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn ground(f: &Fixture) -> GroundTask {
    let (d, p) = f.parse().unwrap_or_else(|e| panic!("{}: {e}", f.name));
    ground_task(&d, &p, GroundOptions::default()).unwrap()
}

pub fn ground_bootstrapped(f: &Fixture) -> GroundTask {
    let mut t = ground(f);
    bootstrap(&mut t).unwrap();
    t
}

/// True facts of `s` as printed atoms, together with the static facts.
pub fn fact_names(task: &GroundTask, s: &State) -> HashSet<String> {
    s.facts()
        .map(|p| task.prop_name(p))
        .chain(task.static_facts.iter().map(|a| a.to_string()))
        .collect()
}

fn atom_name(pred: &str, args: &[String]) -> String {
    let mut s = format!("({pred}");
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s.push(')');
    s
}

/// Evaluates a lifted formula against a set of printed ground atoms.
pub fn eval_lifted(task: &GroundTask, f: &Formula, binding: &HashMap<String, String>, facts: &HashSet<String>) -> bool {
    let term = |t: &Term| match t {
        Term::Var(v) => binding[v].clone(),
        Term::Const(c) => c.clone(),
    };
    match f {
        Formula::And(fs) => fs.iter().all(|g| eval_lifted(task, g, binding, facts)),
        Formula::Or(fs) => fs.iter().any(|g| eval_lifted(task, g, binding, facts)),
        Formula::Not(g) => !eval_lifted(task, g, binding, facts),
        Formula::Imply(a, b) => !eval_lifted(task, a, binding, facts) || eval_lifted(task, b, binding, facts),
        Formula::Atom(a) => {
            let args: Vec<String> = a.args.iter().map(term).collect();
            facts.contains(&atom_name(&a.predicate, &args))
        }
        Formula::Equals(a, b) => term(a) == term(b),
        Formula::Forall(vars, g) | Formula::Exists(vars, g) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut result = universal;
            let names: Vec<(String, String)> = vars.iter().map(|v| (v.name.clone(), v.ty.clone())).collect();
            for_each_assignment(task, &names, &mut binding.clone(), 0, &mut |b| {
                let v = eval_lifted(task, g, b, facts);
                if universal && !v {
                    result = false;
                }
                if !universal && v {
                    result = true;
                }
            });
            result
        }
    }
}

fn for_each_assignment(
    task: &GroundTask,
    vars: &[(String, String)],
    binding: &mut HashMap<String, String>,
    i: usize,
    f: &mut dyn FnMut(&HashMap<String, String>),
) {
    if i == vars.len() {
        f(binding);
        return;
    }
    for o in &task.objects {
        if task.domain.types.is_subtype(&o.ty, &vars[i].1) {
            binding.insert(vars[i].0.clone(), o.name.clone());
            for_each_assignment(task, vars, binding, i + 1, f);
        }
    }
    binding.remove(&vars[i].0);
}

/// Names of all schema instances whose lifted precondition holds in `s`.
pub fn lifted_applicable(task: &GroundTask, s: &State) -> BTreeSet<String> {
    lifted_applicable_in(task, &fact_names(task, s))
}

/// As [`lifted_applicable`], over an explicit fact set.
pub fn lifted_applicable_in(task: &GroundTask, facts: &HashSet<String>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for schema in &task.domain.schemata {
        let vars: Vec<(String, String)> = schema.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
        for_each_assignment(task, &vars, &mut HashMap::new(), 0, &mut |b| {
            if eval_lifted(task, &schema.precondition, b, facts) {
                let args: Vec<String> = schema.params.iter().map(|p| b[&p.name].clone()).collect();
                out.insert(atom_name(&schema.name, &args));
            }
        });
    }
    out
}

/// A uniformly random walk of at most `len` steps; stops early in dead ends.
pub fn random_walk<R: Rng>(app: &mut Applicability, rng: &mut R, len: usize) -> Vec<State> {
    let mut s = app.initial_state();
    let mut states = vec![s.clone()];
    for _ in 0..len {
        let acts = app.applicable(&s);
        let Some(&a) = acts.choose(rng) else { break };
        s = app.apply(&s, a).unwrap();
        states.push(s.clone());
    }
    states
}

/// All states reachable from the initial state.
pub fn reachable_states(app: &mut Applicability, limit: usize) -> Vec<State> {
    let init = app.initial_state();
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(init.clone());
    let mut queue = VecDeque::from([init]);
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        for a in app.applicable(&s) {
            let n = app.apply(&s, a).unwrap();
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
        out.push(s);
        assert!(out.len() <= limit, "state space larger than {limit}");
    }
    out
}

/// Successor facts from the lifted effects of the schema, evaluated in `facts`.
pub fn lifted_successor(task: &GroundTask, name: &str, facts: &HashSet<String>) -> HashSet<String> {
    let inner = &name[1..name.len() - 1];
    let mut words = inner.split(' ');
    let schema_name = words.next().unwrap();
    let schema = task.domain.schema(schema_name).unwrap();
    let binding: HashMap<String, String> = schema
        .params
        .iter()
        .map(|p| p.name.clone())
        .zip(words.map(str::to_string))
        .collect();
    fn collect(
        task: &GroundTask,
        e: &Effect,
        b: &HashMap<String, String>,
        facts: &HashSet<String>,
        adds: &mut Vec<String>,
        dels: &mut Vec<String>,
    ) {
        let atom = |a: &Atom| {
            let mut s = format!("({}", a.predicate);
            for t in &a.args {
                s.push(' ');
                s.push_str(match t {
                    Term::Var(v) => &b[v],
                    Term::Const(c) => c,
                });
            }
            s + ")"
        };
        match e {
            Effect::And(es) => es.iter().for_each(|x| collect(task, x, b, facts, adds, dels)),
            Effect::Add(a) => adds.push(atom(a)),
            Effect::Delete(a) => dels.push(atom(a)),
            Effect::When(c, x) => {
                if eval_lifted(task, c, b, facts) {
                    collect(task, x, b, facts, adds, dels);
                }
            }
            Effect::Forall(vars, x) => {
                for o in &task.objects {
                    assert_eq!(vars.len(), 1, "fixture foralls bind one variable");
                    if task.domain.types.is_subtype(&o.ty, &vars[0].ty) {
                        let mut b2 = b.clone();
                        b2.insert(vars[0].name.clone(), o.name.clone());
                        collect(task, x, &b2, facts, adds, dels);
                    }
                }
            }
        }
    }
    let (mut adds, mut dels) = (Vec::new(), Vec::new());
    collect(task, &schema.effect, &binding, facts, &mut adds, &mut dels);
    let mut next = facts.clone();
    for d in dels {
        next.remove(&d);
    }
    next.extend(adds);
    next
}

/// Least fixpoint of the lifted derivation rules over `facts`.
pub fn lifted_closure(task: &GroundTask, base: &HashSet<String>) -> HashSet<String> {
    let mut facts = base.clone();
    loop {
        let mut changed = false;
        for rule in &task.domain.derivations {
            let objs: Vec<&str> = task.objects.iter().map(|o| o.name.as_str()).collect();
            let n = rule.params.len();
            let mut idx = vec![0usize; n];
            'bindings: loop {
                let ok = rule
                    .params
                    .iter()
                    .zip(&idx)
                    .all(|(p, &i)| task.domain.types.is_subtype(&task.objects[i].ty, &p.ty));
                if ok {
                    let b: HashMap<String, String> = rule
                        .params
                        .iter()
                        .zip(&idx)
                        .map(|(p, &i)| (p.name.clone(), objs[i].to_string()))
                        .collect();
                    if eval_lifted(task, &rule.body, &b, &facts) {
                        let args: Vec<&str> = idx.iter().map(|&i| objs[i]).collect();
                        let head = format!("({} {})", rule.predicate, args.join(" "));
                        changed |= facts.insert(head);
                    }
                }
                for k in (0..n).rev() {
                    idx[k] += 1;
                    if idx[k] < objs.len() {
                        continue 'bindings;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
        if !changed {
            return facts;
        }
    }
}

pub fn only_normal(task: &GroundTask, plan: &[usize]) -> bool {
    plan.iter().all(|&a| task.actions[a].kind == ActionKind::Normal)
}

/// Literal in a generated schema: predicate index and whether it takes the
/// schema parameter (unary predicates) or not (zero-ary).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit {
    pub unary: bool,
    pub pred: usize,
}

#[derive(Debug, Clone)]
pub struct ActSpec {
    pub has_param: bool,
    pub pre: Vec<Lit>,
    pub add: Vec<Lit>,
    pub del: Vec<Lit>,
}

/// `(name, preconditions, adds, deletes)`.
pub type Operator = (String, Vec<String>, Vec<String>, Vec<String>);

/// A small STRIPS task over zero-ary predicates `p*`, unary predicates `r*`
/// and objects `o*`.
#[derive(Debug, Clone)]
pub struct StripsSpec {
    pub zero_ary: usize,
    pub unary: usize,
    pub objects: usize,
    pub actions: Vec<ActSpec>,
    pub init: Vec<String>,
    pub goal: Vec<String>,
    /// Adds two toggling facts the goal needs together, so the goal is
    /// unreachable while every state keeps a finite relaxed estimate.
    pub impossible_goal: bool,
}

fn lit_name(l: Lit, arg: Option<&str>) -> String {
    if l.unary {
        format!("(r{} {})", l.pred, arg.unwrap())
    } else {
        format!("(p{})", l.pred)
    }
}

impl StripsSpec {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let zero_ary = rng.gen_range(3..=7);
        let unary = rng.gen_range(0..=2);
        let objects = 2;
        let n_actions = rng.gen_range(3..=8);
        let mut actions = Vec::new();
        for _ in 0..n_actions {
            let has_param = unary > 0 && rng.gen_bool(0.5);
            let lit = |rng: &mut R| {
                if has_param && rng.gen_bool(0.4) {
                    Lit {
                        unary: true,
                        pred: rng.gen_range(0..unary),
                    }
                } else {
                    Lit {
                        unary: false,
                        pred: rng.gen_range(0..zero_ary),
                    }
                }
            };
            let pre = (0..rng.gen_range(0..=2)).map(|_| lit(rng)).collect();
            let add = (0..rng.gen_range(1..=2)).map(|_| lit(rng)).collect();
            let del = (0..rng.gen_range(0..=2)).map(|_| lit(rng)).collect();
            actions.push(ActSpec {
                has_param,
                pre,
                add,
                del,
            });
        }
        let all = Self::all_facts(zero_ary, unary, objects);
        let init: Vec<String> = all.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
        let goal_len = rng.gen_range(1..=3);
        let mut goal: Vec<String> = all.choose_multiple(rng, goal_len).cloned().collect();
        goal.sort();
        StripsSpec {
            zero_ary,
            unary,
            objects,
            actions,
            init,
            goal,
            impossible_goal: false,
        }
    }

    fn all_facts(zero_ary: usize, unary: usize, objects: usize) -> Vec<String> {
        let mut v: Vec<String> = (0..zero_ary).map(|i| format!("(p{i})")).collect();
        for r in 0..unary {
            for o in 1..=objects {
                v.push(format!("(r{r} o{o})"));
            }
        }
        v
    }

    pub fn domain_pddl(&self) -> String {
        let mut s = String::from("(define (domain random-strips)\n  (:requirements :strips :typing)\n  (:types obj)\n  (:predicates");
        for i in 0..self.zero_ary {
            let _ = write!(s, " (p{i})");
        }
        for r in 0..self.unary {
            let _ = write!(s, " (r{r} ?x - obj)");
        }
        if self.impossible_goal {
            s.push_str(" (ga) (gb)");
        }
        s.push_str(")\n");
        let arg = Some("?x");
        for (i, a) in self.actions.iter().enumerate() {
            let _ = writeln!(s, "  (:action act{i}");
            let _ = writeln!(s, "    :parameters ({})", if a.has_param { "?x - obj" } else { "" });
            let pre: Vec<String> = a.pre.iter().map(|&l| lit_name(l, arg)).collect();
            let _ = writeln!(s, "    :precondition (and {})", pre.join(" "));
            let mut eff: Vec<String> = a.add.iter().map(|&l| lit_name(l, arg)).collect();
            eff.extend(a.del.iter().map(|&l| format!("(not {})", lit_name(l, arg))));
            let _ = writeln!(s, "    :effect (and {}))", eff.join(" "));
        }
        if self.impossible_goal {
            s.push_str("  (:action set-a :parameters () :effect (and (ga) (not (gb))))\n");
            s.push_str("  (:action set-b :parameters () :effect (and (gb) (not (ga))))\n");
        }
        s.push_str(")\n");
        s
    }

    pub fn problem_pddl(&self) -> String {
        let objs: Vec<String> = (1..=self.objects).map(|o| format!("o{o}")).collect();
        let mut goal = self.goal.clone();
        if self.impossible_goal {
            goal = vec!["(ga)".into(), "(gb)".into()];
        }
        format!(
            "(define (problem random-task) (:domain random-strips)\n  (:objects {} - obj)\n  (:init {})\n  (:goal (and {})))\n",
            objs.join(" "),
            self.init.join(" "),
            goal.join(" ")
        )
    }

    /// Ground operators as `(name, pre, add, del)` over printed atoms.
    pub fn operators(&self) -> Vec<Operator> {
        let mut ops = Vec::new();
        for (i, a) in self.actions.iter().enumerate() {
            let bindings: Vec<Option<String>> = if a.has_param {
                (1..=self.objects).map(|o| Some(format!("o{o}"))).collect()
            } else {
                vec![None]
            };
            for b in bindings {
                let arg = b.as_deref();
                let name = match arg {
                    Some(o) => format!("(act{i} {o})"),
                    None => format!("(act{i})"),
                };
                let m = |ls: &[Lit]| ls.iter().map(|&l| lit_name(l, arg)).collect::<Vec<_>>();
                ops.push((name, m(&a.pre), m(&a.add), m(&a.del)));
            }
        }
        if self.impossible_goal {
            ops.push(("(set-a)".into(), vec![], vec!["(ga)".into()], vec!["(gb)".into()]));
            ops.push(("(set-b)".into(), vec![], vec!["(gb)".into()], vec!["(ga)".into()]));
        }
        ops
    }

    fn goal_facts(&self) -> Vec<String> {
        if self.impossible_goal {
            vec!["(ga)".into(), "(gb)".into()]
        } else {
            self.goal.clone()
        }
    }

    /// Applies an operator; deletes before adds.
    pub fn step(state: &BTreeSet<String>, op: &Operator) -> Option<BTreeSet<String>> {
        if !op.1.iter().all(|p| state.contains(p)) {
            return None;
        }
        let mut n = state.clone();
        for d in &op.3 {
            n.remove(d);
        }
        for a in &op.2 {
            n.insert(a.clone());
        }
        Some(n)
    }

    /// Breadth-first search: shortest plan length, reachable states and
    /// every reachable `(state, operator)` edge.
    pub fn bfs(&self) -> Oracle {
        let ops = self.operators();
        let goal = self.goal_facts();
        let init: BTreeSet<String> = self.init.iter().cloned().collect();
        let mut dist: HashMap<BTreeSet<String>, usize> = HashMap::new();
        dist.insert(init.clone(), 0);
        let mut queue = VecDeque::from([init]);
        let mut edges = HashSet::new();
        let mut shortest = None;
        while let Some(s) = queue.pop_front() {
            let d = dist[&s];
            if shortest.is_none() && goal.iter().all(|g| s.contains(g)) {
                shortest = Some(d);
            }
            for op in &ops {
                if let Some(n) = Self::step(&s, op) {
                    edges.insert((s.clone(), op.0.clone()));
                    if !dist.contains_key(&n) {
                        dist.insert(n.clone(), d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        Oracle {
            shortest,
            states: dist.len(),
            edges,
        }
    }

    /// Replays named steps and checks the goal.
    pub fn plan_valid(&self, names: &[String]) -> bool {
        let ops = self.operators();
        let mut s: BTreeSet<String> = self.init.iter().cloned().collect();
        for n in names {
            let Some(op) = ops.iter().find(|o| &o.0 == n) else { return false };
            match Self::step(&s, op) {
                Some(next) => s = next,
                None => return false,
            }
        }
        self.goal_facts().iter().all(|g| s.contains(g))
    }
}

pub struct Oracle {
    pub shortest: Option<usize>,
    pub states: usize,
    pub edges: HashSet<(BTreeSet<String>, String)>,
}
