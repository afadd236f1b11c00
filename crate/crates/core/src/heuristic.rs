//! Relaxed planning graph with a positive and a negative fact spike,
//! relaxed plan extraction, helpful actions, and the startup reachability pass.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::applicability::{Applicability, State};
use crate::ground::{ActionId, ActionKind, Counters, GroundTask, Nnf, PropId};

/// Layer marker for facts and actions never reached.
pub const NEVER: u32 = u32::MAX;
const NO_ACTION: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpgMode {
    /// Stop at the first layer where the goal holds.
    GoalReached,
    /// Grow until no new fact or deletion appears.
    Fixpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Goal {
    Pos(PropId),
    Neg(PropId),
}

/// Result of evaluating one state.
#[derive(Debug, Clone, Default)]
pub struct Evaluation {
    /// Relaxed plan length; `None` marks a relaxed dead end.
    pub h: Option<usize>,
    /// Applicable normal actions considered helpful, ascending id.
    pub helpful: Vec<ActionId>,
    /// Every applicable normal action, ascending id.
    pub applicable: Vec<ActionId>,
    /// Chosen achievers as `(action, layer)`, ordered by layer then id.
    /// May contain sub-actions and confirm actions.
    pub relaxed_plan: Vec<(ActionId, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("goal is unreachable even under the delete relaxation")]
pub struct GoalUnreachable;

/// Per-worker RPG builder and extractor.
pub struct Heuristic<'t> {
    task: &'t GroundTask,
    counters: Counters,
    fact_layer: Vec<u32>,
    neg_layer: Vec<u32>,
    action_layer: Vec<u32>,
    achiever: Vec<u32>,
    deleter: Vec<u32>,
    goal_layer: u32,
    layers: u32,
    layer0: Vec<ActionId>,
    // extraction scratch
    agenda: Vec<Vec<Goal>>,
    pos_queued: FixedBitSet,
    neg_queued: FixedBitSet,
    pos_done: FixedBitSet,
    neg_done: FixedBitSet,
    chosen: FixedBitSet,
}

impl<'t> Heuristic<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        let (np, na) = (task.num_props(), task.num_actions());
        Heuristic {
            task,
            counters: task.forest.new_counters(),
            fact_layer: vec![NEVER; np],
            neg_layer: vec![NEVER; np],
            action_layer: vec![NEVER; na],
            achiever: vec![NO_ACTION; np],
            deleter: vec![NO_ACTION; np],
            goal_layer: NEVER,
            layers: 0,
            layer0: Vec::new(),
            agenda: Vec::new(),
            pos_queued: FixedBitSet::with_capacity(np),
            neg_queued: FixedBitSet::with_capacity(np),
            pos_done: FixedBitSet::with_capacity(np),
            neg_done: FixedBitSet::with_capacity(np),
            chosen: FixedBitSet::with_capacity(na),
        }
    }

    /// First layer where `p` is true, if ever.
    pub fn fact_layer(&self, p: PropId) -> Option<u32> {
        Some(self.fact_layer[p]).filter(|&l| l != NEVER)
    }

    /// First layer where `p` is false: 0 when absent from the state,
    /// otherwise one past its first deleter.
    pub fn neg_layer(&self, p: PropId) -> Option<u32> {
        Some(self.neg_layer[p]).filter(|&l| l != NEVER)
    }

    pub fn action_layer(&self, a: ActionId) -> Option<u32> {
        Some(self.action_layer[a]).filter(|&l| l != NEVER)
    }

    pub fn achiever(&self, p: PropId) -> Option<ActionId> {
        Some(self.achiever[p]).filter(|&a| a != NO_ACTION).map(|a| a as usize)
    }

    pub fn deleter(&self, p: PropId) -> Option<ActionId> {
        Some(self.deleter[p]).filter(|&a| a != NO_ACTION).map(|a| a as usize)
    }

    pub fn goal_layer(&self) -> Option<u32> {
        Some(self.goal_layer).filter(|&l| l != NEVER)
    }

    /// Number of action layers expanded.
    pub fn layers(&self) -> u32 {
        self.layers
    }

    /// Builds the graph from `s`. Returns whether the goal was reached.
    pub fn build(&mut self, s: &State, mode: RpgMode) -> bool {
        let task = self.task;
        let forest = &task.forest;
        let goal_tree = task.goal_tree();
        self.fact_layer.fill(NEVER);
        self.action_layer.fill(NEVER);
        self.achiever.fill(NO_ACTION);
        self.deleter.fill(NO_ACTION);
        self.neg_layer.fill(0);
        self.goal_layer = NEVER;
        self.layers = 0;

        let c = &mut self.counters;
        forest.reset(c);
        for p in s.facts() {
            self.fact_layer[p] = 0;
            self.neg_layer[p] = NEVER;
            forest.unset_negative(c, p);
        }
        for p in s.facts() {
            forest.positive(c, p, &mut |_| {});
        }
        let mut current: Vec<ActionId> = Vec::new();
        for t in 0..forest.num_trees() {
            if forest.satisfied(c, t) {
                if t == goal_tree {
                    self.goal_layer = 0;
                } else {
                    current.push(t);
                }
            }
        }
        self.layer0.clear();
        self.layer0.extend(current.iter().copied().filter(|&a| task.actions[a].kind == ActionKind::Normal));

        let mut layer = 0u32;
        let mut new_pos = Vec::new();
        let mut new_neg = Vec::new();
        let mut crossed = Vec::new();
        loop {
            if self.goal_layer != NEVER && mode == RpgMode::GoalReached {
                break;
            }
            current.sort_unstable();
            new_pos.clear();
            new_neg.clear();
            for &a in &current {
                self.action_layer[a] = layer;
                let act = &task.actions[a];
                for &p in &act.adds {
                    if self.fact_layer[p] == NEVER {
                        self.fact_layer[p] = layer + 1;
                        self.achiever[p] = a as u32;
                        new_pos.push(p);
                    }
                }
                for &p in &act.dels {
                    if self.neg_layer[p] == NEVER {
                        self.neg_layer[p] = layer + 1;
                        self.deleter[p] = a as u32;
                        new_neg.push(p);
                    }
                }
            }
            if new_pos.is_empty() && new_neg.is_empty() {
                break;
            }
            layer += 1;
            self.layers = layer;
            crossed.clear();
            let c = &mut self.counters;
            for &p in &new_pos {
                forest.positive(c, p, &mut |t| crossed.push(t));
            }
            for &p in &new_neg {
                forest.negative(c, p, &mut |t| crossed.push(t));
            }
            current.clear();
            for &t in &crossed {
                if t == goal_tree {
                    self.goal_layer = layer;
                } else {
                    current.push(t);
                }
            }
        }
        self.goal_layer != NEVER
    }

    fn leaf_layer(&self, g: Goal) -> u32 {
        match g {
            Goal::Pos(p) => self.fact_layer[p],
            Goal::Neg(p) => self.neg_layer[p],
        }
    }

    fn sat_layer(&self, f: &Nnf<PropId>) -> u32 {
        match f {
            Nnf::And(cs) => cs.iter().map(|c| self.sat_layer(c)).max().unwrap_or(0),
            Nnf::Or(cs) => cs.iter().map(|c| self.sat_layer(c)).min().unwrap_or(NEVER),
            Nnf::Pos(p) => self.fact_layer[*p],
            Nnf::Neg(p) => self.neg_layer[*p],
        }
    }

    /// Leaves needed to satisfy `f` at its first satisfaction layer; for an
    /// or-node only the earliest satisfied child (first on ties) is used.
    fn collect_leaves(&self, f: &Nnf<PropId>, out: &mut Vec<Goal>) {
        match f {
            Nnf::And(cs) => cs.iter().for_each(|c| self.collect_leaves(c, out)),
            Nnf::Or(cs) => {
                let mut best: Option<(u32, &Nnf<PropId>)> = None;
                for c in cs {
                    let l = self.sat_layer(c);
                    if best.is_none_or(|(b, _)| l < b) {
                        best = Some((l, c));
                    }
                }
                if let Some((_, c)) = best {
                    self.collect_leaves(c, out);
                }
            }
            Nnf::Pos(p) => out.push(Goal::Pos(*p)),
            Nnf::Neg(p) => out.push(Goal::Neg(*p)),
        }
    }

    fn queue(&mut self, leaves: &[Goal]) {
        for &g in leaves {
            let l = self.leaf_layer(g);
            if l == 0 {
                continue;
            }
            let fresh = match g {
                Goal::Pos(p) => !self.pos_queued.put(p),
                Goal::Neg(p) => !self.neg_queued.put(p),
            };
            if fresh {
                self.agenda[l as usize].push(g);
            }
        }
    }

    /// Evaluates `s`: heuristic value, helpful actions and the relaxed plan.
    pub fn evaluate(&mut self, s: &State) -> Evaluation {
        let reached = self.build(s, RpgMode::GoalReached);
        let applicable = self.layer0.clone();
        if !reached {
            return Evaluation {
                h: None,
                applicable,
                ..Default::default()
            };
        }
        let task = self.task;
        let top = self.goal_layer as usize;
        self.agenda.iter_mut().for_each(Vec::clear);
        self.agenda.resize_with(top + 1, Vec::new);
        self.pos_queued.clear();
        self.neg_queued.clear();
        self.pos_done.clear();
        self.neg_done.clear();
        self.chosen.clear();

        let mut leaves = Vec::new();
        self.collect_leaves(&task.goal, &mut leaves);
        self.queue(&leaves);

        let mut plan: Vec<(ActionId, u32)> = Vec::new();
        let mut neg_goals_1 = Vec::new();
        for l in (1..=top).rev() {
            let mut i = 0;
            while i < self.agenda[l].len() {
                let g = self.agenda[l][i];
                i += 1;
                let a = match g {
                    Goal::Pos(p) if !self.pos_done.contains(p) => self.achiever[p],
                    Goal::Neg(p) if !self.neg_done.contains(p) => self.deleter[p],
                    _ => continue,
                } as usize;
                if l == 1 {
                    if let Goal::Neg(p) = g {
                        neg_goals_1.push(p);
                    }
                }
                if self.chosen.put(a) {
                    continue;
                }
                let al = self.action_layer[a];
                plan.push((a, al));
                let act = &task.actions[a];
                for &q in &act.adds {
                    if self.fact_layer[q] == al + 1 {
                        self.pos_done.insert(q);
                    }
                }
                for &q in &act.dels {
                    if self.neg_layer[q] == al + 1 {
                        self.neg_done.insert(q);
                    }
                }
                leaves.clear();
                let mut cur = Some(a);
                while let Some(x) = cur {
                    self.collect_leaves(&task.actions[x].condition, &mut leaves);
                    cur = task.actions[x].parent;
                }
                let pending = std::mem::take(&mut leaves);
                self.queue(&pending);
                leaves = pending;
            }
        }
        plan.sort_unstable_by_key(|&(a, l)| (l, a));

        let mut counted: Vec<(ActionId, u32)> = plan
            .iter()
            .filter(|&&(a, _)| task.actions[a].kind != ActionKind::Confirm)
            .map(|&(a, l)| (task.actions[a].root, l))
            .collect();
        counted.sort_unstable();
        counted.dedup();
        let h = counted.len();

        // Facts newly achieved at layer 1 by chosen layer-0 actions, and
        // negative goals that must be made true at layer 1.
        let mut first_adds = FixedBitSet::with_capacity(task.num_props());
        for &(a, l) in &plan {
            if l == 0 {
                for &q in &task.actions[a].adds {
                    if self.fact_layer[q] == 1 {
                        first_adds.insert(q);
                    }
                }
            }
        }
        let mut first_negs = FixedBitSet::with_capacity(task.num_props());
        for p in neg_goals_1 {
            first_negs.insert(p);
        }
        let helpful = applicable
            .iter()
            .copied()
            .filter(|&a| {
                task.possible_adds[a].iter().any(|&q| first_adds.contains(q))
                    || task.possible_dels[a].iter().any(|&q| first_negs.contains(q))
            })
            .collect();

        #[cfg(debug_assertions)]
        self.check_relaxed_plan(s, &plan);

        Evaluation {
            h: Some(h),
            helpful,
            applicable,
            relaxed_plan: plan,
        }
    }

    /// Replays the relaxed plan layer by layer under delete-free semantics.
    #[cfg(debug_assertions)]
    fn check_relaxed_plan(&self, s: &State, plan: &[(ActionId, u32)]) {
        let task = self.task;
        let np = task.num_props();
        let mut pos = FixedBitSet::with_capacity(np);
        let mut neg = FixedBitSet::with_capacity(np);
        neg.insert_range(..);
        for p in s.facts() {
            pos.insert(p);
            neg.set(p, false);
        }
        let mut i = 0;
        while i < plan.len() {
            let layer = plan[i].1;
            let (mut next_pos, mut next_neg) = (pos.clone(), neg.clone());
            while i < plan.len() && plan[i].1 == layer {
                let a = plan[i].0;
                let mut cur = Some(a);
                while let Some(x) = cur {
                    assert!(
                        relaxed_holds(&task.actions[x].condition, &pos, &neg),
                        "relaxed plan step {} not applicable",
                        task.action_name(a)
                    );
                    cur = task.actions[x].parent;
                }
                for &q in &task.actions[a].adds {
                    next_pos.insert(q);
                }
                for &q in &task.actions[a].dels {
                    next_neg.insert(q);
                }
                i += 1;
            }
            pos = next_pos;
            neg = next_neg;
        }
        assert!(relaxed_holds(&task.goal, &pos, &neg), "relaxed plan does not reach the goal");
    }
}

#[cfg(debug_assertions)]
fn relaxed_holds(f: &Nnf<PropId>, pos: &FixedBitSet, neg: &FixedBitSet) -> bool {
    match f {
        Nnf::And(cs) => cs.iter().all(|c| relaxed_holds(c, pos, neg)),
        Nnf::Or(cs) => cs.iter().any(|c| relaxed_holds(c, pos, neg)),
        Nnf::Pos(p) => pos.contains(*p),
        Nnf::Neg(p) => neg.contains(*p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reachability {
    pub actions: usize,
    pub props: usize,
}

/// Fixpoint RPG from the initial state. Actions never reached are removed
/// from the dependency cache; an unreachable goal is reported as an error.
pub fn bootstrap(task: &mut GroundTask) -> Result<Reachability, GoalUnreachable> {
    let (live, reach) = {
        let init = Applicability::new(task).initial_state();
        let mut rpg = Heuristic::new(task);
        let goal = rpg.build(&init, RpgMode::Fixpoint);
        if !goal {
            return Err(GoalUnreachable);
        }
        let mut live = FixedBitSet::with_capacity(task.forest.num_trees());
        for a in 0..task.num_actions() {
            if rpg.action_layer[a] != NEVER {
                live.insert(a);
            }
        }
        live.insert(task.goal_tree());
        let props = (0..task.num_props()).filter(|&p| rpg.fact_layer[p] != NEVER).count();
        let actions = live.count_ones(..) - 1;
        (live, Reachability { actions, props })
    };
    task.forest.prune(&live);
    Ok(reach)
}
