//! States, counter-based applicability testing, transitions and derived closure.

use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::ground::{ActionId, ActionKind, Counters, GroundTask, Nnf, PropId};

/// A world state. `derived` is always the closure of the derivation rules
/// over `base`, so equality and hashing only look at `base`.
#[derive(Debug, Clone)]
pub struct State {
    base: FixedBitSet,
    derived: FixedBitSet,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.base.as_slice().hash(h);
    }
}

impl State {
    pub fn contains(&self, p: PropId) -> bool {
        self.base.contains(p) || self.derived.contains(p)
    }

    pub fn base(&self) -> &FixedBitSet {
        &self.base
    }

    pub fn derived(&self) -> &FixedBitSet {
        &self.derived
    }

    /// All true propositions, base facts first.
    pub fn facts(&self) -> impl Iterator<Item = PropId> + '_ {
        self.base.ones().chain(self.derived.ones())
    }
}

/// Direct recursive evaluation over `base ∪ derived`.
pub fn holds(f: &Nnf<PropId>, s: &State) -> bool {
    f.eval(&|&p| s.contains(p))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("precondition of action {0} does not hold")]
    PreconditionViolated(ActionId),
    #[error("action {0} is not a normal action")]
    NotSelectable(ActionId),
}

/// Per-worker scratch for applicability tests and closure.
pub struct Applicability<'t> {
    task: &'t GroundTask,
    counters: Counters,
    confirm_counters: Counters,
    queue: Vec<usize>,
}

impl<'t> Applicability<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        Applicability {
            task,
            counters: task.forest.new_counters(),
            confirm_counters: task.confirm_forest.new_counters(),
            queue: Vec::new(),
        }
    }

    pub fn task(&self) -> &'t GroundTask {
        self.task
    }

    pub fn initial_state(&mut self) -> State {
        let mut base = FixedBitSet::with_capacity(self.task.num_props());
        for &p in &self.task.init {
            base.insert(p);
        }
        self.state_from_base(base)
    }

    /// Builds a state from non-derived facts, computing the derived closure.
    pub fn state_from_base(&mut self, base: FixedBitSet) -> State {
        let derived = self.closure(&base);
        State { base, derived }
    }

    /// Least fixpoint of the confirm actions over `base`.
    pub fn closure(&mut self, base: &FixedBitSet) -> FixedBitSet {
        let task = self.task;
        let forest = &task.confirm_forest;
        let mut derived = FixedBitSet::with_capacity(task.num_props());
        if forest.num_trees() == 0 {
            return derived;
        }
        let c = &mut self.confirm_counters;
        forest.reset(c);
        for p in base.ones() {
            forest.unset_negative(c, p);
        }
        for p in base.ones() {
            forest.positive(c, p, &mut |_| {});
        }
        self.queue.clear();
        self.queue.extend((0..forest.num_trees()).filter(|&t| forest.satisfied(c, t)));
        while let Some(t) = self.queue.pop() {
            let head = task.actions[task.first_confirm + t].adds[0];
            // Heads already in `base` were propagated above.
            if derived.put(head) || base.contains(head) {
                continue;
            }
            let queue = &mut self.queue;
            forest.positive(c, head, &mut |t| queue.push(t));
        }
        derived
    }

    /// Normal actions whose precondition holds in `s`, in ascending id order.
    pub fn applicable(&mut self, s: &State) -> Vec<ActionId> {
        self.evaluate(s);
        let forest = &self.task.forest;
        self.task
            .normal_actions()
            .filter(|a| forest.satisfied(&self.counters, a.id))
            .map(|a| a.id)
            .collect()
    }

    /// Runs the counter pass for `s`; negative leaves first, then positives.
    fn evaluate(&mut self, s: &State) {
        let forest = &self.task.forest;
        let c = &mut self.counters;
        forest.reset(c);
        for p in s.facts() {
            forest.unset_negative(c, p);
        }
        for p in s.facts() {
            forest.positive(c, p, &mut |_| {});
        }
    }

    pub fn is_goal(&self, s: &State) -> bool {
        holds(&self.task.goal, s)
    }

    /// Applies a normal action with its triggered sub-actions. Effect
    /// conditions are evaluated in `s`; the input state is not modified.
    pub fn apply(&mut self, s: &State, a: ActionId) -> Result<State, ApplyError> {
        let task = self.task;
        let action = &task.actions[a];
        if action.kind != ActionKind::Normal {
            return Err(ApplyError::NotSelectable(a));
        }
        if !holds(&action.condition, s) {
            return Err(ApplyError::PreconditionViolated(a));
        }
        let mut adds = Vec::new();
        let mut dels = Vec::new();
        let mut stack = vec![a];
        while let Some(id) = stack.pop() {
            let act = &task.actions[id];
            adds.extend_from_slice(&act.adds);
            dels.extend_from_slice(&act.dels);
            for &sub in act.subs.iter().rev() {
                if holds(&task.actions[sub].condition, s) {
                    stack.push(sub);
                }
            }
        }
        let mut base = s.base.clone();
        for p in dels {
            base.set(p, false);
        }
        for p in adds {
            if !task.derived.contains(p) {
                base.insert(p);
            }
        }
        Ok(self.state_from_base(base))
    }
}
