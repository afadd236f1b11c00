//! Ground task construction.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::forest::SatForest;
use super::nnf::{enumerate_quantifiers, for_each_binding, substitute, to_nnf, Lit, Nnf};
use super::{ActionId, ObjId, PropId};
use crate::pddl::{
    Atom, DomainModel, Effect, Formula, GroundAtom, ProblemModel, Term, TypedName,
};

pub const DEFAULT_MAX_ACTIONS: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("grounding produced more than {0} ground actions")]
    TooManyActions(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Normal,
    /// One dynamic conditional effect of its parent.
    Sub,
    /// Asserts one ground derived proposition from its derivation body.
    Confirm,
}

#[derive(Debug, Clone)]
pub struct GroundAction {
    pub id: ActionId,
    pub kind: ActionKind,
    /// Schema index for normal and sub-actions, derivation rule index for confirm actions.
    pub origin: usize,
    pub args: Vec<ObjId>,
    /// Precondition, or the effect condition for a sub-action.
    pub condition: Nnf<PropId>,
    pub adds: Vec<PropId>,
    pub dels: Vec<PropId>,
    pub subs: Vec<ActionId>,
    pub parent: Option<ActionId>,
    /// The normal action at the top of the sub-action chain (itself otherwise).
    pub root: ActionId,
}

#[derive(Debug, Clone)]
pub struct GroundTask {
    pub domain: DomainModel,
    pub problem_name: String,
    /// Domain constants followed by problem objects.
    pub objects: Vec<TypedName>,
    object_index: HashMap<String, ObjId>,
    pub props: Vec<GroundAtom>,
    prop_index: HashMap<GroundAtom, PropId>,
    /// Propositions whose predicate is derived.
    pub derived: FixedBitSet,
    pub actions: Vec<GroundAction>,
    /// First confirm action id; confirm actions occupy the tail of `actions`.
    pub first_confirm: ActionId,
    /// Non-derived propositions true initially.
    pub init: Vec<PropId>,
    pub goal: Nnf<PropId>,
    /// Init atoms over predicates no action ever changes.
    pub static_facts: Vec<GroundAtom>,
    lookup: HashMap<(usize, Vec<ObjId>), ActionId>,
    /// Adds and deletes of a normal action together with all its sub-actions.
    pub possible_adds: Vec<Vec<PropId>>,
    pub possible_dels: Vec<Vec<PropId>>,
    /// One tree per action (sub-actions include their ancestors' conditions),
    /// followed by the goal tree.
    pub forest: SatForest,
    /// One tree per confirm action, in confirm id order.
    pub confirm_forest: SatForest,
}

#[derive(Default)]
struct EffectTree {
    adds: Vec<PropId>,
    dels: Vec<PropId>,
    conditional: Vec<(Nnf<PropId>, EffectTree)>,
}

struct Grounder<'a> {
    domain: &'a DomainModel,
    objects: Vec<TypedName>,
    static_preds: HashSet<String>,
    static_set: HashSet<GroundAtom>,
    props: Vec<GroundAtom>,
    prop_index: HashMap<GroundAtom, PropId>,
    actions: Vec<GroundAction>,
    max_actions: usize,
}

fn ground_atom(a: &Atom) -> GroundAtom {
    GroundAtom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| t.name().to_string()).collect(),
    }
}

fn effect_predicates(e: &Effect, out: &mut HashSet<String>) {
    match e {
        Effect::And(es) => es.iter().for_each(|e| effect_predicates(e, out)),
        Effect::Add(a) | Effect::Delete(a) => {
            out.insert(a.predicate.clone());
        }
        Effect::When(_, e) | Effect::Forall(_, e) => effect_predicates(e, out),
    }
}

/// Conjuncts at the top of a precondition that only involve static
/// predicates or equality, usable to prune bindings early.
fn static_conjuncts<'f>(f: &'f Formula, static_preds: &HashSet<String>, out: &mut Vec<(&'f Formula, bool)>) {
    match f {
        Formula::And(cs) => cs.iter().for_each(|c| static_conjuncts(c, static_preds, out)),
        Formula::Atom(a) if static_preds.contains(&a.predicate) => out.push((f, true)),
        Formula::Equals(..) => out.push((f, true)),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) if static_preds.contains(&a.predicate) => out.push((inner, false)),
            Formula::Equals(..) => out.push((inner, false)),
            _ => {}
        },
        _ => {}
    }
}

impl<'a> Grounder<'a> {
    fn intern(&mut self, atom: GroundAtom) -> PropId {
        if let Some(&id) = self.prop_index.get(&atom) {
            return id;
        }
        let id = self.props.len();
        self.prop_index.insert(atom.clone(), id);
        self.props.push(atom);
        id
    }

    /// Static truth of a literal whose terms are all constants.
    fn static_truth(&self, f: &Formula) -> Option<bool> {
        match f {
            Formula::Equals(a, b) => Some(a.name() == b.name()),
            Formula::Atom(a) if self.static_preds.contains(&a.predicate) => {
                Some(self.static_set.contains(&ground_atom(a)))
            }
            _ => None,
        }
    }

    /// Grounds a formula under a complete binding and folds static leaves.
    fn ground_formula(&mut self, f: &Formula, binding: &HashMap<String, String>) -> Nnf<PropId> {
        let f = enumerate_quantifiers(&substitute(f, binding), &self.objects, &self.domain.types);
        to_nnf(&f).map_leaves(&mut |lit, positive| {
            let truth = match &lit {
                Lit::Eq(a, b) => Some(a.name() == b.name()),
                Lit::Atom(a) if self.static_preds.contains(&a.predicate) => {
                    Some(self.static_set.contains(&ground_atom(a)))
                }
                Lit::Atom(_) => None,
            };
            match (truth, &lit) {
                (Some(t), _) => {
                    if t == positive {
                        Nnf::truth()
                    } else {
                        Nnf::falsity()
                    }
                }
                (None, Lit::Atom(a)) => {
                    let p = self.intern(ground_atom(a));
                    if positive {
                        Nnf::Pos(p)
                    } else {
                        Nnf::Neg(p)
                    }
                }
                (None, Lit::Eq(..)) => unreachable!(),
            }
        })
    }

    fn ground_effect(&mut self, e: &Effect, binding: &HashMap<String, String>, out: &mut EffectTree) {
        match e {
            Effect::And(es) => {
                for e in es {
                    self.ground_effect(e, binding, out);
                }
            }
            Effect::Add(a) | Effect::Delete(a) => {
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => binding[v].clone(),
                        Term::Const(c) => c.clone(),
                    })
                    .collect();
                let p = self.intern(GroundAtom {
                    predicate: a.predicate.clone(),
                    args,
                });
                if matches!(e, Effect::Add(_)) {
                    out.adds.push(p)
                } else {
                    out.dels.push(p)
                }
            }
            Effect::Forall(vars, body) => {
                let mut bindings = Vec::new();
                for_each_binding(vars, &self.objects, &self.domain.types, &mut |b| bindings.push(b.clone()));
                for extra in bindings {
                    let mut merged = binding.clone();
                    merged.extend(extra);
                    self.ground_effect(body, &merged, out);
                }
            }
            Effect::When(cond, body) => {
                let cond = self.ground_formula(cond, binding);
                if cond.is_false() {
                    return;
                }
                if cond.is_true() {
                    self.ground_effect(body, binding, out);
                    return;
                }
                let mut inner = EffectTree::default();
                self.ground_effect(body, binding, &mut inner);
                out.conditional.push((cond, inner));
            }
        }
    }

    fn push_action(&mut self, mut a: GroundAction) -> Result<ActionId, GroundError> {
        if self.actions.len() >= self.max_actions {
            return Err(GroundError::TooManyActions(self.max_actions));
        }
        a.adds.sort_unstable();
        a.adds.dedup();
        a.dels.sort_unstable();
        a.dels.dedup();
        // Add wins over delete.
        a.dels.retain(|p| a.adds.binary_search(p).is_err());
        a.id = self.actions.len();
        if a.parent.is_none() {
            a.root = a.id;
        }
        self.actions.push(a);
        Ok(self.actions.len() - 1)
    }

    /// Emits an action and, depth first, the sub-actions of its conditional effects.
    fn emit(
        &mut self,
        kind: ActionKind,
        origin: usize,
        args: &[ObjId],
        condition: Nnf<PropId>,
        tree: EffectTree,
        parent: Option<ActionId>,
    ) -> Result<ActionId, GroundError> {
        let root = parent.map(|p| self.actions[p].root).unwrap_or(0);
        let id = self.push_action(GroundAction {
            id: 0,
            kind,
            origin,
            args: args.to_vec(),
            condition,
            adds: tree.adds,
            dels: tree.dels,
            subs: Vec::new(),
            parent,
            root,
        })?;
        for (cond, sub_tree) in tree.conditional {
            let sub = self.emit(ActionKind::Sub, origin, args, cond, sub_tree, Some(id))?;
            self.actions[id].subs.push(sub);
        }
        Ok(id)
    }

    fn ground_schema(
        &mut self,
        schema_idx: usize,
        lookup: &mut HashMap<(usize, Vec<ObjId>), ActionId>,
    ) -> Result<(), GroundError> {
        let domain: &'a DomainModel = self.domain;
        let schema = &domain.schemata[schema_idx];
        let params = &schema.params;
        let domains: Vec<Vec<ObjId>> = params
            .iter()
            .map(|p| {
                (0..self.objects.len())
                    .filter(|&o| domain.types.is_subtype(&self.objects[o].ty, &p.ty))
                    .collect()
            })
            .collect();

        // Prune with static literals as soon as their last parameter is bound.
        let mut checks: Vec<Vec<(&Formula, bool)>> = vec![Vec::new(); params.len() + 1];
        let mut conj = Vec::new();
        static_conjuncts(&schema.precondition, &self.static_preds, &mut conj);
        for (lit, positive) in conj {
            let terms: Vec<&Term> = match lit {
                Formula::Atom(a) => a.args.iter().collect(),
                Formula::Equals(a, b) => vec![a, b],
                _ => unreachable!(),
            };
            let mut last = 0;
            let mut scoped = true;
            for t in terms {
                if let Term::Var(v) = t {
                    match params.iter().position(|p| &p.name == v) {
                        Some(i) => last = last.max(i + 1),
                        None => scoped = false,
                    }
                }
            }
            if scoped {
                checks[last].push((lit, positive));
            }
        }

        let mut bindings: Vec<Vec<ObjId>> = Vec::new();
        let mut current: Vec<ObjId> = Vec::with_capacity(params.len());
        let mut names: HashMap<String, String> = HashMap::new();
        self.enumerate(0, &domains, &checks, params, &mut current, &mut names, &mut bindings);

        for args in bindings {
            let binding: HashMap<String, String> = params
                .iter()
                .zip(&args)
                .map(|(p, &o)| (p.name.clone(), self.objects[o].name.clone()))
                .collect();
            let pre = self.ground_formula(&schema.precondition, &binding);
            if pre.is_false() {
                continue;
            }
            let mut tree = EffectTree::default();
            self.ground_effect(&schema.effect, &binding, &mut tree);
            let id = self.emit(ActionKind::Normal, schema_idx, &args, pre, tree, None)?;
            lookup.insert((schema_idx, args), id);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        i: usize,
        domains: &[Vec<ObjId>],
        checks: &[Vec<(&Formula, bool)>],
        params: &[TypedName],
        current: &mut Vec<ObjId>,
        names: &mut HashMap<String, String>,
        out: &mut Vec<Vec<ObjId>>,
    ) {
        for (lit, positive) in &checks[i] {
            let instance = substitute(lit, names);
            if self.static_truth(&instance) != Some(*positive) {
                return;
            }
        }
        if i == params.len() {
            out.push(current.clone());
            return;
        }
        for &o in &domains[i] {
            current.push(o);
            names.insert(params[i].name.clone(), self.objects[o].name.clone());
            self.enumerate(i + 1, domains, checks, params, current, names, out);
            current.pop();
        }
        names.remove(&params[i].name);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GroundOptions {
    pub max_actions: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_actions: DEFAULT_MAX_ACTIONS,
        }
    }
}

/// Grounds a validated domain and problem.
pub fn ground_task(domain: &DomainModel, problem: &ProblemModel, opts: GroundOptions) -> Result<GroundTask, GroundError> {
    let mut changed = HashSet::new();
    for s in &domain.schemata {
        effect_predicates(&s.effect, &mut changed);
    }
    let static_preds: HashSet<String> = domain
        .predicates
        .iter()
        .map(|p| p.name.clone())
        .filter(|p| !changed.contains(p) && !domain.is_derived(p))
        .collect();

    let objects: Vec<TypedName> = domain.constants.iter().chain(&problem.objects).cloned().collect();
    let mut g = Grounder {
        domain,
        objects,
        static_preds,
        static_set: HashSet::new(),
        props: Vec::new(),
        prop_index: HashMap::new(),
        actions: Vec::new(),
        max_actions: opts.max_actions,
    };

    let mut init = Vec::new();
    let mut static_facts = Vec::new();
    for atom in &problem.init {
        if g.static_preds.contains(&atom.predicate) {
            g.static_set.insert(atom.clone());
            static_facts.push(atom.clone());
        } else {
            init.push(g.intern(atom.clone()));
        }
    }

    let mut lookup = HashMap::new();
    for s in 0..domain.schemata.len() {
        g.ground_schema(s, &mut lookup)?;
    }

    let first_confirm = g.actions.len();
    let object_index: HashMap<String, ObjId> =
        g.objects.iter().enumerate().map(|(i, o)| (o.name.clone(), i)).collect();
    for (d, rule) in domain.derivations.iter().enumerate() {
        let mut bindings = Vec::new();
        for_each_binding(&rule.params, &g.objects, &domain.types, &mut |b| bindings.push(b.clone()));
        for binding in bindings {
            let body = g.ground_formula(&rule.body, &binding);
            if body.is_false() {
                continue;
            }
            let args: Vec<ObjId> = rule.params.iter().map(|p| object_index[&binding[&p.name]]).collect();
            let head = g.intern(GroundAtom {
                predicate: rule.predicate.clone(),
                args: rule.params.iter().map(|p| binding[&p.name].clone()).collect(),
            });
            g.emit(
                ActionKind::Confirm,
                d,
                &args,
                body,
                EffectTree {
                    adds: vec![head],
                    ..Default::default()
                },
                None,
            )?;
        }
    }

    let goal = g.ground_formula(&problem.goal, &HashMap::new());

    let num_props = g.props.len();
    let mut derived = FixedBitSet::with_capacity(num_props);
    for (i, p) in g.props.iter().enumerate() {
        if domain.is_derived(&p.predicate) {
            derived.insert(i);
        }
    }
    // Normal actions delete every derivable proposition; closure re-derives them.
    if first_confirm < g.actions.len() {
        let mut all_derived: Vec<PropId> = g.actions[first_confirm..].iter().map(|a| a.adds[0]).collect();
        all_derived.sort_unstable();
        all_derived.dedup();
        for a in g.actions.iter_mut().filter(|a| a.kind == ActionKind::Normal) {
            a.dels.extend(&all_derived);
            a.dels.sort_unstable();
            a.dels.dedup();
        }
    }

    let mut effective: Vec<Nnf<PropId>> = Vec::with_capacity(g.actions.len() + 1);
    for a in &g.actions {
        let tree = match a.parent {
            Some(p) => Nnf::And(vec![effective[p].clone(), a.condition.clone()]).simplify(),
            None => a.condition.clone(),
        };
        effective.push(tree);
    }
    let mut possible_adds = vec![Vec::new(); g.actions.len()];
    let mut possible_dels = vec![Vec::new(); g.actions.len()];
    for a in &g.actions {
        if a.kind == ActionKind::Confirm {
            continue;
        }
        possible_adds[a.root].extend(&a.adds);
        possible_dels[a.root].extend(&a.dels);
    }
    for v in possible_adds.iter_mut().chain(possible_dels.iter_mut()) {
        v.sort_unstable();
        v.dedup();
    }

    effective.push(goal.clone());
    let forest = SatForest::build(&effective, num_props);
    let confirm_forest = SatForest::build(
        g.actions[first_confirm..].iter().map(|a| &a.condition),
        num_props,
    );

    Ok(GroundTask {
        domain: domain.clone(),
        problem_name: problem.name.clone(),
        objects: g.objects,
        object_index,
        props: g.props,
        prop_index: g.prop_index,
        derived,
        actions: g.actions,
        first_confirm,
        init,
        goal,
        static_facts,
        lookup,
        possible_adds,
        possible_dels,
        forest,
        confirm_forest,
    })
}

impl GroundTask {
    pub fn num_props(&self) -> usize {
        self.props.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// Tree index of the goal in [`GroundTask::forest`].
    pub fn goal_tree(&self) -> usize {
        self.actions.len()
    }

    pub fn prop(&self, atom: &GroundAtom) -> Option<PropId> {
        self.prop_index.get(atom).copied()
    }

    pub fn object(&self, name: &str) -> Option<ObjId> {
        self.object_index.get(name).copied()
    }

    pub fn normal_actions(&self) -> impl Iterator<Item = &GroundAction> {
        self.actions.iter().filter(|a| a.kind == ActionKind::Normal)
    }

    pub fn confirm_actions(&self) -> &[GroundAction] {
        &self.actions[self.first_confirm..]
    }

    /// The normal ground action for a schema binding, if it survived grounding.
    pub fn lookup(&self, schema: usize, args: &[ObjId]) -> Option<ActionId> {
        self.lookup.get(&(schema, args.to_vec())).copied()
    }

    pub fn find_action(&self, name: &str, args: &[&str]) -> Option<ActionId> {
        let schema = self.domain.schemata.iter().position(|s| s.name == name)?;
        let ids = args.iter().map(|a| self.object(a)).collect::<Option<Vec<_>>>()?;
        self.lookup(schema, &ids)
    }

    /// `(schema arg...)` for normal and sub-actions, `(confirm_pred arg...)` for confirm actions.
    pub fn action_name(&self, id: ActionId) -> String {
        let a = &self.actions[id];
        let mut s = String::from("(");
        match a.kind {
            ActionKind::Confirm => {
                let _ = write!(s, "confirm_{}", self.domain.derivations[a.origin].predicate);
            }
            _ => s.push_str(&self.domain.schemata[a.origin].name),
        }
        for &o in &a.args {
            s.push(' ');
            s.push_str(&self.objects[o].name);
        }
        s.push(')');
        if a.kind == ActionKind::Sub {
            s.push_str("/when");
        }
        s
    }

    pub fn prop_name(&self, p: PropId) -> String {
        self.props[p].to_string()
    }
}
