//! Plateau-escaping macro-actions: lifting ground sequences, instantiation,
//! and successor generation restricted to helpful first steps.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::applicability::{Applicability, State};
use crate::ground::{ActionId, ActionKind, GroundTask, ObjId};

/// Default bound on candidate step bindings tried per macro per state.
pub const DEFAULT_CANDIDATE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MacroStep {
    pub schema: usize,
    /// Macro parameter index for each schema parameter.
    pub args: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroAction {
    /// Step schema names joined with `-`.
    pub name: String,
    pub param_types: Vec<String>,
    pub steps: Vec<MacroStep>,
}

impl MacroAction {
    /// Canonical form used for deduplication.
    pub fn signature(&self) -> (Vec<MacroStep>, Vec<String>) {
        (self.steps.clone(), self.param_types.clone())
    }

    /// Renders as `name (?0 - t ...): (schema ?i ...) ...`.
    pub fn describe(&self, task: &GroundTask) -> String {
        let params: Vec<String> = self
            .param_types
            .iter()
            .enumerate()
            .map(|(i, t)| format!("?{i} - {t}"))
            .collect();
        let steps: Vec<String> = self
            .steps
            .iter()
            .map(|s| {
                let mut out = format!("({}", task.domain.schemata[s.schema].name);
                for a in &s.args {
                    out.push_str(&format!(" ?{a}"));
                }
                out.push(')');
                out
            })
            .collect();
        format!("{} ({}): {}", self.name, params.join(" "), steps.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroInstance {
    /// Index into the library.
    pub macro_index: usize,
    pub bindings: Vec<ObjId>,
    pub expansion: Vec<ActionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("macro takes {expected} parameters, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("parameter ?{param} expects type `{expected}`, `{object}` has type `{found}`")]
    TypeMismatch {
        param: usize,
        object: String,
        expected: String,
        found: String,
    },
    #[error("step {0} has no ground action for these bindings")]
    NoGroundAction(usize),
}

/// Lifts a sequence of normal actions. Each distinct object becomes one
/// parameter, numbered by first occurrence; its type is the declared type
/// of the schema slot where it first appears.
///
/// # Panics
/// If `seq` is empty or contains a non-normal action.
pub fn lift_sequence(seq: &[ActionId], task: &GroundTask) -> MacroAction {
    assert!(!seq.is_empty(), "cannot lift an empty sequence");
    let mut objects: Vec<ObjId> = Vec::new();
    let mut param_types = Vec::new();
    let mut steps = Vec::with_capacity(seq.len());
    let mut names = Vec::with_capacity(seq.len());
    for &a in seq {
        let action = &task.actions[a];
        assert_eq!(action.kind, ActionKind::Normal, "macros are built from normal actions");
        let schema = &task.domain.schemata[action.origin];
        names.push(schema.name.as_str());
        let mut args = Vec::with_capacity(action.args.len());
        for (slot, &o) in action.args.iter().enumerate() {
            let idx = match objects.iter().position(|&x| x == o) {
                Some(i) => i,
                None => {
                    objects.push(o);
                    param_types.push(schema.params[slot].ty.clone());
                    objects.len() - 1
                }
            };
            args.push(idx);
        }
        steps.push(MacroStep {
            schema: action.origin,
            args,
        });
    }
    MacroAction {
        name: names.join("-"),
        param_types,
        steps,
    }
}

/// Grounds every step of `m` with `bindings`.
pub fn instantiate(m: &MacroAction, bindings: &[ObjId], task: &GroundTask) -> Result<Vec<ActionId>, InstantiateError> {
    if bindings.len() != m.param_types.len() {
        return Err(InstantiateError::Arity {
            expected: m.param_types.len(),
            found: bindings.len(),
        });
    }
    for (i, (&o, ty)) in bindings.iter().zip(&m.param_types).enumerate() {
        let obj = &task.objects[o];
        if !task.domain.types.is_subtype(&obj.ty, ty) {
            return Err(InstantiateError::TypeMismatch {
                param: i,
                object: obj.name.clone(),
                expected: ty.clone(),
                found: obj.ty.clone(),
            });
        }
    }
    m.steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let args: Vec<ObjId> = s.args.iter().map(|&p| bindings[p]).collect();
            task.lookup(s.schema, &args).ok_or(InstantiateError::NoGroundAction(i))
        })
        .collect()
}

/// Per-problem macro library.
#[derive(Debug, Clone, Default)]
pub struct MacroLibrary {
    macros: Vec<MacroAction>,
    /// The ground sequence each macro was lifted from.
    sources: Vec<Vec<ActionId>>,
    seen: HashSet<(Vec<MacroStep>, Vec<String>)>,
}

impl MacroLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }

    pub fn macros(&self) -> &[MacroAction] {
        &self.macros
    }

    pub fn sources(&self) -> &[Vec<ActionId>] {
        &self.sources
    }

    /// Lifts and stores an escape sequence. Sequences shorter than two
    /// actions and already known shapes are ignored. Returns the new index.
    pub fn record(&mut self, seq: &[ActionId], task: &GroundTask) -> Option<usize> {
        if seq.len() < 2 {
            return None;
        }
        let m = lift_sequence(seq, task);
        if !self.seen.insert(m.signature()) {
            return None;
        }
        self.macros.push(m);
        self.sources.push(seq.to_vec());
        Some(self.macros.len() - 1)
    }
}

/// Macro successors of `s`, plus the number of macros whose candidate
/// enumeration hit `cap`.
///
/// For each macro whose first step's schema matches a helpful action, the
/// first step's parameters are taken from that action; the remaining ones are
/// enumerated depth first over type-compatible objects, checking each step
/// in the state left by the previous ones.
pub fn macro_successors(
    s: &State,
    library: &MacroLibrary,
    helpful: &[ActionId],
    app: &mut Applicability,
    cap: usize,
) -> (Vec<(MacroInstance, State)>, usize) {
    let task = app.task();
    let mut out = Vec::new();
    let mut capped = 0;
    for (mi, m) in library.macros().iter().enumerate() {
        let mut budget = cap;
        let first = &m.steps[0];
        for &h in helpful {
            let action = &task.actions[h];
            if action.origin != first.schema || action.kind != ActionKind::Normal {
                continue;
            }
            let mut bindings: Vec<Option<ObjId>> = vec![None; m.param_types.len()];
            let consistent = first.args.iter().zip(&action.args).all(|(&p, &o)| match bindings[p] {
                Some(b) => b == o,
                None => {
                    bindings[p] = Some(o);
                    true
                }
            });
            if !consistent {
                continue;
            }
            let Ok(next) = app.apply(s, h) else { continue };
            let mut search = StepSearch {
                m,
                mi,
                task,
                budget: &mut budget,
                out: &mut out,
            };
            let mut expansion = vec![h];
            search.extend(1, &next, &mut bindings, &mut expansion, app);
            if budget == 0 {
                break;
            }
        }
        if budget == 0 {
            capped += 1;
        }
    }
    (out, capped)
}

struct StepSearch<'a, 't> {
    m: &'a MacroAction,
    mi: usize,
    task: &'t GroundTask,
    budget: &'a mut usize,
    out: &'a mut Vec<(MacroInstance, State)>,
}

impl StepSearch<'_, '_> {
    fn extend(
        &mut self,
        step: usize,
        s: &State,
        bindings: &mut Vec<Option<ObjId>>,
        expansion: &mut Vec<ActionId>,
        app: &mut Applicability,
    ) {
        if step == self.m.steps.len() {
            self.out.push((
                MacroInstance {
                    macro_index: self.mi,
                    bindings: bindings.iter().map(|b| b.expect("every parameter occurs in a step")).collect(),
                    expansion: expansion.clone(),
                },
                s.clone(),
            ));
            return;
        }
        let free: Vec<usize> = {
            let mut v: Vec<usize> = self.m.steps[step]
                .args
                .iter()
                .copied()
                .filter(|&p| bindings[p].is_none())
                .collect();
            v.dedup();
            let mut seen = HashSet::new();
            v.retain(|p| seen.insert(*p));
            v
        };
        self.bind(step, 0, &free, s, bindings, expansion, app);
    }

    #[allow(clippy::too_many_arguments)]
    fn bind(
        &mut self,
        step: usize,
        i: usize,
        free: &[usize],
        s: &State,
        bindings: &mut Vec<Option<ObjId>>,
        expansion: &mut Vec<ActionId>,
        app: &mut Applicability,
    ) {
        if *self.budget == 0 {
            return;
        }
        if i == free.len() {
            *self.budget -= 1;
            let st = &self.m.steps[step];
            let args: Vec<ObjId> = st.args.iter().map(|&p| bindings[p].unwrap()).collect();
            let Some(a) = self.task.lookup(st.schema, &args) else { return };
            let Ok(next) = app.apply(s, a) else { return };
            expansion.push(a);
            self.extend(step + 1, &next, bindings, expansion, app);
            expansion.pop();
            return;
        }
        let p = free[i];
        let ty = &self.m.param_types[p];
        for o in 0..self.task.objects.len() {
            if !self.task.domain.types.is_subtype(&self.task.objects[o].ty, ty) {
                continue;
            }
            bindings[p] = Some(o);
            self.bind(step, i + 1, free, s, bindings, expansion, app);
            if *self.budget == 0 {
                break;
            }
        }
        bindings[p] = None;
    }
}

impl fmt::Display for MacroStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.schema, self.args)
    }
}
