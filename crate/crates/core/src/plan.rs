//! Plan files (`N: (action args) [1]` per line) and plan validation.

use std::fmt::Write as _;

use thiserror::Error;

use crate::applicability::Applicability;
use crate::ground::{ActionId, GroundTask};

/// One plan step as written in a file, lowercased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepText {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("step {step}: unknown action `{name}`")]
    UnknownAction { step: usize, name: String },
    #[error("step {step}: `{name}` takes {expected} arguments, got {found}")]
    Arity {
        step: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("step {step}: unknown object `{object}`")]
    UnknownObject { step: usize, object: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// Step `step` (0-based) is not applicable.
    StepFailed { step: usize, action: String },
    /// Every step applied but the final state misses the goal.
    GoalNotReached,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

pub fn format_plan(task: &GroundTask, steps: &[ActionId]) -> String {
    let mut out = String::new();
    for (i, &a) in steps.iter().enumerate() {
        let _ = writeln!(out, "{i}: {} [1]", task.action_name(a));
    }
    out
}

/// Parses plan text. Accepts an optional `N:` prefix and `[d]` suffix; blank
/// lines and `;` comments are skipped.
pub fn parse_plan(text: &str) -> Result<Vec<StepText>, PlanError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| PlanError::Syntax {
            line: line_no,
            message: message.to_string(),
        };
        let open = line.find('(').ok_or_else(|| err("expected `(`"))?;
        let prefix = line[..open].trim();
        if !prefix.is_empty() {
            let num = prefix.strip_suffix(':').ok_or_else(|| err("expected `N:` before the action"))?;
            num.trim().parse::<f64>().map_err(|_| err("bad step number"))?;
        }
        let close = line[open..].find(')').ok_or_else(|| err("expected `)`"))? + open;
        let rest = line[close + 1..].trim();
        if !rest.is_empty() && !(rest.starts_with('[') && rest.ends_with(']')) {
            return Err(err("unexpected text after the action"));
        }
        let mut words = line[open + 1..close].split_whitespace().map(str::to_lowercase);
        let name = words.next().ok_or_else(|| err("empty action"))?;
        steps.push(StepText {
            name,
            args: words.collect(),
        });
    }
    Ok(steps)
}

/// Resolves step names against the task's schemata and objects. Steps whose
/// ground action was pruned during grounding resolve to `None`.
pub fn resolve(task: &GroundTask, steps: &[StepText]) -> Result<Vec<Option<ActionId>>, PlanError> {
    steps
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let Some(schema) = task.domain.schemata.iter().position(|s| s.name == st.name) else {
                return Err(PlanError::UnknownAction {
                    step: i,
                    name: st.name.clone(),
                });
            };
            let expected = task.domain.schemata[schema].params.len();
            if st.args.len() != expected {
                return Err(PlanError::Arity {
                    step: i,
                    name: st.name.clone(),
                    expected,
                    found: st.args.len(),
                });
            }
            let args = st
                .args
                .iter()
                .map(|o| {
                    task.object(o).ok_or_else(|| PlanError::UnknownObject {
                        step: i,
                        object: o.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(task.lookup(schema, &args))
        })
        .collect()
}

/// Replays `steps` from the initial state, including derived closure.
pub fn validate_plan(task: &GroundTask, steps: &[StepText]) -> Result<Verdict, PlanError> {
    let ids = resolve(task, steps)?;
    let mut app = Applicability::new(task);
    let mut s = app.initial_state();
    for (i, id) in ids.into_iter().enumerate() {
        let failed = || Verdict::StepFailed {
            step: i,
            action: format!("({} {})", steps[i].name, steps[i].args.join(" ")).replace(" )", ")"),
        };
        let Some(a) = id else { return Ok(failed()) };
        match app.apply(&s, a) {
            Ok(next) => s = next,
            Err(_) => return Ok(failed()),
        }
    }
    Ok(if app.is_goal(&s) {
        Verdict::Valid
    } else {
        Verdict::GoalNotReached
    })
}
