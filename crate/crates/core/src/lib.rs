//! Forward-chaining PDDL planner: grounding, relaxed-plan heuristic,
//! enforced hill-climbing with plateau-escaping macro-actions, and a
//! greedy best-first fallback.

pub mod pddl;
pub mod ground;
pub mod fixtures;
pub mod applicability;
pub mod heuristic;
pub mod macros;
pub mod search;
pub mod plan;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] pddl::ParseError),
    #[error(transparent)]
    Ground(#[from] ground::GroundError),
}

/// Parses and grounds a domain/problem pair.
pub fn load_task(domain: &str, problem: &str, opts: ground::GroundOptions) -> Result<ground::GroundTask, LoadError> {
    let d = pddl::parse_domain(domain)?;
    let p = pddl::parse_problem(problem, &d)?;
    Ok(ground::ground_task(&d, &p, opts)?)
}
