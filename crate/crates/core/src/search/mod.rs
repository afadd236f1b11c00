//! Enforced hill-climbing with plateau search and macro learning, and the
//! best-first fallbacks.

mod best_first;
mod budget;
mod ehc;

use std::fmt;
use std::ops::Range;

pub use budget::{Budget, BudgetExceeded, Clock};

use crate::applicability::{Applicability, State};
use crate::ground::{ActionId, GroundTask};
use crate::heuristic::{Evaluation, Heuristic};
use crate::macros::{MacroLibrary, DEFAULT_CANDIDATE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlateauMode {
    /// Ascending h, FIFO among equals.
    #[default]
    LeastBad,
    /// Plain FIFO.
    Breadth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    /// Greedy best-first search with successor counters.
    #[default]
    Greedy,
    /// Ordinary best-first search expanding every successor at once.
    PlainBfs,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub use_macros: bool,
    pub plateau: PlateauMode,
    pub fallback: Fallback,
    pub budget: Budget,
    /// Candidate step bindings tried per macro per state.
    pub macro_candidate_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            use_macros: true,
            plateau: PlateauMode::default(),
            fallback: Fallback::default(),
            budget: Budget::default(),
            macro_candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// A node accepted by hill-climbing.
    Ehc,
    /// A non-root node expanded during plateau search.
    Plateau,
    /// A plateau exit reached through a macro application.
    MacroExit,
    /// Plateau search failed; hill-climbing gives up.
    EhcFail,
    /// A node expanded by the fallback search.
    Gbfs,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Ehc => "EHC",
            Phase::Plateau => "PLATEAU",
            Phase::MacroExit => "MACRO-EXIT",
            Phase::EhcFail => "EHC-FAIL",
            Phase::Gbfs => "GBFS",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub index: usize,
    pub phase: Phase,
    pub h: usize,
    /// Cumulative heuristic evaluations at the time of the event.
    pub evaluated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub root_h: usize,
    /// Exit heuristic value; `None` if the plateau was exhausted.
    pub exit_h: Option<usize>,
    /// Nodes expanded besides the root.
    pub extra_expansions: usize,
    /// Exit path length in search edges.
    pub depth: usize,
    pub via_macro: bool,
    /// Library index of a macro learned from this episode.
    pub learned: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ehc,
    Greedy,
    PlainBfs,
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub evaluated: u64,
    pub expanded: u64,
    pub episodes: Vec<Episode>,
    /// Macro applications on the final hill-climbing trajectory.
    pub macro_uses: usize,
    /// Times macro candidate enumeration hit its cap.
    pub macro_cap_hits: usize,
    pub ehc_failed: bool,
    pub solved_by: Option<Method>,
}

/// A sequential plan of normal actions. Each segment marks the steps that
/// came from one macro application.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<ActionId>,
    pub segments: Vec<(Range<usize>, usize)>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Solved(Plan),
    NoPlan,
    /// The goal is unreachable even ignoring deletes.
    Unreachable,
    BudgetExceeded(BudgetExceeded),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub stats: Stats,
    pub trace: Vec<TraceEvent>,
    pub library: MacroLibrary,
}

impl SolveResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.status {
            Status::Solved(p) => Some(p),
            _ => None,
        }
    }
}

/// Search state shared by all procedures: evaluators, counters, trace and
/// the macro library.
pub struct Searcher<'t> {
    task: &'t GroundTask,
    cfg: SearchConfig,
    app: Applicability<'t>,
    heur: Heuristic<'t>,
    clock: Clock,
    pub stats: Stats,
    pub trace: Vec<TraceEvent>,
    pub library: MacroLibrary,
}

impl<'t> Searcher<'t> {
    pub fn new(task: &'t GroundTask, cfg: SearchConfig) -> Self {
        let clock = Clock::start(cfg.budget);
        Searcher {
            task,
            cfg,
            app: Applicability::new(task),
            heur: Heuristic::new(task),
            clock,
            stats: Stats::default(),
            trace: Vec::new(),
            library: MacroLibrary::new(),
        }
    }

    pub fn task(&self) -> &'t GroundTask {
        self.task
    }

    pub fn initial_state(&mut self) -> State {
        self.app.initial_state()
    }

    fn evaluate(&mut self, s: &State) -> Result<Evaluation, BudgetExceeded> {
        self.stats.evaluated += 1;
        self.clock.check()?;
        Ok(self.heur.evaluate(s))
    }

    fn emit(&mut self, phase: Phase, h: usize) {
        self.trace.push(TraceEvent {
            index: self.trace.len(),
            phase,
            h,
            evaluated: self.stats.evaluated,
        });
    }

    fn apply(&mut self, s: &State, a: ActionId) -> State {
        self.app
            .apply(s, a)
            .expect("successor actions are applicable by construction")
    }

    fn into_result(self, status: Status) -> SolveResult {
        SolveResult {
            status,
            stats: self.stats,
            trace: self.trace,
            library: self.library,
        }
    }
}

/// Hill-climbing first, then the configured fallback from the initial state.
pub fn solve(task: &GroundTask, cfg: SearchConfig) -> SolveResult {
    let mut s = Searcher::new(task, cfg);
    let status = match s.run() {
        Ok(st) => st,
        Err(e) => Status::BudgetExceeded(e),
    };
    s.into_result(status)
}

impl Searcher<'_> {
    fn run(&mut self) -> Result<Status, BudgetExceeded> {
        match self.ehc_search()? {
            ehc::EhcOutcome::Plan(p) => {
                self.stats.solved_by = Some(Method::Ehc);
                return Ok(Status::Solved(p));
            }
            ehc::EhcOutcome::Unreachable => return Ok(Status::Unreachable),
            ehc::EhcOutcome::Failed => self.stats.ehc_failed = true,
        }
        let (method, plan) = match self.cfg.fallback {
            Fallback::Greedy => (Method::Greedy, self.greedy_bfs(&mut |_, _| {})?),
            Fallback::PlainBfs => (Method::PlainBfs, self.plain_bfs(&mut |_, _| {})?),
        };
        Ok(match plan {
            Some(p) => {
                self.stats.solved_by = Some(method);
                Status::Solved(p)
            }
            None => Status::NoPlan,
        })
    }
}

pub use ehc::EhcOutcome;

/// Writes trace events as CSV with the header `event,phase,h,evaluated`.
pub fn write_trace<W: std::io::Write>(events: &[TraceEvent], mut out: W) -> std::io::Result<()> {
    writeln!(out, "event,phase,h,evaluated")?;
    for e in events {
        writeln!(out, "{},{},{},{}", e.index, e.phase, e.h, e.evaluated)?;
    }
    out.flush()
}
