use std::collections::{BTreeMap, HashSet, VecDeque};
use std::ops::Range;

use super::{BudgetExceeded, Episode, Phase, PlateauMode, Plan, Searcher};
use crate::applicability::State;
use crate::ground::ActionId;
use crate::macros::{macro_successors, MacroInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EhcOutcome {
    Plan(Plan),
    /// A plateau could not be escaped.
    Failed,
    /// The initial state is a relaxed dead end.
    Unreachable,
}

enum Edge {
    Single(ActionId),
    Macro(MacroInstance),
}

struct Node {
    state: State,
    h: usize,
    helpful: Vec<ActionId>,
    parent: usize,
    edge: Option<Edge>,
}

struct Exit {
    state: State,
    h: usize,
    helpful: Vec<ActionId>,
    steps: Vec<ActionId>,
    /// Macro applications among `steps`, with their library index.
    segments: Vec<(Range<usize>, usize)>,
}

enum Queue {
    LeastBad(BTreeMap<(usize, u64), usize>, u64),
    Breadth(VecDeque<usize>),
}

impl Queue {
    fn new(mode: PlateauMode) -> Self {
        match mode {
            PlateauMode::LeastBad => Queue::LeastBad(BTreeMap::new(), 0),
            PlateauMode::Breadth => Queue::Breadth(VecDeque::new()),
        }
    }

    fn push(&mut self, node: usize, h: usize) {
        match self {
            Queue::LeastBad(q, seq) => {
                q.insert((h, *seq), node);
                *seq += 1;
            }
            Queue::Breadth(q) => q.push_back(node),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Queue::LeastBad(q, _) => q.pop_first().map(|(_, n)| n),
            Queue::Breadth(q) => q.pop_front(),
        }
    }
}

impl Searcher<'_> {
    /// Enforced hill-climbing from the initial state over helpful successors,
    /// with plateau search when no helpful successor improves on the best h.
    pub fn ehc_search(&mut self) -> Result<EhcOutcome, BudgetExceeded> {
        let mut state = self.initial_state();
        let e = self.evaluate(&state)?;
        let Some(mut best) = e.h else {
            return Ok(EhcOutcome::Unreachable);
        };
        let mut helpful = e.helpful;
        self.emit(Phase::Ehc, best);
        let mut plan = Plan::default();
        'climb: loop {
            if self.app.is_goal(&state) {
                return Ok(EhcOutcome::Plan(plan));
            }
            self.stats.expanded += 1;
            for &a in &helpful {
                let next = self.apply(&state, a);
                let e = self.evaluate(&next)?;
                let Some(h) = e.h else { continue };
                if h < best || self.app.is_goal(&next) {
                    plan.steps.push(a);
                    state = next;
                    best = h;
                    helpful = e.helpful;
                    self.emit(Phase::Ehc, h);
                    continue 'climb;
                }
            }
            match self.plateau_search(&state, best, &helpful)? {
                Some(exit) => {
                    let offset = plan.steps.len();
                    plan.steps.extend(exit.steps);
                    plan.segments
                        .extend(exit.segments.into_iter().map(|(r, m)| (r.start + offset..r.end + offset, m)));
                    state = exit.state;
                    best = exit.h;
                    helpful = exit.helpful;
                }
                None => {
                    self.emit(Phase::EhcFail, best);
                    return Ok(EhcOutcome::Failed);
                }
            }
        }
    }

    fn plateau_search(&mut self, root: &State, best: usize, root_helpful: &[ActionId]) -> Result<Option<Exit>, BudgetExceeded> {
        let mut nodes = vec![Node {
            state: root.clone(),
            h: best,
            helpful: root_helpful.to_vec(),
            parent: usize::MAX,
            edge: None,
        }];
        let mut visited: HashSet<State> = HashSet::new();
        visited.insert(root.clone());
        let mut queue = Queue::new(self.cfg.plateau);
        queue.push(0, best);
        let mut episode = Episode {
            root_h: best,
            exit_h: None,
            extra_expansions: 0,
            depth: 0,
            via_macro: false,
            learned: None,
        };
        while let Some(idx) = queue.pop() {
            if idx != 0 {
                episode.extra_expansions += 1;
                self.emit(Phase::Plateau, nodes[idx].h);
            }
            self.stats.expanded += 1;
            let state = nodes[idx].state.clone();
            let helpful = nodes[idx].helpful.clone();
            let mut generated: VecDeque<(State, Edge)> =
                helpful.iter().map(|&a| (self.apply(&state, a), Edge::Single(a))).collect();
            // Macro successors are produced lazily after the single steps,
            // since most plateau nodes exit before they are needed.
            let mut macros_done = !self.cfg.use_macros || self.library.is_empty();
            loop {
                let Some((next, edge)) = generated.pop_front() else {
                    if macros_done {
                        break;
                    }
                    macros_done = true;
                    let (succ, capped) = macro_successors(
                        &state,
                        &self.library,
                        &helpful,
                        &mut self.app,
                        self.cfg.macro_candidate_cap,
                    );
                    self.stats.macro_cap_hits += capped;
                    generated.extend(succ.into_iter().map(|(inst, s)| (s, Edge::Macro(inst))));
                    continue;
                };
                if !visited.insert(next.clone()) {
                    continue;
                }
                let e = self.evaluate(&next)?;
                let Some(h) = e.h else { continue };
                let goal = self.app.is_goal(&next);
                nodes.push(Node {
                    state: next,
                    h,
                    helpful: e.helpful,
                    parent: idx,
                    edge: Some(edge),
                });
                let child = nodes.len() - 1;
                if h < best || goal {
                    return Ok(Some(self.finish(nodes, child, episode)));
                }
                queue.push(child, h);
            }
        }
        self.stats.episodes.push(episode);
        Ok(None)
    }

    fn finish(&mut self, mut nodes: Vec<Node>, exit: usize, mut episode: Episode) -> Exit {
        let mut edges = Vec::new();
        let mut cur = exit;
        while let Some(edge) = nodes[cur].edge.take() {
            edges.push(edge);
            cur = nodes[cur].parent;
        }
        edges.reverse();
        let via_macro = matches!(edges.last(), Some(Edge::Macro(_)));
        let mut steps = Vec::new();
        let mut segments = Vec::new();
        for e in &edges {
            match e {
                Edge::Single(a) => steps.push(*a),
                Edge::Macro(inst) => {
                    self.stats.macro_uses += 1;
                    let start = steps.len();
                    steps.extend_from_slice(&inst.expansion);
                    segments.push((start..steps.len(), inst.macro_index));
                }
            }
        }
        let node = nodes.swap_remove(exit);
        episode.exit_h = Some(node.h);
        episode.depth = edges.len();
        episode.via_macro = via_macro;
        if edges.len() >= 2 {
            episode.learned = self.library.record(&steps, self.task);
        }
        self.stats.episodes.push(episode);
        self.emit(if via_macro { Phase::MacroExit } else { Phase::Ehc }, node.h);
        Exit {
            state: node.state,
            h: node.h,
            helpful: node.helpful,
            steps,
            segments,
        }
    }
}
