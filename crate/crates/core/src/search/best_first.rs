use std::collections::{BTreeMap, HashSet};

use super::{BudgetExceeded, Phase, Plan, Searcher};
use crate::applicability::State;
use crate::ground::ActionId;

struct Node {
    state: State,
    h: usize,
    applicable: Vec<ActionId>,
    parent: usize,
    action: ActionId,
}

fn extract(nodes: &[Node], mut cur: usize) -> Plan {
    let mut steps = Vec::new();
    while nodes[cur].parent != usize::MAX {
        steps.push(nodes[cur].action);
        cur = nodes[cur].parent;
    }
    steps.reverse();
    Plan {
        steps,
        segments: Vec::new(),
    }
}

impl Searcher<'_> {
    /// Greedy best-first search over all applicable actions. An entry
    /// remembers how many of its successors were already generated; when a
    /// child improves on its parent, the parent is re-queued at the front
    /// (resuming at the next action) followed by the child.
    ///
    /// `on_edge` sees every generated `(state, action)` pair.
    pub fn greedy_bfs(&mut self, on_edge: &mut dyn FnMut(&State, ActionId)) -> Result<Option<Plan>, BudgetExceeded> {
        let Some(mut nodes) = self.root_node()? else {
            return Ok(None);
        };
        if self.app.is_goal(&nodes[0].state) {
            return Ok(Some(Plan::default()));
        }
        let mut visited: HashSet<State> = HashSet::new();
        visited.insert(nodes[0].state.clone());
        // Keys: (h, position). Front insertions take decreasing negative positions.
        let mut open: BTreeMap<(usize, i64), (usize, usize)> = BTreeMap::new();
        let (mut back, mut front) = (0i64, 0i64);
        open.insert((nodes[0].h, back), (0, 0));
        back += 1;
        while let Some(((h, _), (idx, counter))) = open.pop_first() {
            self.emit(Phase::Gbfs, h);
            self.stats.expanded += 1;
            let state = nodes[idx].state.clone();
            let n = nodes[idx].applicable.len();
            for i in counter..n {
                let a = nodes[idx].applicable[i];
                let next = self.apply(&state, a);
                on_edge(&state, a);
                if !visited.insert(next.clone()) {
                    continue;
                }
                let e = self.evaluate(&next)?;
                let Some(ch) = e.h else { continue };
                let goal = self.app.is_goal(&next);
                nodes.push(Node {
                    state: next,
                    h: ch,
                    applicable: e.applicable,
                    parent: idx,
                    action: a,
                });
                let child = nodes.len() - 1;
                if goal {
                    return Ok(Some(extract(&nodes, child)));
                }
                if ch < h {
                    front -= 1;
                    open.insert((h, front), (idx, i + 1));
                    front -= 1;
                    open.insert((ch, front), (child, 0));
                    break;
                }
                open.insert((ch, back), (child, 0));
                back += 1;
            }
        }
        Ok(None)
    }

    /// Best-first search ordered by h that generates all successors of a
    /// node when it is expanded.
    pub fn plain_bfs(&mut self, on_edge: &mut dyn FnMut(&State, ActionId)) -> Result<Option<Plan>, BudgetExceeded> {
        let Some(mut nodes) = self.root_node()? else {
            return Ok(None);
        };
        if self.app.is_goal(&nodes[0].state) {
            return Ok(Some(Plan::default()));
        }
        let mut visited: HashSet<State> = HashSet::new();
        visited.insert(nodes[0].state.clone());
        let mut open: BTreeMap<(usize, u64), usize> = BTreeMap::new();
        let mut seq = 0u64;
        open.insert((nodes[0].h, seq), 0);
        while let Some(((h, _), idx)) = open.pop_first() {
            self.emit(Phase::Gbfs, h);
            self.stats.expanded += 1;
            let state = nodes[idx].state.clone();
            let applicable = std::mem::take(&mut nodes[idx].applicable);
            for &a in &applicable {
                let next = self.apply(&state, a);
                on_edge(&state, a);
                if !visited.insert(next.clone()) {
                    continue;
                }
                let e = self.evaluate(&next)?;
                let Some(ch) = e.h else { continue };
                let goal = self.app.is_goal(&next);
                nodes.push(Node {
                    state: next,
                    h: ch,
                    applicable: e.applicable,
                    parent: idx,
                    action: a,
                });
                let child = nodes.len() - 1;
                if goal {
                    return Ok(Some(extract(&nodes, child)));
                }
                seq += 1;
                open.insert((ch, seq), child);
            }
        }
        Ok(None)
    }

    fn root_node(&mut self) -> Result<Option<Vec<Node>>, BudgetExceeded> {
        let state = self.initial_state();
        let e = self.evaluate(&state)?;
        Ok(e.h.map(|h| {
            vec![Node {
                state,
                h,
                applicable: e.applicable,
                parent: usize::MAX,
                action: usize::MAX,
            }]
        }))
    }
}
