//! Counter-annotated satisfaction trees and the proposition dependency cache.
//!
//! Every tree is stored as internal and/or nodes with parent links. Leaves are
//! not materialised: each proposition keeps the list of nodes that have it as a
//! positive or negative leaf child. A node is satisfied while its counter is
//! `<= 0`; a change is propagated to the parent only when a counter crosses
//! that threshold, so a parent can never count the same child twice.

use fixedbitset::FixedBitSet;

use super::nnf::Nnf;
use super::PropId;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SatForest {
    parent: Vec<u32>,
    owner: Vec<u32>,
    template: Vec<i32>,
    roots: Vec<u32>,
    pos_deps: Vec<Vec<u32>>,
    neg_deps: Vec<Vec<u32>>,
    live: FixedBitSet,
}

/// Per-worker scratch counters for one [`SatForest`].
#[derive(Debug, Clone, Default)]
pub struct Counters(Vec<i32>);

impl Counters {
    pub fn value(&self, node: usize) -> i32 {
        self.0[node]
    }
}

impl SatForest {
    pub fn build<'a>(trees: impl IntoIterator<Item = &'a Nnf<PropId>>, num_props: usize) -> Self {
        let mut forest = SatForest {
            parent: Vec::new(),
            owner: Vec::new(),
            template: Vec::new(),
            roots: Vec::new(),
            pos_deps: vec![Vec::new(); num_props],
            neg_deps: vec![Vec::new(); num_props],
            live: FixedBitSet::new(),
        };
        for (t, tree) in trees.into_iter().enumerate() {
            let root = match tree {
                Nnf::Pos(_) | Nnf::Neg(_) => {
                    let node = forest.push_node(NONE, t as u32);
                    let sat = forest.add_leaf(tree, node);
                    forest.template[node as usize] = 1 - sat as i32;
                    node
                }
                _ => forest.add_node(tree, NONE, t as u32).0,
            };
            forest.roots.push(root);
        }
        forest.live = FixedBitSet::with_capacity(forest.roots.len());
        forest.live.insert_range(..);
        forest
    }

    fn push_node(&mut self, parent: u32, owner: u32) -> u32 {
        self.parent.push(parent);
        self.owner.push(owner);
        self.template.push(0);
        (self.parent.len() - 1) as u32
    }

    /// Registers a leaf under `node`; returns whether it is satisfied by default.
    fn add_leaf(&mut self, leaf: &Nnf<PropId>, node: u32) -> bool {
        match leaf {
            Nnf::Pos(p) => {
                self.pos_deps[*p].push(node);
                false
            }
            Nnf::Neg(p) => {
                self.neg_deps[*p].push(node);
                true
            }
            _ => unreachable!(),
        }
    }

    /// Returns the node id and whether its template counter is already satisfied.
    fn add_node(&mut self, tree: &Nnf<PropId>, parent: u32, owner: u32) -> (u32, bool) {
        let node = self.push_node(parent, owner);
        let (children, is_and) = match tree {
            Nnf::And(cs) => (cs, true),
            Nnf::Or(cs) => (cs, false),
            _ => unreachable!(),
        };
        let mut satisfied = 0;
        for c in children {
            let sat = match c {
                Nnf::Pos(_) | Nnf::Neg(_) => self.add_leaf(c, node),
                _ => self.add_node(c, node, owner).1,
            };
            satisfied += sat as i32;
        }
        let value = if is_and {
            children.len() as i32 - satisfied
        } else {
            1 - satisfied
        };
        self.template[node as usize] = value;
        (node, value <= 0)
    }

    pub fn num_trees(&self) -> usize {
        self.roots.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn template(&self, node: usize) -> i32 {
        self.template[node]
    }

    pub fn root(&self, tree: usize) -> usize {
        self.roots[tree] as usize
    }

    /// Tree owning `node`.
    pub fn owner(&self, node: usize) -> usize {
        self.owner[node] as usize
    }

    pub fn pos_deps(&self, p: PropId) -> &[u32] {
        &self.pos_deps[p]
    }

    pub fn neg_deps(&self, p: PropId) -> &[u32] {
        &self.neg_deps[p]
    }

    pub fn is_live(&self, tree: usize) -> bool {
        self.live.contains(tree)
    }

    /// Drops dependency entries of trees outside `live`. Their counters are
    /// never touched again and they never report as satisfied.
    pub fn prune(&mut self, live: &FixedBitSet) {
        let owner = &self.owner;
        for deps in self.pos_deps.iter_mut().chain(self.neg_deps.iter_mut()) {
            deps.retain(|&n| live.contains(owner[n as usize] as usize));
        }
        self.live = live.clone();
    }

    pub fn new_counters(&self) -> Counters {
        Counters(self.template.clone())
    }

    pub fn reset(&self, c: &mut Counters) {
        c.0.clear();
        c.0.extend_from_slice(&self.template);
    }

    fn decrement<F: FnMut(usize)>(&self, c: &mut Counters, mut node: u32, on_root: &mut F) {
        loop {
            let v = &mut c.0[node as usize];
            *v -= 1;
            if *v != 0 {
                return;
            }
            let p = self.parent[node as usize];
            if p == NONE {
                on_root(self.owner[node as usize] as usize);
                return;
            }
            node = p;
        }
    }

    fn increment(&self, c: &mut Counters, mut node: u32) {
        loop {
            let v = &mut c.0[node as usize];
            *v += 1;
            if *v != 1 {
                return;
            }
            let p = self.parent[node as usize];
            if p == NONE {
                return;
            }
            node = p;
        }
    }

    /// `p` became true: positive leaves are satisfied. Reports trees whose
    /// root crossed into the satisfied state.
    pub fn positive<F: FnMut(usize)>(&self, c: &mut Counters, p: PropId, on_root: &mut F) {
        for &n in &self.pos_deps[p] {
            self.decrement(c, n, on_root);
        }
    }

    /// `p` is true in the evaluated state: its negative leaves, satisfied by
    /// default, are falsified.
    pub fn unset_negative(&self, c: &mut Counters, p: PropId) {
        for &n in &self.neg_deps[p] {
            self.increment(c, n);
        }
    }

    /// Negative leaves over `p` became satisfied again.
    pub fn negative<F: FnMut(usize)>(&self, c: &mut Counters, p: PropId, on_root: &mut F) {
        for &n in &self.neg_deps[p] {
            self.decrement(c, n, on_root);
        }
    }

    pub fn satisfied(&self, c: &Counters, tree: usize) -> bool {
        self.live.contains(tree) && c.0[self.roots[tree] as usize] <= 0
    }

    /// Resets and evaluates every tree against the given true propositions.
    pub fn evaluate(&self, c: &mut Counters, facts: impl IntoIterator<Item = PropId>) {
        self.reset(c);
        for p in facts {
            self.unset_negative(c, p);
            self.positive(c, p, &mut |_| {});
        }
    }
}
