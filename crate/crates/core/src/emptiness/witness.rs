//! Finite-memory environment strategies and their unrollings.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::cgs::{Letter, OpenCgs, Pruning, StateId, TreeNode, TreePrefix};
use crate::error::ModelError;

/// One node of a regular strategy tree: the structure state it sits on, the
/// successors the environment keeps enabled there, the valuation of the
/// basic subformulas, and the cell reached in each enabled direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyCell {
    pub state: StateId,
    pub enabled: Vec<StateId>,
    pub blabel: u64,
    /// One entry per enabled successor, in the same order.
    pub next: Vec<(StateId, u32)>,
}

/// A finite-memory environment strategy tree. Each cell pairs a memory value
/// with a structure state; unrolling from `initial` yields a member of the
/// execution set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStrategyTree {
    pub cells: Vec<StrategyCell>,
    pub initial: u32,
}

impl FiniteStrategyTree {
    pub fn cell(&self, c: u32) -> &StrategyCell {
        &self.cells[c as usize]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Checks that the unrolling is a strategy tree of `g`: system states
    /// keep every successor, environment states keep a nonempty subset, and
    /// every direction leads to a cell on the right state.
    pub fn validate(&self, g: &OpenCgs) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidPruning(msg));
        if self.initial as usize >= self.cells.len() {
            return bad(String::from("initial cell out of range"));
        }
        if self.cell(self.initial).state != g.init() {
            return bad(String::from("initial cell is not on the initial state"));
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.state.index() >= g.state_count() {
                return bad(format!("cell {i} refers to an unknown state"));
            }
            let succ = g.successors(cell.state);
            if cell.enabled.is_empty()
                || !cell.enabled.windows(2).all(|w| w[0] < w[1])
                || cell.enabled.iter().any(|t| succ.binary_search(t).is_err())
            {
                return bad(format!("cell {i} has an invalid enabled set"));
            }
            if !g.is_env_state(cell.state) && cell.enabled != succ {
                return bad(format!("cell {i} prunes a system state"));
            }
            if cell.next.len() != cell.enabled.len() {
                return bad(format!("cell {i} has a wrong number of directions"));
            }
            for (&(t, c), &e) in cell.next.iter().zip(&cell.enabled) {
                if t != e || c as usize >= self.cells.len() || self.cell(c).state != t {
                    return bad(format!("cell {i} has an inconsistent direction"));
                }
            }
        }
        Ok(())
    }

    /// The memoryless pruning this strategy amounts to, when the enabled set
    /// depends on the structure state alone. Unvisited environment states
    /// keep all successors.
    pub fn as_pruning(&self, g: &OpenCgs) -> Option<Pruning> {
        let mut enabled: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for cell in &self.cells {
            if !g.is_env_state(cell.state) {
                continue;
            }
            match enabled.get(&cell.state) {
                Some(e) if *e != cell.enabled => return None,
                _ => {
                    enabled.insert(cell.state, cell.enabled.clone());
                }
            }
        }
        for s in g.states().filter(|&s| g.is_env_state(s)) {
            enabled.entry(s).or_insert_with(|| g.successors(s));
        }
        Some(Pruning { enabled })
    }

    /// Merges cells with identical futures and renumbers them in
    /// breadth-first order from the initial cell, dropping unreachable ones.
    pub fn normalize(&self) -> FiniteStrategyTree {
        let n = self.cells.len();
        let mut keys: HashMap<(StateId, &[StateId], u64), u32> = HashMap::new();
        let mut class: Vec<u32> = self
            .cells
            .iter()
            .map(|c| {
                let k = keys.len() as u32;
                *keys.entry((c.state, &c.enabled[..], c.blabel)).or_insert(k)
            })
            .collect();
        let mut count = keys.len();
        loop {
            let mut sigs: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            let next: Vec<u32> = (0..n)
                .map(|i| {
                    let sig = (
                        class[i],
                        self.cells[i].next.iter().map(|&(_, c)| class[c as usize]).collect(),
                    );
                    let k = sigs.len() as u32;
                    *sigs.entry(sig).or_insert(k)
                })
                .collect();
            let refined = sigs.len();
            class = next;
            if refined == count {
                break;
            }
            count = refined;
        }
        let mut rep = vec![usize::MAX; count];
        for i in (0..n).rev() {
            rep[class[i] as usize] = i;
        }
        let mut order: Vec<u32> = vec![u32::MAX; count];
        let mut cells = Vec::new();
        let mut queue = VecDeque::new();
        let start = class[self.initial as usize];
        order[start as usize] = 0;
        queue.push_back(start);
        let mut reps = Vec::new();
        while let Some(k) = queue.pop_front() {
            reps.push(k);
            for &(_, c) in &self.cells[rep[k as usize]].next {
                let ck = class[c as usize];
                if order[ck as usize] == u32::MAX {
                    order[ck as usize] = (reps.len() + queue.len()) as u32;
                    queue.push_back(ck);
                }
            }
        }
        for k in reps {
            let cell = &self.cells[rep[k as usize]];
            cells.push(StrategyCell {
                state: cell.state,
                enabled: cell.enabled.clone(),
                blabel: cell.blabel,
                next: cell
                    .next
                    .iter()
                    .map(|&(t, c)| (t, order[class[c as usize] as usize]))
                    .collect(),
            });
        }
        FiniteStrategyTree { cells, initial: 0 }
    }

    /// The first `depth` levels of the strategy tree.
    pub fn unroll(&self, g: &OpenCgs, depth: usize) -> TreePrefix {
        let root = self.cell(self.initial);
        let mut tree = TreePrefix {
            nodes: vec![TreeNode {
                state: root.state,
                label: g.label(root.state),
                children: Vec::new(),
            }],
        };
        let mut frontier = vec![(0usize, self.initial)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (node, c) in frontier {
                for &(t, d) in &self.cell(c).next {
                    let id = tree.nodes.len();
                    tree.nodes.push(TreeNode {
                        state: t,
                        label: g.label(t),
                        children: Vec::new(),
                    });
                    tree.nodes[node].children.push(id);
                    next.push((id, d));
                }
            }
            frontier = next;
        }
        tree
    }

    /// The finite structure whose states are the cells: its unwinding is the
    /// strategy tree. Cell `i` becomes state `i`.
    pub fn product(&self, g: &OpenCgs) -> Result<OpenCgs, ModelError> {
        let states: Vec<(String, Letter)> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("{}#{}", g.state_name(c.state), i), g.label(c.state)))
            .collect();
        let rows = self
            .cells
            .iter()
            .map(|c| {
                g.row(c.state)
                    .iter()
                    .map(|slot| {
                        let t = (*slot)?;
                        let k = c.enabled.binary_search(&t).ok()?;
                        Some(StateId(c.next[k].1))
                    })
                    .collect()
            })
            .collect();
        g.with_rows(states, StateId(self.initial), rows)
    }
}

/// A node letter of a completed tree: a concrete label or the completion
/// mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BotLetter {
    Concrete(Letter),
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletedNode {
    pub label: BotLetter,
    /// Indexed by direction (structure state); empty at the frontier.
    pub children: Vec<usize>,
}

/// A complete `S`-branching tree prefix; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletedTree {
    pub nodes: Vec<CompletedNode>,
}

/// Embeds a strategy tree prefix into the complete tree over `directions`
/// directions, marking every absent node with `⊥`. The result has the depth
/// of `t`.
pub fn bot_completion(t: &TreePrefix, directions: usize) -> CompletedTree {
    let depth = t.depth();
    let mut out = CompletedTree { nodes: Vec::new() };
    fn build(
        t: &TreePrefix,
        node: Option<usize>,
        level: usize,
        depth: usize,
        directions: usize,
        out: &mut CompletedTree,
    ) -> usize {
        let id = out.nodes.len();
        out.nodes.push(CompletedNode {
            label: match node {
                Some(n) => BotLetter::Concrete(t.nodes[n].label),
                None => BotLetter::Bottom,
            },
            children: Vec::new(),
        });
        if level == depth {
            return id;
        }
        let mut children = Vec::with_capacity(directions);
        for d in 0..directions {
            let child = node.and_then(|n| {
                t.nodes[n]
                    .children
                    .iter()
                    .copied()
                    .find(|&c| t.nodes[c].state.index() == d)
            });
            children.push(build(t, child, level + 1, depth, directions, out));
        }
        out.nodes[id].children = children;
        id
    }
    build(t, Some(0), 0, depth, directions, &mut out);
    out
}
