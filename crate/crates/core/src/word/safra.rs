//! Determinization of Büchi automata into parity automata with compact Safra
//! trees.
//!
//! Tree nodes are named by creation order, so an older sibling always has a
//! smaller name and the tree is determined by the list of (parent, label)
//! pairs in name order. After each step, names are compacted; the emitted
//! color records the smallest node that turned green and the smallest node
//! that was removed.

use alloc::vec;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use hashbrown::HashMap;

use crate::error::{ResourceError, Stage};
use crate::limits::Limits;

pub type StateSet = FixedBitSet;

/// The view of a Büchi automaton the determinizer needs. Implementations may
/// compute successors on the fly and may drop states without accepting
/// continuations from `post`.
pub trait Buchi {
    type Letter;

    fn state_count(&self) -> usize;

    fn initial_set(&self) -> StateSet;

    fn accepting(&self, q: usize) -> bool;

    fn post(&self, set: &StateSet, letter: &Self::Letter) -> StateSet;
}

const ROOT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Tree {
    parent: Vec<u32>,
    label: Vec<StateSet>,
}

/// Incrementally explored deterministic parity automaton equivalent to a
/// Büchi automaton. State 0 is initial.
pub struct Determinizer<'a, B: Buchi> {
    nbw: &'a B,
    accepting: StateSet,
    ids: HashMap<(Tree, u32), u32>,
    states: Vec<(Tree, u32)>,
    max_states: usize,
}

impl<'a, B: Buchi> Determinizer<'a, B> {
    pub fn new(nbw: &'a B, limits: &Limits) -> Determinizer<'a, B> {
        let n = nbw.state_count();
        let mut accepting = FixedBitSet::with_capacity(n);
        for q in 0..n {
            if nbw.accepting(q) {
                accepting.insert(q);
            }
        }
        let init = nbw.initial_set();
        let tree = if init.is_clear() {
            Tree {
                parent: Vec::new(),
                label: Vec::new(),
            }
        } else {
            Tree {
                parent: vec![ROOT],
                label: vec![init],
            }
        };
        let mut d = Determinizer {
            nbw,
            accepting,
            ids: HashMap::new(),
            states: Vec::new(),
            max_states: limits.max_dpw_states,
        };
        d.ids.insert((tree.clone(), 1), 0);
        d.states.push((tree, 1));
        d
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Max-parity color of a state (the color of the step that entered it).
    pub fn color(&self, state: u32) -> u32 {
        self.states[state as usize].1
    }

    /// Whether the state is the rejecting sink (empty tree).
    pub fn is_sink(&self, state: u32) -> bool {
        self.states[state as usize].0.parent.is_empty()
    }

    pub fn step(&mut self, state: u32, letter: &B::Letter) -> Result<u32, ResourceError> {
        let (tree, color) = self.successor(&self.states[state as usize].0, letter);
        let key = (tree, color);
        if let Some(&id) = self.ids.get(&key) {
            return Ok(id);
        }
        let id = self.states.len() as u32;
        Limits::check(self.max_states, Stage::Dpw, self.states.len() + 1)?;
        self.ids.insert(key.clone(), id);
        self.states.push(key);
        Ok(id)
    }

    fn successor(&self, tree: &Tree, letter: &B::Letter) -> (Tree, u32) {
        let n = self.nbw.state_count() as u32;
        if tree.parent.is_empty() {
            return (tree.clone(), 1);
        }
        let mut parent = tree.parent.clone();
        let mut label = tree.label.clone();
        let old = parent.len();
        for v in 0..old {
            let mut fresh = label[v].clone();
            fresh.intersect_with(&self.accepting);
            if !fresh.is_clear() {
                parent.push(v as u32);
                label.push(fresh);
            }
        }
        for l in label.iter_mut() {
            *l = self.nbw.post(l, letter);
        }
        let m = parent.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
        for v in 1..m {
            children[parent[v] as usize].push(v);
        }
        // Horizontal merge: a state stays only in the oldest branch holding it.
        fn merge(v: usize, forbidden: &FixedBitSet, children: &[Vec<usize>], label: &mut [StateSet]) {
            label[v].difference_with(forbidden);
            let mut acc = forbidden.clone();
            for &c in &children[v] {
                merge(c, &acc, children, label);
                acc.union_with(&label[c]);
            }
        }
        merge(0, &FixedBitSet::with_capacity(n as usize), &children, &mut label);
        let mut alive = vec![true; m];
        let mut removed_min: Option<usize> = None;
        let mut green_min: Option<usize> = None;
        for v in 0..m {
            let dead = label[v].is_clear() || (v > 0 && !alive[parent[v] as usize]);
            if dead {
                alive[v] = false;
                removed_min.get_or_insert(v);
            }
        }
        if !alive[0] {
            let empty = Tree {
                parent: Vec::new(),
                label: Vec::new(),
            };
            return (empty, 1);
        }
        // Vertical merge, top-down in name order (parents precede children).
        for v in 0..m {
            if !alive[v] || children[v].iter().all(|&c| !alive[c]) {
                continue;
            }
            let mut union = FixedBitSet::with_capacity(n as usize);
            for &c in &children[v] {
                if alive[c] {
                    union.union_with(&label[c]);
                }
            }
            if union == label[v] {
                green_min.get_or_insert(v);
                let mut stack: Vec<usize> = children[v].clone();
                while let Some(c) = stack.pop() {
                    if alive[c] {
                        alive[c] = false;
                        removed_min = Some(removed_min.map_or(c, |r| r.min(c)));
                    }
                    stack.extend(children[c].iter().copied());
                }
            }
        }
        let mut rename = vec![ROOT; m];
        let mut out = Tree {
            parent: Vec::new(),
            label: Vec::new(),
        };
        for v in 0..m {
            if alive[v] {
                rename[v] = out.parent.len() as u32;
                out.parent.push(if v == 0 { ROOT } else { rename[parent[v] as usize] });
                out.label.push(core::mem::take(&mut label[v]));
            }
        }
        // Min-parity (a removal outranks a green of the same node), then
        // flipped to max-parity.
        let neutral = 4 * n + 3;
        let green = green_min.map_or(neutral, |e| 2 * e as u32 + 2);
        let red = removed_min.map_or(neutral, |f| 2 * f as u32 + 1);
        let p = green.min(red);
        (out, 4 * n + 4 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    extern crate std;

    /// Explicit automaton over letters 0..k with per-letter successor lists.
    struct Table {
        init: Vec<usize>,
        acc: Vec<bool>,
        delta: Vec<Vec<Vec<usize>>>,
    }

    impl Buchi for Table {
        type Letter = usize;

        fn state_count(&self) -> usize {
            self.acc.len()
        }

        fn initial_set(&self) -> StateSet {
            let mut s = FixedBitSet::with_capacity(self.acc.len());
            for &q in &self.init {
                s.insert(q);
            }
            s
        }

        fn accepting(&self, q: usize) -> bool {
            self.acc[q]
        }

        fn post(&self, set: &StateSet, letter: &usize) -> StateSet {
            let mut s = FixedBitSet::with_capacity(self.acc.len());
            for q in set.ones() {
                for &t in &self.delta[q][*letter] {
                    s.insert(t);
                }
            }
            s
        }
    }

    #[test]
    fn eventually_always_a() {
        // FG a over {a, b}: guess the point after which only `a` is read.
        let t = Table {
            init: vec![0],
            acc: vec![false, true],
            delta: vec![vec![vec![0, 1], vec![0]], vec![vec![1], vec![]]],
        };
        let mut d = Determinizer::new(&t, &Limits::default());
        let run = |d: &mut Determinizer<Table>, stem: &[usize], lp: &[usize]| -> bool {
            let mut s = 0;
            for l in stem {
                s = d.step(s, l).unwrap();
            }
            let mut best = 0;
            for _ in 0..20 {
                for l in lp {
                    s = d.step(s, l).unwrap();
                }
            }
            for _ in 0..5 {
                for l in lp {
                    s = d.step(s, l).unwrap();
                    best = best.max(d.color(s));
                }
            }
            best % 2 == 0
        };
        assert!(run(&mut d, &[1, 1], &[0]));
        assert!(!run(&mut d, &[], &[0, 1]));
        assert!(!run(&mut d, &[0], &[1]));
    }

    #[test]
    fn spawned_accepting_loop() {
        // 0 keeps spawning 1 (waiting) and 2 (accepting, looping).
        let t = Table {
            init: vec![0],
            acc: vec![false, false, true],
            delta: vec![vec![vec![0, 1, 2]], vec![vec![1, 2]], vec![vec![2]]],
        };
        let mut d = Determinizer::new(&t, &Limits::default());
        let mut s = 0;
        let mut colors = Vec::new();
        for _ in 0..12 {
            s = d.step(s, &0).unwrap();
            colors.push(d.color(s));
        }
        std::println!("{colors:?} {:?}", d.states[s as usize]);
        assert_eq!(colors[8..].iter().max().unwrap() % 2, 0);
    }
}
