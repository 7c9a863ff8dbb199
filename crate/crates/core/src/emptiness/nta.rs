//! From an ACG and an open structure to a nondeterministic parity tree
//! automaton over environment strategy trees.
//!
//! A state of the tree automaton is either the accepting `⊥` sink, which
//! reads completion nodes, or a triple `(s, P, d)`: the structure state at
//! the node, the set `P` of ACG states that must accept the subtree, and the
//! state `d` of a deterministic parity automaton that checks, branch by
//! branch, that every trace of ACG states through the annotations is good.
//! A transition guesses the enabled successors (at environment states), the
//! labels of the basic subformulas, and a resolution of every obligation in
//! `P` into per-direction obligations.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use hashbrown::HashMap;

use crate::acg::{Acg, Direction};
use crate::cgs::{AgentSet, Letter, Move, OpenCgs, StateId};
use crate::error::{ResourceError, Stage};
use crate::graph::{backward_reach, sccs};
use crate::limits::Limits;
use crate::word::{Buchi, Determinizer, StateSet};

/// An obligation passed to a child: `(direction, from, to)` in ACG states.
type Triple = (StateId, u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NtaState {
    /// Reads `⊥` forever; every completion subtree is accepted here.
    Bottom,
    Node {
        state: StateId,
        obligations: Vec<u32>,
        check: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NtaTransition {
    /// Enabled successors of the structure state, sorted.
    pub enabled: Vec<StateId>,
    /// Valuation of the basic subformulas at the node.
    pub blabel: u64,
    /// Successor automaton state for every successor of the structure state
    /// (disabled ones go to [`BOTTOM`]). Other directions are implicitly
    /// `⊥`.
    pub children: Vec<(StateId, u32)>,
}

/// Index of the `⊥` sink.
pub const BOTTOM: u32 = 0;

#[derive(Debug, Clone)]
pub struct Nta {
    pub states: Vec<NtaState>,
    pub colors: Vec<u32>,
    pub transitions: Vec<Vec<NtaTransition>>,
    pub initial: u32,
    /// States of the branch checker that were explored.
    pub checker_states: usize,
}

impl Nta {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    /// Number of distinct colors.
    pub fn index(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

/// Büchi automaton over annotation letters (sets of ACG edges) accepting
/// the branches along which some trace has an odd maximal recurring color.
///
/// States `0..n` track a trace; state `n + q * k + i` tracks a trace that
/// has settled in the strongly connected component of `q`, never exceeds
/// the `i`-th odd color again and visits it infinitely often. Traces that
/// cannot reach a component with an odd color are dropped.
pub(crate) struct BadTraces {
    colors: Vec<u32>,
    odd: Vec<u32>,
    initial: u32,
    component: Vec<usize>,
    /// Whether `(q, i)` may be tracked: the component of `q` is cyclic and
    /// contains the `i`-th odd color, and `q`'s color does not exceed it.
    committable: Vec<bool>,
    /// Whether a trace from `q` can still go bad.
    relevant: Vec<bool>,
}

impl BadTraces {
    pub(crate) fn new(acg: &Acg) -> BadTraces {
        let n = acg.state_count();
        let colors: Vec<u32> = (0..n as u32).map(|q| acg.color(q)).collect();
        let mut odd: Vec<u32> = colors.iter().copied().filter(|c| c % 2 == 1).collect();
        odd.sort_unstable();
        odd.dedup();
        let succ: Vec<Vec<u32>> = (0..n as u32).map(|q| acg.successors(q)).collect();
        let (component, cyclic) = sccs(n, |q| succ[q].iter().map(|&t| t as usize).collect());
        let mut committable = vec![false; n * odd.len()];
        let mut target = vec![false; n];
        for q in 0..n {
            if !cyclic[component[q]] {
                continue;
            }
            for (i, &o) in odd.iter().enumerate() {
                let present = (0..n).any(|r| component[r] == component[q] && colors[r] == o);
                if present && colors[q] <= o {
                    committable[q * odd.len() + i] = true;
                    target[q] = true;
                }
            }
        }
        let edges: Vec<(usize, usize)> = succ
            .iter()
            .enumerate()
            .flat_map(|(q, ts)| ts.iter().map(move |&t| (q, t as usize)))
            .collect();
        let relevant = backward_reach(n, &edges, &target);
        BadTraces {
            colors,
            odd,
            initial: acg.initial(),
            component,
            committable,
            relevant,
        }
    }

    fn n(&self) -> usize {
        self.colors.len()
    }

    fn committed(&self, q: u32, i: usize) -> usize {
        self.n() + q as usize * self.odd.len() + i
    }

    fn enter(&self, out: &mut StateSet, q: u32) {
        if !self.relevant[q as usize] {
            return;
        }
        out.insert(q as usize);
        for i in 0..self.odd.len() {
            if self.committable[q as usize * self.odd.len() + i] {
                out.insert(self.committed(q, i));
            }
        }
    }
}

impl Buchi for BadTraces {
    type Letter = Vec<(u32, u32)>;

    fn state_count(&self) -> usize {
        self.n() * (1 + self.odd.len())
    }

    fn initial_set(&self) -> StateSet {
        let mut s = FixedBitSet::with_capacity(self.state_count());
        self.enter(&mut s, self.initial);
        s
    }

    fn accepting(&self, state: usize) -> bool {
        if state < self.n() {
            return false;
        }
        let k = state - self.n();
        let (q, i) = (k / self.odd.len(), k % self.odd.len());
        self.colors[q] == self.odd[i]
    }

    fn post(&self, set: &StateSet, edges: &Self::Letter) -> StateSet {
        let mut out = FixedBitSet::with_capacity(self.state_count());
        for &(q, t) in edges {
            if set.contains(q as usize) {
                self.enter(&mut out, t);
            }
            if self.component[q as usize] != self.component[t as usize] {
                continue;
            }
            for i in 0..self.odd.len() {
                if self.committable[t as usize * self.odd.len() + i] && set.contains(self.committed(q, i)) {
                    out.insert(self.committed(t, i));
                }
            }
        }
        out
    }
}

fn cross(a: &[Vec<Triple>], b: &[Vec<Triple>]) -> Vec<Vec<Triple>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut u: Vec<Triple> = x.iter().chain(y).copied().collect();
            u.sort_unstable();
            u.dedup();
            out.push(u);
        }
    }
    out
}

/// Keeps the ⊆-minimal sets.
fn antichain(mut sets: Vec<Vec<Triple>>) -> Vec<Vec<Triple>> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<Vec<Triple>> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| m.iter().all(|x| s.binary_search(x).is_ok())) {
            out.push(s);
        }
    }
    out
}

/// Ways of resolving an atom at a node whose enabled successors produce
/// `moves`: the target sets, one per option.
fn resolutions(moves: &[Move], direction: Direction) -> Vec<Vec<StateId>> {
    match direction {
        Direction::Box => moves.iter().map(|m| m.targets.clone()).collect(),
        Direction::Diamond => {
            let mut acc: Vec<Vec<StateId>> = vec![Vec::new()];
            for m in moves {
                let mut next = Vec::new();
                for prefix in &acc {
                    for &t in &m.targets {
                        let mut u = prefix.clone();
                        if !u.contains(&t) {
                            u.push(t);
                            u.sort_unstable();
                        }
                        next.push(u);
                    }
                }
                next.sort();
                next.dedup();
                // Only minimal target sets matter.
                let mut kept: Vec<Vec<StateId>> = Vec::new();
                next.sort_by_key(Vec::len);
                for s in next {
                    if !kept.iter().any(|k| k.iter().all(|x| s.binary_search(x).is_ok())) {
                        kept.push(s);
                    }
                }
                acc = kept;
            }
            acc
        }
    }
}

struct Builder<'a> {
    acg: &'a Acg,
    g: &'a OpenCgs,
    ids: HashMap<NtaState, u32>,
    nta: Nta,
    models: HashMap<(u32, Letter), Vec<Vec<u32>>>,
    max_states: usize,
}

impl Builder<'_> {
    fn intern(&mut self, st: NtaState, color: u32, queue: &mut Vec<u32>) -> Result<u32, ResourceError> {
        if let Some(&id) = self.ids.get(&st) {
            return Ok(id);
        }
        Limits::check(self.max_states, Stage::Nta, self.nta.states.len() + 1)?;
        let id = self.nta.states.len() as u32;
        self.ids.insert(st.clone(), id);
        self.nta.states.push(st);
        self.nta.colors.push(color);
        self.nta.transitions.push(Vec::new());
        queue.push(id);
        Ok(id)
    }

    fn models(&mut self, q: u32, letter: Letter) -> &Vec<Vec<u32>> {
        let acg = self.acg;
        self.models
            .entry((q, letter))
            .or_insert_with(|| acg.delta(q, letter).minimal_models())
    }

    /// Minimal per-direction obligation sets for `obligations` at `s`.
    fn resolve(&mut self, s: StateId, enabled: &[StateId], letter: Letter, obligations: &[u32]) -> Vec<Vec<Triple>> {
        let mut moves: BTreeMap<AgentSet, Vec<Move>> = BTreeMap::new();
        let mut choices: Vec<Vec<Triple>> = vec![Vec::new()];
        for &q in obligations {
            let models = self.models(q, letter).clone();
            let mut options: Vec<Vec<Triple>> = Vec::new();
            for model in &models {
                let mut opts: Vec<Vec<Triple>> = vec![Vec::new()];
                for &a in model {
                    let atom = self.acg.atom(a);
                    let ms = moves
                        .entry(atom.agents)
                        .or_insert_with(|| self.g.moves(s, atom.agents, Some(enabled)));
                    let res: Vec<Vec<Triple>> = resolutions(ms, atom.direction)
                        .into_iter()
                        .map(|ts| ts.into_iter().map(|t| (t, q, atom.state)).collect())
                        .collect();
                    opts = antichain(cross(&opts, &res));
                }
                options.extend(opts);
            }
            choices = antichain(cross(&choices, &antichain(options)));
            if choices.is_empty() {
                break;
            }
        }
        choices
    }
}

/// Builds the tree automaton whose language is non-empty iff some
/// environment strategy tree of `g` (with some labeling of the basic
/// subformulas) is accepted by `acg`.
pub fn acg_to_nta(acg: &Acg, g: &OpenCgs, limits: &Limits) -> Result<Nta, ResourceError> {
    let bad = BadTraces::new(acg);
    let mut good = Determinizer::new(&bad, limits);
    let basics = acg.basics().len();
    let mut b = Builder {
        acg,
        g,
        ids: HashMap::new(),
        nta: Nta {
            states: Vec::new(),
            colors: Vec::new(),
            transitions: Vec::new(),
            initial: 0,
            checker_states: 0,
        },
        models: HashMap::new(),
        max_states: limits.max_nta_states,
    };
    let mut queue = Vec::new();
    b.intern(NtaState::Bottom, 0, &mut queue)?;
    let root = NtaState::Node {
        state: g.init(),
        obligations: vec![acg.initial()],
        check: 0,
    };
    b.nta.initial = b.intern(root, good.color(0) + 1, &mut queue)?;
    let mut head = 1;
    while head < b.nta.states.len() {
        let id = head as u32;
        head += 1;
        let NtaState::Node {
            state: s,
            obligations,
            check,
        } = b.nta.states[id as usize].clone()
        else {
            continue;
        };
        let succ = g.successors(s);
        // Without obligations any strategy tree below is accepted, so one
        // choice suffices.
        let free = obligations.is_empty();
        let enabled_sets: Vec<Vec<StateId>> = if g.is_env_state(s) && !free {
            (1u64..1 << succ.len())
                .map(|mask| {
                    succ.iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &t)| t)
                        .collect()
                })
                .collect()
        } else {
            vec![succ.clone()]
        };
        let labels = if free { 1u64 } else { 1u64 << basics };
        let mut out = Vec::new();
        for enabled in &enabled_sets {
            for blabel in 0..labels {
                let letter = acg.letter(g.label(s), blabel);
                for choice in b.resolve(s, enabled, letter, &obligations) {
                    let mut children = Vec::with_capacity(succ.len());
                    for &t in &succ {
                        if enabled.binary_search(&t).is_err() {
                            children.push((t, BOTTOM));
                            continue;
                        }
                        let mut next: Vec<u32> = Vec::new();
                        let mut edges: Vec<(u32, u32)> = Vec::new();
                        for &(dir, q, q2) in &choice {
                            if dir == t {
                                next.push(q2);
                                edges.push((q, q2));
                            }
                        }
                        next.sort_unstable();
                        next.dedup();
                        edges.sort_unstable();
                        edges.dedup();
                        let d = good.step(check, &edges)?;
                        let child = NtaState::Node {
                            state: t,
                            obligations: next,
                            check: d,
                        };
                        let color = good.color(d) + 1;
                        children.push((t, b.intern(child, color, &mut queue)?));
                    }
                    out.push(NtaTransition {
                        enabled: enabled.clone(),
                        blabel,
                        children,
                    });
                }
            }
        }
        b.nta.transitions[id as usize] = out;
    }
    b.nta.checker_states = good.state_count();
    Ok(b.nta)
}
