use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use fixedbitset::FixedBitSet;
use hashbrown::HashMap;

use super::lasso_next;
use super::safra::{Buchi, StateSet};
use crate::error::{ResourceError, Stage};
use crate::graph;
use crate::limits::Limits;
use crate::logic::{Ltl, LtlAtom};

/// A transition guarded by a cube: `pos` atoms must hold, `neg` atoms must not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub pos: u64,
    pub neg: u64,
    pub to: u32,
}

impl Edge {
    pub fn matches(&self, letter: u64) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }
}

/// Nondeterministic Büchi word automaton with cube-guarded edges.
#[derive(Debug, Clone)]
pub struct Nbw {
    atoms: Vec<LtlAtom>,
    initial: Vec<u32>,
    accepting: Vec<bool>,
    edges: Vec<Vec<Edge>>,
    live: Vec<bool>,
}

impl Nbw {
    /// Builds an automaton and adds a rejecting sink for letters on which a
    /// state has no move.
    pub fn new(atoms: Vec<LtlAtom>, initial: Vec<u32>, accepting: Vec<bool>, edges: Vec<Vec<Edge>>) -> Nbw {
        assert!(atoms.len() <= 64, "at most 64 atoms");
        assert_eq!(accepting.len(), edges.len());
        let mut nbw = Nbw {
            atoms,
            initial,
            accepting,
            edges,
            live: Vec::new(),
        };
        nbw.complete();
        nbw.live = nbw.compute_live();
        nbw
    }

    pub fn atoms(&self) -> &[LtlAtom] {
        &self.atoms
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial_states(&self) -> &[u32] {
        &self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn edges(&self, q: usize) -> &[Edge] {
        &self.edges[q]
    }

    /// States from which some accepting run exists.
    pub fn is_live(&self, q: usize) -> bool {
        self.live[q]
    }

    pub fn is_empty(&self) -> bool {
        !self.initial.iter().any(|&q| self.live[q as usize])
    }

    pub fn successors(&self, q: usize, letter: u64) -> impl Iterator<Item = u32> + '_ {
        self.edges[q].iter().filter(move |e| e.matches(letter)).map(|e| e.to)
    }

    /// True when there is one initial state and the guards leaving each
    /// state are pairwise disjoint.
    pub fn is_deterministic(&self) -> bool {
        self.initial.len() == 1
            && self.edges.iter().all(|es| {
                es.iter()
                    .enumerate()
                    .all(|(i, a)| es[i + 1..].iter().all(|b| a.pos & b.neg != 0 || b.pos & a.neg != 0))
            })
    }

    fn complete(&mut self) {
        let full = if self.atoms.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.atoms.len()) - 1
        };
        let mut sink: Option<u32> = None;
        for q in 0..self.edges.len() {
            let missing = uncovered(&self.edges[q], full);
            if missing.is_empty() {
                continue;
            }
            let s = *sink.get_or_insert(self.edges.len() as u32);
            self.edges[q].extend(missing.into_iter().map(|(pos, neg)| Edge { pos, neg, to: s }));
        }
        if let Some(s) = sink {
            self.accepting.push(false);
            self.edges.push(vec![Edge { pos: 0, neg: 0, to: s }]);
        }
    }

    fn compute_live(&self) -> Vec<bool> {
        let n = self.state_count();
        let (comp, cyclic) = graph::sccs(n, |q| self.edges[q].iter().map(|e| e.to as usize).collect());
        let good: Vec<bool> = (0..n).map(|q| self.accepting[q] && cyclic[comp[q]]).collect();
        let mut edges = Vec::new();
        for (q, es) in self.edges.iter().enumerate() {
            edges.extend(es.iter().map(|e| (q, e.to as usize)));
        }
        graph::backward_reach(n, &edges, &good)
    }

    /// Whether `stem · loop^ω` is accepted.
    pub fn lasso_accepts(&self, stem: &[u64], lp: &[u64]) -> bool {
        assert!(!lp.is_empty(), "lasso loop must be nonempty");
        let word: Vec<u64> = stem.iter().chain(lp).copied().collect();
        let len = word.len();
        let n = self.state_count();
        let node = |q: usize, i: usize| q * len + i;
        let succ = |v: usize| -> Vec<usize> {
            let (q, i) = (v / len, v % len);
            let j = lasso_next(i, stem.len(), len);
            self.successors(q, word[i]).map(|t| node(t as usize, j)).collect()
        };
        let mut reach = vec![false; n * len];
        let mut work: Vec<usize> = self.initial.iter().map(|&q| node(q as usize, 0)).collect();
        for &v in &work {
            reach[v] = true;
        }
        while let Some(v) = work.pop() {
            for w in succ(v) {
                if !reach[w] {
                    reach[w] = true;
                    work.push(w);
                }
            }
        }
        let (comp, cyclic) = graph::sccs(n * len, |v| if reach[v] { succ(v) } else { Vec::new() });
        (0..n * len).any(|v| reach[v] && self.accepting[v / len] && cyclic[comp[v]])
    }

    /// HOA-like text, naming atoms with `names`.
    pub fn to_hoa(&self, names: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "HOA: v1");
        let _ = writeln!(out, "States: {}", self.state_count());
        for q in &self.initial {
            let _ = writeln!(out, "Start: {q}");
        }
        write_aps(&mut out, &self.atoms, names);
        let _ = writeln!(out, "Acceptance: 1 Inf(0)");
        let _ = writeln!(out, "--BODY--");
        for q in 0..self.state_count() {
            let acc = if self.accepting[q] { " {0}" } else { "" };
            let _ = writeln!(out, "State: {q}{acc}");
            for e in &self.edges[q] {
                let _ = writeln!(out, "  [{}] {}", cube_text(e.pos, e.neg, self.atoms.len()), e.to);
            }
        }
        let _ = writeln!(out, "--END--");
        out
    }
}

impl fmt::Display for Nbw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hoa(&[]))
    }
}

pub(crate) fn atom_name(atom: LtlAtom, i: usize, names: &[String]) -> String {
    match names.get(i) {
        Some(n) => n.clone(),
        None => match atom {
            LtlAtom::Prop(p) => format!("p{}", p.0),
            LtlAtom::Basic(b) => format!("b{b}"),
        },
    }
}

pub(crate) fn write_aps(out: &mut String, atoms: &[LtlAtom], names: &[String]) {
    let _ = write!(out, "AP: {}", atoms.len());
    for (i, a) in atoms.iter().enumerate() {
        let _ = write!(out, " \"{}\"", atom_name(*a, i, names));
    }
    out.push('\n');
}

pub(crate) fn cube_text(pos: u64, neg: u64, n: usize) -> String {
    let mut parts = Vec::new();
    for i in 0..n {
        if pos >> i & 1 == 1 {
            parts.push(format!("{i}"));
        } else if neg >> i & 1 == 1 {
            parts.push(format!("!{i}"));
        }
    }
    if parts.is_empty() {
        "t".into()
    } else {
        parts.join("&")
    }
}

/// Cubes covering exactly the letters (within `full`) matched by no edge.
fn uncovered(edges: &[Edge], full: u64) -> Vec<(u64, u64)> {
    fn go(cubes: &[(u64, u64)], pos: u64, neg: u64, full: u64, out: &mut Vec<(u64, u64)>) {
        // Restrict to cubes compatible with the current one.
        let live: Vec<(u64, u64)> = cubes
            .iter()
            .filter(|(p, n)| p & neg == 0 && n & pos == 0)
            .map(|&(p, n)| (p & !pos, n & !neg))
            .collect();
        if live.is_empty() {
            out.push((pos, neg));
            return;
        }
        if live.iter().any(|&(p, n)| p == 0 && n == 0) {
            return;
        }
        let (p, n) = live[0];
        let bit = (p | n) & full;
        let bit = bit & bit.wrapping_neg();
        go(&live, pos | bit, neg, full, out);
        go(&live, pos, neg | bit, full, out);
    }
    let cubes: Vec<(u64, u64)> = edges.iter().map(|e| (e.pos, e.neg)).collect();
    let mut out = Vec::new();
    go(&cubes, 0, 0, full, &mut out);
    out
}

impl Buchi for Nbw {
    type Letter = u64;

    fn state_count(&self) -> usize {
        Nbw::state_count(self)
    }

    fn initial_set(&self) -> StateSet {
        let mut set = FixedBitSet::with_capacity(self.state_count());
        for &q in &self.initial {
            if self.live[q as usize] {
                set.insert(q as usize);
            }
        }
        set
    }

    fn accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    fn post(&self, set: &StateSet, letter: &u64) -> StateSet {
        let mut out = FixedBitSet::with_capacity(self.state_count());
        for q in set.ones() {
            for t in self.successors(q, *letter) {
                if self.live[t as usize] {
                    out.insert(t as usize);
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// LTL to Büchi: tableau over an interned NNF arena.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(u8, bool),
    And(u32, u32),
    Or(u32, u32),
    Next(u32),
    Until(u32, u32),
    Release(u32, u32),
}

const TRUE: u32 = 0;
const FALSE: u32 = 1;

struct Arena {
    nodes: Vec<Node>,
    ids: HashMap<Node, u32>,
    until_bit: BTreeMap<u32, u32>,
}

impl Arena {
    fn new() -> Arena {
        let mut a = Arena {
            nodes: Vec::new(),
            ids: HashMap::new(),
            until_bit: BTreeMap::new(),
        };
        a.intern(Node::True);
        a.intern(Node::False);
        a
    }

    fn intern(&mut self, n: Node) -> u32 {
        let n = match n {
            Node::And(a, b) if a == FALSE || b == FALSE => Node::False,
            Node::And(a, b) if a == TRUE => return b,
            Node::And(a, b) if b == TRUE || a == b => return a,
            Node::Or(a, b) if a == TRUE || b == TRUE => Node::True,
            Node::Or(a, b) if a == FALSE => return b,
            Node::Or(a, b) if b == FALSE || a == b => return a,
            Node::Until(_, b) if b == TRUE || b == FALSE => return b,
            Node::Release(_, b) if b == TRUE || b == FALSE => return b,
            Node::Next(a) if a == TRUE || a == FALSE => return a,
            n => n,
        };
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(n);
        self.ids.insert(n, id);
        if let Node::Until(..) = n {
            let bit = self.until_bit.len() as u32;
            self.until_bit.insert(id, bit);
        }
        id
    }

    fn build(&mut self, f: &Ltl, neg: bool, atoms: &[LtlAtom]) -> u32 {
        let n = match f {
            Ltl::True => return if neg { FALSE } else { TRUE },
            Ltl::False => return if neg { TRUE } else { FALSE },
            Ltl::Atom(a) => {
                let i = atoms.iter().position(|x| x == a).expect("atom list is complete");
                Node::Lit(i as u8, !neg)
            }
            Ltl::Not(g) => return self.build(g, !neg, atoms),
            Ltl::And(a, b) | Ltl::Or(a, b) => {
                let x = self.build(a, neg, atoms);
                let y = self.build(b, neg, atoms);
                if matches!(f, Ltl::And(..)) != neg {
                    Node::And(x, y)
                } else {
                    Node::Or(x, y)
                }
            }
            Ltl::Next(g) => Node::Next(self.build(g, neg, atoms)),
            Ltl::Until(a, b) | Ltl::Release(a, b) => {
                let x = self.build(a, neg, atoms);
                let y = self.build(b, neg, atoms);
                if matches!(f, Ltl::Until(..)) != neg {
                    Node::Until(x, y)
                } else {
                    Node::Release(x, y)
                }
            }
        };
        self.intern(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Cover {
    pos: u64,
    neg: u64,
    next: Vec<u32>,
    pending: u64,
}

impl Cover {
    fn subsumes(&self, other: &Cover) -> bool {
        self.pos & !other.pos == 0
            && self.neg & !other.neg == 0
            && self.pending & !other.pending == 0
            && self.next.iter().all(|x| other.next.binary_search(x).is_ok())
    }
}

fn expand(arena: &Arena, mut todo: Vec<u32>, mut done: Vec<u32>, mut cover: Cover, out: &mut Vec<Cover>) {
    while let Some(f) = todo.pop() {
        if done.contains(&f) {
            continue;
        }
        done.push(f);
        match arena.nodes[f as usize] {
            Node::True => {}
            Node::False => return,
            Node::Lit(i, pol) => {
                let bit = 1u64 << i;
                if pol {
                    if cover.neg & bit != 0 {
                        return;
                    }
                    cover.pos |= bit;
                } else {
                    if cover.pos & bit != 0 {
                        return;
                    }
                    cover.neg |= bit;
                }
            }
            Node::And(a, b) => {
                todo.push(a);
                todo.push(b);
            }
            Node::Or(a, b) => {
                let mut alt = todo.clone();
                alt.push(b);
                expand(arena, alt, done.clone(), cover.clone(), out);
                todo.push(a);
            }
            Node::Next(a) => cover.next.push(a),
            Node::Until(a, b) => {
                let mut alt = todo.clone();
                alt.push(a);
                let mut postponed = cover.clone();
                postponed.next.push(f);
                postponed.pending |= 1 << arena.until_bit[&f];
                expand(arena, alt, done.clone(), postponed, out);
                todo.push(b);
            }
            Node::Release(a, b) => {
                let mut alt = todo.clone();
                alt.push(b);
                let mut postponed = cover.clone();
                postponed.next.push(f);
                expand(arena, alt, done.clone(), postponed, out);
                todo.push(a);
                todo.push(b);
            }
        }
    }
    cover.next.sort_unstable();
    cover.next.dedup();
    cover.next.retain(|&x| x != TRUE);
    out.push(cover);
}

fn covers(arena: &Arena, obligations: &[u32]) -> Vec<Cover> {
    let mut raw = Vec::new();
    let start = Cover {
        pos: 0,
        neg: 0,
        next: Vec::new(),
        pending: 0,
    };
    expand(arena, obligations.to_vec(), Vec::new(), start, &mut raw);
    let mut kept: Vec<Cover> = Vec::new();
    for (i, c) in raw.iter().enumerate() {
        let dominated = raw
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && d.subsumes(c) && (!c.subsumes(d) || j < i));
        if !dominated {
            kept.push(c.clone());
        }
    }
    kept
}

/// Translates an LTL formula into a Büchi automaton over the letters of
/// `f.atoms()`.
pub fn ltl_to_nbw(f: &Ltl, limits: &Limits) -> Result<Nbw, ResourceError> {
    let atoms = f.atoms();
    if atoms.len() > 64 {
        return Err(ResourceError {
            stage: Stage::Nbw,
            limit: 64,
        });
    }
    let mut arena = Arena::new();
    let root = arena.build(f, false, &atoms);
    let k = arena.until_bit.len() as u32;
    let all_untils = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };

    let mut ids: HashMap<(Vec<u32>, u32), u32> = HashMap::new();
    let mut keys: Vec<(Vec<u32>, u32)> = Vec::new();
    let mut edges: Vec<Vec<Edge>> = Vec::new();
    let start: Vec<u32> = if root == TRUE { Vec::new() } else { vec![root] };
    ids.insert((start.clone(), 0), 0);
    keys.push((start, 0));
    let mut i = 0;
    while i < keys.len() {
        let (obligations, j) = keys[i].clone();
        let mut out = Vec::new();
        for c in covers(&arena, &obligations) {
            let acc = !c.pending & all_untils;
            let mut nj = if j == k { 0 } else { j };
            while nj < k && acc >> nj & 1 == 1 {
                nj += 1;
            }
            let key = (c.next, nj);
            let to = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    let id = keys.len() as u32;
                    Limits::check(limits.max_nbw_states, Stage::Nbw, keys.len() + 1)?;
                    ids.insert(key.clone(), id);
                    keys.push(key);
                    id
                }
            };
            let e = Edge {
                pos: c.pos,
                neg: c.neg,
                to,
            };
            if !out.contains(&e) {
                out.push(e);
            }
        }
        edges.push(out);
        i += 1;
    }
    let accepting = keys.iter().map(|(_, j)| *j == k).collect();
    Ok(Nbw::new(atoms, vec![0], accepting, edges))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::oracle::ltl_lasso_holds;

    fn p() -> Ltl {
        Ltl::prop(0)
    }

    fn nbw(f: &Ltl) -> Nbw {
        ltl_to_nbw(f, &Limits::default()).unwrap()
    }

    #[test]
    fn true_is_one_accepting_state() {
        let a = nbw(&Ltl::True);
        assert_eq!(a.state_count(), 1);
        assert!(a.is_accepting(0));
        assert!(a.lasso_accepts(&[], &[0]));
    }

    #[test]
    fn eventually_p() {
        let a = nbw(&Ltl::eventually(p()));
        assert!(a.lasso_accepts(&[0], &[1]));
        assert!(!a.lasso_accepts(&[0, 0], &[0]));
        assert!(a.lasso_accepts(&[1], &[0]));
    }

    #[test]
    fn contradiction_is_empty() {
        let f = Ltl::and(Ltl::always(p()), Ltl::eventually(Ltl::not(p())));
        assert!(nbw(&f).is_empty());
        assert!(!nbw(&Ltl::eventually(p())).is_empty());
    }

    #[test]
    fn sink_completion() {
        let a = nbw(&Ltl::always(p()));
        assert!(a.state_count() >= 2);
        for q in 0..a.state_count() {
            for letter in 0..2 {
                assert!(a.successors(q, letter).next().is_some());
            }
        }
        assert!(!a.lasso_accepts(&[], &[0]));
        assert!(!a.lasso_accepts(&[0], &[1]));
        assert!(a.lasso_accepts(&[], &[1]));
    }

    #[test]
    fn uncovered_cubes() {
        let e = |pos, neg| Edge { pos, neg, to: 0 };
        assert!(uncovered(&[e(0, 0)], 0b11).is_empty());
        let miss = uncovered(&[e(0b01, 0)], 0b11);
        assert_eq!(miss, vec![(0, 0b01)]);
        let miss = uncovered(&[e(0b01, 0b10)], 0b11);
        assert_eq!(miss.len(), 2);
    }

    #[test]
    fn agrees_with_lasso_semantics() {
        let q = Ltl::prop(1);
        let suite = [
            Ltl::until(p(), q.clone()),
            Ltl::release(p(), q.clone()),
            Ltl::always(Ltl::eventually(p())),
            Ltl::eventually(Ltl::always(p())),
            Ltl::next(Ltl::and(p(), Ltl::next(Ltl::not(q.clone())))),
            Ltl::and(
                Ltl::always(Ltl::eventually(p())),
                Ltl::always(Ltl::eventually(q.clone())),
            ),
            Ltl::or(Ltl::always(p()), Ltl::eventually(Ltl::always(q.clone()))),
        ];
        for f in &suite {
            let a = nbw(f);
            let atoms = f.atoms();
            for_each_lasso(atoms.len(), 5, |stem, lp| {
                assert_eq!(
                    a.lasso_accepts(stem, lp),
                    ltl_lasso_holds(f, &atoms, stem, lp),
                    "{f:?} on {stem:?} {lp:?}"
                );
            });
        }
    }

    pub(crate) fn for_each_lasso(atoms: usize, max_len: usize, mut visit: impl FnMut(&[u64], &[u64])) {
        let letters = 1u64 << atoms;
        for total in 1..=max_len {
            let count = letters.pow(total as u32);
            for code in 0..count {
                let mut c = code;
                let word: Vec<u64> = (0..total)
                    .map(|_| {
                        let l = c % letters;
                        c /= letters;
                        l
                    })
                    .collect();
                for stem in 0..total {
                    visit(&word[..stem], &word[stem..]);
                }
            }
        }
    }
}
