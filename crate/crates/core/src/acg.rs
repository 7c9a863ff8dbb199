//! Parity alternating automata over concurrent game structures.
//!
//! Transitions map a state and a letter to a positive boolean formula over
//! atoms `(q, □, A)` ("for some available A-decision, every consistent
//! successor continues in q") and `(q, ◇, A)` ("for every available
//! A-decision, some consistent successor continues in q").

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::cgs::{AgentSet, Letter, OpenCgs, StateId};
use crate::error::{CheckError, FormulaError, ResourceError, Stage};
use crate::game::{ParityGame, Player};
use crate::limits::Limits;
use crate::logic::{basic_subformulas, ltl_projection, to_existential, BasicSubformulaTable, Formula, Ltl, LtlAtom};
use crate::word::{ltl_to_nbw, nbw_to_dpw, Dpw};

/// Largest number of letter bits a single transition may depend on.
const MAX_SUPPORT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// `□`: the automaton picks the decision, all consistent successors follow.
    Box,
    /// `◇`: every decision must have some consistent successor that follows.
    Diamond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AcgAtom {
    pub state: u32,
    pub direction: Direction,
    pub agents: AgentSet,
}

/// Positive boolean formula over atom indices, kept flat and constant-folded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosBool {
    True,
    False,
    Atom(u32),
    And(Vec<PosBool>),
    Or(Vec<PosBool>),
}

impl PosBool {
    pub fn and(a: PosBool, b: PosBool) -> PosBool {
        match (a, b) {
            (PosBool::False, _) | (_, PosBool::False) => PosBool::False,
            (PosBool::True, x) | (x, PosBool::True) => x,
            (PosBool::And(mut xs), PosBool::And(ys)) => {
                xs.extend(ys);
                PosBool::And(xs)
            }
            (PosBool::And(mut xs), y) | (y, PosBool::And(mut xs)) => {
                xs.push(y);
                PosBool::And(xs)
            }
            (x, y) if x == y => x,
            (x, y) => PosBool::And(vec![x, y]),
        }
    }

    pub fn or(a: PosBool, b: PosBool) -> PosBool {
        match (a, b) {
            (PosBool::True, _) | (_, PosBool::True) => PosBool::True,
            (PosBool::False, x) | (x, PosBool::False) => x,
            (PosBool::Or(mut xs), PosBool::Or(ys)) => {
                xs.extend(ys);
                PosBool::Or(xs)
            }
            (PosBool::Or(mut xs), y) | (y, PosBool::Or(mut xs)) => {
                xs.push(y);
                PosBool::Or(xs)
            }
            (x, y) if x == y => x,
            (x, y) => PosBool::Or(vec![x, y]),
        }
    }

    pub fn eval(&self, holds: &impl Fn(u32) -> bool) -> bool {
        match self {
            PosBool::True => true,
            PosBool::False => false,
            PosBool::Atom(a) => holds(*a),
            PosBool::And(xs) => xs.iter().all(|x| x.eval(holds)),
            PosBool::Or(xs) => xs.iter().any(|x| x.eval(holds)),
        }
    }

    /// The ⊆-minimal sets of atoms satisfying the formula, each sorted.
    pub fn minimal_models(&self) -> Vec<Vec<u32>> {
        let raw: Vec<Vec<u32>> = match self {
            PosBool::True => vec![Vec::new()],
            PosBool::False => Vec::new(),
            PosBool::Atom(a) => vec![vec![*a]],
            PosBool::Or(xs) => xs.iter().flat_map(|x| x.minimal_models()).collect(),
            PosBool::And(xs) => {
                let mut acc = vec![Vec::new()];
                for x in xs {
                    let models = x.minimal_models();
                    let mut next = Vec::new();
                    for a in &acc {
                        for m in &models {
                            let mut u: Vec<u32> = a.iter().chain(m).copied().collect();
                            u.sort_unstable();
                            u.dedup();
                            next.push(u);
                        }
                    }
                    acc = minimize(next);
                }
                acc
            }
        };
        minimize(raw)
    }

    pub fn atoms(&self, out: &mut Vec<u32>) {
        match self {
            PosBool::True | PosBool::False => {}
            PosBool::Atom(a) => out.push(*a),
            PosBool::And(xs) | PosBool::Or(xs) => xs.iter().for_each(|x| x.atoms(out)),
        }
    }
}

fn minimize(mut sets: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<Vec<u32>> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| m.iter().all(|x| s.binary_search(x).is_ok())) {
            out.push(s);
        }
    }
    out
}

/// What an automaton state stands for, for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateOrigin {
    Formula(Formula),
    /// Entry state of the well-formedness checker.
    Root,
    /// Visits every node and starts the per-basic checks.
    Broadcast,
    /// State of the word automaton for basic `basic` (positive or negated).
    Word {
        basic: usize,
        positive: bool,
        state: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcgState {
    pub origin: StateOrigin,
    pub color: u32,
    /// Letter bits the transition depends on, ascending.
    pub support: Vec<usize>,
    /// Transition per assignment of the support bits (bit `i` of the index is
    /// `support[i]`).
    pub table: Vec<PosBool>,
}

/// Parity ACG. Letters carry the propositions in bits `0..prop_bits` and
/// basic subformula `i` in bit `prop_bits + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acg {
    states: Vec<AcgState>,
    atoms: Vec<AcgAtom>,
    atom_ids: BTreeMap<AcgAtom, u32>,
    initial: u32,
    prop_bits: usize,
    basics: BasicSubformulaTable,
    dpw_sizes: Vec<(usize, usize)>,
    limit: usize,
}

impl Acg {
    fn empty(prop_bits: usize, basics: BasicSubformulaTable, limits: &Limits) -> Acg {
        Acg {
            states: Vec::new(),
            atoms: Vec::new(),
            atom_ids: BTreeMap::new(),
            initial: 0,
            prop_bits,
            basics,
            dpw_sizes: Vec::new(),
            limit: limits.max_acg_states,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// `|Q| + |Atoms|`.
    pub fn size(&self) -> usize {
        self.states.len() + self.atoms.len()
    }

    /// Number of distinct colors.
    pub fn index(&self) -> usize {
        let mut c: Vec<u32> = self.states.iter().map(|s| s.color).collect();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn state(&self, q: u32) -> &AcgState {
        &self.states[q as usize]
    }

    pub fn color(&self, q: u32) -> u32 {
        self.states[q as usize].color
    }

    pub fn atom(&self, a: u32) -> AcgAtom {
        self.atoms[a as usize]
    }

    pub fn atoms(&self) -> &[AcgAtom] {
        &self.atoms
    }

    pub fn basics(&self) -> &BasicSubformulaTable {
        &self.basics
    }

    pub fn prop_bits(&self) -> usize {
        self.prop_bits
    }

    /// `(|D⁺|, |D⁻|)` state counts per basic subformula.
    pub fn dpw_sizes(&self) -> &[(usize, usize)] {
        &self.dpw_sizes
    }

    /// Combines a model label with a valuation of the basic subformulas.
    pub fn letter(&self, props: Letter, basics: u64) -> Letter {
        let mask = if self.prop_bits >= 64 {
            u64::MAX
        } else {
            (1u64 << self.prop_bits) - 1
        };
        Letter(props.0 & mask | basics << self.prop_bits)
    }

    /// States occurring in some transition of `q`, sorted.
    pub fn successors(&self, q: u32) -> Vec<u32> {
        let mut atoms = Vec::new();
        for f in &self.states[q as usize].table {
            f.atoms(&mut atoms);
        }
        let mut out: Vec<u32> = atoms.into_iter().map(|a| self.atoms[a as usize].state).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn delta(&self, q: u32, letter: Letter) -> &PosBool {
        let st = &self.states[q as usize];
        let mut idx = 0usize;
        for (i, &bit) in st.support.iter().enumerate() {
            if letter.contains(bit) {
                idx |= 1 << i;
            }
        }
        &st.table[idx]
    }

    fn add_state(&mut self, origin: StateOrigin, color: u32) -> Result<u32, ResourceError> {
        Limits::check(self.limit, Stage::Acg, self.states.len() + 1)?;
        self.states.push(AcgState {
            origin,
            color,
            support: Vec::new(),
            table: vec![PosBool::False],
        });
        Ok((self.states.len() - 1) as u32)
    }

    fn intern_atom(&mut self, atom: AcgAtom) -> u32 {
        if let Some(&id) = self.atom_ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.atoms.push(atom);
        self.atom_ids.insert(atom, id);
        id
    }

    fn set_delta(
        &mut self,
        q: u32,
        mut support: Vec<usize>,
        f: impl Fn(Letter) -> PosBool,
    ) -> Result<(), ResourceError> {
        support.sort_unstable();
        support.dedup();
        if support.len() > MAX_SUPPORT {
            return Err(ResourceError {
                stage: Stage::Acg,
                limit: MAX_SUPPORT,
            });
        }
        let table = (0..1usize << support.len())
            .map(|idx| {
                let mut l = Letter(0);
                for (i, &bit) in support.iter().enumerate() {
                    if idx >> i & 1 == 1 {
                        l = l.with(bit);
                    }
                }
                f(l)
            })
            .collect();
        let st = &mut self.states[q as usize];
        st.support = support;
        st.table = table;
        Ok(())
    }

    /// Text listing of states, colors and transitions.
    pub fn display_with<'a>(&'a self, agents: &'a [String], props: &'a [String]) -> AcgDisplay<'a> {
        AcgDisplay {
            acg: self,
            agents,
            props,
        }
    }

    fn bit_name(&self, bit: usize, props: &[String]) -> String {
        if bit < self.prop_bits {
            props.get(bit).cloned().unwrap_or_else(|| alloc::format!("p{bit}"))
        } else {
            alloc::format!("b{}", bit - self.prop_bits)
        }
    }
}

pub struct AcgDisplay<'a> {
    acg: &'a Acg,
    agents: &'a [String],
    props: &'a [String],
}

impl AcgDisplay<'_> {
    fn agents_text(&self, set: AgentSet) -> String {
        let names: Vec<String> = set
            .iter()
            .map(|a| {
                self.agents
                    .get(a.0 as usize)
                    .cloned()
                    .unwrap_or_else(|| alloc::format!("a{}", a.0))
            })
            .collect();
        alloc::format!("{{{}}}", names.join(","))
    }

    fn write_posbool(&self, out: &mut String, f: &PosBool, top: bool) {
        match f {
            PosBool::True => out.push_str("true"),
            PosBool::False => out.push_str("false"),
            PosBool::Atom(a) => {
                let atom = self.acg.atom(*a);
                let dir = match atom.direction {
                    Direction::Box => "box",
                    Direction::Diamond => "dia",
                };
                let _ = write!(out, "(q{},{},{})", atom.state, dir, self.agents_text(atom.agents));
            }
            PosBool::And(xs) | PosBool::Or(xs) => {
                let sep = if matches!(f, PosBool::And(_)) { " & " } else { " | " };
                if !top {
                    out.push('(');
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    self.write_posbool(out, x, false);
                }
                if !top {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for AcgDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.acg;
        writeln!(
            f,
            "acg states={} atoms={} size={} index={} initial=q{}",
            a.state_count(),
            a.atom_count(),
            a.size(),
            a.index(),
            a.initial
        )?;
        for (i, b) in a.basics.entries().iter().enumerate() {
            writeln!(f, "basic b{i} = {}", b.display_with(self.agents, self.props))?;
        }
        for (q, st) in a.states.iter().enumerate() {
            let origin = match &st.origin {
                StateOrigin::Formula(phi) => alloc::format!("{}", phi.display_with(self.agents, self.props)),
                StateOrigin::Root => "root".into(),
                StateOrigin::Broadcast => "broadcast".into(),
                StateOrigin::Word { basic, positive, state } => {
                    alloc::format!("b{basic}{} d{state}", if *positive { "+" } else { "-" })
                }
            };
            writeln!(f, "state q{q} color={} : {origin}", st.color)?;
            for (idx, t) in st.table.iter().enumerate() {
                let mut line = String::new();
                if st.support.is_empty() {
                    line.push_str("[t]");
                } else {
                    let lits: Vec<String> = st
                        .support
                        .iter()
                        .enumerate()
                        .map(|(i, &bit)| {
                            let name = a.bit_name(bit, self.props);
                            if idx >> i & 1 == 1 {
                                name
                            } else {
                                alloc::format!("!{name}")
                            }
                        })
                        .collect();
                    let _ = write!(line, "[{}]", lits.join("&"));
                }
                line.push(' ');
                self.write_posbool(&mut line, t, true);
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// ATL: one state per quantified subformula.

/// Symbolic transition: a positive formula over atoms and letter literals.
#[derive(Debug, Clone)]
enum Guarded {
    Const(bool),
    Lit(usize, bool),
    Atom(u32),
    And(alloc::boxed::Box<Guarded>, alloc::boxed::Box<Guarded>),
    Or(alloc::boxed::Box<Guarded>, alloc::boxed::Box<Guarded>),
}

impl Guarded {
    fn and(a: Guarded, b: Guarded) -> Guarded {
        Guarded::And(a.into(), b.into())
    }

    fn or(a: Guarded, b: Guarded) -> Guarded {
        Guarded::Or(a.into(), b.into())
    }

    fn support(&self, out: &mut Vec<usize>) {
        match self {
            Guarded::Lit(b, _) => out.push(*b),
            Guarded::And(x, y) | Guarded::Or(x, y) => {
                x.support(out);
                y.support(out);
            }
            Guarded::Const(_) | Guarded::Atom(_) => {}
        }
    }

    fn at(&self, l: Letter) -> PosBool {
        match self {
            Guarded::Const(true) => PosBool::True,
            Guarded::Const(false) => PosBool::False,
            Guarded::Lit(b, pol) => {
                if l.contains(*b) == *pol {
                    PosBool::True
                } else {
                    PosBool::False
                }
            }
            Guarded::Atom(a) => PosBool::Atom(*a),
            Guarded::And(x, y) => PosBool::and(x.at(l), y.at(l)),
            Guarded::Or(x, y) => PosBool::or(x.at(l), y.at(l)),
        }
    }
}

struct AtlBuilder {
    acg: Acg,
    states: BTreeMap<Formula, u32>,
}

impl AtlBuilder {
    /// The state for `f`, created (with its transition) on first use.
    fn state(&mut self, f: &Formula) -> Result<u32, CheckError> {
        if let Some(&q) = self.states.get(f) {
            return Ok(q);
        }
        let color = match f {
            Formula::Exists(_, body) | Formula::Forall(_, body) if matches!(**body, Formula::Until(..)) => 1,
            _ => 0,
        };
        let q = self.acg.add_state(StateOrigin::Formula(f.clone()), color)?;
        self.states.insert(f.clone(), q);
        let g = self.expr(f, Some(q))?;
        let mut support = Vec::new();
        g.support(&mut support);
        self.acg.set_delta(q, support, |l| g.at(l))?;
        Ok(q)
    }

    /// The transition formula of `f`; `own` is the state of `f` itself when
    /// it is being defined, used for the fixpoint self-reference.
    fn expr(&mut self, f: &Formula, own: Option<u32>) -> Result<Guarded, CheckError> {
        Ok(match f {
            Formula::True => Guarded::Const(true),
            Formula::False => Guarded::Const(false),
            Formula::Prop(p) => Guarded::Lit(p.0 as usize, true),
            Formula::Not(g) => match **g {
                Formula::Prop(p) => Guarded::Lit(p.0 as usize, false),
                _ => return Err(FormulaError::NotAtl.into()),
            },
            Formula::And(a, b) => Guarded::and(self.expr(a, None)?, self.expr(b, None)?),
            Formula::Or(a, b) => Guarded::or(self.expr(a, None)?, self.expr(b, None)?),
            Formula::Exists(ag, body) | Formula::Forall(ag, body) => {
                let direction = if matches!(f, Formula::Exists(..)) {
                    Direction::Box
                } else {
                    Direction::Diamond
                };
                let atom = |this: &mut AtlBuilder, target: u32| {
                    Guarded::Atom(this.acg.intern_atom(AcgAtom {
                        state: target,
                        direction,
                        agents: *ag,
                    }))
                };
                match &**body {
                    Formula::Next(a) => {
                        let t = self.state(a)?;
                        atom(self, t)
                    }
                    Formula::Until(a, b) | Formula::Release(a, b) => {
                        let me = match own {
                            Some(q) => q,
                            None => self.state(f)?,
                        };
                        let loop_atom = atom(self, me);
                        let ea = self.expr(a, None)?;
                        let eb = self.expr(b, None)?;
                        if matches!(**body, Formula::Until(..)) {
                            Guarded::or(eb, Guarded::and(ea, loop_atom))
                        } else {
                            Guarded::and(eb, Guarded::or(ea, loop_atom))
                        }
                    }
                    _ => return Err(FormulaError::NotAtl.into()),
                }
            }
            Formula::Next(_) | Formula::Until(..) | Formula::Release(..) => {
                return Err(FormulaError::NotStateFormula.into())
            }
        })
    }
}

fn prop_bits(f: &Formula) -> usize {
    match f {
        Formula::Prop(p) => p.0 as usize + 1,
        _ => f.children().map(prop_bits).max().unwrap_or(0),
    }
}

/// Linear translation of an ATL formula in negation normal form into an ACG
/// of index at most 2.
pub fn atl_to_acg(f: &Formula, limits: &Limits) -> Result<Acg, CheckError> {
    let mut b = AtlBuilder {
        acg: Acg::empty(prop_bits(f), BasicSubformulaTable::default(), limits),
        states: BTreeMap::new(),
    };
    b.acg.initial = b.state(f)?;
    Ok(b.acg)
}

// ---------------------------------------------------------------------------
// ATL*: well-formedness checking with word automata per basic subformula.

struct WordPart {
    dpw: Dpw,
    /// Letter bit of each DPW atom.
    bits: Vec<usize>,
    base: u32,
    /// `Some(accepting)` for states that loop on every letter. Such a state
    /// is equivalent to `true` or `false` whatever the direction of the atom
    /// sending a copy there, since every node has an available decision.
    sink: Vec<Option<bool>>,
}

impl WordPart {
    fn new(dpw: Dpw, bits: Vec<usize>, base: u32) -> WordPart {
        let sink = (0..dpw.state_count() as u32)
            .map(|d| {
                (0..dpw.letter_count() as u64)
                    .all(|l| dpw.step(d, l) == d)
                    .then_some(dpw.color(d).is_multiple_of(2))
            })
            .collect();
        WordPart { dpw, bits, base, sink }
    }

    /// Obligation for the copy moving to state `d`.
    fn target(&self, atoms: &[u32], d: u32) -> PosBool {
        match self.sink[d as usize] {
            Some(true) => PosBool::True,
            Some(false) => PosBool::False,
            None => PosBool::Atom(atoms[d as usize]),
        }
    }

    fn local(&self, l: Letter) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| if l.contains(b) { acc | 1 << i } else { acc })
    }
}

fn atom_bit(a: LtlAtom, prop_bits: usize) -> usize {
    match a {
        LtlAtom::Prop(p) => p.0 as usize,
        LtlAtom::Basic(i) => prop_bits + i,
    }
}

/// Translates an ATL* state formula into an ACG accepting the trees over
/// propositions and basic-subformula labels that are well-formed for it.
pub fn atlstar_to_acg(f: &Formula, limits: &Limits) -> Result<Acg, CheckError> {
    let existential = to_existential(f);
    let basics = basic_subformulas(&existential);
    let pbits = prop_bits(f);
    if pbits + basics.len() > 64 {
        return Err(FormulaError::TooManyAtoms(pbits + basics.len()).into());
    }
    let mut acg = Acg::empty(pbits, basics.clone(), limits);
    let root = acg.add_state(StateOrigin::Root, 0)?;
    let broadcast = acg.add_state(StateOrigin::Broadcast, 0)?;
    acg.initial = root;

    // Word automata for every basic, with one ACG state per automaton state.
    let mut parts: Vec<[WordPart; 2]> = Vec::new();
    let mut coalitions = Vec::new();
    for (i, b) in basics.entries().iter().enumerate() {
        let Formula::Exists(ag, body) = b else {
            unreachable!("basic subformulas are existential")
        };
        coalitions.push(*ag);
        let psi = ltl_projection(body, &basics);
        let mut pair = Vec::new();
        for positive in [true, false] {
            let ltl = if positive { psi.clone() } else { Ltl::not(psi.clone()) };
            let dpw = nbw_to_dpw(&ltl_to_nbw(&ltl, limits)?, limits)?;
            let bits = dpw.atoms().iter().map(|&a| atom_bit(a, pbits)).collect();
            let base = acg.states.len() as u32;
            for d in 0..dpw.state_count() as u32 {
                acg.add_state(
                    StateOrigin::Word {
                        basic: i,
                        positive,
                        state: d,
                    },
                    dpw.color(d),
                )?;
            }
            pair.push(WordPart::new(dpw, bits, base));
        }
        let neg = pair.pop().expect("two parts");
        let pos = pair.pop().expect("two parts");
        acg.dpw_sizes.push((pos.dpw.state_count(), neg.dpw.state_count()));
        parts.push([pos, neg]);
    }

    // Atoms: every word state under its coalition, plus the broadcast atom.
    let mut word_atoms: Vec<[Vec<u32>; 2]> = Vec::new();
    for (i, pair) in parts.iter().enumerate() {
        let mut both: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for (k, part) in pair.iter().enumerate() {
            let direction = if k == 0 { Direction::Box } else { Direction::Diamond };
            both[k] = (0..part.dpw.state_count() as u32)
                .map(|d| {
                    acg.intern_atom(AcgAtom {
                        state: part.base + d,
                        direction,
                        agents: coalitions[i],
                    })
                })
                .collect();
        }
        word_atoms.push(both);
    }
    let everywhere = acg.intern_atom(AcgAtom {
        state: broadcast,
        direction: Direction::Box,
        agents: AgentSet::EMPTY,
    });

    for (i, pair) in parts.iter().enumerate() {
        for (k, part) in pair.iter().enumerate() {
            for d in 0..part.dpw.state_count() as u32 {
                let atoms = &word_atoms[i][k];
                acg.set_delta(part.base + d, part.bits.clone(), |l| {
                    part.target(atoms, part.dpw.step(d, part.local(l)))
                })?;
            }
        }
    }

    // Starting a check at a node: the first step of D⁺ or D⁻ by the b-label.
    let start = |l: Letter| -> PosBool {
        let mut acc = PosBool::Atom(everywhere);
        for (i, pair) in parts.iter().enumerate() {
            let k = if l.contains(pbits + i) { 0 } else { 1 };
            let part = &pair[k];
            let next = part.dpw.step(part.dpw.initial(), part.local(l));
            acc = PosBool::and(acc, part.target(&word_atoms[i][k], next));
        }
        acc
    };
    let mut support: Vec<usize> = (0..basics.len()).map(|i| pbits + i).collect();
    for pair in &parts {
        for part in pair {
            support.extend(part.bits.iter().copied());
        }
    }
    acg.set_delta(broadcast, support.clone(), start)?;

    let top = ltl_projection(&existential, &basics);
    let mut root_support = support;
    for a in top.atoms() {
        root_support.push(atom_bit(a, pbits));
    }
    acg.set_delta(root, root_support, |l| {
        if top.eval_propositional(&|a| l.contains(atom_bit(a, pbits))) {
            start(l)
        } else {
            PosBool::False
        }
    })?;
    Ok(acg)
}

// ---------------------------------------------------------------------------
// Membership of the unwinding of a finite structure.

/// The acceptance game of an ACG on the unwinding of a finite structure
/// whose states carry the given letters.
pub struct MembershipGame {
    pub game: ParityGame,
    positions: BTreeMap<(StateId, u32), u32>,
}

impl MembershipGame {
    /// Position of the pair (structure state, automaton state).
    pub fn position(&self, s: StateId, q: u32) -> Option<u32> {
        self.positions.get(&(s, q)).copied()
    }
}

struct MembershipBuilder<'a> {
    acg: &'a Acg,
    g: &'a OpenCgs,
    letters: &'a [Letter],
    game: ParityGame,
    pairs: BTreeMap<(StateId, u32), u32>,
    atoms: BTreeMap<(StateId, u32), u32>,
    pending: Vec<(StateId, u32)>,
    sinks: [Option<u32>; 2],
    limit: usize,
}

impl MembershipBuilder<'_> {
    fn check(&self) -> Result<(), ResourceError> {
        Limits::check(self.limit, Stage::Game, self.game.position_count())
    }

    fn pair(&mut self, s: StateId, q: u32) -> u32 {
        if let Some(&v) = self.pairs.get(&(s, q)) {
            return v;
        }
        let v = self.game.add_position(Player::Automaton, self.acg.color(q));
        self.pairs.insert((s, q), v);
        self.pending.push((s, q));
        v
    }

    fn sink(&mut self, winner: Player) -> u32 {
        let idx = winner as usize;
        if let Some(v) = self.sinks[idx] {
            return v;
        }
        let color = if winner == Player::Automaton { 0 } else { 1 };
        let v = self.game.add_position(winner, color);
        self.game.add_edge(v, v);
        self.sinks[idx] = Some(v);
        v
    }

    fn formula(&mut self, s: StateId, f: &PosBool) -> u32 {
        match f {
            PosBool::True => self.sink(Player::Automaton),
            PosBool::False => self.sink(Player::Pathfinder),
            PosBool::Atom(a) => self.atom(s, *a),
            PosBool::And(xs) | PosBool::Or(xs) => {
                let owner = if matches!(f, PosBool::Or(_)) {
                    Player::Automaton
                } else {
                    Player::Pathfinder
                };
                let v = self.game.add_position(owner, 0);
                for x in xs {
                    let w = self.formula(s, x);
                    self.game.add_edge(v, w);
                }
                v
            }
        }
    }

    fn atom(&mut self, s: StateId, a: u32) -> u32 {
        if let Some(&v) = self.atoms.get(&(s, a)) {
            return v;
        }
        let atom = self.acg.atom(a);
        let (chooser, responder) = match atom.direction {
            Direction::Box => (Player::Automaton, Player::Pathfinder),
            Direction::Diamond => (Player::Pathfinder, Player::Automaton),
        };
        let v = self.game.add_position(chooser, 0);
        self.atoms.insert((s, a), v);
        for m in self.g.moves(s, atom.agents, None) {
            let w = self.game.add_position(responder, 0);
            self.game.add_edge(v, w);
            for t in m.targets {
                let target = self.pair(t, atom.state);
                self.game.add_edge(w, target);
            }
        }
        v
    }
}

/// Builds the membership game; the Automaton player wins from the position
/// of `(s, q)` iff the unwinding from `s` is accepted from `q`.
pub fn membership_game(
    acg: &Acg,
    g: &OpenCgs,
    letters: &[Letter],
    limits: &Limits,
) -> Result<MembershipGame, ResourceError> {
    assert_eq!(letters.len(), g.state_count(), "one letter per state");
    let mut b = MembershipBuilder {
        acg,
        g,
        letters,
        game: ParityGame::new(),
        pairs: BTreeMap::new(),
        atoms: BTreeMap::new(),
        pending: Vec::new(),
        sinks: [None, None],
        limit: limits.max_game_positions,
    };
    let init = b.pair(g.init(), acg.initial());
    b.game.set_initial(init);
    while let Some((s, q)) = b.pending.pop() {
        let v = b.pairs[&(s, q)];
        let f = acg.delta(q, b.letters[s.index()]).clone();
        let w = b.formula(s, &f);
        b.game.add_edge(v, w);
        b.check()?;
    }
    Ok(MembershipGame {
        game: b.game,
        positions: b.pairs,
    })
}

/// Whether the unwinding of `g` (with the given letters) from its initial
/// state is accepted.
pub fn acg_accepts(acg: &Acg, g: &OpenCgs, letters: &[Letter], limits: &Limits) -> Result<bool, ResourceError> {
    let m = membership_game(acg, g, letters, limits)?;
    let sol = crate::game::solve(&m.game);
    Ok(sol.winner(m.game.initial()) == Player::Automaton)
}

/// Per-state letters of `g` using only its propositions.
pub fn plain_letters(g: &OpenCgs) -> Vec<Letter> {
    g.states().map(|s| g.label(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgs::{parse_cgs, tests::LOOP, tests::VEND, AgentId};
    use crate::logic::to_nnf;
    use crate::oracle::fixpoint_model_check;

    fn a(i: u8) -> AgentSet {
        AgentSet::singleton(AgentId(i))
    }

    #[test]
    fn prop_is_one_state() {
        let acg = atl_to_acg(&Formula::prop(0), &Limits::default()).unwrap();
        assert_eq!(acg.state_count(), 1);
        assert_eq!(acg.delta(0, Letter(1)), &PosBool::True);
        assert_eq!(acg.delta(0, Letter(0)), &PosBool::False);
    }

    #[test]
    fn next_uses_box_atom() {
        let f = Formula::exists(a(0), Formula::next(Formula::prop(0)));
        let acg = atl_to_acg(&f, &Limits::default()).unwrap();
        assert_eq!(acg.state_count(), 2);
        let PosBool::Atom(id) = acg.delta(acg.initial(), Letter(0)) else {
            panic!("expected an atom")
        };
        let atom = acg.atom(*id);
        assert_eq!(atom.direction, Direction::Box);
        assert_eq!(atom.agents, a(0));
        assert_eq!(acg.delta(atom.state, Letter(1)), &PosBool::True);
    }

    #[test]
    fn until_state_has_color_one() {
        let f = Formula::exists(a(0), Formula::until(Formula::prop(0), Formula::prop(1)));
        let acg = atl_to_acg(&f, &Limits::default()).unwrap();
        assert_eq!(acg.color(acg.initial()), 1);
        assert!(acg.index() <= 2);
    }

    #[test]
    fn membership_matches_fixpoint_on_vend() {
        let g = parse_cgs(VEND).unwrap();
        let p = Formula::Prop(g.prop_by_name("p").unwrap());
        let formulas = [
            Formula::exists(g.all_agents(), Formula::eventually(p.clone())),
            Formula::exists(a(0), Formula::eventually(p.clone())),
            Formula::forall(
                a(1),
                Formula::always(Formula::exists(g.all_agents(), Formula::eventually(p.clone()))),
            ),
            Formula::exists(AgentSet::EMPTY, Formula::next(p.clone())),
            Formula::forall(AgentSet::EMPTY, Formula::next(p)),
        ];
        for f in &formulas {
            let acg = atl_to_acg(&to_nnf(f), &Limits::default()).unwrap();
            let m = membership_game(&acg, &g, &plain_letters(&g), &Limits::default()).unwrap();
            let sol = crate::game::solve(&m.game);
            let expected = fixpoint_model_check(&g, f).unwrap();
            assert_eq!(
                sol.winner(m.game.initial()) == Player::Automaton,
                expected.contains(g.init().index()),
                "{f:?}"
            );
        }
    }

    #[test]
    fn self_loop_without_p_rejects_eventually() {
        let g = parse_cgs(&LOOP.replace("{p}", "{}")).unwrap();
        let f = Formula::exists(a(0), Formula::eventually(Formula::prop(0)));
        let acg = atl_to_acg(&f, &Limits::default()).unwrap();
        assert!(!acg_accepts(&acg, &g, &plain_letters(&g), &Limits::default()).unwrap());
    }

    #[test]
    fn minimal_models() {
        let f = PosBool::and(
            PosBool::or(PosBool::Atom(0), PosBool::Atom(1)),
            PosBool::or(PosBool::Atom(0), PosBool::Atom(2)),
        );
        assert_eq!(f.minimal_models(), vec![vec![0], vec![1, 2]]);
        assert_eq!(PosBool::True.minimal_models(), vec![Vec::<u32>::new()]);
        assert!(PosBool::False.minimal_models().is_empty());
    }

    #[test]
    fn atlstar_checks_labels_on_vend() {
        // <<>> G <<sys,env>> F p, with the basic <<sys,env>> F p labeled.
        let g = parse_cgs(VEND).unwrap();
        let p = Formula::Prop(g.prop_by_name("p").unwrap());
        let inner = Formula::exists(g.all_agents(), Formula::eventually(p));
        let phi = Formula::exists(AgentSet::EMPTY, Formula::always(inner.clone()));
        let acg = atlstar_to_acg(&phi, &Limits::default()).unwrap();
        let idx = acg.basics().index_of(&inner).unwrap();
        let outer = acg.basics().index_of(&phi).unwrap();
        let truth = fixpoint_model_check(&g, &inner).unwrap();
        let truth_outer = fixpoint_model_check(&g, &phi).unwrap();
        let letters: Vec<Letter> = g
            .states()
            .map(|s| {
                let mut b = 0u64;
                if truth.contains(s.index()) {
                    b |= 1 << idx;
                }
                if truth_outer.contains(s.index()) {
                    b |= 1 << outer;
                }
                acg.letter(g.label(s), b)
            })
            .collect();
        assert!(acg_accepts(&acg, &g, &letters, &Limits::default()).unwrap());
        let flipped: Vec<Letter> = letters
            .iter()
            .map(|l| Letter(l.0 ^ 1 << (acg.prop_bits() + idx)))
            .collect();
        assert!(!acg_accepts(&acg, &g, &flipped, &Limits::default()).unwrap());
    }
}
