//! Basic subformulas and the LTL view of path formulas.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::Formula;
use crate::cgs::PropId;

/// Rewrites `[[A]] ψ` as `!<<A>> !ψ`, so that `<<A>>` is the only quantifier.
pub fn to_existential(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Prop(_) => f.clone(),
        Formula::Not(g) => to_existential(g).negate(),
        Formula::And(a, b) => Formula::and(to_existential(a), to_existential(b)),
        Formula::Or(a, b) => Formula::or(to_existential(a), to_existential(b)),
        Formula::Next(g) => Formula::next(to_existential(g)),
        Formula::Until(a, b) => Formula::until(to_existential(a), to_existential(b)),
        Formula::Release(a, b) => Formula::release(to_existential(a), to_existential(b)),
        Formula::Exists(ag, g) => Formula::exists(*ag, to_existential(g)),
        Formula::Forall(ag, g) => Formula::exists(*ag, to_existential(g).negate()).negate(),
    }
}

/// The distinct basic subformulas `<<A>> ψ` of a formula in existential
/// form, innermost first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BasicSubformulaTable {
    entries: Vec<Formula>,
    index: BTreeMap<Formula, usize>,
}

impl BasicSubformulaTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Formula] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Formula {
        &self.entries[i]
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    fn collect(&mut self, f: &Formula) {
        for c in f.children() {
            self.collect(c);
        }
        if matches!(f, Formula::Exists(..)) && !self.index.contains_key(f) {
            self.index.insert(f.clone(), self.entries.len());
            self.entries.push(f.clone());
        }
    }

    /// Basic subformulas occurring in `f` outside the scope of any
    /// quantifier of `f`, in table order.
    pub fn first_level(&self, f: &Formula) -> Vec<usize> {
        fn go(t: &BasicSubformulaTable, f: &Formula, out: &mut Vec<usize>) {
            if let Formula::Exists(..) = f {
                if let Some(i) = t.index_of(f) {
                    out.push(i);
                }
                return;
            }
            for c in f.children() {
                go(t, c, out);
            }
        }
        let mut out = Vec::new();
        go(self, f, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Builds the table of basic subformulas of `f` (taken in existential form).
pub fn basic_subformulas(f: &Formula) -> BasicSubformulaTable {
    let mut table = BasicSubformulaTable::default();
    table.collect(&to_existential(f));
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LtlAtom {
    Prop(PropId),
    /// Index into a [`BasicSubformulaTable`].
    Basic(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(LtlAtom),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(a: LtlAtom) -> Ltl {
        Ltl::Atom(a)
    }

    pub fn prop(p: u8) -> Ltl {
        Ltl::Atom(LtlAtom::Prop(PropId(p)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(Box::new(f))
    }

    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }

    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Ltl) -> Ltl {
        Ltl::until(Ltl::True, f)
    }

    pub fn always(f: Ltl) -> Ltl {
        Ltl::release(Ltl::False, f)
    }

    /// Atoms in first-occurrence order.
    pub fn atoms(&self) -> Vec<LtlAtom> {
        fn go(f: &Ltl, out: &mut Vec<LtlAtom>) {
            match f {
                Ltl::True | Ltl::False => {}
                Ltl::Atom(a) => {
                    if !out.contains(a) {
                        out.push(*a);
                    }
                }
                Ltl::Not(g) | Ltl::Next(g) => go(g, out),
                Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn is_propositional(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => true,
            Ltl::Not(g) => g.is_propositional(),
            Ltl::And(a, b) | Ltl::Or(a, b) => a.is_propositional() && b.is_propositional(),
            Ltl::Next(_) | Ltl::Until(..) | Ltl::Release(..) => false,
        }
    }

    /// Evaluates a propositional formula on a valuation of its atoms.
    pub fn eval_propositional(&self, holds: &impl Fn(LtlAtom) -> bool) -> bool {
        match self {
            Ltl::True => true,
            Ltl::False => false,
            Ltl::Atom(a) => holds(*a),
            Ltl::Not(g) => !g.eval_propositional(holds),
            Ltl::And(a, b) => a.eval_propositional(holds) && b.eval_propositional(holds),
            Ltl::Or(a, b) => a.eval_propositional(holds) || b.eval_propositional(holds),
            Ltl::Next(_) | Ltl::Until(..) | Ltl::Release(..) => {
                panic!("temporal operator in propositional evaluation")
            }
        }
    }

    /// Replaces basic atoms by their formulas, inverting [`ltl_projection`].
    pub fn to_formula(&self, table: &BasicSubformulaTable) -> Formula {
        match self {
            Ltl::True => Formula::True,
            Ltl::False => Formula::False,
            Ltl::Atom(LtlAtom::Prop(p)) => Formula::Prop(*p),
            Ltl::Atom(LtlAtom::Basic(i)) => table.get(*i).clone(),
            Ltl::Not(g) => Formula::not(g.to_formula(table)),
            Ltl::And(a, b) => Formula::and(a.to_formula(table), b.to_formula(table)),
            Ltl::Or(a, b) => Formula::or(a.to_formula(table), b.to_formula(table)),
            Ltl::Next(g) => Formula::next(g.to_formula(table)),
            Ltl::Until(a, b) => Formula::until(a.to_formula(table), b.to_formula(table)),
            Ltl::Release(a, b) => Formula::release(a.to_formula(table), b.to_formula(table)),
        }
    }
}

/// The LTL formula obtained from `f` (in existential form) by replacing each
/// first-level basic subformula by its atom.
///
/// # Panics
///
/// If `f` contains a `[[A]]` node or a basic subformula missing from `table`.
pub fn ltl_projection(f: &Formula, table: &BasicSubformulaTable) -> Ltl {
    match f {
        Formula::True => Ltl::True,
        Formula::False => Ltl::False,
        Formula::Prop(p) => Ltl::Atom(LtlAtom::Prop(*p)),
        Formula::Not(g) => Ltl::not(ltl_projection(g, table)),
        Formula::And(a, b) => Ltl::and(ltl_projection(a, table), ltl_projection(b, table)),
        Formula::Or(a, b) => Ltl::or(ltl_projection(a, table), ltl_projection(b, table)),
        Formula::Next(g) => Ltl::next(ltl_projection(g, table)),
        Formula::Until(a, b) => Ltl::until(ltl_projection(a, table), ltl_projection(b, table)),
        Formula::Release(a, b) => Ltl::release(ltl_projection(a, table), ltl_projection(b, table)),
        Formula::Exists(..) => Ltl::Atom(LtlAtom::Basic(
            table.index_of(f).expect("basic subformula missing from table"),
        )),
        Formula::Forall(..) => panic!("ltl_projection expects existential form"),
    }
}
