//! ATL and ATL* formulas.
//!
//! A single AST covers state and path formulas. `F` and `G` are desugared on
//! parsing (`F φ = true U φ`, `G φ = false R φ`); release is a first-class
//! operator since negation normal form needs the dual of until.

mod basic;
mod parser;

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::cgs::{AgentSet, OpenCgs, PropId};

pub use basic::{basic_subformulas, ltl_projection, to_existential, BasicSubformulaTable, Ltl, LtlAtom};
pub use parser::{parse_formula, FormulaContext};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Prop(PropId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    /// `<<A>> ψ`: the coalition has a strategy enforcing ψ.
    Exists(AgentSet, Box<Formula>),
    /// `[[A]] ψ`, the dual `!<<A>>!ψ`.
    Forall(AgentSet, Box<Formula>),
}

/// Which engine a state formula can use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaClass {
    Atl,
    AtlStar,
}

impl Formula {
    pub fn prop(p: u8) -> Formula {
        Formula::Prop(PropId(p))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Negation that cancels a leading negation instead of stacking it.
    pub fn negate(self) -> Formula {
        match self {
            Formula::Not(f) => *f,
            f => Formula::not(f),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    pub fn always(f: Formula) -> Formula {
        Formula::release(Formula::False, f)
    }

    pub fn exists(agents: AgentSet, f: Formula) -> Formula {
        Formula::Exists(agents, Box::new(f))
    }

    pub fn forall(agents: AgentSet, f: Formula) -> Formula {
        Formula::Forall(agents, Box::new(f))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().map(Formula::size).sum::<usize>()
    }

    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let (a, b): (Option<&Formula>, Option<&Formula>) = match self {
            Formula::True | Formula::False | Formula::Prop(_) => (None, None),
            Formula::Not(f) | Formula::Next(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => (Some(f), None),
            Formula::And(x, y) | Formula::Or(x, y) | Formula::Until(x, y) | Formula::Release(x, y) => {
                (Some(x), Some(y))
            }
        };
        a.into_iter().chain(b)
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Formula::Next(_) | Formula::Until(..) | Formula::Release(..))
    }

    /// True when every temporal operator is in the scope of a quantifier.
    pub fn is_state_formula(&self) -> bool {
        fn go(f: &Formula, scoped: bool) -> bool {
            match f {
                Formula::Exists(_, g) | Formula::Forall(_, g) => go(g, true),
                _ if f.is_temporal() && !scoped => false,
                _ => f.children().all(|c| go(c, scoped)),
            }
        }
        go(self, false)
    }

    /// Display using the names of a model.
    pub fn display<'a>(&'a self, g: &'a OpenCgs) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            agents: g.agents(),
            props: g.props(),
        }
    }

    pub fn display_with<'a>(&'a self, agents: &'a [String], props: &'a [String]) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            agents,
            props,
        }
    }
}

/// Pushes negations down to propositions, using the quantifier duality and
/// the until/release duality.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::True if neg => Formula::False,
        Formula::False if neg => Formula::True,
        Formula::True | Formula::False => f.clone(),
        Formula::Prop(_) if neg => Formula::not(f.clone()),
        Formula::Prop(_) => f.clone(),
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(a, b) if neg => Formula::or(nnf(a, true), nnf(b, true)),
        Formula::And(a, b) => Formula::and(nnf(a, false), nnf(b, false)),
        Formula::Or(a, b) if neg => Formula::and(nnf(a, true), nnf(b, true)),
        Formula::Or(a, b) => Formula::or(nnf(a, false), nnf(b, false)),
        Formula::Next(g) => Formula::next(nnf(g, neg)),
        Formula::Until(a, b) if neg => Formula::release(nnf(a, true), nnf(b, true)),
        Formula::Until(a, b) => Formula::until(nnf(a, false), nnf(b, false)),
        Formula::Release(a, b) if neg => Formula::until(nnf(a, true), nnf(b, true)),
        Formula::Release(a, b) => Formula::release(nnf(a, false), nnf(b, false)),
        Formula::Exists(ag, g) if neg => Formula::forall(*ag, nnf(g, true)),
        Formula::Exists(ag, g) => Formula::exists(*ag, nnf(g, false)),
        Formula::Forall(ag, g) if neg => Formula::exists(*ag, nnf(g, true)),
        Formula::Forall(ag, g) => Formula::forall(*ag, nnf(g, false)),
    }
}

/// ATL when, in negation normal form, every temporal operator sits directly
/// below a quantifier and has state-formula arguments.
pub fn classify(f: &Formula) -> FormulaClass {
    fn atl(f: &Formula) -> bool {
        match f {
            Formula::True | Formula::False | Formula::Prop(_) => true,
            Formula::Not(g) => matches!(**g, Formula::Prop(_)),
            Formula::And(a, b) | Formula::Or(a, b) => atl(a) && atl(b),
            Formula::Next(_) | Formula::Until(..) | Formula::Release(..) => false,
            Formula::Exists(_, body) | Formula::Forall(_, body) => match &**body {
                Formula::Next(a) => atl(a),
                Formula::Until(a, b) | Formula::Release(a, b) => atl(a) && atl(b),
                _ => false,
            },
        }
    }
    if f.is_state_formula() && atl(&to_nnf(f)) {
        FormulaClass::Atl
    } else {
        FormulaClass::AtlStar
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    agents: &'a [String],
    props: &'a [String],
}

impl FormulaDisplay<'_> {
    fn sub<'b>(&'b self, f: &'b Formula) -> FormulaDisplay<'b> {
        FormulaDisplay {
            formula: f,
            agents: self.agents,
            props: self.props,
        }
    }

    fn coalition(&self, f: &mut fmt::Formatter<'_>, set: AgentSet) -> fmt::Result {
        for (i, a) in set.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match self.agents.get(a.0 as usize) {
                Some(name) => f.write_str(name)?,
                None => write!(f, "a{}", a.0)?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.formula {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Prop(p) => match self.props.get(p.0 as usize) {
                Some(name) => f.write_str(name),
                None => write!(f, "p{}", p.0),
            },
            Formula::Not(g) => write!(f, "!{}", self.sub(g)),
            Formula::And(a, b) => write!(f, "({} & {})", self.sub(a), self.sub(b)),
            Formula::Or(a, b) => write!(f, "({} | {})", self.sub(a), self.sub(b)),
            Formula::Next(g) => write!(f, "X {}", self.sub(g)),
            Formula::Until(a, b) if **a == Formula::True => write!(f, "F {}", self.sub(b)),
            Formula::Release(a, b) if **a == Formula::False => write!(f, "G {}", self.sub(b)),
            Formula::Until(a, b) => write!(f, "({} U {})", self.sub(a), self.sub(b)),
            Formula::Release(a, b) => write!(f, "({} R {})", self.sub(a), self.sub(b)),
            Formula::Exists(ag, g) => {
                f.write_str("<<")?;
                self.coalition(f, *ag)?;
                write!(f, ">> {}", self.sub(g))
            }
            Formula::Forall(ag, g) => {
                f.write_str("[[")?;
                self.coalition(f, *ag)?;
                write!(f, "]] {}", self.sub(g))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.display_with(&[], &[]), f)
    }
}
