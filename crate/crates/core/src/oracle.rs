//! Brute-force reference procedures.
//!
//! These are deliberately simple and share no code with the automata
//! pipeline beyond the model representation: memoryless pruning enumeration,
//! fixpoint model checking of ATL, and LTL evaluation on lasso words.

use alloc::vec;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;

use crate::cgs::{AgentSet, OpenCgs, Pruning, StateId};
use crate::error::{CheckError, FormulaError, ResourceError, Stage};
use crate::limits::Limits;
use crate::logic::{classify, Formula, FormulaClass, Ltl, LtlAtom};
use crate::word::lasso_next;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// The first pruning (in enumeration order) whose pruned model violates
    /// the formula.
    ViolationFound(Pruning),
    NoMemorylessViolation,
}

/// Number of memoryless prunings, saturating at `u128::MAX`.
pub fn pruning_count(g: &OpenCgs) -> u128 {
    g.states()
        .filter(|&s| g.is_env_state(s))
        .map(|s| (1u128 << g.successors(s).len().min(127)) - 1)
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// All memoryless prunings: the first environment state is the most
/// significant digit and enabled subsets are ordered by their bitmask over
/// the sorted successor list.
pub fn enumerate_prunings(g: &OpenCgs, limits: &Limits) -> Result<Prunings, ResourceError> {
    if pruning_count(g) > limits.max_prunings as u128 {
        return Err(ResourceError {
            stage: Stage::Prunings,
            limit: limits.max_prunings,
        });
    }
    let env: Vec<(StateId, Vec<StateId>)> = g
        .states()
        .filter(|&s| g.is_env_state(s))
        .map(|s| (s, g.successors(s)))
        .collect();
    let masks = vec![1u64; env.len()];
    Ok(Prunings {
        env,
        masks,
        done: false,
    })
}

/// Iterator returned by [`enumerate_prunings`].
pub struct Prunings {
    env: Vec<(StateId, Vec<StateId>)>,
    masks: Vec<u64>,
    done: bool,
}

impl Iterator for Prunings {
    type Item = Pruning;

    fn next(&mut self) -> Option<Pruning> {
        if self.done {
            return None;
        }
        let enabled = self
            .env
            .iter()
            .zip(&self.masks)
            .map(|((s, succ), &mask)| {
                let set = succ
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &t)| t)
                    .collect();
                (*s, set)
            })
            .collect();
        self.done = true;
        for i in (0..self.env.len()).rev() {
            let full = (1u64 << self.env[i].1.len()) - 1;
            if self.masks[i] < full {
                self.masks[i] += 1;
                self.done = false;
                break;
            }
            self.masks[i] = 1;
        }
        Some(Pruning { enabled })
    }
}

fn pre(g: &OpenCgs, coalition: AgentSet, z: &FixedBitSet, universal: bool) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(g.state_count());
    for s in g.states() {
        let moves = g.moves(s, coalition, None);
        let holds = if universal {
            moves.iter().all(|m| m.targets.iter().any(|t| z.contains(t.index())))
        } else {
            moves.iter().any(|m| m.targets.iter().all(|t| z.contains(t.index())))
        };
        out.set(s.index(), holds);
    }
    out
}

fn complement(set: &FixedBitSet) -> FixedBitSet {
    let mut out = set.clone();
    out.toggle_range(..);
    out
}

/// Pushes negations through the outermost temporal operator of a path
/// formula.
fn path_head(f: &Formula, neg: bool) -> Formula {
    let n = |x: &Formula| if neg { Formula::not(x.clone()) } else { x.clone() };
    match f {
        Formula::Not(g) => path_head(g, !neg),
        Formula::Next(a) => Formula::next(n(a)),
        Formula::Until(a, b) if neg => Formula::release(n(a), n(b)),
        Formula::Release(a, b) if neg => Formula::until(n(a), n(b)),
        Formula::Until(..) | Formula::Release(..) => f.clone(),
        _ => unreachable!("ATL quantifiers bind a temporal operator"),
    }
}

/// States of `g` satisfying an ATL state formula.
pub fn fixpoint_model_check(g: &OpenCgs, f: &Formula) -> Result<FixedBitSet, FormulaError> {
    if !f.is_state_formula() {
        return Err(FormulaError::NotStateFormula);
    }
    if classify(f) != FormulaClass::Atl {
        return Err(FormulaError::NotAtl);
    }
    Ok(sat(g, f))
}

fn sat(g: &OpenCgs, f: &Formula) -> FixedBitSet {
    let n = g.state_count();
    let all = || {
        let mut s = FixedBitSet::with_capacity(n);
        s.insert_range(..);
        s
    };
    match f {
        Formula::True => all(),
        Formula::False => FixedBitSet::with_capacity(n),
        Formula::Prop(p) => {
            let mut s = FixedBitSet::with_capacity(n);
            for st in g.states() {
                s.set(st.index(), g.label(st).contains(p.0 as usize));
            }
            s
        }
        Formula::Not(a) => complement(&sat(g, a)),
        Formula::And(a, b) => {
            let mut s = sat(g, a);
            s.intersect_with(&sat(g, b));
            s
        }
        Formula::Or(a, b) => {
            let mut s = sat(g, a);
            s.union_with(&sat(g, b));
            s
        }
        Formula::Next(_) | Formula::Until(..) | Formula::Release(..) => {
            unreachable!("checked to be a state formula")
        }
        Formula::Exists(ag, body) | Formula::Forall(ag, body) => {
            let universal = matches!(f, Formula::Forall(..));
            match path_head(body, false) {
                Formula::Next(a) => pre(g, *ag, &sat(g, &a), universal),
                Formula::Until(a, b) => {
                    let sa = sat(g, &a);
                    let sb = sat(g, &b);
                    let mut z = FixedBitSet::with_capacity(n);
                    loop {
                        let mut next = pre(g, *ag, &z, universal);
                        next.intersect_with(&sa);
                        next.union_with(&sb);
                        if next == z {
                            break z;
                        }
                        z = next;
                    }
                }
                Formula::Release(a, b) => {
                    let sa = sat(g, &a);
                    let sb = sat(g, &b);
                    let mut z = all();
                    loop {
                        let mut next = pre(g, *ag, &z, universal);
                        next.union_with(&sa);
                        next.intersect_with(&sb);
                        if next == z {
                            break z;
                        }
                        z = next;
                    }
                }
                _ => unreachable!("path_head returns a temporal operator"),
            }
        }
    }
}

/// Scans all memoryless prunings for one whose pruned model violates `f` at
/// the initial state.
pub fn oracle_module_check(g: &OpenCgs, f: &Formula, limits: &Limits) -> Result<OracleVerdict, CheckError> {
    for p in enumerate_prunings(g, limits)? {
        let pruned = g.apply_pruning(&p)?;
        if !fixpoint_model_check(&pruned, f)?.contains(g.init().index()) {
            return Ok(OracleVerdict::ViolationFound(p));
        }
    }
    Ok(OracleVerdict::NoMemorylessViolation)
}

/// Whether the lasso word `stem · loop^ω` satisfies `f`; bit `i` of a letter
/// gives the truth of `atoms[i]`.
pub fn ltl_lasso_holds(f: &Ltl, atoms: &[LtlAtom], stem: &[u64], lp: &[u64]) -> bool {
    assert!(!lp.is_empty(), "lasso loop must be nonempty");
    let word: Vec<u64> = stem.iter().chain(lp).copied().collect();
    eval(f, atoms, &word, stem.len())[0]
}

fn eval(f: &Ltl, atoms: &[LtlAtom], word: &[u64], stem: usize) -> Vec<bool> {
    let len = word.len();
    let next = |i: usize| lasso_next(i, stem, len);
    match f {
        Ltl::True => vec![true; len],
        Ltl::False => vec![false; len],
        Ltl::Atom(a) => {
            let bit = atoms.iter().position(|x| x == a).expect("atom not in alphabet");
            word.iter().map(|l| l >> bit & 1 == 1).collect()
        }
        Ltl::Not(g) => eval(g, atoms, word, stem).into_iter().map(|v| !v).collect(),
        Ltl::And(a, b) | Ltl::Or(a, b) => {
            let x = eval(a, atoms, word, stem);
            let y = eval(b, atoms, word, stem);
            let and = matches!(f, Ltl::And(..));
            x.iter()
                .zip(&y)
                .map(|(&u, &v)| if and { u && v } else { u || v })
                .collect()
        }
        Ltl::Next(g) => {
            let x = eval(g, atoms, word, stem);
            (0..len).map(|i| x[next(i)]).collect()
        }
        Ltl::Until(a, b) | Ltl::Release(a, b) => {
            let x = eval(a, atoms, word, stem);
            let y = eval(b, atoms, word, stem);
            let until = matches!(f, Ltl::Until(..));
            let mut z = vec![!until; len];
            // Each sweep settles at least one more position; `len + 1` sweeps
            // reach the fixpoint.
            for _ in 0..=len {
                for i in (0..len).rev() {
                    z[i] = if until {
                        y[i] || (x[i] && z[next(i)])
                    } else {
                        y[i] && (x[i] || z[next(i)])
                    };
                }
            }
            z
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgs::{parse_cgs, tests::VEND};

    #[test]
    fn lasso_semantics() {
        let p = Ltl::prop(0);
        let atoms = [LtlAtom::Prop(crate::cgs::PropId(0))];
        assert!(ltl_lasso_holds(&Ltl::eventually(p.clone()), &atoms, &[0], &[1]));
        assert!(!ltl_lasso_holds(&Ltl::eventually(p.clone()), &atoms, &[], &[0]));
        assert!(ltl_lasso_holds(
            &Ltl::always(Ltl::eventually(p.clone())),
            &atoms,
            &[],
            &[0, 1]
        ));
        assert!(!ltl_lasso_holds(
            &Ltl::eventually(Ltl::always(p.clone())),
            &atoms,
            &[1],
            &[0, 1]
        ));
        assert!(ltl_lasso_holds(&Ltl::next(Ltl::not(p)), &atoms, &[1], &[0]));
    }

    #[test]
    fn vend_prunings() {
        let g = parse_cgs(VEND).unwrap();
        let all: Vec<Pruning> = enumerate_prunings(&g, &Limits::default()).unwrap().collect();
        assert_eq!(all.len(), 3);
        let s0 = g.state_by_name("s0").unwrap();
        let sp = g.state_by_name("sp").unwrap();
        let sq = g.state_by_name("sq").unwrap();
        assert_eq!(all[0].enabled[&s0], vec![sp]);
        assert_eq!(all[1].enabled[&s0], vec![sq]);
        assert_eq!(all[2].enabled[&s0], vec![sp, sq]);
    }

    #[test]
    fn vend_reachability() {
        let g = parse_cgs(VEND).unwrap();
        let everyone = g.all_agents();
        let p = Formula::Prop(g.prop_by_name("p").unwrap());
        let reach = Formula::exists(everyone, Formula::eventually(p.clone()));
        assert!(fixpoint_model_check(&g, &reach).unwrap().contains(g.init().index()));
        let sq = g.state_by_name("sq").unwrap();
        let pruning = Pruning {
            enabled: [(g.init(), vec![sq])].into_iter().collect(),
        };
        let pruned = g.apply_pruning(&pruning).unwrap();
        assert!(!fixpoint_model_check(&pruned, &reach)
            .unwrap()
            .contains(g.init().index()));

        let env = AgentSet::singleton(g.agent_by_name("env").unwrap());
        let phi = Formula::forall(env, Formula::always(reach));
        assert_eq!(
            oracle_module_check(&g, &phi, &Limits::default()).unwrap(),
            OracleVerdict::ViolationFound(pruning)
        );
    }

    #[test]
    fn negated_path_operators() {
        let g = parse_cgs(VEND).unwrap();
        let p = Formula::Prop(g.prop_by_name("p").unwrap());
        let q = Formula::Prop(g.prop_by_name("q").unwrap());
        let sys = AgentSet::singleton(g.agent_by_name("sys").unwrap());
        let f = Formula::not(Formula::exists(sys, Formula::until(p.clone(), q.clone())));
        let g1 = Formula::exists(sys, Formula::not(Formula::until(p.clone(), q.clone())));
        let nnf = crate::logic::to_nnf(&f);
        assert_eq!(
            fixpoint_model_check(&g, &f).unwrap(),
            fixpoint_model_check(&g, &nnf).unwrap()
        );
        assert!(fixpoint_model_check(&g, &g1).is_ok());
        let ff = Formula::exists(sys, Formula::always(Formula::eventually(p)));
        assert_eq!(fixpoint_model_check(&g, &ff), Err(FormulaError::NotAtl));
    }
}
