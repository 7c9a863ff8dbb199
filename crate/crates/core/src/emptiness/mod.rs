//! Module checking by emptiness of a tree automaton.
//!
//! `g` violates `φ` under some environment iff some strategy tree of `g`,
//! extended with labels for the basic subformulas, is accepted by the ACG of
//! `¬φ`. The tree automaton of [`acg_to_nta`] accepts exactly the completed
//! encodings of such trees, and its emptiness is a parity game whose winning
//! strategies fold into finite-memory counterexamples.

mod nta;
mod witness;

use alloc::vec;
use alloc::vec::Vec;

use crate::acg::{atl_to_acg, atlstar_to_acg, membership_game, Acg};
use crate::cgs::OpenCgs;
use crate::error::{CheckError, FormulaError, ResourceError, Stage};
use crate::game::{solve, ParityGame, Player};
use crate::limits::Limits;
use crate::logic::{classify, to_nnf, Formula, FormulaClass};
use crate::oracle::fixpoint_model_check;

pub use nta::{acg_to_nta, Nta, NtaState, NtaTransition, BOTTOM};
pub use witness::{bot_completion, BotLetter, CompletedNode, CompletedTree, FiniteStrategyTree, StrategyCell};

/// Result of an emptiness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    Nonempty(FiniteStrategyTree),
}

/// The emptiness game of a tree automaton: the Automaton player picks a
/// transition at every automaton state, the Pathfinder picks a direction.
pub struct EmptinessGame {
    pub game: ParityGame,
    /// Position of every transition, per automaton state.
    pub transitions: Vec<Vec<u32>>,
}

/// Builds the emptiness game. Automaton state `i` is position `i`.
pub fn emptiness_game(nta: &Nta, limits: &Limits) -> Result<EmptinessGame, ResourceError> {
    let mut game = ParityGame::new();
    for &c in &nta.colors {
        game.add_position(Player::Automaton, c);
    }
    let mut transitions = vec![Vec::new(); nta.state_count()];
    for (i, ts) in nta.transitions.iter().enumerate() {
        if matches!(nta.states[i], NtaState::Bottom) {
            game.add_edge(i as u32, i as u32);
            continue;
        }
        for t in ts {
            let v = game.add_position(Player::Pathfinder, 0);
            game.add_edge(i as u32, v);
            for &(_, child) in &t.children {
                game.add_edge(v, child);
            }
            transitions[i].push(v);
        }
        Limits::check(limits.max_game_positions, Stage::Game, game.position_count())?;
    }
    game.set_initial(nta.initial);
    game.close_dead_ends();
    Ok(EmptinessGame { game, transitions })
}

/// Decides emptiness; a non-empty language comes with a normalized regular
/// witness read off the Automaton's winning strategy.
pub fn nta_emptiness(nta: &Nta, limits: &Limits) -> Result<(Emptiness, usize, usize), ResourceError> {
    let eg = emptiness_game(nta, limits)?;
    let sol = solve(&eg.game);
    let size = (eg.game.position_count(), eg.game.edge_count());
    if sol.winner(nta.initial) != Player::Automaton {
        return Ok((Emptiness::Empty, size.0, size.1));
    }
    // Memory: the automaton states reached under the strategy.
    let mut cell_of = vec![u32::MAX; nta.state_count()];
    let mut order = vec![nta.initial];
    cell_of[nta.initial as usize] = 0;
    let mut chosen = Vec::new();
    let mut head = 0;
    while head < order.len() {
        let q = order[head] as usize;
        head += 1;
        let v = sol.strategy(q as u32).expect("winning Automaton position has a move");
        let k = eg.transitions[q]
            .iter()
            .position(|&w| w == v)
            .expect("strategy picks a transition");
        let tr = &nta.transitions[q][k];
        for &(_, child) in &tr.children {
            if child != BOTTOM && cell_of[child as usize] == u32::MAX {
                cell_of[child as usize] = order.len() as u32;
                order.push(child);
            }
        }
        chosen.push(tr);
    }
    let cells = order
        .iter()
        .zip(&chosen)
        .map(|(&q, tr)| {
            let NtaState::Node { state, .. } = nta.states[q as usize] else {
                unreachable!("the root and its concrete descendants are not the sink")
            };
            StrategyCell {
                state,
                enabled: tr.enabled.clone(),
                blabel: tr.blabel,
                next: tr
                    .children
                    .iter()
                    .filter(|&&(_, c)| c != BOTTOM)
                    .map(|&(t, c)| (t, cell_of[c as usize]))
                    .collect(),
            }
        })
        .collect();
    let witness = FiniteStrategyTree { cells, initial: 0 }.normalize();
    Ok((Emptiness::Nonempty(witness), size.0, size.1))
}

/// Which ACG construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    /// ATL when the negated formula is in ATL, ATL* otherwise.
    #[default]
    Auto,
    Atl,
    AtlStar,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Atl => "atl",
            Engine::AtlStar => "atlstar",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub engine: Engine,
    pub limits: Limits,
}

/// Sizes of the intermediate constructions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub acg_states: usize,
    pub acg_atoms: usize,
    pub acg_size: usize,
    pub acg_index: usize,
    pub basics: usize,
    /// States of the positive and negative word automaton per basic
    /// subformula.
    pub dpw_sizes: Vec<(usize, usize)>,
    pub nta_states: usize,
    pub nta_index: usize,
    pub nta_transitions: usize,
    pub checker_states: usize,
    pub game_positions: usize,
    pub game_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// Some environment violates the formula; `validated` records whether
    /// the witness passed [`validate_counterexample`].
    Fails {
        witness: FiniteStrategyTree,
        validated: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    /// The engine that ran (never `Auto`).
    pub engine: Engine,
    pub stats: Stats,
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&FiniteStrategyTree> {
        match &self.verdict {
            Verdict::Holds => None,
            Verdict::Fails { witness, .. } => Some(witness),
        }
    }
}

fn negation(f: &Formula) -> Result<Formula, FormulaError> {
    if !f.is_state_formula() {
        return Err(FormulaError::NotStateFormula);
    }
    Ok(Formula::not(f.clone()))
}

/// Builds the ACG of `¬φ` with the chosen engine.
pub fn negated_acg(f: &Formula, engine: Engine, limits: &Limits) -> Result<(Acg, Engine), CheckError> {
    let neg = negation(f)?;
    let engine = match engine {
        Engine::Auto if classify(&neg) == FormulaClass::Atl => Engine::Atl,
        Engine::Auto => Engine::AtlStar,
        Engine::Atl if classify(&neg) != FormulaClass::Atl => return Err(FormulaError::NotAtl.into()),
        e => e,
    };
    let acg = match engine {
        Engine::Atl => atl_to_acg(&to_nnf(&neg), limits)?,
        _ => atlstar_to_acg(&neg, limits)?,
    };
    Ok((acg, engine))
}

/// Decides whether every environment strategy tree of `g` satisfies `f`.
pub fn module_check(g: &OpenCgs, f: &Formula, options: &CheckOptions) -> Result<CheckOutcome, CheckError> {
    let limits = &options.limits;
    let (acg, engine) = negated_acg(f, options.engine, limits)?;
    let nta = acg_to_nta(&acg, g, limits)?;
    let (result, positions, edges) = nta_emptiness(&nta, limits)?;
    let stats = Stats {
        acg_states: acg.state_count(),
        acg_atoms: acg.atom_count(),
        acg_size: acg.size(),
        acg_index: acg.index(),
        basics: acg.basics().len(),
        dpw_sizes: acg.dpw_sizes().to_vec(),
        nta_states: nta.state_count(),
        nta_index: nta.index(),
        nta_transitions: nta.transition_count(),
        checker_states: nta.checker_states,
        game_positions: positions,
        game_edges: edges,
    };
    let verdict = match result {
        Emptiness::Empty => Verdict::Holds,
        Emptiness::Nonempty(witness) => {
            let validated = validate_with(g, f, &witness, engine, limits);
            Verdict::Fails { witness, validated }
        }
    };
    Ok(CheckOutcome { verdict, engine, stats })
}

/// Whether `w` is a genuine counterexample: a strategy tree of `g` whose
/// unwinding (with its basic-subformula labels) violates `f`.
pub fn validate_counterexample(g: &OpenCgs, f: &Formula, w: &FiniteStrategyTree) -> bool {
    let engine = if classify(f) == FormulaClass::Atl {
        Engine::Atl
    } else {
        Engine::AtlStar
    };
    validate_with(g, f, w, engine, &Limits::default())
}

fn validate_with(g: &OpenCgs, f: &Formula, w: &FiniteStrategyTree, engine: Engine, limits: &Limits) -> bool {
    if w.validate(g).is_err() {
        return false;
    }
    let Ok(product) = w.product(g) else {
        return false;
    };
    let Ok(neg) = negation(f) else {
        return false;
    };
    if engine == Engine::Atl && classify(&neg) == FormulaClass::Atl {
        return match fixpoint_model_check(&product, &neg) {
            Ok(sat) => sat.contains(product.init().index()),
            Err(_) => false,
        };
    }
    let Ok(acg) = atlstar_to_acg(&neg, limits) else {
        return false;
    };
    let letters: Vec<_> = w.cells.iter().map(|c| acg.letter(g.label(c.state), c.blabel)).collect();
    match membership_game(&acg, &product, &letters, limits) {
        Ok(m) => solve(&m.game).winner(m.game.initial()) == Player::Automaton,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgs::tests::{LOOP, VEND};
    use crate::cgs::{parse_cgs, Pruning, StateId};
    use crate::logic::parse_formula;
    use crate::oracle::{oracle_module_check, OracleVerdict};
    use alloc::collections::BTreeMap;

    const REACH_P: &str = "[[env]] G <<sys,env>> F p";

    fn check(model: &str, text: &str, engine: Engine) -> CheckOutcome {
        let g = parse_cgs(model).unwrap();
        let f = parse_formula(text, &g).unwrap();
        module_check(
            &g,
            &f,
            &CheckOptions {
                engine,
                ..CheckOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn trivial_formulas() {
        for engine in [Engine::Atl, Engine::AtlStar] {
            assert!(check(LOOP, "true", engine).holds());
            assert!(check(LOOP, "p", engine).holds());
            assert!(!check(LOOP, "!p", engine).holds());
        }
    }

    #[test]
    fn vend_counterexample_is_the_q_pruning() {
        let g = parse_cgs(VEND).unwrap();
        let f = parse_formula(REACH_P, &g).unwrap();
        for engine in [Engine::Atl, Engine::AtlStar] {
            let out = check(VEND, REACH_P, engine);
            let Verdict::Fails { witness, validated } = &out.verdict else {
                panic!("expected a violation")
            };
            assert!(validated);
            assert!(validate_counterexample(&g, &f, witness));
            if engine == Engine::AtlStar {
                // Witnesses of the ATL* engine may use memory.
                continue;
            }
            let expected = Pruning {
                enabled: BTreeMap::from([(StateId(0), alloc::vec![StateId(2)])]),
            };
            assert_eq!(witness.as_pruning(&g), Some(expected.clone()));
            assert_eq!(
                oracle_module_check(&g, &f, &Limits::default()).unwrap(),
                OracleVerdict::ViolationFound(expected)
            );
        }
    }

    #[test]
    fn enlarged_witness_is_rejected() {
        let g = parse_cgs(VEND).unwrap();
        let f = parse_formula(REACH_P, &g).unwrap();
        let out = check(VEND, REACH_P, Engine::Auto);
        let mut w = out.witness().unwrap().clone();
        let root = &mut w.cells[0];
        root.enabled = g.successors(StateId(0));
        let back = root.next[0].1;
        root.next = alloc::vec![(StateId(1), back), (StateId(2), back)];
        // Direction 1 must lead to a cell on state 1: add one.
        let sp = w.cells.len() as u32;
        w.cells.push(StrategyCell {
            state: StateId(1),
            enabled: alloc::vec![StateId(0)],
            blabel: 0,
            next: alloc::vec![(StateId(0), 0)],
        });
        w.cells[0].next[0].1 = sp;
        let q = w.cells[0].next[1].1;
        assert_eq!(w.cells[q as usize].state, StateId(2));
        assert!(w.validate(&g).is_ok());
        assert!(!validate_counterexample(&g, &f, &w));
    }

    #[test]
    fn unwinding_satisfies_what_module_check_refutes() {
        let g = parse_cgs(VEND).unwrap();
        let f = parse_formula(REACH_P, &g).unwrap();
        assert!(fixpoint_model_check(&g, &f).unwrap().contains(0));
    }

    #[test]
    fn bot_completion_marks_pruned_directions() {
        let g = parse_cgs(VEND).unwrap();
        let w = check(VEND, REACH_P, Engine::Atl).witness().unwrap().clone();
        let t = bot_completion(&w.unroll(&g, 1), g.state_count());
        let root = &t.nodes[0];
        assert_eq!(root.label, BotLetter::Concrete(g.label(StateId(0))));
        let kinds: Vec<BotLetter> = root.children.iter().map(|&c| t.nodes[c].label).collect();
        assert_eq!(
            kinds,
            alloc::vec![
                BotLetter::Bottom,
                BotLetter::Bottom,
                BotLetter::Concrete(g.label(StateId(2)))
            ]
        );

        let deep = bot_completion(&w.unroll(&g, 3), g.state_count());
        for n in &deep.nodes {
            if n.label == BotLetter::Bottom {
                assert!(n.children.iter().all(|&c| deep.nodes[c].label == BotLetter::Bottom));
            }
        }
    }

    #[test]
    fn env_free_model_reduces_to_model_checking() {
        let g = parse_cgs(LOOP).unwrap();
        let w = check(LOOP, "!p", Engine::Atl).witness().unwrap().clone();
        assert_eq!(w.len(), 1);
        assert_eq!(w.product(&g).unwrap().state_count(), 1);
    }

    #[test]
    fn nta_for_false_root_is_empty() {
        let g = parse_cgs(LOOP).unwrap();
        let acg = atl_to_acg(&Formula::prop(1), &Limits::default()).unwrap();
        let nta = acg_to_nta(&acg, &g, &Limits::default()).unwrap();
        let (e, _, _) = nta_emptiness(&nta, &Limits::default()).unwrap();
        assert_eq!(e, Emptiness::Empty);
        let acg = atl_to_acg(&Formula::True, &Limits::default()).unwrap();
        let nta = acg_to_nta(&acg, &g, &Limits::default()).unwrap();
        let (e, _, _) = nta_emptiness(&nta, &Limits::default()).unwrap();
        assert!(matches!(e, Emptiness::Nonempty(w) if w.len() == 1));
    }
}
