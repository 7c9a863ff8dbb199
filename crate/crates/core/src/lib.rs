//! Module checking of open concurrent game structures against ATL and ATL*.
//!
//! The crate is `no_std` (it needs `alloc`). It contains the full decision
//! pipeline: formulas are turned into parity alternating automata over
//! concurrent game structures, the automaton is combined with the model into a
//! nondeterministic parity tree automaton whose language is the set of
//! environment strategy trees violating the specification, and emptiness of
//! that automaton is decided by solving a parity game. A non-empty language
//! yields a finite-memory environment as counterexample.
//!
//! Independent brute-force checkers live in [`oracle`]; they are used to
//! cross-validate the automata-theoretic engine.
#![no_std]

extern crate alloc;

pub mod acg;
pub mod cgs;
pub mod emptiness;
pub mod error;
pub mod game;
mod graph;
pub mod limits;
pub mod logic;
pub mod oracle;
pub mod word;

pub use acg::{atl_to_acg, atlstar_to_acg, membership_game, Acg};
pub use cgs::{parse_cgs, render_cgs, OpenCgs, Pruning, StateId};
pub use emptiness::{
    acg_to_nta, module_check, nta_emptiness, validate_counterexample, CheckOptions, CheckOutcome, Engine,
    FiniteStrategyTree, Nta, Verdict,
};
pub use error::{CheckError, FormulaError, ModelError, ResourceError, Stage};
pub use game::{brute_solve, solve, ParityGame, Player};
pub use limits::Limits;
pub use logic::{classify, parse_formula, to_nnf, Formula, FormulaClass};
pub use oracle::{enumerate_prunings, fixpoint_model_check, oracle_module_check, OracleVerdict};
