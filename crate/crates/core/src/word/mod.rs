//! Automata over infinite words.
//!
//! Letters are bitmasks over an automaton's own atom list: bit `i` of a letter
//! is set when the `i`-th atom holds. Parity conditions are max-parity
//! throughout: a run is accepting iff the highest color seen infinitely often
//! is even.

mod dpw;
mod nbw;
mod safra;

pub use dpw::{nbw_to_dpw, Dpw};
pub use nbw::{ltl_to_nbw, Edge, Nbw};
pub use safra::{Buchi, Determinizer, StateSet};

/// Next position in a lasso `stem · loop^ω` of total length `len`.
pub(crate) fn lasso_next(i: usize, stem: usize, len: usize) -> usize {
    if i + 1 < len {
        i + 1
    } else {
        stem
    }
}
