use alloc::string::String;
use core::fmt;

use thiserror::Error;

/// Error raised while reading or validating a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("blocked state `{0}`: no full decision has a defined successor")]
    BlockedState(String),
    #[error("state `{0}` is neither controlled by the environment nor environment-passive")]
    Unclassified(String),
    #[error("state `{state}` declared owner={declared} but is {computed}")]
    OwnerMismatch {
        state: String,
        declared: String,
        computed: &'static str,
    },
    #[error("invalid pruning: {0}")]
    InvalidPruning(String),
}

/// Error raised while parsing or checking a formula.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("{position}: syntax error: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("temporal operator outside quantifier")]
    NotStateFormula,
    #[error("formula is not in the ATL fragment")]
    NotAtl,
    #[error("too many atoms: {0} (at most 64 propositions and basic subformulas)")]
    TooManyAtoms(usize),
}

/// Pipeline stage, used to report which construction exceeded its limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Nbw,
    Dpw,
    Acg,
    Nta,
    Game,
    Prunings,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Nbw => "nbw",
            Stage::Dpw => "dpw",
            Stage::Acg => "acg",
            Stage::Nta => "nta",
            Stage::Game => "game",
            Stage::Prunings => "prunings",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("resource limit exceeded at stage {stage}: more than {limit}")]
pub struct ResourceError {
    pub stage: Stage,
    pub limit: usize,
}

/// Error returned by the top-level checking entry points.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
