use crate::error::{ResourceError, Stage};

/// Upper bounds on the size of intermediate constructions.
///
/// The worst case of the pipeline is triply exponential, so every stage
/// checks its own bound and fails with a [`ResourceError`] instead of running
/// away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nbw_states: usize,
    pub max_dpw_states: usize,
    pub max_acg_states: usize,
    pub max_nta_states: usize,
    pub max_game_positions: usize,
    pub max_prunings: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nbw_states: 1_000_000,
            max_dpw_states: 1_000_000,
            max_acg_states: 1_000_000,
            max_nta_states: 1_000_000,
            max_game_positions: 10_000_000,
            max_prunings: 1 << 20,
        }
    }
}

impl Limits {
    pub(crate) fn check(limit: usize, stage: Stage, value: usize) -> Result<(), ResourceError> {
        if value > limit {
            Err(ResourceError { stage, limit })
        } else {
            Ok(())
        }
    }
}
