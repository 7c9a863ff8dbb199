//! Machine-readable run reports and witness renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use modcheck_core::emptiness::{FiniteStrategyTree, Stats};
use modcheck_core::logic::BasicSubformulaTable;
use modcheck_core::{Limits, OpenCgs, Pruning};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// `holds`, `fails`, `resource-exceeded` or `error`.
    pub verdict: String,
    pub engine: Option<String>,
    pub sizes: Option<Sizes>,
    /// Wall time per stage in milliseconds; only present when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    pub caps: Caps,
    /// Stage whose cap was exceeded.
    pub cap_hit: Option<String>,
    pub error: Option<String>,
    pub witness: Option<WitnessReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sizes {
    pub acg_states: usize,
    pub acg_atoms: usize,
    pub acg_index: usize,
    pub basic_subformulas: usize,
    pub dpw_states: Vec<[usize; 2]>,
    pub nta_states: usize,
    pub nta_index: usize,
    pub nta_transitions: usize,
    pub branch_checker_states: usize,
    pub game_positions: usize,
    pub game_edges: usize,
}

impl From<&Stats> for Sizes {
    fn from(s: &Stats) -> Sizes {
        Sizes {
            acg_states: s.acg_states,
            acg_atoms: s.acg_atoms,
            acg_index: s.acg_index,
            basic_subformulas: s.basics,
            dpw_states: s.dpw_sizes.iter().map(|&(a, b)| [a, b]).collect(),
            nta_states: s.nta_states,
            nta_index: s.nta_index,
            nta_transitions: s.nta_transitions,
            branch_checker_states: s.checker_states,
            game_positions: s.game_positions,
            game_edges: s.game_edges,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Caps {
    pub max_dpw_states: usize,
    pub max_nta_states: usize,
    pub max_game_positions: usize,
    pub max_prunings: usize,
}

impl From<&Limits> for Caps {
    fn from(l: &Limits) -> Caps {
        Caps {
            max_dpw_states: l.max_dpw_states,
            max_nta_states: l.max_nta_states,
            max_game_positions: l.max_game_positions,
            max_prunings: l.max_prunings,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub validated: bool,
    pub initial: u32,
    pub cells: Vec<CellReport>,
    /// Present when the strategy is memoryless.
    pub pruning: Option<BTreeMap<String, Vec<String>>>,
    pub dot: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub id: u32,
    pub state: String,
    pub enabled: Vec<String>,
    /// Basic subformulas labeled true at the cell.
    pub basics: Vec<String>,
    pub next: BTreeMap<String, u32>,
}

pub fn pruning_json(g: &OpenCgs, p: &Pruning) -> BTreeMap<String, Vec<String>> {
    p.enabled
        .iter()
        .map(|(&s, ts)| {
            (
                g.state_name(s).to_string(),
                ts.iter().map(|&t| g.state_name(t).to_string()).collect(),
            )
        })
        .collect()
}

pub fn witness_report(
    g: &OpenCgs,
    w: &FiniteStrategyTree,
    basics: &BasicSubformulaTable,
    validated: bool,
) -> WitnessReport {
    let name = |s| g.state_name(s).to_string();
    let cells = w
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| CellReport {
            id: i as u32,
            state: name(c.state),
            enabled: c.enabled.iter().map(|&t| name(t)).collect(),
            basics: basics
                .entries()
                .iter()
                .enumerate()
                .filter(|(b, _)| c.blabel >> b & 1 == 1)
                .map(|(_, f)| f.display_with(g.agents(), g.props()).to_string())
                .collect(),
            next: c.next.iter().map(|&(t, d)| (name(t), d)).collect(),
        })
        .collect();
    WitnessReport {
        validated,
        initial: w.initial,
        cells,
        pruning: w.as_pruning(g).map(|p| pruning_json(g, &p)),
        dot: None,
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The strategy tree's product as a DOT graph. Cells are annotated with
/// their structure state, memory value and labels; pruned transitions are
/// dashed edges to placeholder nodes.
pub fn witness_dot(g: &OpenCgs, w: &FiniteStrategyTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph witness {{");
    let _ = writeln!(out, "  node [shape=box];");
    for (i, c) in w.cells.iter().enumerate() {
        let mut label = format!(
            "{} / m{}\\n{}",
            g.state_name(c.state),
            i,
            g.label_to_string(g.label(c.state))
        );
        if c.blabel != 0 {
            let _ = write!(label, "\\nb={:#b}", c.blabel);
        }
        let peripheries = if i as u32 == w.initial { 2 } else { 1 };
        let _ = writeln!(out, "  c{i} [label=\"{}\", peripheries={peripheries}];", escape(&label));
    }
    for (i, c) in w.cells.iter().enumerate() {
        for t in g.successors(c.state) {
            match c.next.iter().find(|&&(u, _)| u == t) {
                Some(&(_, d)) => {
                    let _ = writeln!(out, "  c{i} -> c{d};");
                }
                None => {
                    let _ = writeln!(
                        out,
                        "  p{i}_{} [label=\"{}\", style=dashed];",
                        t.0,
                        escape(g.state_name(t))
                    );
                    let _ = writeln!(out, "  c{i} -> p{i}_{} [style=dashed];", t.0);
                }
            }
        }
    }
    let _ = writeln!(out, "}}");
    out
}
