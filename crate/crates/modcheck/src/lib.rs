//! Front end of the module checker: running checks with per-stage timing,
//! JSON reports, DOT witnesses, textual dumps of intermediate
//! constructions, and the random instance generators used by the test
//! suites.

pub mod gen;
pub mod report;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use modcheck_core::emptiness::{emptiness_game, negated_acg, Emptiness};
use modcheck_core::logic::{basic_subformulas, ltl_projection, to_existential, LtlAtom};
use modcheck_core::word::{ltl_to_nbw, nbw_to_dpw};
use modcheck_core::{
    acg_to_nta, nta_emptiness, oracle_module_check, validate_counterexample, CheckError, Engine, Formula, Limits,
    OpenCgs, OracleVerdict,
};

use report::{pruning_json, witness_dot, witness_report, Caps, RunReport, Sizes};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

fn error_report(e: &CheckError, limits: &Limits) -> (i32, RunReport) {
    let (code, verdict, cap_hit) = match e {
        CheckError::Resource(r) => (EXIT_RESOURCE, "resource-exceeded", Some(r.stage.as_str().to_string())),
        _ => (EXIT_USAGE, "error", None),
    };
    (
        code,
        RunReport {
            verdict: verdict.into(),
            engine: None,
            sizes: None,
            timings_ms: None,
            caps: Caps::from(limits),
            cap_hit,
            error: Some(e.to_string()),
            witness: None,
        },
    )
}

/// Runs the full pipeline and reports the outcome with its exit code.
pub fn run_check(g: &OpenCgs, f: &Formula, engine: Engine, limits: &Limits, timings: bool) -> (i32, RunReport) {
    match check_stages(g, f, engine, limits, timings) {
        Ok(r) => r,
        Err(e) => error_report(&e, limits),
    }
}

fn check_stages(
    g: &OpenCgs,
    f: &Formula,
    engine: Engine,
    limits: &Limits,
    timings: bool,
) -> Result<(i32, RunReport), CheckError> {
    let mut times = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, times: &mut BTreeMap<String, f64>| {
        let now = Instant::now();
        times.insert(name.to_string(), (now - clock).as_secs_f64() * 1e3);
        clock = now;
    };
    let (acg, used) = negated_acg(f, engine, limits)?;
    lap("acg", &mut times);
    let nta = acg_to_nta(&acg, g, limits)?;
    lap("nta", &mut times);
    let (result, positions, edges) = nta_emptiness(&nta, limits)?;
    lap("game", &mut times);
    let sizes = Sizes {
        acg_states: acg.state_count(),
        acg_atoms: acg.atom_count(),
        acg_index: acg.index(),
        basic_subformulas: acg.basics().len(),
        dpw_states: acg.dpw_sizes().iter().map(|&(a, b)| [a, b]).collect(),
        nta_states: nta.state_count(),
        nta_index: nta.index(),
        nta_transitions: nta.transition_count(),
        branch_checker_states: nta.checker_states,
        game_positions: positions,
        game_edges: edges,
    };
    let (code, verdict, witness) = match result {
        Emptiness::Empty => (EXIT_HOLDS, "holds", None),
        Emptiness::Nonempty(w) => {
            let validated = validate_counterexample(g, f, &w);
            lap("validate", &mut times);
            let mut rep = witness_report(g, &w, acg.basics(), validated);
            rep.dot = Some(witness_dot(g, &w));
            (EXIT_FAILS, "fails", Some(rep))
        }
    };
    Ok((
        code,
        RunReport {
            verdict: verdict.into(),
            engine: Some(used.as_str().into()),
            sizes: Some(sizes),
            timings_ms: timings.then_some(times),
            caps: Caps::from(limits),
            cap_hit: None,
            error: None,
            witness,
        },
    ))
}

/// Human-readable summary of a report.
pub fn summary(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{}", r.verdict);
    if let Some(e) = &r.engine {
        let _ = write!(out, " (engine {e})");
    }
    if let Some(err) = &r.error {
        let _ = write!(out, ": {err}");
    }
    if let Some(s) = &r.sizes {
        let _ = write!(
            out,
            "\nacg: {} states, {} atoms, index {}; nta: {} states, index {}; game: {} positions",
            s.acg_states, s.acg_atoms, s.acg_index, s.nta_states, s.nta_index, s.game_positions
        );
    }
    if let Some(w) = &r.witness {
        let _ = write!(
            out,
            "\ncounterexample: {} memory cells, validated: {}",
            w.cells.len(),
            w.validated
        );
        if let Some(p) = &w.pruning {
            for (s, ts) in p {
                let _ = write!(out, "\n  enabled({s}) = {{{}}}", ts.join(", "));
            }
        }
    }
    out
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct OracleReport {
    /// `violation`, `no-memoryless-violation`, `resource-exceeded` or
    /// `error`.
    pub verdict: String,
    pub pruning: Option<BTreeMap<String, Vec<String>>>,
    pub caps: Caps,
    pub error: Option<String>,
}

pub fn run_oracle(g: &OpenCgs, f: &Formula, limits: &Limits) -> (i32, OracleReport) {
    let mut rep = OracleReport {
        verdict: String::new(),
        pruning: None,
        caps: Caps::from(limits),
        error: None,
    };
    let code = match oracle_module_check(g, f, limits) {
        Ok(OracleVerdict::ViolationFound(p)) => {
            rep.verdict = "violation".into();
            rep.pruning = Some(pruning_json(g, &p));
            EXIT_FAILS
        }
        Ok(OracleVerdict::NoMemorylessViolation) => {
            rep.verdict = "no-memoryless-violation".into();
            EXIT_HOLDS
        }
        Err(e) => {
            let (code, r) = error_report(&e, limits);
            rep.verdict = r.verdict;
            rep.error = r.error;
            code
        }
    };
    (code, rep)
}

/// Intermediate constructions that can be dumped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DumpStage {
    Acg,
    Nbw,
    Dpw,
    Nta,
    Game,
}

/// Text of the requested construction for the negated formula.
pub fn dump(g: &OpenCgs, f: &Formula, stage: DumpStage, engine: Engine, limits: &Limits) -> Result<String, CheckError> {
    let mut out = String::new();
    match stage {
        DumpStage::Acg => {
            let (acg, _) = negated_acg(f, engine, limits)?;
            let _ = write!(out, "{}", acg.display_with(g.agents(), g.props()));
        }
        DumpStage::Nbw | DumpStage::Dpw => {
            let neg = to_existential(&Formula::not(f.clone()));
            let basics = basic_subformulas(&neg);
            for (i, b) in basics.entries().iter().enumerate() {
                let (Formula::Exists(_, body) | Formula::Forall(_, body)) = b else {
                    continue;
                };
                let psi = ltl_projection(body, &basics);
                let nbw = ltl_to_nbw(&psi, limits)?;
                let names: Vec<String> = nbw
                    .atoms()
                    .iter()
                    .map(|a| match a {
                        LtlAtom::Prop(p) => g.props()[p.0 as usize].clone(),
                        LtlAtom::Basic(j) => format!("b{j}"),
                    })
                    .collect();
                let _ = writeln!(out, "/* b{i} = {} */", b.display_with(g.agents(), g.props()));
                if stage == DumpStage::Nbw {
                    out.push_str(&nbw.to_hoa(&names));
                } else {
                    out.push_str(&nbw_to_dpw(&nbw, limits)?.to_hoa(&names));
                }
            }
        }
        DumpStage::Nta => {
            let (acg, _) = negated_acg(f, engine, limits)?;
            let nta = acg_to_nta(&acg, g, limits)?;
            let _ = writeln!(
                out,
                "nta: {} states, {} transitions, initial {}",
                nta.state_count(),
                nta.transition_count(),
                nta.initial
            );
            for (i, st) in nta.states.iter().enumerate() {
                let _ = writeln!(out, "state {i} color {}: {st:?}", nta.colors[i]);
                for t in &nta.transitions[i] {
                    let enabled: Vec<&str> = t.enabled.iter().map(|&s| g.state_name(s)).collect();
                    let children: Vec<String> = t
                        .children
                        .iter()
                        .map(|&(s, c)| format!("{}:{c}", g.state_name(s)))
                        .collect();
                    let _ = writeln!(
                        out,
                        "  enabled {{{}}} b={:#b} -> [{}]",
                        enabled.join(","),
                        t.blabel,
                        children.join(" ")
                    );
                }
            }
        }
        DumpStage::Game => {
            let (acg, _) = negated_acg(f, engine, limits)?;
            let nta = acg_to_nta(&acg, g, limits)?;
            let eg = emptiness_game(&nta, limits)?;
            let game = &eg.game;
            let _ = writeln!(out, "parity {};", game.position_count().saturating_sub(1));
            let _ = writeln!(out, "start {};", game.initial());
            for v in 0..game.position_count() as u32 {
                let owner = match game.owner(v) {
                    modcheck_core::Player::Automaton => 0,
                    modcheck_core::Player::Pathfinder => 1,
                };
                let succ: Vec<String> = game.successors(v).iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{v} {} {owner} {};", game.color(v), succ.join(","));
            }
        }
    }
    Ok(out)
}
