//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use modcheck::gen::{for_each_lasso, ltl_suite, random_atl_formulas, random_cgs, random_game};
use modcheck_core::acg::plain_letters;
use modcheck_core::cgs::AgentSet;
use modcheck_core::emptiness::acg_to_nta;
use modcheck_core::logic::LtlAtom;
use modcheck_core::oracle::ltl_lasso_holds;
use modcheck_core::word::{ltl_to_nbw, nbw_to_dpw};
use modcheck_core::{
    atl_to_acg, atlstar_to_acg, brute_solve, fixpoint_model_check, membership_game, module_check, oracle_module_check,
    parse_cgs, parse_formula, solve, to_nnf, CheckError, CheckOptions, CheckOutcome, Engine, Formula, Limits, OpenCgs,
    OracleVerdict, Player, StateId, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODELS: usize = 500;
const FORMULAS: usize = 50;
const FORMULA_SIZE: usize = 6;
const GAMES: usize = 1000;
const ENV_FREE_MODELS: usize = 200;
const TIME_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Fails verdicts seen so far and how many of them validated.
#[derive(Default)]
struct FailTally {
    total: usize,
    validated: usize,
}

impl FailTally {
    fn record(&mut self, out: &CheckOutcome) {
        if let Verdict::Fails { validated, .. } = &out.verdict {
            self.total += 1;
            self.validated += *validated as usize;
        }
    }
}

fn family() -> (Vec<OpenCgs>, Vec<Formula>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let models = (0..MODELS).map(|_| random_cgs(&mut rng, 5, 2, false)).collect();
    let formulas = random_atl_formulas(&mut rng, FORMULAS, FORMULA_SIZE);
    (models, formulas)
}

fn oracle_equivalence(
    models: &[OpenCgs],
    formulas: &[Formula],
    tally: &mut FailTally,
    anchors: &mut Vec<String>,
) -> Outcome {
    let start = Instant::now();
    let limits = Limits::default();
    let mut bad = Vec::new();
    let (mut fails, mut violations) = (0, 0);
    for (i, g) in models.iter().enumerate() {
        for f in formulas {
            let out = module_check(g, f, &CheckOptions::default()).expect("ATL check within caps");
            let oracle = oracle_module_check(g, f, &limits).expect("oracle within caps");
            tally.record(&out);
            fails += !out.holds() as usize;
            let violation = matches!(oracle, OracleVerdict::ViolationFound(_));
            violations += violation as usize;
            if violation && out.holds() {
                bad.push(format!("model {i}: {:?}", f));
            }
            // Holds implies plain model checking holds on the unwinding.
            if out.holds() && !fixpoint_model_check(g, f).unwrap().contains(g.init().index()) {
                anchors.push(format!("model {i}: {:?}", f));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && elapsed < TIME_BUDGET;
    Outcome {
        name: "oracle equivalence (ATL)",
        pass,
        detail: format!(
            "{} models x {} formulas, {fails} fails, {violations} memoryless violations, {} discrepancies, {:.1}s{}",
            models.len(),
            formulas.len(),
            bad.len(),
            elapsed.as_secs_f64(),
            first(&bad)
        ),
    }
}

/// The same structure with a different initial state.
fn rooted_at(g: &OpenCgs, s: StateId) -> OpenCgs {
    let states = g.states().map(|t| (g.state_name(t).to_string(), g.label(t))).collect();
    let rows = g.states().map(|t| g.row(t).to_vec()).collect();
    g.with_rows(states, s, rows).expect("same rows")
}

fn membership_agreement(models: &[OpenCgs], formulas: &[Formula]) -> Outcome {
    let limits = Limits::default();
    let mut bad = Vec::new();
    let mut checked = 0;
    for (i, g) in models.iter().enumerate() {
        let roots: Vec<OpenCgs> = g.states().map(|s| rooted_at(g, s)).collect();
        for f in formulas {
            let acg = atl_to_acg(&to_nnf(f), &limits).expect("ATL formula");
            let expected = fixpoint_model_check(g, f).unwrap();
            for (s, h) in roots.iter().enumerate() {
                let m = membership_game(&acg, h, &plain_letters(h), &limits).expect("game within caps");
                let accepted = solve(&m.game).winner(m.game.initial()) == Player::Automaton;
                checked += 1;
                if accepted != expected.contains(s) {
                    bad.push(format!("model {i} state {s}: {:?}", f));
                }
            }
        }
    }
    Outcome {
        name: "membership/fixpoint agreement",
        pass: bad.is_empty(),
        detail: format!(
            "{checked} (state, formula) pairs, {} discrepancies{}",
            bad.len(),
            first(&bad)
        ),
    }
}

fn word_oracles() -> Outcome {
    let limits = Limits::default();
    let reference = [
        LtlAtom::Prop(modcheck_core::cgs::PropId(0)),
        LtlAtom::Prop(modcheck_core::cgs::PropId(1)),
    ];
    let suite = ltl_suite();
    let mut bad = Vec::new();
    let mut lassos = 0usize;
    for (i, f) in suite.iter().enumerate() {
        let nbw = ltl_to_nbw(f, &limits).expect("nbw within caps");
        let dpw = nbw_to_dpw(&nbw, &limits).expect("dpw within caps");
        let comp = dpw.complement();
        // Translate reference letters to the automaton's atom order.
        let remap = |w: &[u64], atoms: &[LtlAtom]| -> Vec<u64> {
            w.iter()
                .map(|&l| {
                    atoms.iter().enumerate().fold(0, |acc, (j, a)| {
                        let bit = reference.iter().position(|r| r == a).expect("atom over p0, p1");
                        acc | (l >> bit & 1) << j
                    })
                })
                .collect()
        };
        let mut errors = [0usize; 3];
        for_each_lasso(2, 6, |stem, lp| {
            lassos += 1;
            let truth = ltl_lasso_holds(f, &reference, stem, lp);
            let (ns, nl) = (remap(stem, nbw.atoms()), remap(lp, nbw.atoms()));
            let (ds, dl) = (remap(stem, dpw.atoms()), remap(lp, dpw.atoms()));
            errors[0] += (nbw.lasso_accepts(&ns, &nl) != truth) as usize;
            errors[1] += (dpw.lasso_accepts(&ds, &dl) != truth) as usize;
            errors[2] += (comp.lasso_accepts(&ds, &dl) == truth) as usize;
        });
        for (stage, &e) in ["nbw", "dpw", "complement"].iter().zip(&errors) {
            if e > 0 {
                bad.push(format!("formula {i} {stage}: {e} lassos"));
            }
        }
    }
    Outcome {
        name: "word-level oracles",
        pass: bad.is_empty(),
        detail: format!(
            "{} formulas, {lassos} lasso checks per stage, {} discrepancies{}",
            suite.len(),
            bad.len(),
            first(&bad)
        ),
    }
}

fn parity_games() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut bad = Vec::new();
    for i in 0..GAMES {
        let game = random_game(&mut rng, 8, 4);
        let sol = solve(&game);
        let exact = brute_solve(&game, 8).expect("at most 8 positions");
        if (0..game.position_count()).any(|v| sol.winner(v as u32) != exact[v]) {
            bad.push(format!("game {i}"));
        }
    }
    Outcome {
        name: "parity-game solver",
        pass: bad.is_empty(),
        detail: format!("{GAMES} games, {} discrepancies{}", bad.len(), first(&bad)),
    }
}

fn corpus() -> Vec<(String, OpenCgs, Formula)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let list = std::fs::read_to_string(dir.join("formulas.txt")).expect("corpus list");
    list.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (model, formula) = l.split_once('\t').expect("model<TAB>formula");
            let text = std::fs::read_to_string(dir.join(model)).expect("corpus model");
            let g = parse_cgs(&text).expect("corpus model parses");
            let f = parse_formula(formula, &g).expect("corpus formula parses");
            (format!("{model}: {formula}"), g, f)
        })
        .collect()
}

fn engine_agreement(tally: &mut FailTally) -> Outcome {
    let mut bad = Vec::new();
    let mut caps = Vec::new();
    let entries = corpus();
    for (name, g, f) in &entries {
        let atl = module_check(
            g,
            f,
            &CheckOptions {
                engine: Engine::Atl,
                ..CheckOptions::default()
            },
        );
        let star = module_check(
            g,
            f,
            &CheckOptions {
                engine: Engine::AtlStar,
                ..CheckOptions::default()
            },
        );
        match (atl, star) {
            (Ok(a), Ok(b)) => {
                tally.record(&a);
                tally.record(&b);
                if a.holds() != b.holds() {
                    bad.push(name.clone());
                }
            }
            (Err(CheckError::Resource(r)), _) | (_, Err(CheckError::Resource(r))) => {
                caps.push(format!("{name} ({})", r.stage.as_str()));
            }
            (Err(e), _) | (_, Err(e)) => bad.push(format!("{name}: {e}")),
        }
    }
    Outcome {
        name: "engine agreement",
        pass: bad.is_empty(),
        detail: format!(
            "{} corpus formulas, {} discrepancies, {} cap hits reported{}{}",
            entries.len(),
            bad.len(),
            caps.len(),
            first(&bad),
            first(&caps)
        ),
    }
}

fn counterexample_validity(tally: &FailTally) -> Outcome {
    let text =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/g_vend.cgs")).expect("g_vend");
    let g = parse_cgs(&text).unwrap();
    let f = parse_formula("[[env]] G <<sys,env>> F p", &g).unwrap();
    let out = module_check(&g, &f, &CheckOptions::default()).expect("within caps");
    let pruning = out.witness().and_then(|w| w.as_pruning(&g));
    let (s0, sq) = (g.state_by_name("s0").unwrap(), g.state_by_name("sq").unwrap());
    let exact = pruning
        .as_ref()
        .is_some_and(|p| p.enabled.len() == 1 && p.enabled.get(&s0) == Some(&vec![sq]));
    let vend_valid = matches!(out.verdict, Verdict::Fails { validated: true, .. });
    Outcome {
        name: "counterexample validity",
        pass: tally.validated == tally.total && exact && vend_valid,
        detail: format!(
            "{}/{} fails validated; G_vend pruning {}",
            tally.validated,
            tally.total,
            match &pruning {
                Some(p) => format!(
                    "{:?}",
                    p.enabled
                        .iter()
                        .map(|(s, ts)| (
                            g.state_name(*s),
                            ts.iter().map(|&t| g.state_name(t)).collect::<Vec<_>>()
                        ))
                        .collect::<Vec<_>>()
                ),
                None => "missing".into(),
            }
        ),
    }
}

fn semantic_anchors(formulas: &[Formula], anchors: &[String], tally: &mut FailTally) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut bad = Vec::new();
    for i in 0..ENV_FREE_MODELS {
        let g = random_cgs(&mut rng, 5, 2, true);
        for f in formulas {
            let out = module_check(&g, f, &CheckOptions::default()).expect("within caps");
            tally.record(&out);
            if out.holds() != fixpoint_model_check(&g, f).unwrap().contains(g.init().index()) {
                bad.push(format!("env-free model {i}: {:?}", f));
            }
        }
    }
    Outcome {
        name: "known-semantics anchors",
        pass: anchors.is_empty() && bad.is_empty(),
        detail: format!(
            "{} holds-but-model-check-fails, {} env-free mismatches over {ENV_FREE_MODELS} models{}{}",
            anchors.len(),
            bad.len(),
            first(anchors),
            first(&bad)
        ),
    }
}

fn size_shape(formulas: &[Formula]) -> Outcome {
    let limits = Limits::default();
    let mut bad = Vec::new();
    for f in formulas {
        let acg = atl_to_acg(&to_nnf(f), &limits).expect("ATL formula");
        if acg.index() > 2 || acg.state_count() > f.size() {
            bad.push(format!(
                "{:?}: index {}, {} states, size {}",
                f,
                acg.index(),
                acg.state_count(),
                f.size()
            ));
        }
    }
    // <<sys>> F^m p read literally as an ATL* formula, negated as the checker
    // does, over the vending machine.
    let text =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/g_vend.cgs")).expect("g_vend");
    let g = parse_cgs(&text).unwrap();
    let sys = AgentSet::singleton(g.agent_by_name("sys").unwrap());
    let mut points = Vec::new();
    for m in 1..=4 {
        let mut body = Formula::prop(0);
        for _ in 0..m {
            body = Formula::eventually(body);
        }
        let neg = Formula::not(Formula::exists(sys, body));
        let acg = atlstar_to_acg(&neg, &limits).expect("within caps");
        let nta = acg_to_nta(&acg, &g, &limits).expect("within caps");
        let measure = acg.index() * acg.state_count();
        points.push((m, measure, nta.index()));
    }
    // Fit c from the first point and require every later point below c * x^2
    // with x growing monotonically.
    let (_, x0, y0) = points[0];
    let c = y0 as f64 / (x0 * x0) as f64;
    let fit = points.windows(2).all(|w| w[1].1 >= w[0].1)
        && points.iter().all(|&(_, x, y)| y as f64 <= c * (x * x) as f64 + 1e-9);
    if !fit {
        bad.push(format!("F^m points (m, k|Q|, nta index) {points:?}"));
    }
    Outcome {
        name: "size-shape sanity",
        pass: bad.is_empty(),
        detail: format!(
            "{} ATL ACGs checked; F^m points (m, k|Q|, nta index) {points:?}{}",
            formulas.len(),
            first(&bad)
        ),
    }
}

fn first(items: &[String]) -> String {
    items.first().map(|s| format!("; first: {s}")).unwrap_or_default()
}

fn main() {
    let (models, formulas) = family();
    let mut tally = FailTally::default();
    let mut anchors = Vec::new();
    let mut results = vec![
        oracle_equivalence(&models, &formulas, &mut tally, &mut anchors),
        membership_agreement(&models, &formulas),
        word_oracles(),
        parity_games(),
    ];
    let agreement = engine_agreement(&mut tally);
    let semantics = semantic_anchors(&formulas, &anchors, &mut tally);
    results.push(counterexample_validity(&tally));
    results.push(agreement);
    results.push(semantics);
    results.push(size_shape(&formulas));
    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        println!(
            "{} {}. {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            i + 1,
            r.name,
            r.detail
        );
        failed += !r.pass as usize;
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
