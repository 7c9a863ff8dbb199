//! Seeded random instances for the test suites.

use std::fmt::Write as _;

use modcheck_core::logic::{Formula, Ltl};
use modcheck_core::{parse_cgs, OpenCgs, ParityGame, Player};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random open structure over agents `sys` and `env`, propositions `p`
/// and `q`, with `1..=max_states` states and `1..=max_actions` actions.
///
/// Each state is either owned by the environment (only `env` chooses) or
/// environment-passive (only `sys` chooses). With `env_free`, every state is
/// passive.
pub fn random_cgs(rng: &mut impl Rng, max_states: usize, max_actions: usize, env_free: bool) -> OpenCgs {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=max_actions);
    let actions: Vec<String> = (0..k).map(|i| format!("a{i}")).collect();
    let mut text = String::new();
    let _ = writeln!(text, "agents: sys env");
    let _ = writeln!(text, "actions: {}", actions.join(" "));
    let _ = writeln!(text, "props: p q");
    let _ = writeln!(text, "init: s0");
    for s in 0..n {
        let props: Vec<&str> = ["p", "q"].into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let env_owned = !env_free && rng.gen_bool(0.5);
        let _ = writeln!(text, "state s{s} {{{}}}", props.join(" "));
        // At least one action of the chooser is defined.
        let first = rng.gen_range(0..k);
        for (i, a) in actions.iter().enumerate() {
            if i != first && rng.gen_bool(0.25) {
                continue;
            }
            let t = rng.gen_range(0..n);
            let (sys, env) = if env_owned {
                ("a0", a.as_str())
            } else {
                (a.as_str(), "a0")
            };
            let _ = writeln!(text, "  (sys={sys}, env={env}) -> s{t}");
        }
    }
    parse_cgs(&text).expect("generated model is well formed")
}

const COALITIONS: [u64; 4] = [0b00, 0b01, 0b10, 0b11];

fn random_state(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..5) {
            0 => Formula::True,
            1 | 2 => Formula::prop(0),
            _ => Formula::prop(1),
        };
    }
    let ag = modcheck_core::cgs::AgentSet(*COALITIONS.choose(rng).expect("nonempty"));
    let path = match rng.gen_range(0..4) {
        0 => Formula::next(random_state(rng, depth - 1)),
        1 => Formula::until(random_state(rng, depth - 1), random_state(rng, depth - 1)),
        2 => Formula::eventually(random_state(rng, depth - 1)),
        _ => Formula::always(random_state(rng, depth - 1)),
    };
    match rng.gen_range(0..6) {
        0 => Formula::not(random_state(rng, depth - 1)),
        1 => Formula::and(random_state(rng, depth - 1), random_state(rng, depth - 1)),
        2 => Formula::or(random_state(rng, depth - 1), random_state(rng, depth - 1)),
        3 => Formula::forall(ag, path),
        _ => Formula::exists(ag, path),
    }
}

/// `count` distinct ATL formulas over `p`, `q` and agents `sys`, `env`
/// with at most `max_size` AST nodes.
pub fn random_atl_formulas(rng: &mut impl Rng, count: usize, max_size: usize) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    while out.len() < count {
        let f = random_state(rng, 3);
        if f.size() <= max_size && f.is_state_formula() && !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// A random game with `1..=max_positions` positions and colors below
/// `colors`; every position has at least one successor.
pub fn random_game(rng: &mut impl Rng, max_positions: usize, colors: u32) -> ParityGame {
    let n = rng.gen_range(1..=max_positions);
    let mut g = ParityGame::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) {
            Player::Automaton
        } else {
            Player::Pathfinder
        };
        g.add_position(owner, rng.gen_range(0..colors));
    }
    for v in 0..n as u32 {
        let first = rng.gen_range(0..n as u32);
        g.add_edge(v, first);
        for w in 0..n as u32 {
            if rng.gen_bool(0.25) {
                g.add_edge(v, w);
            }
        }
    }
    g
}

/// A fixed suite of LTL formulas over two atoms.
pub fn ltl_suite() -> Vec<Ltl> {
    let (a, b) = (Ltl::prop(0), Ltl::prop(1));
    let f = Ltl::eventually;
    let g = Ltl::always;
    let x = Ltl::next;
    vec![
        a.clone(),
        Ltl::not(a.clone()),
        x(a.clone()),
        f(a.clone()),
        g(a.clone()),
        g(f(a.clone())),
        f(g(a.clone())),
        Ltl::not(f(g(a.clone()))),
        Ltl::until(a.clone(), b.clone()),
        Ltl::release(a.clone(), b.clone()),
        Ltl::and(g(f(a.clone())), g(f(b.clone()))),
        Ltl::or(f(g(a.clone())), g(f(b.clone()))),
        Ltl::or(f(g(a.clone())), f(g(b.clone()))),
        g(Ltl::or(Ltl::not(a.clone()), f(b.clone()))),
        g(Ltl::or(Ltl::not(a.clone()), x(b.clone()))),
        Ltl::until(a.clone(), g(b.clone())),
        f(Ltl::and(a.clone(), x(Ltl::not(a.clone())))),
        Ltl::and(f(g(a.clone())), g(f(Ltl::not(b.clone())))),
        Ltl::or(g(f(a.clone())), f(g(Ltl::not(a.clone())))),
        x(x(Ltl::until(b.clone(), a.clone()))),
        Ltl::until(Ltl::until(a.clone(), b.clone()), a.clone()),
        f(g(Ltl::or(a.clone(), x(b.clone())))),
        Ltl::release(Ltl::not(a.clone()), f(b.clone())),
        g(Ltl::or(a.clone(), f(g(b)))),
        Ltl::True,
        Ltl::False,
    ]
}

/// Calls `visit(stem, loop)` for every lasso over `atoms` atoms with
/// `stem.len() + loop.len() <= max_len`.
pub fn for_each_lasso(atoms: usize, max_len: usize, mut visit: impl FnMut(&[u64], &[u64])) {
    let letters = 1u64 << atoms;
    for total in 1..=max_len {
        let mut word = vec![0u64; total];
        loop {
            for split in 0..total {
                visit(&word[..split], &word[split..]);
            }
            let mut i = 0;
            while i < total {
                word[i] += 1;
                if word[i] < letters {
                    break;
                }
                word[i] = 0;
                i += 1;
            }
            if i == total {
                break;
            }
        }
    }
}
