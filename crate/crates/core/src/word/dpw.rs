use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::lasso_next;
use super::nbw::{write_aps, Nbw};
use super::safra::Determinizer;
use crate::error::{ResourceError, Stage};
use crate::limits::Limits;
use crate::logic::LtlAtom;

/// Largest alphabet (in atoms) for which the transition table is tabulated.
const MAX_DPW_ATOMS: usize = 16;

/// Deterministic parity word automaton with an explicit transition table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dpw {
    atoms: Vec<LtlAtom>,
    init: u32,
    delta: Vec<u32>,
    colors: Vec<u32>,
}

impl Dpw {
    /// Builds an automaton from a row-major table (`delta[s * 2^k + letter]`).
    pub fn new(atoms: Vec<LtlAtom>, init: u32, delta: Vec<u32>, colors: Vec<u32>) -> Dpw {
        let letters = 1usize << atoms.len();
        assert_eq!(delta.len(), colors.len() * letters, "table must be total");
        assert!(delta.iter().all(|&t| (t as usize) < colors.len()));
        Dpw {
            atoms,
            init,
            delta,
            colors,
        }
    }

    pub fn atoms(&self) -> &[LtlAtom] {
        &self.atoms
    }

    pub fn state_count(&self) -> usize {
        self.colors.len()
    }

    pub fn letter_count(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn initial(&self) -> u32 {
        self.init
    }

    pub fn step(&self, state: u32, letter: u64) -> u32 {
        self.delta[state as usize * self.letter_count() + letter as usize]
    }

    pub fn color(&self, state: u32) -> u32 {
        self.colors[state as usize]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    /// Number of distinct colors.
    pub fn index(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Same structure with every color shifted by one.
    pub fn complement(&self) -> Dpw {
        Dpw {
            atoms: self.atoms.clone(),
            init: self.init,
            delta: self.delta.clone(),
            colors: self.colors.iter().map(|c| c + 1).collect(),
        }
    }

    pub fn lasso_accepts(&self, stem: &[u64], lp: &[u64]) -> bool {
        assert!(!lp.is_empty(), "lasso loop must be nonempty");
        let mut s = self.init;
        for &l in stem {
            s = self.step(s, l);
        }
        // Visit (state, loop offset) pairs until one repeats.
        let mut seen: BTreeMap<(u32, usize), usize> = BTreeMap::new();
        let mut trace = Vec::new();
        let mut i = 0;
        loop {
            if let Some(&start) = seen.get(&(s, i)) {
                let top = trace[start..].iter().map(|&t| self.color(t)).max().unwrap_or(0);
                return top % 2 == 0;
            }
            seen.insert((s, i), trace.len());
            s = self.step(s, lp[i]);
            trace.push(s);
            i = lasso_next(i, 0, lp.len());
        }
    }

    /// Merges colors that are adjacent in the sorted list of used colors and
    /// share parity, then renumbers from 0 or 1.
    fn normalize(&mut self) {
        let mut used = self.colors.clone();
        used.sort_unstable();
        used.dedup();
        let mut map = BTreeMap::new();
        let mut current = used.first().map_or(0, |c| c % 2);
        for (i, &c) in used.iter().enumerate() {
            if i > 0 && c % 2 != used[i - 1] % 2 {
                current += 1;
            }
            map.insert(c, current);
        }
        for c in self.colors.iter_mut() {
            *c = map[c];
        }
    }

    pub fn to_hoa(&self, names: &[String]) -> String {
        let mut out = String::new();
        let max = self.colors.iter().copied().max().unwrap_or(0);
        let _ = writeln!(out, "HOA: v1");
        let _ = writeln!(out, "States: {}", self.state_count());
        let _ = writeln!(out, "Start: {}", self.init);
        write_aps(&mut out, &self.atoms, names);
        let _ = writeln!(out, "Acceptance: {} parity max even {}", max + 1, max + 1);
        let _ = writeln!(out, "--BODY--");
        let k = self.atoms.len();
        for s in 0..self.state_count() as u32 {
            let _ = writeln!(out, "State: {s} {{{}}}", self.color(s));
            for letter in 0..self.letter_count() as u64 {
                let _ = writeln!(out, "  [{}] {}", letter_text(letter, k), self.step(s, letter));
            }
        }
        let _ = writeln!(out, "--END--");
        out
    }
}

fn letter_text(letter: u64, k: usize) -> String {
    if k == 0 {
        return "t".into();
    }
    let parts: Vec<String> = (0..k)
        .map(|i| {
            if letter >> i & 1 == 1 {
                alloc::format!("{i}")
            } else {
                alloc::format!("!{i}")
            }
        })
        .collect();
    parts.join("&")
}

impl fmt::Display for Dpw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hoa(&[]))
    }
}

/// Determinizes a Büchi automaton. Deterministic inputs are copied with
/// colors 2 on accepting and 1 on other states.
pub fn nbw_to_dpw(n: &Nbw, limits: &Limits) -> Result<Dpw, ResourceError> {
    let k = n.atoms().len();
    if k > MAX_DPW_ATOMS {
        return Err(ResourceError {
            stage: Stage::Dpw,
            limit: MAX_DPW_ATOMS,
        });
    }
    let letters = 1u64 << k;
    let mut dpw = if n.is_deterministic() {
        Limits::check(limits.max_dpw_states, Stage::Dpw, n.state_count())?;
        let mut delta = Vec::with_capacity(n.state_count() * letters as usize);
        for q in 0..n.state_count() {
            for l in 0..letters {
                let t = n.successors(q, l).next().expect("completed automaton is total");
                delta.push(t);
            }
        }
        let colors = (0..n.state_count())
            .map(|q| if n.is_accepting(q) { 2 } else { 1 })
            .collect();
        Dpw::new(n.atoms().to_vec(), n.initial_states()[0], delta, colors)
    } else {
        let mut det = Determinizer::new(n, limits);
        let mut delta = Vec::new();
        let mut s = 0;
        while (s as usize) < det.state_count() {
            for l in 0..letters {
                delta.push(det.step(s, &l)?);
            }
            s += 1;
        }
        let colors = (0..det.state_count() as u32).map(|s| det.color(s)).collect();
        Dpw::new(n.atoms().to_vec(), 0, delta, colors)
    };
    dpw.normalize();
    Ok(dpw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Ltl;
    use crate::word::ltl_to_nbw;
    use crate::word::nbw::tests::for_each_lasso;

    fn dpw(f: &Ltl) -> Dpw {
        nbw_to_dpw(&ltl_to_nbw(f, &Limits::default()).unwrap(), &Limits::default()).unwrap()
    }

    #[test]
    fn deterministic_input_keeps_states() {
        // G F p has a deterministic tableau: two states, one accepting.
        let f = Ltl::always(Ltl::eventually(Ltl::prop(0)));
        let n = ltl_to_nbw(&f, &Limits::default()).unwrap();
        let d = nbw_to_dpw(&n, &Limits::default()).unwrap();
        if n.is_deterministic() {
            assert_eq!(d.state_count(), n.state_count());
            assert_eq!(d.index(), 2);
        }
        assert!(d.lasso_accepts(&[], &[0, 1]));
        assert!(!d.lasso_accepts(&[1], &[0]));
    }

    #[test]
    fn complement_of_true_is_empty() {
        let d = dpw(&Ltl::True);
        assert_eq!(d.state_count(), 1);
        assert!(d.lasso_accepts(&[], &[0]));
        assert!(!d.complement().lasso_accepts(&[], &[0]));
    }

    #[test]
    fn eventually_always_needs_determinization() {
        let f = Ltl::eventually(Ltl::always(Ltl::prop(0)));
        let d = dpw(&f);
        let c = d.complement();
        for_each_lasso(1, 6, |stem, lp| {
            let expected = lp.iter().all(|&l| l == 1);
            assert_eq!(d.lasso_accepts(stem, lp), expected, "{stem:?} {lp:?}");
            assert_eq!(c.lasso_accepts(stem, lp), !expected);
        });
    }

    #[test]
    fn normalized_colors_start_low() {
        let d = dpw(&Ltl::eventually(Ltl::prop(0)));
        assert!(d.colors().iter().all(|&c| c <= 2));
    }
}
