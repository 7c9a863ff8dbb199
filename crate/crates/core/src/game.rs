//! Two-player parity games under the max-parity convention.
//!
//! The Automaton player wins a play iff the highest color occurring
//! infinitely often is even.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ResourceError, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    /// The even player.
    Automaton,
    /// The odd player.
    Pathfinder,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Automaton => Player::Pathfinder,
            Player::Pathfinder => Player::Automaton,
        }
    }

    /// The player favored by a color.
    pub fn of_color(color: u32) -> Player {
        if color.is_multiple_of(2) {
            Player::Automaton
        } else {
            Player::Pathfinder
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Player::Automaton => "automaton",
            Player::Pathfinder => "pathfinder",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParityGame {
    owner: Vec<Player>,
    color: Vec<u32>,
    succ: Vec<Vec<u32>>,
    initial: u32,
}

impl ParityGame {
    pub fn new() -> ParityGame {
        ParityGame::default()
    }

    pub fn add_position(&mut self, owner: Player, color: u32) -> u32 {
        self.owner.push(owner);
        self.color.push(color);
        self.succ.push(Vec::new());
        (self.owner.len() - 1) as u32
    }

    /// Adds an edge; duplicate edges are ignored.
    pub fn add_edge(&mut self, from: u32, to: u32) {
        let s = &mut self.succ[from as usize];
        if !s.contains(&to) {
            s.push(to);
        }
    }

    pub fn set_initial(&mut self, v: u32) {
        self.initial = v;
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn position_count(&self) -> usize {
        self.owner.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn owner(&self, v: u32) -> Player {
        self.owner[v as usize]
    }

    pub fn color(&self, v: u32) -> u32 {
        self.color[v as usize]
    }

    pub fn successors(&self, v: u32) -> &[u32] {
        &self.succ[v as usize]
    }

    /// Positions without outgoing edges, which a valid game must not have.
    pub fn dead_ends(&self) -> Vec<u32> {
        (0..self.position_count() as u32)
            .filter(|&v| self.succ[v as usize].is_empty())
            .collect()
    }

    /// Routes every dead end to a self-looping sink won by the opponent of
    /// its owner.
    pub fn close_dead_ends(&mut self) {
        let dead = self.dead_ends();
        let mut sinks: [Option<u32>; 2] = [None, None];
        for v in dead {
            let loser = self.owner(v);
            let idx = loser as usize;
            let sink = match sinks[idx] {
                Some(s) => s,
                None => {
                    let color = match loser {
                        Player::Automaton => 1,
                        Player::Pathfinder => 0,
                    };
                    let s = self.add_position(loser.opponent(), color);
                    self.add_edge(s, s);
                    sinks[idx] = Some(s);
                    s
                }
            };
            self.add_edge(v, sink);
        }
    }

    fn predecessors(&self) -> Vec<Vec<u32>> {
        let mut pred = vec![Vec::new(); self.position_count()];
        for (v, ss) in self.succ.iter().enumerate() {
            for &w in ss {
                pred[w as usize].push(v as u32);
            }
        }
        pred
    }
}

/// Winning regions with a positional strategy for each player on the
/// positions it owns and wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    winner: Vec<Player>,
    strategy: Vec<Option<u32>>,
}

impl Solution {
    pub fn winner(&self, v: u32) -> Player {
        self.winner[v as usize]
    }

    pub fn winners(&self) -> &[Player] {
        &self.winner
    }

    /// The chosen successor at a position owned and won by the same player.
    pub fn strategy(&self, v: u32) -> Option<u32> {
        self.strategy[v as usize]
    }
}

struct Solver<'g> {
    game: &'g ParityGame,
    pred: Vec<Vec<u32>>,
    strategy: Vec<Option<u32>>,
}

impl Solver<'_> {
    /// Attractor of `target` for `player` inside `sub`, recording attracting
    /// moves for `player` on the added positions.
    fn attractor(&mut self, player: Player, target: &[u32], sub: &[bool]) -> Vec<bool> {
        let g = self.game;
        let n = g.position_count();
        let mut inside = vec![false; n];
        let mut count = vec![0usize; n];
        let mut queue: Vec<u32> = Vec::new();
        for &t in target {
            inside[t as usize] = true;
        }
        queue.extend(target.iter().copied());
        let mut head = 0;
        while head < queue.len() {
            let w = queue[head];
            head += 1;
            for &v in &self.pred[w as usize] {
                let vi = v as usize;
                if !sub[vi] || inside[vi] {
                    continue;
                }
                if g.owner(v) == player {
                    // Lowest-index move into positions attracted before `v`;
                    // choices only point backwards, so they reach the target.
                    self.strategy[vi] = g.succ[vi].iter().copied().filter(|&u| inside[u as usize]).min();
                    inside[vi] = true;
                    queue.push(v);
                } else {
                    if count[vi] == 0 {
                        count[vi] = g.succ[vi].iter().filter(|&&u| sub[u as usize]).count();
                    }
                    count[vi] -= 1;
                    if count[vi] == 0 {
                        inside[vi] = true;
                        queue.push(v);
                    }
                }
            }
        }
        inside
    }

    /// Returns the positions of `sub` won by the Automaton player.
    fn zielonka(&mut self, sub: &[bool]) -> Vec<bool> {
        let g = self.game;
        let n = g.position_count();
        let members: Vec<u32> = (0..n as u32).filter(|&v| sub[v as usize]).collect();
        if members.is_empty() {
            return vec![false; n];
        }
        let d = members.iter().map(|&v| g.color(v)).max().unwrap_or(0);
        let p = Player::of_color(d);
        let top: Vec<u32> = members.iter().copied().filter(|&v| g.color(v) == d).collect();
        let a = self.attractor(p, &top, sub);
        for &v in &top {
            if g.owner(v) == p {
                self.strategy[v as usize] = g.succ[v as usize].iter().copied().filter(|&u| sub[u as usize]).min();
            }
        }
        let rest: Vec<bool> = (0..n).map(|v| sub[v] && !a[v]).collect();
        let even_rest = self.zielonka(&rest);
        let opp_rest: Vec<u32> = (0..n as u32)
            .filter(|&v| rest[v as usize] && (even_rest[v as usize] != (p == Player::Automaton)))
            .collect();
        if opp_rest.is_empty() {
            // `p` wins everything; strategies on `rest` and `a` are in place.
            return if p == Player::Automaton {
                sub.to_vec()
            } else {
                vec![false; n]
            };
        }
        let b = self.attractor(p.opponent(), &opp_rest, sub);
        let remaining: Vec<bool> = (0..n).map(|v| sub[v] && !b[v]).collect();
        let even_remaining = self.zielonka(&remaining);
        (0..n)
            .map(|v| {
                if !sub[v] {
                    false
                } else if b[v] {
                    p.opponent() == Player::Automaton
                } else {
                    even_remaining[v]
                }
            })
            .collect()
    }
}

/// Solves a game with Zielonka's recursive algorithm.
///
/// # Panics
///
/// If some position has no successor.
pub fn solve(game: &ParityGame) -> Solution {
    assert!(game.dead_ends().is_empty(), "parity game has dead ends");
    let n = game.position_count();
    let mut solver = Solver {
        game,
        pred: game.predecessors(),
        strategy: vec![None; n],
    };
    let even = solver.zielonka(&vec![true; n]);
    let winner: Vec<Player> = even
        .iter()
        .map(|&e| if e { Player::Automaton } else { Player::Pathfinder })
        .collect();
    let strategy = (0..n)
        .map(|v| {
            let owner = game.owner[v];
            if winner[v] != owner {
                return None;
            }
            match solver.strategy[v] {
                Some(s) if winner[s as usize] == owner => Some(s),
                _ => game.succ[v].iter().copied().find(|&s| winner[s as usize] == owner),
            }
        })
        .collect();
    Solution { winner, strategy }
}

/// Winner of the play from `start` when both players follow positional
/// strategies (`choice[v]` is the successor taken at `v`).
pub fn play_winner(game: &ParityGame, choice: &[u32], start: u32) -> Player {
    let mut seen = vec![usize::MAX; game.position_count()];
    let mut trace = Vec::new();
    let mut v = start;
    while seen[v as usize] == usize::MAX {
        seen[v as usize] = trace.len();
        trace.push(v);
        v = choice[v as usize];
    }
    let top = trace[seen[v as usize]..]
        .iter()
        .map(|&u| game.color(u))
        .max()
        .unwrap_or(0);
    Player::of_color(top)
}

/// Exact winners by enumerating all pairs of positional strategies.
pub fn brute_solve(game: &ParityGame, cap: usize) -> Result<Vec<Player>, ResourceError> {
    let n = game.position_count();
    if n > cap {
        return Err(ResourceError {
            stage: Stage::Game,
            limit: cap,
        });
    }
    assert!(game.dead_ends().is_empty(), "parity game has dead ends");
    let of = |p: Player| -> Vec<usize> { (0..n).filter(|&v| game.owner[v] == p).collect() };
    let (mine, theirs) = (of(Player::Automaton), of(Player::Pathfinder));
    let mut result = vec![Player::Pathfinder; n];
    let mut choice: Vec<u32> = game.succ.iter().map(|s| s[0]).collect();
    let mut sigma = vec![0usize; mine.len()];
    loop {
        for (i, &v) in mine.iter().enumerate() {
            choice[v] = game.succ[v][sigma[i]];
        }
        // Positions from which every opponent strategy loses against sigma.
        let mut wins = vec![true; n];
        let mut tau = vec![0usize; theirs.len()];
        loop {
            for (i, &v) in theirs.iter().enumerate() {
                choice[v] = game.succ[v][tau[i]];
            }
            for (s, w) in wins.iter_mut().enumerate() {
                if *w && play_winner(game, &choice, s as u32) == Player::Pathfinder {
                    *w = false;
                }
            }
            if !advance(&mut tau, &theirs, game) {
                break;
            }
        }
        for (s, w) in wins.iter().enumerate() {
            if *w {
                result[s] = Player::Automaton;
            }
        }
        if !advance(&mut sigma, &mine, game) {
            break;
        }
    }
    Ok(result)
}

fn advance(digits: &mut [usize], positions: &[usize], game: &ParityGame) -> bool {
    for (d, &v) in digits.iter_mut().zip(positions) {
        *d += 1;
        if *d < game.succ[v].len() {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(color: u32) -> ParityGame {
        let mut g = ParityGame::new();
        let v = g.add_position(Player::Automaton, color);
        g.add_edge(v, v);
        g
    }

    #[test]
    fn self_loops() {
        assert_eq!(solve(&single(0)).winner(0), Player::Automaton);
        assert_eq!(solve(&single(1)).winner(0), Player::Pathfinder);
        assert_eq!(brute_solve(&single(1), 12).unwrap(), vec![Player::Pathfinder]);
    }

    #[test]
    fn alternating_chain() {
        // 0 (A, color 1) -> 1 (P, color 2) -> {0, 2}; 2 (A, color 3) -> 2.
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Automaton, 1);
        let b = g.add_position(Player::Pathfinder, 2);
        let c = g.add_position(Player::Automaton, 3);
        g.add_edge(a, b);
        g.add_edge(b, a);
        g.add_edge(b, c);
        g.add_edge(c, c);
        let s = solve(&g);
        assert_eq!(s.winners(), &[Player::Pathfinder; 3]);
        assert_eq!(s.strategy(b), Some(c));
        assert_eq!(brute_solve(&g, 12).unwrap(), s.winners());
    }

    #[test]
    fn automaton_escapes() {
        // Automaton at 0 can choose the even loop at 1 or the odd loop at 2.
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Automaton, 0);
        let even = g.add_position(Player::Pathfinder, 2);
        let odd = g.add_position(Player::Pathfinder, 1);
        g.add_edge(a, odd);
        g.add_edge(a, even);
        g.add_edge(even, even);
        g.add_edge(odd, odd);
        let s = solve(&g);
        assert_eq!(s.winner(a), Player::Automaton);
        assert_eq!(s.strategy(a), Some(even));
    }

    #[test]
    fn dead_ends_lose() {
        let mut g = ParityGame::new();
        let a = g.add_position(Player::Automaton, 0);
        let p = g.add_position(Player::Pathfinder, 0);
        g.close_dead_ends();
        let s = solve(&g);
        assert_eq!(s.winner(a), Player::Pathfinder);
        assert_eq!(s.winner(p), Player::Automaton);
    }
}
