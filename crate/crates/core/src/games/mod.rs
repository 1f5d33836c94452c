//! Hit-or-run and countdown games on a monotone counter.

mod countdown;
mod format;
mod normalize;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::symbol::valid_token;

pub use countdown::{reduce_cd_to_hor, solve_countdown, CountdownGame};
pub use format::{parse_game, GameFile};
pub use format::parse_label;
pub use normalize::normalize_hor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Zero => f.write_str("Player0"),
            Player::One => f.write_str("Player1"),
        }
    }
}

/// A game position: one of the game's states or the final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    State(usize),
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorTransition {
    pub label: BigUint,
    pub target: Location,
}

/// Counter value as tracked by the solver; `Top` stands for every value
/// above the final value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Counter {
    Exact(usize),
    Top,
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counter::Exact(k) => write!(f, "{k}"),
            Counter::Top => f.write_str("top"),
        }
    }
}

/// A hit-or-run game. Player 1 wants to reach the final state with a
/// counter different from the final value; Player 0 wins every other play,
/// including infinite ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorGame {
    names: Vec<String>,
    owners: Vec<Player>,
    out: Vec<Vec<HorTransition>>,
    initial: usize,
    final_name: String,
    final_value: BigUint,
}

/// Incremental construction of a [`HorGame`].
#[derive(Debug, Clone, Default)]
pub struct HorBuilder {
    names: Vec<String>,
    owners: Vec<Player>,
    index: HashMap<String, usize>,
    out: Vec<Vec<HorTransition>>,
}

impl HorBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, name: &str, owner: Player) -> Result<usize> {
        if !valid_token(name) {
            return Err(Error::Validation(format!("invalid state name `{name}`")));
        }
        if self.index.contains_key(name) {
            return Err(Error::SymbolCollision(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.owners.push(owner);
        self.out.push(Vec::new());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn out_degree(&self, s: usize) -> usize {
        self.out[s].len()
    }

    pub fn edge(&mut self, from: usize, label: impl Into<BigUint>, target: Location) -> &mut Self {
        self.out[from].push(HorTransition {
            label: label.into(),
            target,
        });
        self
    }

    pub fn build(self, initial: usize, final_name: &str, final_value: impl Into<BigUint>) -> Result<HorGame> {
        HorGame::from_parts(
            self.names,
            self.owners,
            self.out,
            initial,
            final_name.to_string(),
            final_value.into(),
        )
    }
}

impl HorGame {
    fn from_parts(
        names: Vec<String>,
        owners: Vec<Player>,
        out: Vec<Vec<HorTransition>>,
        initial: usize,
        final_name: String,
        final_value: BigUint,
    ) -> Result<Self> {
        let n = names.len();
        if initial >= n {
            return Err(Error::Validation("initial state is not a game state".into()));
        }
        if !valid_token(&final_name) || names.contains(&final_name) {
            return Err(Error::Validation(format!(
                "final state `{final_name}` must be a fresh name"
            )));
        }
        for (s, ts) in out.iter().enumerate() {
            if ts.is_empty() {
                return Err(Error::Validation(format!(
                    "state `{}` has no outgoing transition",
                    names[s]
                )));
            }
            if ts.iter().any(|t| matches!(t.target, Location::State(r) if r >= n)) {
                return Err(Error::Validation(format!("state `{}` has a dangling target", names[s])));
            }
        }
        Ok(HorGame {
            names,
            owners,
            out,
            initial,
            final_name,
            final_value,
        })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn location_name(&self, loc: Location) -> &str {
        match loc {
            Location::State(s) => &self.names[s],
            Location::Final => &self.final_name,
        }
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn owner(&self, s: usize) -> Player {
        self.owners[s]
    }

    pub fn out(&self, s: usize) -> &[HorTransition] {
        &self.out[s]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn final_name(&self) -> &str {
        &self.final_name
    }

    pub fn final_value(&self) -> &BigUint {
        &self.final_value
    }

    pub fn transition_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn max_label(&self) -> BigUint {
        self.out
            .iter()
            .flatten()
            .map(|t| &t.label)
            .max()
            .cloned()
            .unwrap_or_default()
    }

    /// Whether every state has exactly two outgoing transitions.
    pub fn is_binary(&self) -> bool {
        self.out.iter().all(|ts| ts.len() == 2)
    }

    /// Counter after adding `label` to `counter`, collapsed above `k_final`.
    pub fn step_counter(counter: Counter, label: &BigUint, k_final: usize) -> Counter {
        match counter {
            Counter::Top => Counter::Top,
            Counter::Exact(c) => match label.to_usize() {
                Some(l) if l <= k_final - c => Counter::Exact(c + l),
                _ => Counter::Top,
            },
        }
    }

    /// Collapses an exact counter value.
    pub fn collapse(&self, k: &BigUint) -> Counter {
        match (k.to_usize(), self.final_value.to_usize()) {
            (Some(k), Some(f)) if k <= f => Counter::Exact(k),
            _ => Counter::Top,
        }
    }
}

/// Outcome of [`solve_hor`] over the collapsed configuration graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    k_final: usize,
    states: usize,
    initial: usize,
    player1_wins: Vec<bool>,
    /// Index into the state's transition list.
    choice: Vec<Option<usize>>,
    rank: Vec<usize>,
}

impl Solution {
    fn width(&self) -> usize {
        self.k_final + 2
    }

    fn node(&self, loc: Location, c: Counter) -> usize {
        let l = match loc {
            Location::State(s) => s,
            Location::Final => self.states,
        };
        let c = match c {
            Counter::Exact(k) => k.min(self.k_final + 1),
            Counter::Top => self.k_final + 1,
        };
        l * self.width() + c
    }

    fn decode(&self, node: usize) -> (Location, Counter) {
        let (l, c) = (node / self.width(), node % self.width());
        let loc = if l == self.states {
            Location::Final
        } else {
            Location::State(l)
        };
        let c = if c > self.k_final {
            Counter::Top
        } else {
            Counter::Exact(c)
        };
        (loc, c)
    }

    pub fn winner_at_initial(&self) -> Player {
        self.winner(Location::State(self.initial), Counter::Exact(0))
    }

    pub fn winner(&self, loc: Location, c: Counter) -> Player {
        if self.player1_wins[self.node(loc, c)] {
            Player::One
        } else {
            Player::Zero
        }
    }

    /// The winning player's positional choice at a state, as an index into
    /// the state's transitions. `None` at positions owned by the loser.
    pub fn strategy(&self, s: usize, c: Counter) -> Option<usize> {
        self.choice[self.node(Location::State(s), c)]
    }

    /// Number of moves Player 1 needs to force a win from a position in his
    /// winning region.
    pub fn rank(&self, loc: Location, c: Counter) -> Option<usize> {
        let n = self.node(loc, c);
        self.player1_wins[n].then(|| self.rank[n])
    }

    /// Collapsed configurations won by Player 1.
    pub fn player1_region(&self) -> impl Iterator<Item = (Location, Counter)> + '_ {
        (0..self.player1_wins.len())
            .filter(|&n| self.player1_wins[n])
            .map(|n| self.decode(n))
    }

    pub fn k_final(&self) -> usize {
        self.k_final
    }
}

/// Solves a hit-or-run game by computing Player 1's attractor on the
/// collapsed configuration graph.
pub fn solve_hor(game: &HorGame, budget: usize) -> Result<Solution> {
    let limit = Error::ResourceLimit {
        what: "collapsed game graph",
        budget,
    };
    let k = game.final_value.to_usize().ok_or_else(|| limit.clone())?;
    let width = k.checked_add(2).ok_or_else(|| limit.clone())?;
    let states = game.state_count();
    let total = (states + 1).checked_mul(width).ok_or_else(|| limit.clone())?;
    if total > budget {
        return Err(limit);
    }
    let mut sol = Solution {
        k_final: k,
        states,
        initial: game.initial,
        player1_wins: vec![false; total],
        choice: vec![None; total],
        rank: vec![0; total],
    };

    // predecessor lists over (node, transition index)
    let mut preds: Vec<Vec<(u32, u32)>> = vec![Vec::new(); total];
    let mut pending = vec![0usize; total];
    for s in 0..states {
        for c in 0..width {
            let counter = if c > k { Counter::Top } else { Counter::Exact(c) };
            let u = s * width + c;
            pending[u] = game.out[s].len();
            for (t, tr) in game.out[s].iter().enumerate() {
                let v = sol.node(tr.target, HorGame::step_counter(counter, &tr.label, k));
                preds[v].push((u as u32, t as u32));
            }
        }
    }

    let mut queue = VecDeque::new();
    for c in 0..width {
        if c != k {
            let v = states * width + c;
            sol.player1_wins[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &(u, t) in &preds[v] {
            let u = u as usize;
            if sol.player1_wins[u] {
                continue;
            }
            let s = u / width;
            let won = match game.owners[s] {
                Player::One => {
                    sol.choice[u] = Some(t as usize);
                    true
                }
                Player::Zero => {
                    pending[u] -= 1;
                    pending[u] == 0
                }
            };
            if won {
                sol.player1_wins[u] = true;
                sol.rank[u] = sol.rank[v] + 1;
                queue.push_back(u);
            }
        }
    }

    // Player 0 keeps out of the attractor
    for s in 0..states {
        if game.owners[s] != Player::Zero {
            continue;
        }
        for c in 0..width {
            let u = s * width + c;
            if sol.player1_wins[u] {
                continue;
            }
            let counter = if c > k { Counter::Top } else { Counter::Exact(c) };
            sol.choice[u] = game.out[s].iter().position(|tr| {
                let v = sol.node(tr.target, HorGame::step_counter(counter, &tr.label, k));
                !sol.player1_wins[v]
            });
        }
    }
    Ok(sol)
}
