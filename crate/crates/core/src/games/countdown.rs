use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::{HorBuilder, HorGame, Location, Player};
use crate::error::{Error, Result};
use crate::symbol::valid_token;

/// A countdown game: Player 0 picks a positive label, Player 1 picks a
/// successor, and Player 0 wins by hitting the final value exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountdownGame {
    names: Vec<String>,
    /// Per state: label -> successors. Never empty.
    moves: Vec<BTreeMap<BigUint, BTreeSet<usize>>>,
    initial: usize,
    final_value: BigUint,
}

impl CountdownGame {
    /// States without moves receive a self-loop labelled `final_value + 1`,
    /// which can never be taken.
    pub fn new(
        names: Vec<String>,
        transitions: impl IntoIterator<Item = (usize, BigUint, usize)>,
        initial: usize,
        final_value: BigUint,
    ) -> Result<Self> {
        let n = names.len();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !valid_token(name) {
                return Err(Error::Validation(format!("invalid state name `{name}`")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::SymbolCollision(name.clone()));
            }
        }
        if initial >= n {
            return Err(Error::Validation("initial state is not a game state".into()));
        }
        let mut moves = vec![BTreeMap::<BigUint, BTreeSet<usize>>::new(); n];
        for (q, label, r) in transitions {
            if q >= n || r >= n {
                return Err(Error::Validation("transition endpoint out of range".into()));
            }
            if label.is_zero() {
                return Err(Error::Validation(format!(
                    "countdown label at `{}` must be positive",
                    names[q]
                )));
            }
            moves[q].entry(label).or_default().insert(r);
        }
        for (q, m) in moves.iter_mut().enumerate() {
            if m.is_empty() {
                m.insert(&final_value + 1u32, BTreeSet::from([q]));
            }
        }
        Ok(CountdownGame {
            names,
            moves,
            initial,
            final_value,
        })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn final_value(&self) -> &BigUint {
        &self.final_value
    }

    /// Transitions `(q, label, r)` in sorted order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, &BigUint, usize)> + '_ {
        self.moves.iter().enumerate().flat_map(|(q, m)| {
            m.iter()
                .flat_map(move |(l, rs)| rs.iter().map(move |&r| (q, l, r)))
        })
    }

    pub fn moves(&self, q: usize) -> &BTreeMap<BigUint, BTreeSet<usize>> {
        &self.moves[q]
    }

    /// Winning table `win[q][k]` for Player 0 over counters `0..=k_final`.
    pub fn player0_table(&self, budget: usize) -> Result<Vec<Vec<bool>>> {
        let limit = Error::ResourceLimit {
            what: "countdown configuration space",
            budget,
        };
        let k = self.final_value.to_usize().ok_or_else(|| limit.clone())?;
        let cells = k
            .checked_add(1)
            .and_then(|w| w.checked_mul(self.state_count()))
            .ok_or_else(|| limit.clone())?;
        if cells > budget {
            return Err(limit);
        }
        let mut win = vec![vec![false; k + 1]; self.state_count()];
        for row in win.iter_mut() {
            row[k] = true;
        }
        for c in (0..k).rev() {
            for q in 0..self.state_count() {
                win[q][c] = self.moves[q].iter().any(|(l, rs)| match l.to_usize() {
                    Some(l) if l <= k - c => rs.iter().all(|&r| win[r][c + l]),
                    _ => false,
                });
            }
        }
        Ok(win)
    }
}

/// Winner from the initial configuration, by backward induction on the
/// counter.
pub fn solve_countdown(game: &CountdownGame, budget: usize) -> Result<Player> {
    let table = game.player0_table(budget)?;
    Ok(if table[game.initial][0] {
        Player::Zero
    } else {
        Player::One
    })
}

fn fresh(taken: &HorBuilder, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Builds a hit-or-run game with the same winner.
///
/// Countdown states keep their names and belong to Player 0. Player 1 gets
/// a state `q^l` per used label; the gauge chain is `s.0 .. s.N` with `s.N`
/// final.
pub fn reduce_cd_to_hor(game: &CountdownGame) -> Result<HorGame> {
    let k = &game.final_value;
    // least N >= 1 with 2^(N-1) >= k
    let mut n = 1usize;
    while BigUint::one() << (n - 1) < *k {
        n += 1;
    }
    let mut b = HorBuilder::new();
    for q in 0..game.state_count() {
        b.state(&game.names[q], Player::Zero)?;
    }
    let gauge_names: Vec<String> = (0..=n).map(|i| fresh(&b, format!("s.{i}"))).collect();
    let final_name = gauge_names[n].clone();
    let gauge: Vec<usize> = gauge_names[..n]
        .iter()
        .map(|name| b.state(name, Player::Zero))
        .collect::<Result<_>>()?;
    let gauge_loc = |i: usize| {
        if i == n {
            Location::Final
        } else {
            Location::State(gauge[i])
        }
    };
    for i in 0..n {
        b.edge(gauge[i], BigUint::one() << i, gauge_loc(i + 1));
        b.edge(gauge[i], 0u32, gauge_loc(i + 1));
    }
    for q in 0..game.state_count() {
        b.edge(q, 0u32, Location::Final);
        for (label, targets) in &game.moves[q] {
            let name = fresh(&b, format!("{}^{}", game.names[q], label));
            let ql = b.state(&name, Player::One)?;
            b.edge(q, label.clone(), Location::State(ql));
            b.edge(ql, 0u32, Location::State(gauge[0]));
            for &r in targets {
                b.edge(ql, 0u32, Location::State(r));
            }
        }
    }
    b.build(game.initial, &final_name, k.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{solve_hor, Counter};

    fn game(names: &[&str], ts: &[(usize, u32, usize)], k: u32) -> CountdownGame {
        CountdownGame::new(
            names.iter().map(|s| s.to_string()).collect(),
            ts.iter().map(|&(q, l, r)| (q, BigUint::from(l), r)),
            0,
            BigUint::from(k),
        )
        .unwrap()
    }

    #[test]
    fn self_loop_to_final_value() {
        let g = game(&["q"], &[(0, 3, 0)], 3);
        assert_eq!(solve_countdown(&g, 100).unwrap(), Player::Zero);
    }

    #[test]
    fn cannot_move() {
        let g = game(&["q"], &[(0, 4, 0)], 3);
        assert_eq!(solve_countdown(&g, 100).unwrap(), Player::One);
        // auto-completed state
        let g = game(&["q", "r"], &[(0, 1, 1)], 2);
        assert_eq!(g.moves(1).keys().next(), Some(&BigUint::from(3u32)));
        assert_eq!(solve_countdown(&g, 100).unwrap(), Player::One);
    }

    #[test]
    fn two_state_table() {
        // q =1=> q, q =1=> r, r =2=> r, final value 2
        let g = game(&["q", "r"], &[(0, 1, 0), (0, 1, 1), (1, 2, 1)], 2);
        let t = g.player0_table(100).unwrap();
        assert_eq!(t[0], vec![false, true, true]);
        assert_eq!(t[1], vec![true, false, true]);
        assert_eq!(solve_countdown(&g, 100).unwrap(), Player::One);
    }

    #[test]
    fn zero_label_rejected() {
        let r = CountdownGame::new(vec!["q".into()], [(0, BigUint::zero(), 0)], 0, BigUint::one());
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn reduction_matches_on_examples() {
        for g in [
            game(&["q"], &[(0, 3, 0)], 3),
            game(&["q"], &[(0, 4, 0)], 3),
            game(&["q", "r"], &[(0, 1, 0), (0, 1, 1), (1, 2, 1)], 2),
            game(&["q"], &[(0, 1, 0)], 0),
        ] {
            let h = reduce_cd_to_hor(&g).unwrap();
            assert_eq!(
                solve_hor(&h, 10_000).unwrap().winner_at_initial(),
                solve_countdown(&g, 10_000).unwrap()
            );
        }
    }

    #[test]
    fn gauge_wins_up_to_final_value() {
        let g = game(&["q"], &[(0, 2, 0)], 5);
        let h = reduce_cd_to_hor(&g).unwrap();
        let sol = solve_hor(&h, 10_000).unwrap();
        let s0 = h.state_id("s.0").unwrap();
        for k in 0..=5 {
            assert_eq!(sol.winner(Location::State(s0), Counter::Exact(k)), Player::Zero);
        }
        assert_eq!(sol.winner(Location::State(s0), Counter::Top), Player::One);
        assert_eq!(h.final_name(), "s.4");
    }
}
