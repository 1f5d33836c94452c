//! Reference implementations used to check the library from the outside.
//! They follow the textbook definitions directly and share no code with
//! the checkers or solvers they test.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use bpa_bisim::bpa::{Bpa, StackString};
use bpa_bisim::games::{CountdownGame, HorGame, Location, Player};
use bpa_bisim::lts::FiniteLts;
use bpa_bisim::prob::PBpa;
use bpa_bisim::reduction::{build_gadget, BottomMode, GadgetKind, GadgetSymbols, Tails};
use bpa_bisim::{Action, StackSymbol};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

pub type Word = Vec<StackSymbol>;

pub fn successors(bpa: &Bpa, w: &[StackSymbol]) -> Vec<(Action, Word)> {
    let Some((&head, rest)) = w.split_first() else {
        return Vec::new();
    };
    bpa.rules_of(head)
        .iter()
        .map(|(a, body)| (*a, body.0.iter().chain(rest).copied().collect()))
        .collect()
}

/// `s ~l t` by the recursive definition: level 0 relates everything,
/// level `l + 1` asks every move on one side to be answered on the other
/// by a move into a level-`l` related pair.
pub struct NaiveApprox<'a> {
    bpa: &'a Bpa,
    memo: HashMap<(Word, Word, usize), bool>,
}

impl<'a> NaiveApprox<'a> {
    pub fn new(bpa: &'a Bpa) -> Self {
        NaiveApprox {
            bpa,
            memo: HashMap::new(),
        }
    }

    pub fn equiv(&mut self, s: &[StackSymbol], t: &[StackSymbol], level: usize) -> bool {
        if level == 0 || s == t {
            return true;
        }
        let key = if s <= t {
            (s.to_vec(), t.to_vec(), level)
        } else {
            (t.to_vec(), s.to_vec(), level)
        };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let (ss, ts) = (successors(self.bpa, s), successors(self.bpa, t));
        let v = self.covers(&ss, &ts, level - 1) && self.covers(&ts, &ss, level - 1);
        self.memo.insert(key, v);
        v
    }

    fn covers(&mut self, from: &[(Action, Word)], by: &[(Action, Word)], level: usize) -> bool {
        from.iter()
            .all(|(a, x)| by.iter().any(|(b, y)| a == b && self.equiv(x, y, level)))
    }

    /// Least level `<= cap` separating the two words.
    pub fn level(&mut self, s: &[StackSymbol], t: &[StackSymbol], cap: usize) -> Option<usize> {
        (1..=cap).find(|&l| !self.equiv(s, t, l))
    }
}

type Dist = Vec<(Word, BigRational)>;

pub fn prob_successors(p: &PBpa, w: &[StackSymbol]) -> Vec<(Action, Dist)> {
    let Some((&head, rest)) = w.split_first() else {
        return Vec::new();
    };
    p.rules_of(head)
        .iter()
        .map(|(a, d)| {
            let dist = d
                .iter()
                .map(|(body, m)| (body.0.iter().chain(rest).copied().collect(), m.clone()))
                .collect();
            (*a, dist)
        })
        .collect()
}

/// Probabilistic approximants: level `l + 1` matches each distribution on
/// one side by one on the other giving every level-`l` class equal mass.
pub struct NaiveProbApprox<'a> {
    p: &'a PBpa,
    memo: HashMap<(Word, Word, usize), bool>,
}

impl<'a> NaiveProbApprox<'a> {
    pub fn new(p: &'a PBpa) -> Self {
        NaiveProbApprox { p, memo: HashMap::new() }
    }

    pub fn equiv(&mut self, s: &[StackSymbol], t: &[StackSymbol], level: usize) -> bool {
        if level == 0 || s == t {
            return true;
        }
        let key = if s <= t {
            (s.to_vec(), t.to_vec(), level)
        } else {
            (t.to_vec(), s.to_vec(), level)
        };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let (ss, ts) = (prob_successors(self.p, s), prob_successors(self.p, t));
        let v = self.covers(&ss, &ts, level - 1) && self.covers(&ts, &ss, level - 1);
        self.memo.insert(key, v);
        v
    }

    fn covers(&mut self, from: &[(Action, Dist)], by: &[(Action, Dist)], level: usize) -> bool {
        from.iter()
            .all(|(a, mu)| by.iter().any(|(b, nu)| a == b && self.same_mass(mu, nu, level)))
    }

    fn mass(&mut self, d: &Dist, x: &Word, level: usize) -> BigRational {
        let mut total = BigRational::zero();
        for (y, m) in d {
            if self.equiv(y, x, level) {
                total += m;
            }
        }
        total
    }

    fn same_mass(&mut self, mu: &Dist, nu: &Dist, level: usize) -> bool {
        let points: Vec<Word> = mu.iter().chain(nu).map(|(w, _)| w.clone()).collect();
        points
            .iter()
            .all(|x| self.mass(mu, x, level) == self.mass(nu, x, level))
    }
}

fn small(n: &BigUint) -> u64 {
    n.to_u64().expect("test games use small numbers")
}

/// Winner by exhaustive play with exact counters for
/// `(|S| + 1) * (k + 2)` moves, enough for Player 1 to force any win he
/// has.
pub fn brute_hor_winner(game: &HorGame) -> Player {
    let k = small(game.final_value());
    let horizon = (game.state_count() + 1) * (k as usize + 2);
    let mut memo = HashMap::new();
    if player1_forces(game, Location::State(game.initial()), 0, horizon, k, &mut memo) {
        Player::One
    } else {
        Player::Zero
    }
}

fn player1_forces(
    game: &HorGame,
    loc: Location,
    counter: u64,
    moves: usize,
    k: u64,
    memo: &mut HashMap<(Location, u64, usize), bool>,
) -> bool {
    let s = match loc {
        Location::Final => return counter != k,
        Location::State(s) => s,
    };
    if moves == 0 {
        return false;
    }
    if let Some(&v) = memo.get(&(loc, counter, moves)) {
        return v;
    }
    let mut outcomes = game
        .out(s)
        .iter()
        .map(|t| (t.target, counter + small(&t.label)))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(t, c)| player1_forces(game, t, c, moves - 1, k, memo));
    let v = match game.owner(s) {
        Player::One => outcomes.any(|w| w),
        Player::Zero => outcomes.all(|w| w),
    };
    memo.insert((loc, counter, moves), v);
    v
}

/// Countdown winner straight from the rules of play, by memoized search.
pub fn brute_countdown_winner(game: &CountdownGame) -> Player {
    let k = small(game.final_value());
    let mut memo = HashMap::new();
    if player0_hits(game, game.initial(), 0, k, &mut memo) {
        Player::Zero
    } else {
        Player::One
    }
}

fn player0_hits(game: &CountdownGame, q: usize, c: u64, k: u64, memo: &mut HashMap<(usize, u64), bool>) -> bool {
    if c == k {
        return true;
    }
    if let Some(&v) = memo.get(&(q, c)) {
        return v;
    }
    let mut by_label: HashMap<u64, Vec<usize>> = HashMap::new();
    for (src, l, r) in game.transitions() {
        if src == q {
            by_label.entry(small(l)).or_default().push(r);
        }
    }
    let v = by_label
        .iter()
        .filter(|(&l, _)| l > 0 && c + l <= k)
        .any(|(&l, rs)| rs.iter().all(|&r| player0_hits(game, r, c + l, k, memo)));
    memo.insert((q, c), v);
    v
}

/// Shortest path to the empty word, searching at most `depth` steps.
pub fn bfs_norm(bpa: &Bpa, w: &[StackSymbol], depth: usize) -> Option<usize> {
    let mut seen: HashSet<Word> = HashSet::from([w.to_vec()]);
    let mut queue = VecDeque::from([(w.to_vec(), 0)]);
    while let Some((x, d)) = queue.pop_front() {
        if x.is_empty() {
            return Some(d);
        }
        if d == depth {
            continue;
        }
        for (_, y) in successors(bpa, &x) {
            if seen.insert(y.clone()) {
                queue.push_back((y, d + 1));
            }
        }
    }
    None
}

/// Bisimilarity classes of a finite LTS by naive signature iteration.
pub fn naive_classes(lts: &FiniteLts) -> Vec<usize> {
    let n = lts.state_count();
    let mut class = vec![0usize; n];
    loop {
        let mut sigs: Vec<(usize, Vec<(Action, usize)>)> = (0..n)
            .map(|s| {
                let mut sig: Vec<(Action, usize)> = lts.out(s).iter().map(|&(a, t)| (a, class[t])).collect();
                sig.sort();
                sig.dedup();
                (class[s], sig)
            })
            .collect();
        let mut ids: HashMap<(usize, Vec<(Action, usize)>), usize> = HashMap::new();
        let next: Vec<usize> = sigs
            .drain(..)
            .map(|sig| {
                let len = ids.len();
                *ids.entry(sig).or_insert(len)
            })
            .collect();
        let done = ids.len() == class.iter().collect::<HashSet<_>>().len();
        class = next;
        if done {
            return class;
        }
    }
}

/// Whether two class vectors describe the same partition.
pub fn same_partition(a: &[usize], b: impl Fn(usize, usize) -> bool) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == b(i, j)))
}

pub fn random_lts(rng: &mut impl Rng, states: usize, actions: usize, edges: usize) -> FiniteLts {
    let mut lts = FiniteLts::new();
    for i in 0..states {
        lts.add_state(&format!("p{i}"));
    }
    let acts: Vec<Action> = (0..actions).map(|i| lts.add_action(&format!("a{i}"))).collect();
    for _ in 0..edges {
        let (s, t) = (rng.gen_range(0..states), rng.gen_range(0..states));
        let a = acts[rng.gen_range(0..actions)];
        lts.add_transition(s, a, t).unwrap();
    }
    lts
}

/// A gadget over random tails. Tail symbols `T0..` use actions `a` and
/// `b` with bodies of length at most one, so the tail system is finite.
pub struct GadgetInstance {
    pub bpa: Bpa,
    pub s: StackSymbol,
    pub s_prime: StackSymbol,
    pub tails: [Word; 4],
}

/// Samples until `bot` and every tail differ at level 1.
pub fn random_gadget(rng: &mut impl Rng, kind: GadgetKind, mode: BottomMode, deterministic: bool) -> GadgetInstance {
    loop {
        let mut bpa = Bpa::new();
        let a = bpa.add_action("a").unwrap();
        let b = bpa.add_action("b").unwrap();
        let bot = bpa.add_symbol("bot").unwrap();
        if mode == BottomMode::Loop {
            let abar = bpa.add_action("abar").unwrap();
            bpa.add_rule(bot, abar, StackString(vec![bot])).unwrap();
        }
        let n = rng.gen_range(1..=4);
        let syms: Vec<StackSymbol> = (0..n).map(|i| bpa.add_symbol(&format!("T{i}")).unwrap()).collect();
        for &x in &syms {
            for act in [a, b] {
                let rules = rng.gen_range(0..=if deterministic { 1 } else { 2 });
                for _ in 0..rules {
                    let body = if rng.gen_bool(0.25) {
                        StackString::empty()
                    } else {
                        StackString(vec![syms[rng.gen_range(0..n)]])
                    };
                    bpa.add_rule(x, act, body).unwrap();
                }
            }
        }
        let mut pick = || -> Word {
            if rng.gen_bool(0.1) {
                Vec::new()
            } else {
                vec![syms[rng.gen_range(0..n)]]
            }
        };
        let tails = [pick(), pick(), pick(), pick()];
        let mut oracle = NaiveApprox::new(&bpa);
        if tails.iter().any(|t| oracle.equiv(&[bot], t, 1)) {
            continue;
        }
        let s = bpa.add_symbol("s").unwrap();
        let s_prime = bpa.add_symbol("s'").unwrap();
        let mut aux = [s; 4];
        for (slot, suffix) in aux.iter_mut().zip(kind.aux_suffixes()) {
            *slot = bpa.add_symbol(&format!("u.s.{suffix}")).unwrap();
        }
        let w = |t: &Word| StackString(t.clone());
        let t = Tails {
            t1: w(&tails[0]),
            t1_prime: w(&tails[1]),
            t2: w(&tails[2]),
            t2_prime: w(&tails[3]),
        };
        for r in build_gadget(kind, &GadgetSymbols { s, s_prime, aux }, &t, bot, a).unwrap() {
            bpa.add_rule(r.head, r.action, r.body).unwrap();
        }
        return GadgetInstance { bpa, s, s_prime, tails };
    }
}

/// Sum of `2^i` over the counter symbols `#i` of a word, read from names.
pub fn num_by_name(bpa: &Bpa, w: &[StackSymbol]) -> BigUint {
    w.iter()
        .map(|&x| {
            let i: u32 = bpa.symbol_name(x).strip_prefix('#').unwrap().parse().unwrap();
            BigUint::from(1u32) << i
        })
        .sum()
}
