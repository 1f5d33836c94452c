//! Seeded random instances.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bpa::{Bpa, StackString};
use crate::games::{CountdownGame, HorBuilder, HorGame, Location, Player};

/// The generator used everywhere randomness is needed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorParams {
    pub max_states: usize,
    pub max_final: u32,
    pub max_label: u32,
    pub max_out: usize,
}

impl Default for HorParams {
    fn default() -> Self {
        HorParams {
            max_states: 5,
            max_final: 8,
            max_label: 8,
            max_out: 3,
        }
    }
}

/// States `s0, s1, ...` with random owners; `s0` is initial, `fin` final.
pub fn random_hor(rng: &mut impl Rng, p: &HorParams) -> HorGame {
    let n = rng.gen_range(1..=p.max_states.max(1));
    let mut b = HorBuilder::new();
    for i in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::Zero } else { Player::One };
        b.state(&format!("s{i}"), owner).expect("fresh names");
    }
    for s in 0..n {
        for _ in 0..rng.gen_range(1..=p.max_out.max(1)) {
            let target = match rng.gen_range(0..=n) {
                t if t == n => Location::Final,
                t => Location::State(t),
            };
            b.edge(s, rng.gen_range(0..=p.max_label), target);
        }
    }
    let k = rng.gen_range(0..=p.max_final);
    b.build(0, "fin", k).expect("every state has a transition")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountdownParams {
    pub max_states: usize,
    pub max_final: u32,
    pub max_label: u32,
    pub max_out: usize,
}

impl Default for CountdownParams {
    fn default() -> Self {
        CountdownParams {
            max_states: 5,
            max_final: 12,
            max_label: 4,
            max_out: 3,
        }
    }
}

/// States `q0, q1, ...`; a state may be left without moves.
pub fn random_countdown(rng: &mut impl Rng, p: &CountdownParams) -> CountdownGame {
    let n = rng.gen_range(1..=p.max_states.max(1));
    let mut edges = Vec::new();
    for q in 0..n {
        for _ in 0..rng.gen_range(0..=p.max_out) {
            let label = BigUint::from(rng.gen_range(1..=p.max_label.max(1)));
            edges.push((q, label, rng.gen_range(0..n)));
        }
    }
    let names = (0..n).map(|i| format!("q{i}")).collect();
    let k = BigUint::from(rng.gen_range(0..=p.max_final));
    CountdownGame::new(names, edges, 0, k).expect("generated names and labels are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpaParams {
    pub max_symbols: usize,
    pub max_rules: usize,
    pub max_body: usize,
}

impl Default for BpaParams {
    fn default() -> Self {
        BpaParams {
            max_symbols: 5,
            max_rules: 3,
            max_body: 2,
        }
    }
}

/// One action `a`, symbols `A, B, ...`, at least one rule per symbol.
pub fn random_one_action_bpa(rng: &mut impl Rng, p: &BpaParams) -> Bpa {
    let n = rng.gen_range(1..=p.max_symbols.clamp(1, 26));
    let mut bpa = Bpa::new();
    let a = bpa.add_action("a").expect("valid name");
    let syms: Vec<_> = (0..n)
        .map(|i| bpa.add_symbol(&((b'A' + i as u8) as char).to_string()).expect("valid name"))
        .collect();
    for &x in &syms {
        for _ in 0..rng.gen_range(1..=p.max_rules.max(1)) {
            let len = rng.gen_range(0..=p.max_body);
            let body: StackString = (0..len).map(|_| *syms.choose(rng).unwrap()).collect();
            bpa.add_rule(x, a, body).expect("declared symbols");
        }
    }
    bpa
}
