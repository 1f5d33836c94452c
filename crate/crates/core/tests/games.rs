mod common;

use bpa_bisim::atm::{eval_atm, reduce_atm_to_hor, Atm, AtmOutcome};
use bpa_bisim::games::{
    normalize_hor, reduce_cd_to_hor, solve_hor, Counter, CountdownGame, HorGame, Location, Player, Solution,
};
use bpa_bisim::gen::{random_countdown, random_hor, rng, CountdownParams, HorParams};
use common::*;
use std::collections::BTreeSet;

const BUDGET: usize = 1 << 20;

fn counters(k: usize) -> impl Iterator<Item = Counter> {
    (0..=k).map(Counter::Exact).chain([Counter::Top])
}

/// Checks the reported strategies and ranks position by position.
fn strategies_are_sound(game: &HorGame, sol: &Solution) {
    let kf = sol.k_final();
    let next = |s: usize, i: usize, c: Counter| {
        let t = &game.out(s)[i];
        (t.target, HorGame::step_counter(c, &t.label, kf))
    };
    let p1_rank = |loc: Location, c: Counter| sol.rank(loc, c);
    for s in 0..game.state_count() {
        for c in counters(kf) {
            let here = Location::State(s);
            let moves: Vec<_> = (0..game.out(s).len()).map(|i| next(s, i, c)).collect();
            match (sol.winner(here, c), game.owner(s)) {
                (Player::One, owner) => {
                    let r = p1_rank(here, c).unwrap();
                    let closer = |&(l, d): &(Location, Counter)| p1_rank(l, d).is_some_and(|q| q < r);
                    if owner == Player::One {
                        let i = sol.strategy(s, c).expect("winner has a move");
                        assert!(closer(&moves[i]));
                    } else {
                        assert!(moves.iter().all(closer));
                    }
                }
                (Player::Zero, Player::Zero) => {
                    let i = sol.strategy(s, c).expect("winner has a move");
                    let (l, d) = moves[i];
                    assert_eq!(sol.winner(l, d), Player::Zero);
                }
                (Player::Zero, Player::One) => {
                    assert!(moves.iter().all(|&(l, d)| sol.winner(l, d) == Player::Zero));
                }
            }
        }
    }
    for c in counters(kf) {
        let p1 = c != Counter::Exact(kf);
        assert_eq!(sol.winner(Location::Final, c) == Player::One, p1);
    }
}

#[test]
fn solver_strategies_are_sound() {
    let mut r = rng(31);
    for _ in 0..100 {
        let game = random_hor(&mut r, &HorParams::default());
        let sol = solve_hor(&game, BUDGET).unwrap();
        assert_eq!(sol.winner_at_initial(), brute_hor_winner(&game), "{}", game.to_text());
        strategies_are_sound(&game, &sol);
    }
}

#[test]
fn normalization_preserves_winner_on_wide_games() {
    let params = HorParams { max_out: 6, max_label: 20, ..HorParams::default() };
    let mut r = rng(32);
    for _ in 0..40 {
        let game = random_hor(&mut r, &params);
        let norm = normalize_hor(&game);
        assert!(norm.is_binary());
        let want = brute_hor_winner(&game);
        assert_eq!(solve_hor(&norm, BUDGET).unwrap().winner_at_initial(), want, "{}", game.to_text());
        assert_eq!(brute_hor_winner(&norm), want);
    }
}

#[test]
fn countdown_reduction_matches_every_start() {
    let mut r = rng(33);
    for _ in 0..60 {
        let cd = random_countdown(&mut r, &CountdownParams::default());
        let table = cd.player0_table(BUDGET).unwrap();
        let hor = reduce_cd_to_hor(&cd).unwrap();
        let sol = solve_hor(&hor, BUDGET).unwrap();
        for (q, row) in table.iter().enumerate() {
            for (c, &p0) in row.iter().enumerate() {
                let got = sol.winner(Location::State(q), Counter::Exact(c));
                assert_eq!(got == Player::Zero, p0, "state {} counter {c}\n{}", cd.name(q), cd.to_text());
            }
        }
    }
}

/// Name-keyed view of a game; the text format may reorder states.
fn shape(g: &HorGame) -> BTreeSet<String> {
    let mut out = BTreeSet::from([format!("init {} final {} {}", g.name(g.initial()), g.final_name(), g.final_value())]);
    for s in 0..g.state_count() {
        out.insert(format!("{} {}", g.name(s), g.owner(s)));
        let mut edges: Vec<String> = g.out(s).iter().map(|t| format!("+{} {}", t.label, g.location_name(t.target))).collect();
        edges.sort();
        out.insert(format!("{}: {}", g.name(s), edges.join(", ")));
    }
    out
}

#[test]
fn text_round_trips() {
    let mut r = rng(34);
    for _ in 0..50 {
        let hor = random_hor(&mut r, &HorParams::default());
        assert_eq!(shape(&HorGame::parse(&hor.to_text()).unwrap()), shape(&hor));
        let cd = random_countdown(&mut r, &CountdownParams::default());
        let back = CountdownGame::parse(&cd.to_text()).unwrap();
        assert_eq!(back.to_text(), cd.to_text());
    }
}

const ALL_CELLS: &str = "\
alphabet: 0 1
forall: q0
exists: q1
init: q0
accept: qacc
reject: qrej
tape_cells: 2
q0 1 -> q1 1 R
q0 1 -> q1 1 L
q0 0 -> qrej 0 R
q0 0 -> qrej 0 L
q1 1 -> qacc 1 L
q1 1 -> qacc 1 R
q1 0 -> qrej 0 L
q1 0 -> qrej 0 R
qacc 0 -> qacc 0 L
qacc 0 -> qacc 0 R
qacc 1 -> qacc 1 L
qacc 1 -> qacc 1 R
qrej 0 -> qrej 0 L
qrej 0 -> qrej 0 R
qrej 1 -> qrej 1 L
qrej 1 -> qrej 1 R
";

#[test]
fn alternating_machine_reduction() {
    let atm = Atm::parse(ALL_CELLS).unwrap();
    let mut outcomes = BTreeSet::new();
    for input in ["00", "01", "10", "11"] {
        let w = atm.parse_input(input).unwrap();
        let outcome = eval_atm(&atm, &w, atm.default_step_bound()).unwrap();
        let game = reduce_atm_to_hor(&atm, &w).unwrap();
        let winner = solve_hor(&game, 1 << 24).unwrap().winner_at_initial();
        assert_eq!(winner == Player::Zero, outcome == AtmOutcome::Accept, "input {input}");
        outcomes.insert(format!("{outcome:?}"));
    }
    assert_eq!(outcomes.len(), 2, "{outcomes:?}");
}
