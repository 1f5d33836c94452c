use std::collections::HashSet;

use num_bigint::BigUint;

use super::{HorGame, HorTransition, Location};

/// Rewrites the game so every state has exactly two outgoing transitions.
///
/// A lone transition is duplicated. Wider fan-out becomes a balanced
/// binary tree of fresh states of the same owner, joined by 0-labelled
/// edges; fresh states are named `<state>.n<i>`.
pub fn normalize_hor(game: &HorGame) -> HorGame {
    let mut taken: HashSet<String> = game.names.iter().cloned().collect();
    taken.insert(game.final_name.clone());
    let mut names = game.names.clone();
    let mut owners = game.owners.clone();
    let mut out: Vec<Vec<HorTransition>> = vec![Vec::new(); names.len()];

    for s in 0..game.state_count() {
        let ts = &game.out[s];
        if ts.len() == 1 {
            out[s] = vec![ts[0].clone(), ts[0].clone()];
            continue;
        }
        let mut counter = 0;
        let mut stack = vec![(s, ts.clone())];
        while let Some((node, list)) = stack.pop() {
            let (left, right) = list.split_at(list.len().div_ceil(2));
            for half in [left, right] {
                if half.len() == 1 {
                    out[node].push(half[0].clone());
                    continue;
                }
                let mut name = format!("{}.n{counter}", game.names[s]);
                counter += 1;
                while !taken.insert(name.clone()) {
                    name.push('\'');
                }
                let child = names.len();
                names.push(name);
                owners.push(game.owners[s]);
                out.push(Vec::new());
                out[node].push(HorTransition {
                    label: BigUint::default(),
                    target: Location::State(child),
                });
                stack.push((child, half.to_vec()));
            }
        }
    }
    HorGame {
        names,
        owners,
        out,
        initial: game.initial,
        final_name: game.final_name.clone(),
        final_value: game.final_value.clone(),
    }
}
