//! Finiteness of reachable configuration sets.
//!
//! A configuration `X gamma` can reach a head `Y` with some new suffix
//! `beta` above `gamma` without ever popping into `gamma`. The set
//! reachable from the roots is infinite iff some head reachable this way
//! can derive itself with a nonempty suffix: pumping that derivation grows
//! the stack forever, and an unbounded stack needs such a repetition.

use crate::symbol::StackSymbol;

use super::{Bpa, StackString};

/// `bodies[x]` lists the right sides of every rule (or every outcome of
/// every distribution) headed by `x`.
pub(crate) fn reach_is_finite(bodies: &[Vec<&[StackSymbol]>], roots: &[&[StackSymbol]]) -> bool {
    let n = bodies.len();
    let mut normed = vec![false; n];
    loop {
        let mut changed = false;
        for x in 0..n {
            if !normed[x] && bodies[x].iter().any(|b| b.iter().all(|s| normed[s.index()])) {
                normed[x] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // edge x -> y (growing) when y becomes the head after a rule of x and
    // the vanishing of a normed prefix; growing if symbols remain behind y
    let mut edges: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for x in 0..n {
        for body in &bodies[x] {
            for (i, y) in body.iter().enumerate() {
                edges[x].push((y.index(), i + 1 < body.len()));
                if !normed[y.index()] {
                    break;
                }
            }
        }
    }
    let mut heads = vec![false; n];
    let mut stack = Vec::new();
    for root in roots {
        for y in root.iter() {
            if !heads[y.index()] {
                heads[y.index()] = true;
                stack.push(y.index());
            }
            if !normed[y.index()] {
                break;
            }
        }
    }
    while let Some(x) = stack.pop() {
        for &(y, _) in &edges[x] {
            if !heads[y] {
                heads[y] = true;
                stack.push(y);
            }
        }
    }
    let comp = components(&edges);
    !(0..n).any(|x| heads[x] && edges[x].iter().any(|&(y, grow)| grow && comp[y] == comp[x]))
}

/// Strongly connected components (Kosaraju, iterative).
fn components(edges: &[Vec<(usize, bool)>]) -> Vec<usize> {
    let n = edges.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((x, i)) = stack.pop() {
            if let Some(&(y, _)) = edges[x].get(i) {
                stack.push((x, i + 1));
                if !seen[y] {
                    seen[y] = true;
                    stack.push((y, 0));
                }
            } else {
                order.push(x);
            }
        }
    }
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, out) in edges.iter().enumerate() {
        for &(y, _) in out {
            reverse[y].push(x);
        }
    }
    let mut comp = vec![usize::MAX; n];
    for (c, &root) in order.iter().rev().enumerate() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = c;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &y in &reverse[x] {
                if comp[y] == usize::MAX {
                    comp[y] = c;
                    stack.push(y);
                }
            }
        }
    }
    comp
}

/// Whether only finitely many configurations are reachable from `roots`.
pub fn has_finite_reach(bpa: &Bpa, roots: &[StackString]) -> bool {
    let bodies: Vec<Vec<&[StackSymbol]>> = bpa
        .symbols()
        .map(|x| bpa.rules_of(x).iter().map(|(_, b)| &b.0[..]).collect())
        .collect();
    let roots: Vec<&[StackSymbol]> = roots.iter().map(|r| &r.0[..]).collect();
    reach_is_finite(&bodies, &roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn finite(text: &str, root: &str) -> bool {
        let bpa = Bpa::parse(text).unwrap();
        has_finite_reach(&bpa, &[bpa.parse_word(root).unwrap()])
    }

    #[test]
    fn pumping_and_bounded_stacks() {
        assert!(!finite("actions: a\nX a -> X X\n", "X"));
        assert!(!finite("actions: a\nX a -> Y\nY a -> X Z\nZ a -> .\n", "X"));
        assert!(finite("actions: a\nX a -> Y Z\nY a -> .\nZ a -> .\n", "X"));
        // growth only below an unnormed symbol that never pops
        assert!(!finite("actions: a\nX a -> X Z\nZ a -> .\n", "X"));
        // the pumping symbol sits behind an unnormed head
        assert!(finite("actions: a\nX a -> X\nP a -> P P\n", "X P"));
        assert!(!finite("actions: a\nX a -> .\nP a -> P P\n", "X P"));
        // a normed prefix exposes a growing head
        assert!(!finite("actions: a\nX a -> N G\nN a -> .\nG a -> G N\n", "X"));
    }

    #[test]
    fn agrees_with_bounded_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let mut bpa = Bpa::new();
            let a = bpa.add_action("a").unwrap();
            let n = rng.gen_range(1..=4);
            let syms: Vec<_> = (0..n).map(|i| bpa.add_symbol(&format!("S{i}")).unwrap()).collect();
            for &x in &syms {
                for _ in 0..rng.gen_range(0..=2) {
                    let len = rng.gen_range(0..=2);
                    let body: StackString = (0..len).map(|_| syms[rng.gen_range(0..n)]).collect();
                    bpa.add_rule(x, a, body).unwrap();
                }
            }
            let root = StackString(vec![syms[0]]);
            // explore until the set closes or grows past 400 words
            let mut seen = HashSet::from([root.clone()]);
            let mut todo = vec![root.clone()];
            while let Some(w) = todo.pop() {
                if seen.len() > 400 {
                    break;
                }
                if let Some((&h, rest)) = w.0.split_first() {
                    for (_, body) in bpa.rules_of(h) {
                        let v = StackString(body.0.iter().chain(rest).copied().collect());
                        if seen.insert(v.clone()) {
                            todo.push(v);
                        }
                    }
                }
            }
            assert_eq!(has_finite_reach(&bpa, &[root]), seen.len() <= 400, "{}", bpa.to_text());
        }
    }
}
