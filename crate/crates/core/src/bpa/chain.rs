//! Canonical forms for runs of countdown symbols.
//!
//! A symbol belongs to the countdown family of action `a` when it has
//! exactly one rule, that rule is labelled `a` and is deterministic, its
//! body consists of family members only, and its norm is finite. A run
//! `rho` of family symbols followed by any `delta` then performs exactly
//! `|rho|` steps labelled `a` and reaches `delta`, so two runs of equal
//! norm are interchangeable anywhere in a stack. Canonicalization replaces
//! each maximal run by the greedy decomposition of its norm.

use crate::symbol::{Action, StackSymbol};

use super::{Bpa, StackString};

#[derive(Debug, Clone, Default)]
pub struct ChainCompressor {
    // family index and norm for every member symbol
    member: Vec<Option<(usize, u128)>>,
    // members per family, sorted by norm descending then id ascending
    families: Vec<Vec<(u128, StackSymbol)>>,
}

impl ChainCompressor {
    pub fn for_bpa(bpa: &Bpa) -> Self {
        let single = bpa
            .symbols()
            .map(|x| match bpa.rules_of(x) {
                [(a, body)] => Some((*a, body.0.clone())),
                _ => None,
            })
            .collect();
        Self::from_deterministic(single)
    }

    /// `single[x]` is the unique rule of `x` if `x` has exactly one rule and
    /// that rule has a single outcome.
    pub fn from_deterministic(single: Vec<Option<(Action, Vec<StackSymbol>)>>) -> Self {
        let n = single.len();
        let mut norm: Vec<Option<u128>> = vec![None; n];
        // settle members bottom-up; a symbol qualifies once every body
        // symbol is a settled member with the same action
        loop {
            let mut changed = false;
            for x in 0..n {
                if norm[x].is_some() {
                    continue;
                }
                let Some((a, body)) = &single[x] else { continue };
                let mut total: u128 = 1;
                let mut ok = true;
                for s in body {
                    let same_action = matches!(&single[s.index()], Some((b, _)) if b == a);
                    match (same_action, norm[s.index()]) {
                        (true, Some(v)) => match total.checked_add(v) {
                            Some(t) => total = t,
                            None => ok = false,
                        },
                        _ => ok = false,
                    }
                    if !ok {
                        break;
                    }
                }
                if ok {
                    norm[x] = Some(total);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut actions: Vec<Action> = Vec::new();
        let mut member = vec![None; n];
        let mut families: Vec<Vec<(u128, StackSymbol)>> = Vec::new();
        for x in 0..n {
            let (Some(v), Some((a, _))) = (norm[x], &single[x]) else { continue };
            let f = match actions.iter().position(|b| b == a) {
                Some(f) => f,
                None => {
                    actions.push(*a);
                    families.push(Vec::new());
                    actions.len() - 1
                }
            };
            member[x] = Some((f, v));
            families[f].push((v, StackSymbol(x as u32)));
        }
        // greedy decomposition needs a unit-norm member
        for fam in families.iter_mut() {
            if !fam.iter().any(|(v, _)| *v == 1) {
                for (_, s) in fam.iter() {
                    member[s.index()] = None;
                }
                fam.clear();
                continue;
            }
            fam.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        }
        ChainCompressor { member, families }
    }

    pub fn is_trivial(&self) -> bool {
        self.families.iter().all(Vec::is_empty)
    }

    pub fn is_member(&self, s: StackSymbol) -> bool {
        self.member.get(s.index()).is_some_and(Option::is_some)
    }

    fn family(&self, s: StackSymbol) -> Option<(usize, u128)> {
        self.member.get(s.index()).copied().flatten()
    }

    pub fn canonicalize(&self, word: StackString) -> StackString {
        if !word.iter().any(|&s| self.is_member(s)) {
            return word;
        }
        let mut out = Vec::with_capacity(word.len());
        let mut i = 0;
        while i < word.len() {
            let Some((f, _)) = self.family(word[i]) else {
                out.push(word[i]);
                i += 1;
                continue;
            };
            let start = i;
            let mut total: Option<u128> = Some(0);
            while i < word.len() {
                match self.family(word[i]) {
                    Some((g, v)) if g == f => {
                        total = total.and_then(|t| t.checked_add(v));
                        i += 1;
                    }
                    _ => break,
                }
            }
            match total {
                Some(t) => self.decompose(f, t, &mut out),
                None => out.extend_from_slice(&word[start..i]),
            }
        }
        StackString(out)
    }

    fn decompose(&self, family: usize, mut total: u128, out: &mut Vec<StackSymbol>) {
        let start = out.len();
        for &(v, s) in &self.families[family] {
            while total >= v {
                out.push(s);
                total -= v;
            }
        }
        out[start..].reverse();
    }
}
