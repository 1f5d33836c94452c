mod common;

use bpa_bisim::bpa::{generated_lts, has_finite_reach, Bpa, BpaLts, StackString};
use bpa_bisim::check::{exact_check_finite, refute, CheckOptions, CheckVerdict};
use bpa_bisim::gen::{random_one_action_bpa, rng, BpaParams};
use bpa_bisim::lts::distinguishing_level;
use bpa_bisim::prob::{prob_distinguishing_level, prob_exact_check_finite, uniformize, PBpaLts};
use bpa_bisim::reduction::{BottomMode, FinalCheck, GadgetKind};
use common::*;
use num_bigint::BigUint;
use rand::Rng;

const BUDGET: usize = 1 << 16;

/// Random two-action BPA, bodies up to length two.
fn random_bpa(r: &mut impl Rng) -> Bpa {
    let mut bpa = random_one_action_bpa(r, &BpaParams::default());
    let b = bpa.add_action("b").unwrap();
    let syms: Vec<_> = bpa.symbols().collect();
    for &x in &syms {
        if r.gen_bool(0.4) {
            let body: StackString = (0..r.gen_range(0..=2)).map(|_| syms[r.gen_range(0..syms.len())]).collect();
            bpa.add_rule(x, b, body).unwrap();
        }
    }
    bpa
}

fn pairs(bpa: &Bpa) -> Vec<(Word, Word)> {
    let syms: Vec<_> = bpa.symbols().collect();
    let mut words: Vec<Word> = syms.iter().map(|&x| vec![x]).collect();
    words.push(Vec::new());
    if syms.len() > 1 {
        words.push(vec![syms[0], syms[1]]);
    }
    let mut out = Vec::new();
    for (i, u) in words.iter().enumerate() {
        for v in &words[i..] {
            out.push((u.clone(), v.clone()));
        }
    }
    out
}

#[test]
fn approximant_levels_match_recursive_definition() {
    let mut r = rng(21);
    for _ in 0..60 {
        let bpa = random_bpa(&mut r);
        let mut oracle = NaiveApprox::new(&bpa);
        let plain = generated_lts(&bpa);
        let compressed = BpaLts::compressed(&bpa);
        for (u, v) in pairs(&bpa) {
            let want = oracle.level(&u, &v, 5);
            let (su, sv) = (StackString(u.clone()), StackString(v.clone()));
            assert_eq!(distinguishing_level(&plain, &su, &sv, 5, BUDGET).unwrap(), want, "{}", bpa.to_text());
            assert_eq!(distinguishing_level(&compressed, &su, &sv, 5, BUDGET).unwrap(), want);
        }
    }
}

#[test]
fn refute_and_exact_agree_with_recursive_definition() {
    let mut r = rng(22);
    let opts = CheckOptions::default();
    let mut finite = 0;
    for _ in 0..60 {
        let bpa = random_bpa(&mut r);
        let mut oracle = NaiveApprox::new(&bpa);
        for (u, v) in pairs(&bpa) {
            let (su, sv) = (StackString(u.clone()), StackString(v.clone()));
            let want = oracle.level(&u, &v, 6);
            let got = refute(&bpa, &su, &sv, 6, &opts).unwrap().verdict;
            match want {
                Some(level) => assert_eq!(got, CheckVerdict::NotBisimilar { level }),
                None => assert_eq!(got, CheckVerdict::Inconclusive { cap: 6 }),
            }
            if has_finite_reach(&bpa, &[su.clone(), sv.clone()]) {
                finite += 1;
                let exact = exact_check_finite(&bpa, &su, &sv, &opts).unwrap().verdict;
                if let CheckVerdict::NotBisimilar { level } = exact {
                    assert_eq!(oracle.level(&u, &v, level), Some(level));
                } else {
                    // a finite system with n states stabilises by level n + 1
                    assert_eq!(oracle.level(&u, &v, 12), None, "{}", bpa.to_text());
                }
            } else {
                assert!(exact_check_finite(&bpa, &su, &sv, &opts).is_err());
            }
        }
    }
    assert!(finite > 100);
}

#[test]
fn probabilistic_levels_match_recursive_definition() {
    let mut r = rng(23);
    for _ in 0..60 {
        let p = uniformize(&random_bpa(&mut r));
        let mut oracle = NaiveProbApprox::new(&p);
        let words: Vec<Word> = p.symbols().map(|x| vec![x]).collect();
        for (i, u) in words.iter().enumerate() {
            for v in &words[i..] {
                let want = (1..=4).find(|&l| !oracle.equiv(u, v, l));
                let (su, sv) = (StackString(u.clone()), StackString(v.clone()));
                for lts in [PBpaLts::plain(&p), PBpaLts::compressed(&p)] {
                    assert_eq!(prob_distinguishing_level(&lts, &su, &sv, 4, BUDGET).unwrap(), want, "{}", p.to_text());
                }
            }
        }
    }
}

#[test]
fn probabilistic_gadget_levels() {
    let mut r = rng(24);
    for kind in [GadgetKind::Or, GadgetKind::And] {
        for i in 0..60 {
            let mode = if i % 2 == 0 { BottomMode::Dead } else { BottomMode::Loop };
            let g = random_gadget(&mut r, kind, mode, true);
            let p = uniformize(&g.bpa);
            let lts = PBpaLts::plain(&p);
            let mut oracle = NaiveProbApprox::new(&p);
            let [t1, t1p, t2, t2p] = &g.tails;
            let (s, sp) = (StackString(vec![g.s]), StackString(vec![g.s_prime]));
            for l in 1..=4 {
                let (left, right) = (oracle.equiv(t1, t1p, l), oracle.equiv(t2, t2p, l));
                let want = match kind {
                    GadgetKind::Or => left || right,
                    GadgetKind::And => left && right,
                };
                let got = prob_distinguishing_level(&lts, &s, &sp, l + 2, BUDGET).unwrap().is_none();
                assert_eq!(got, want, "{kind:?} level {l}\n{}", p.to_text());
                assert_eq!(got, oracle.equiv(&[g.s], &[g.s_prime], l + 2));
            }
        }
    }
}

#[test]
fn bottom_separates_counter_values() {
    let opts = CheckOptions::default();
    for mode in [BottomMode::Dead, BottomMode::Loop] {
        let fc = FinalCheck::new(&BigUint::from(3u32), 4, mode).unwrap();
        let suffixes = [vec![], vec![fc.fin], vec![fc.bottom]];
        for n in 0..=8u32 {
            for m in 0..=8u32 {
                for (i, beta) in suffixes.iter().enumerate() {
                    let beta2 = &suffixes[(i + m as usize) % suffixes.len()];
                    let word = |k: u32, tail: &Word| {
                        let mut w = fc.bin.bin(&BigUint::from(k)).unwrap().0;
                        w.push(fc.bottom);
                        w.extend(tail);
                        StackString(w)
                    };
                    let v = exact_check_finite(&fc.bpa, &word(n, beta), &word(m, beta2), &opts).unwrap();
                    assert_eq!(v.verdict == CheckVerdict::Bisimilar, n == m, "{mode} {n} {m}");
                }
            }
        }
    }
}

#[test]
fn probabilistic_exact_check_on_dirac_systems() {
    let mut r = rng(25);
    let opts = CheckOptions::default();
    for _ in 0..40 {
        let bpa = random_bpa(&mut r);
        let p = uniformize(&bpa);
        for (u, v) in pairs(&bpa) {
            let (su, sv) = (StackString(u), StackString(v));
            let a = prob_exact_check_finite(&p, &su, &sv, &opts);
            let b = exact_check_finite(&bpa, &su, &sv, &opts);
            assert_eq!(a.is_ok(), b.is_ok());
            let deterministic = bpa.symbols().all(|x| {
                let rules = bpa.rules_of(x);
                rules.iter().all(|(a, _)| rules.iter().filter(|(b, _)| b == a).count() == 1)
            });
            if let (Ok(a), Ok(b), true) = (a, b, deterministic) {
                assert_eq!(a.verdict, b.verdict);
            }
        }
    }
}
