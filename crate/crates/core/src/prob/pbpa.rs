use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::One;

use super::{prob_expansion, Distribution, PLts};
use crate::bpa::format::{action, parse_body, parse_header, split_rule, write_headers};
use crate::bpa::{reach_is_finite, Bpa, ChainCompressor, StackString};
use crate::check::{CheckOptions, CheckReport, CheckVerdict};
use crate::error::{Error, Result};
use crate::games::HorGame;
use crate::lts::{first_separating_level, refine_full, Graph};
use crate::reduction::{reduce_hor_to_bpa, BottomMode};
use crate::symbol::{Action, StackSymbol};

/// A BPA whose rules lead to distributions over stack strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PBpa {
    // symbol and action names; its own rule table stays empty
    names: Bpa,
    rules: Vec<Vec<(Action, Distribution<StackString>)>>,
}

impl PBpa {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_symbol(&mut self, name: &str) -> Result<StackSymbol> {
        let s = self.names.add_symbol(name)?;
        if self.rules.len() <= s.index() {
            self.rules.resize_with(s.index() + 1, Vec::new);
        }
        Ok(s)
    }

    pub fn add_action(&mut self, name: &str) -> Result<Action> {
        self.names.add_action(name)
    }

    /// Inserts a rule; returns false if it was already present.
    pub fn add_rule(&mut self, head: StackSymbol, action: Action, dist: Distribution<StackString>) -> Result<bool> {
        let n = self.symbol_count();
        if head.index() >= n || dist.support().flat_map(|w| w.iter()).any(|s| s.index() >= n) {
            return Err(Error::Validation("rule mentions an undeclared symbol".into()));
        }
        if action.index() >= self.action_count() {
            return Err(Error::Validation("rule mentions an undeclared action".into()));
        }
        let rules = &mut self.rules[head.index()];
        let entry = (action, dist);
        match rules.binary_search(&entry) {
            Ok(_) => Ok(false),
            Err(pos) => {
                rules.insert(pos, entry);
                Ok(true)
            }
        }
    }

    pub fn symbol(&self, name: &str) -> Option<StackSymbol> {
        self.names.symbol(name)
    }

    pub fn symbol_name(&self, s: StackSymbol) -> &str {
        self.names.symbol_name(s)
    }

    pub fn action(&self, name: &str) -> Option<Action> {
        self.names.action(name)
    }

    pub fn action_name(&self, a: Action) -> &str {
        self.names.action_name(a)
    }

    pub fn symbol_count(&self) -> usize {
        self.names.symbol_count()
    }

    pub fn action_count(&self) -> usize {
        self.names.action_count()
    }

    pub fn symbols(&self) -> impl Iterator<Item = StackSymbol> {
        self.names.symbols()
    }

    pub fn rules_of(&self, head: StackSymbol) -> &[(Action, Distribution<StackString>)] {
        &self.rules[head.index()]
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    pub fn word(&self, names: &[&str]) -> Result<StackString> {
        self.names.word(names)
    }

    /// Whitespace-separated symbol names; `.` is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<StackString> {
        self.names.parse_word(text)
    }

    pub fn show(&self, word: &[StackSymbol]) -> String {
        self.names.show(word)
    }

    /// At most one distribution per symbol and action.
    pub fn is_fully_probabilistic(&self) -> bool {
        self.rules
            .iter()
            .all(|rs| rs.windows(2).all(|w| w[0].0 != w[1].0))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = PBpa::new();
        for (no, line) in crate::text::content_lines(text) {
            if parse_header(&mut p.names, no, line)? {
                continue;
            }
            let (head, act, rhs) = split_rule(no, line)?;
            let a = action(&p.names, no, act)?;
            let h = crate::bpa::format::symbol(&mut p.names, no, head)?;
            let alternatives: Vec<&str> = rhs.split('|').collect();
            let mut entries = Vec::new();
            for alt in &alternatives {
                let alt = alt.trim();
                let first = alt.split_whitespace().next().unwrap_or("");
                let (prob, body) = match first.strip_suffix(':') {
                    Some(p) => {
                        let prob: BigRational = p
                            .parse()
                            .map_err(|_| Error::parse(no, format!("bad probability `{p}`")))?;
                        (prob, alt[first.len()..].trim())
                    }
                    None if alternatives.len() == 1 => (BigRational::one(), alt),
                    None => return Err(Error::parse(no, "every alternative needs a `p:` prefix")),
                };
                entries.push((parse_body(&mut p.names, no, body)?, prob));
            }
            let dist = Distribution::new(entries).map_err(|e| Error::parse(no, e.to_string()))?;
            let n = p.names.symbol_count();
            p.rules.resize_with(n, Vec::new);
            p.add_rule(h, a, dist)?;
        }
        let n = p.names.symbol_count();
        p.rules.resize_with(n, Vec::new);
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_headers(
            &mut out,
            self.names.actions().map(|a| self.action_name(a)).collect(),
            self.symbols().map(|s| self.symbol_name(s)).collect(),
        );
        for head in self.symbols() {
            for (a, d) in self.rules_of(head) {
                let rhs = if d.is_dirac() {
                    self.show(d.support().next().unwrap())
                } else {
                    d.iter()
                        .map(|(w, p)| format!("{p}: {}", self.show(w)))
                        .collect::<Vec<_>>()
                        .join(" | ")
                };
                let _ = writeln!(out, "{} {} -> {rhs}", self.symbol_name(head), self.action_name(*a));
            }
        }
        out
    }
}

/// Merges each symbol's alternatives for an action into one uniform
/// distribution over the distinct right sides.
pub fn uniformize(bpa: &Bpa) -> PBpa {
    let mut p = PBpa::new();
    for s in bpa.symbols() {
        p.add_symbol(bpa.symbol_name(s)).expect("valid names");
    }
    for a in bpa.actions() {
        p.add_action(bpa.action_name(a)).expect("valid names");
    }
    for head in bpa.symbols() {
        let rules = bpa.rules_of(head);
        for group in rules.chunk_by(|x, y| x.0 == y.0) {
            let dist = Distribution::uniform(group.iter().map(|(_, body)| body.clone()))
                .expect("groups are non-empty");
            p.add_rule(head, group[0].0, dist).expect("symbols and actions exist");
        }
    }
    p
}

/// The pLTS a pBPA generates over stack strings.
#[derive(Debug, Clone)]
pub struct PBpaLts<'a> {
    pbpa: &'a PBpa,
    chains: Option<ChainCompressor>,
}

impl<'a> PBpaLts<'a> {
    pub fn plain(pbpa: &'a PBpa) -> Self {
        PBpaLts { pbpa, chains: None }
    }

    /// Runs of countdown symbols (one Dirac rule each) are canonicalized as
    /// in the nondeterministic case.
    pub fn compressed(pbpa: &'a PBpa) -> Self {
        let single = pbpa
            .symbols()
            .map(|x| match pbpa.rules_of(x) {
                [(a, d)] if d.is_dirac() => Some((*a, d.support().next().unwrap().0.clone())),
                _ => None,
            })
            .collect();
        let chains = ChainCompressor::from_deterministic(single);
        PBpaLts {
            pbpa,
            chains: (!chains.is_trivial()).then_some(chains),
        }
    }
}

impl PLts for PBpaLts<'_> {
    type State = StackString;

    fn transitions(&self, state: &StackString) -> Vec<(Action, Distribution<StackString>)> {
        let Some((&head, rest)) = state.split_first() else {
            return Vec::new();
        };
        let mut out: Vec<_> = self
            .pbpa
            .rules_of(head)
            .iter()
            .map(|(a, d)| (*a, d.map(|body| self.canonical(body.concat(rest)))))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn canonical(&self, state: StackString) -> StackString {
        match &self.chains {
            Some(c) => c.canonicalize(state),
            None => state,
        }
    }
}

fn view<'a>(pbpa: &'a PBpa, opts: &CheckOptions) -> PBpaLts<'a> {
    if opts.compress {
        PBpaLts::compressed(pbpa)
    } else {
        PBpaLts::plain(pbpa)
    }
}

fn check_words(pbpa: &PBpa, words: [&StackString; 2]) -> Result<()> {
    if words.iter().any(|w| w.iter().any(|s| s.index() >= pbpa.symbol_count())) {
        return Err(Error::Precondition("configuration mentions an unknown symbol".into()));
    }
    Ok(())
}

/// Exact probabilistic bisimilarity on the finite reachable fragment.
pub fn prob_exact_check_finite(
    pbpa: &PBpa,
    left: &StackString,
    right: &StackString,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if opts.budget == 0 {
        return Err(Error::Precondition("budget must be positive".into()));
    }
    check_words(pbpa, [left, right])?;
    let bodies: Vec<Vec<&[StackSymbol]>> = pbpa
        .symbols()
        .map(|x| {
            pbpa.rules_of(x)
                .iter()
                .flat_map(|(_, d)| d.support().map(|b| &b.0[..]))
                .collect()
        })
        .collect();
    if !reach_is_finite(&bodies, &[&left.0[..], &right.0[..]]) {
        return Err(Error::ResourceLimit {
            what: "an infinite reachable state space",
            budget: opts.budget,
        });
    }
    let lts = view(pbpa, opts);
    let (l, r) = (lts.canonical(left.clone()), lts.canonical(right.clone()));
    let mut graph: Graph<StackString, BigRational> = Graph::new([l.clone(), r.clone()], opts.budget)?;
    graph.explore_all(&mut prob_expansion(&lts))?;
    let (il, ir) = (graph.id(&l).unwrap(), graph.id(&r).unwrap());
    let verdict = match refine_full(&graph, &[il, ir]).first_split(0, 1) {
        Some(level) => CheckVerdict::NotBisimilar { level },
        None => CheckVerdict::Bisimilar,
    };
    Ok(CheckReport {
        verdict,
        explored_states: graph.len(),
    })
}

/// Least level `<= cap` separating the two configurations, using
/// probabilistic approximants.
pub fn prob_refute(
    pbpa: &PBpa,
    left: &StackString,
    right: &StackString,
    cap: usize,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    check_words(pbpa, [left, right])?;
    let lts = view(pbpa, opts);
    let (l, r) = (lts.canonical(left.clone()), lts.canonical(right.clone()));
    let (level, explored) = first_separating_level(l, r, cap, opts.budget, &mut prob_expansion(&lts))?;
    let verdict = match level {
        Some(level) => CheckVerdict::NotBisimilar { level },
        None => CheckVerdict::Inconclusive { cap },
    };
    Ok(CheckReport {
        verdict,
        explored_states: explored,
    })
}

/// Output of [`reduce_hor_to_pbpa`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbReducedInstance {
    pub pbpa: PBpa,
    pub left: StackSymbol,
    pub right: StackSymbol,
    pub mode: BottomMode,
}

/// The game reduction with every nondeterministic choice replaced by a
/// uniform random one.
pub fn reduce_hor_to_pbpa(game: &HorGame, mode: BottomMode) -> Result<ProbReducedInstance> {
    let r = reduce_hor_to_bpa(game, mode)?;
    Ok(ProbReducedInstance {
        pbpa: uniformize(&r.bpa),
        left: r.left,
        right: r.right,
        mode,
    })
}
