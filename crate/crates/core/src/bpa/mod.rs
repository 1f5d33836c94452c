//! Basic process algebras: syntax, generated transition systems, norms.

mod chain;
mod reach;
pub(crate) mod format;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Deref};

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub use chain::ChainCompressor;
pub use reach::has_finite_reach;
pub(crate) use reach::reach_is_finite;

use crate::error::{Error, Result};
use crate::lts::Lts;
use crate::symbol::{valid_token, Action, Interner, StackSymbol};

/// A word over stack symbols; the leftmost symbol is the top of the stack.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StackString(pub Vec<StackSymbol>);

impl StackString {
    pub fn empty() -> Self {
        StackString(Vec::new())
    }

    pub fn concat(&self, other: &[StackSymbol]) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        StackString(v)
    }
}

impl Deref for StackString {
    type Target = [StackSymbol];

    fn deref(&self) -> &[StackSymbol] {
        &self.0
    }
}

impl From<Vec<StackSymbol>> for StackString {
    fn from(v: Vec<StackSymbol>) -> Self {
        StackString(v)
    }
}

impl FromIterator<StackSymbol> for StackString {
    fn from_iter<I: IntoIterator<Item = StackSymbol>>(iter: I) -> Self {
        StackString(iter.into_iter().collect())
    }
}

/// Length of a shortest path to the empty word, or infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Norm {
    Finite(BigUint),
    Infinite,
}

impl Norm {
    pub fn zero() -> Self {
        Norm::Finite(BigUint::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Norm::Finite(_))
    }

    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            Norm::Finite(n) => Some(n),
            Norm::Infinite => None,
        }
    }
}

impl Add for Norm {
    type Output = Norm;

    fn add(self, rhs: Norm) -> Norm {
        match (self, rhs) {
            (Norm::Finite(a), Norm::Finite(b)) => Norm::Finite(a + b),
            _ => Norm::Infinite,
        }
    }
}

impl<'a> Add<&'a Norm> for &'a Norm {
    type Output = Norm;

    fn add(self, rhs: &Norm) -> Norm {
        match (self, rhs) {
            (Norm::Finite(a), Norm::Finite(b)) => Norm::Finite(a + b),
            _ => Norm::Infinite,
        }
    }
}

impl PartialOrd for Norm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Norm {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Norm::Finite(a), Norm::Finite(b)) => a.cmp(b),
            (Norm::Finite(_), Norm::Infinite) => Ordering::Less,
            (Norm::Infinite, Norm::Finite(_)) => Ordering::Greater,
            (Norm::Infinite, Norm::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Finite(n) => write!(f, "{n}"),
            Norm::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: StackSymbol,
    pub action: Action,
    pub body: StackString,
}

/// A finite set of rules `X -a-> alpha` over named symbols and actions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bpa {
    symbols: Interner,
    actions: Interner,
    // per head symbol, sorted and free of duplicates
    rules: Vec<Vec<(Action, StackString)>>,
}

impl Bpa {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_symbol(&mut self, name: &str) -> Result<StackSymbol> {
        if !valid_token(name) {
            return Err(Error::Validation(format!("invalid symbol name `{name}`")));
        }
        let id = self.symbols.intern(name) as usize;
        if self.rules.len() <= id {
            self.rules.resize_with(id + 1, Vec::new);
        }
        Ok(StackSymbol(id as u32))
    }

    /// Adds a symbol that must not exist yet.
    pub fn add_fresh_symbol(&mut self, name: &str) -> Result<StackSymbol> {
        if self.symbols.get(name).is_some() {
            return Err(Error::SymbolCollision(name.to_string()));
        }
        self.add_symbol(name)
    }

    pub fn add_action(&mut self, name: &str) -> Result<Action> {
        if !valid_token(name) {
            return Err(Error::Validation(format!("invalid action name `{name}`")));
        }
        Ok(Action(self.actions.intern(name)))
    }

    /// Inserts a rule; returns false if it was already present.
    pub fn add_rule(&mut self, head: StackSymbol, action: Action, body: StackString) -> Result<bool> {
        let n = self.symbols.len();
        if head.index() >= n || body.iter().any(|s| s.index() >= n) {
            return Err(Error::Validation("rule mentions an undeclared symbol".into()));
        }
        if action.index() >= self.actions.len() {
            return Err(Error::Validation("rule mentions an undeclared action".into()));
        }
        let rules = &mut self.rules[head.index()];
        let entry = (action, body);
        match rules.binary_search(&entry) {
            Ok(_) => Ok(false),
            Err(pos) => {
                rules.insert(pos, entry);
                Ok(true)
            }
        }
    }

    /// Removes a rule if present.
    pub fn remove_rule(&mut self, head: StackSymbol, action: Action, body: &StackString) -> bool {
        let Some(rules) = self.rules.get_mut(head.index()) else {
            return false;
        };
        match rules.iter().position(|(a, b)| *a == action && b == body) {
            Some(pos) => {
                rules.remove(pos);
                true
            }
            None => false,
        }
    }

    pub fn symbol(&self, name: &str) -> Option<StackSymbol> {
        self.symbols.get(name).map(StackSymbol)
    }

    pub fn symbol_name(&self, s: StackSymbol) -> &str {
        self.symbols.name(s.0)
    }

    pub fn action(&self, name: &str) -> Option<Action> {
        self.actions.get(name).map(Action)
    }

    pub fn action_name(&self, a: Action) -> &str {
        self.actions.name(a.0)
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = StackSymbol> {
        (0..self.symbols.len() as u32).map(StackSymbol)
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> {
        (0..self.actions.len() as u32).map(Action)
    }

    pub fn rules_of(&self, head: StackSymbol) -> &[(Action, StackString)] {
        &self.rules[head.index()]
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule> + '_ {
        self.rules.iter().enumerate().flat_map(|(h, rs)| {
            rs.iter().map(move |(a, b)| Rule {
                head: StackSymbol(h as u32),
                action: *a,
                body: b.clone(),
            })
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    /// Renders a configuration; the empty word is written `.`.
    pub fn show(&self, word: &[StackSymbol]) -> String {
        if word.is_empty() {
            return ".".to_string();
        }
        word.iter()
            .map(|&s| self.symbol_name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a whitespace-separated configuration; `.` or an empty string
    /// is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<StackString> {
        let text = text.trim();
        if text.is_empty() || text == "." {
            return Ok(StackString::empty());
        }
        text.split_whitespace()
            .map(|name| {
                self.symbol(name)
                    .ok_or_else(|| Error::Validation(format!("unknown symbol `{name}`")))
            })
            .collect()
    }

    /// Words built from symbol names, for tests and builders.
    pub fn word(&self, names: &[&str]) -> Result<StackString> {
        names
            .iter()
            .map(|n| {
                self.symbol(n)
                    .ok_or_else(|| Error::Validation(format!("unknown symbol `{n}`")))
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        format::parse_bpa(text)
    }

    pub fn to_text(&self) -> String {
        format::write_bpa(self)
    }
}

/// The transition system a BPA generates over stack strings:
/// `X beta -a-> alpha beta` whenever `X -a-> alpha` is a rule.
#[derive(Debug, Clone)]
pub struct BpaLts<'a> {
    bpa: &'a Bpa,
    chains: Option<ChainCompressor>,
}

impl<'a> BpaLts<'a> {
    /// Configurations whose maximal runs of deterministic countdown symbols
    /// are rewritten to a canonical run of the same norm. The unfolding of
    /// every configuration is unchanged up to isomorphism.
    pub fn compressed(bpa: &'a Bpa) -> Self {
        let chains = ChainCompressor::for_bpa(bpa);
        BpaLts {
            bpa,
            chains: (!chains.is_trivial()).then_some(chains),
        }
    }

    pub fn bpa(&self) -> &Bpa {
        self.bpa
    }
}

pub fn generated_lts(bpa: &Bpa) -> BpaLts<'_> {
    BpaLts { bpa, chains: None }
}

impl Lts for BpaLts<'_> {
    type State = StackString;

    fn successors(&self, state: &StackString) -> Vec<(Action, StackString)> {
        let Some((&head, rest)) = state.split_first() else {
            return Vec::new();
        };
        let mut out: Vec<(Action, StackString)> = self
            .bpa
            .rules_of(head)
            .iter()
            .map(|(a, body)| {
                let next = body.concat(rest);
                (*a, self.canonical(next))
            })
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

pub fn dead_symbols(bpa: &Bpa) -> BTreeSet<StackSymbol> {
    bpa.symbols().filter(|&s| bpa.rules_of(s).is_empty()).collect()
}

/// Norms of all symbols, by repeatedly settling the unsettled symbol with
/// the least norm attainable through rules over settled symbols only.
pub fn norms(bpa: &Bpa) -> Vec<Norm> {
    let n = bpa.symbol_count();
    let mut norm: Vec<Option<BigUint>> = vec![None; n];
    loop {
        let mut best: Option<(BigUint, usize)> = None;
        for x in 0..n {
            if norm[x].is_some() {
                continue;
            }
            for (_, body) in bpa.rules_of(StackSymbol(x as u32)) {
                let mut total = BigUint::one();
                let mut settled = true;
                for s in body.iter() {
                    match &norm[s.index()] {
                        Some(v) => total += v,
                        None => {
                            settled = false;
                            break;
                        }
                    }
                }
                if settled && best.as_ref().is_none_or(|(b, _)| total < *b) {
                    best = Some((total, x));
                }
            }
        }
        match best {
            Some((value, x)) => norm[x] = Some(value),
            None => break,
        }
    }
    norm.into_iter()
        .map(|v| v.map_or(Norm::Infinite, Norm::Finite))
        .collect()
}

pub fn word_norm(norms: &[Norm], word: &[StackSymbol]) -> Norm {
    word.iter()
        .fold(Norm::zero(), |acc, s| &acc + &norms[s.index()])
}

pub fn is_normed(bpa: &Bpa) -> bool {
    norms(bpa).iter().all(Norm::is_finite)
}

/// Restricts a one-action BPA to its finite-norm symbols. Rules into
/// infinite-norm words become `fresh_action` self-loops.
pub fn delta_bullet(bpa: &Bpa, fresh_action: &str) -> Result<Bpa> {
    if bpa.action_count() != 1 {
        return Err(Error::Precondition(format!(
            "delta transform needs exactly one action, found {}",
            bpa.action_count()
        )));
    }
    let a = Action(0);
    if bpa.action_name(a) == fresh_action {
        return Err(Error::Precondition(format!(
            "fresh action `{fresh_action}` coincides with the BPA's action"
        )));
    }
    let norm = norms(bpa);
    let mut out = Bpa::new();
    let new_a = out.add_action(bpa.action_name(a))?;
    let bar = out.add_action(fresh_action)?;
    let mut rename = vec![None; bpa.symbol_count()];
    for x in bpa.symbols().filter(|x| norm[x.index()].is_finite()) {
        rename[x.index()] = Some(out.add_symbol(bpa.symbol_name(x))?);
    }
    for x in bpa.symbols() {
        let Some(nx) = rename[x.index()] else { continue };
        for (_, body) in bpa.rules_of(x) {
            if word_norm(&norm, body).is_finite() {
                let nb = body.iter().map(|s| rename[s.index()].unwrap()).collect();
                out.add_rule(nx, new_a, nb)?;
            } else {
                out.add_rule(nx, bar, StackString(vec![nx]))?;
            }
        }
    }
    Ok(out)
}
