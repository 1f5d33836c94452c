//! From hit-or-run games to BPA bisimilarity.
//!
//! A configuration `(s, k)` becomes the pair `s bin(k) bot` / `s' bin(k) bot`;
//! the two are bisimilar exactly when Player 0 wins from `(s, k)`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bpa::{Bpa, Rule, StackString};
use crate::error::{Error, Result};
use crate::games::{HorGame, Location, Player};
use crate::symbol::{Action, StackSymbol};

/// How the bottom marker behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BottomMode {
    /// No rules: one action, one dead symbol.
    Dead,
    /// A self-loop on a second action: no dead symbols.
    Loop,
}

impl fmt::Display for BottomMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BottomMode::Dead => "dead",
            BottomMode::Loop => "loop",
        })
    }
}

impl FromStr for BottomMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dead" => Ok(BottomMode::Dead),
            "loop" => Ok(BottomMode::Loop),
            _ => Err(Error::Precondition(format!("unknown bottom mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetKind {
    /// For Player-0 states.
    Or,
    /// For Player-1 states.
    And,
}

impl GadgetKind {
    pub fn for_owner(owner: Player) -> Self {
        match owner {
            Player::Zero => GadgetKind::Or,
            Player::One => GadgetKind::And,
        }
    }

    /// Name suffixes of the four auxiliary symbols, in the order
    /// [`build_gadget`] expects them.
    pub fn aux_suffixes(self) -> [&'static str; 4] {
        match self {
            GadgetKind::Or => ["12", "1'2'", "12'", "1'2"],
            GadgetKind::And => ["1", "1'", "2", "2'"],
        }
    }
}

/// `sum 2^i` over the given indices, repetitions included.
pub fn num_of_indices(indices: &[usize]) -> BigUint {
    indices.iter().map(|&i| BigUint::one() << i).sum()
}

/// Set bits of `n` in increasing order; all must be at most `b`.
pub fn bin_indices(n: &BigUint, b: usize) -> Result<Vec<usize>> {
    if n.bits() > b as u64 + 1 {
        return Err(Error::OutOfRange(format!("{n} needs more than {} bits", b + 1)));
    }
    Ok((0..n.bits()).filter(|&i| n.bit(i)).map(|i| i as usize).collect())
}

/// Counter rules `#i -> #0 ... #(i-1)` for `i = 0..=b`, by index.
pub fn counter_rules(b: usize) -> Vec<(usize, Vec<usize>)> {
    (0..=b).map(|i| (i, (0..i).collect())).collect()
}

/// The counter symbols `#0 .. #b` inside a BPA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinAlphabet {
    symbols: Vec<StackSymbol>,
}

impl BinAlphabet {
    /// Adds `#0 .. #b` together with their counter rules.
    pub fn install(bpa: &mut Bpa, b: usize, action: Action) -> Result<Self> {
        let symbols = (0..=b)
            .map(|i| bpa.add_fresh_symbol(&format!("#{i}")))
            .collect::<Result<Vec<_>>>()?;
        for (head, body) in counter_rules(b) {
            let body = body.into_iter().map(|i| symbols[i]).collect();
            bpa.add_rule(symbols[head], action, body)?;
        }
        Ok(BinAlphabet { symbols })
    }

    pub fn b(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn symbol(&self, i: usize) -> StackSymbol {
        self.symbols[i]
    }

    pub fn index_of(&self, s: StackSymbol) -> Option<usize> {
        self.symbols.iter().position(|&x| x == s)
    }

    /// Counter value of a word over the alphabet.
    pub fn num(&self, word: &[StackSymbol]) -> Result<BigUint> {
        let indices = word
            .iter()
            .map(|&s| {
                self.index_of(s)
                    .ok_or_else(|| Error::Precondition("word contains a non-counter symbol".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(num_of_indices(&indices))
    }

    pub fn bin(&self, n: &BigUint) -> Result<StackString> {
        Ok(bin_indices(n, self.b())?.into_iter().map(|i| self.symbols[i]).collect())
    }
}

/// The head pair and auxiliary symbols of one gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetSymbols {
    pub s: StackSymbol,
    pub s_prime: StackSymbol,
    /// In [`GadgetKind::aux_suffixes`] order.
    pub aux: [StackSymbol; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tails {
    pub t1: StackString,
    pub t1_prime: StackString,
    pub t2: StackString,
    pub t2_prime: StackString,
}

/// Rules of an Or-gadget (12) or an And-gadget (10, including the two
/// escapes to `bottom`).
pub fn build_gadget(
    kind: GadgetKind,
    syms: &GadgetSymbols,
    tails: &Tails,
    bottom: StackSymbol,
    action: Action,
) -> Result<Vec<Rule>> {
    let mut own = vec![syms.s, syms.s_prime, bottom];
    own.extend(syms.aux);
    for (i, x) in own.iter().enumerate() {
        if own[..i].contains(x) {
            return Err(Error::SymbolCollision(format!("gadget symbol {} used twice", x.0)));
        }
    }
    for t in [&tails.t1, &tails.t1_prime, &tails.t2, &tails.t2_prime] {
        if let Some(x) = t.iter().find(|x| syms.aux.contains(x)) {
            return Err(Error::SymbolCollision(format!("auxiliary symbol {} occurs in a tail", x.0)));
        }
    }
    let one = |x: StackSymbol| StackString(vec![x]);
    let [u0, u1, u2, u3] = syms.aux;
    let (s, sp) = (syms.s, syms.s_prime);
    let (t1, t1p, t2, t2p) = (&tails.t1, &tails.t1_prime, &tails.t2, &tails.t2_prime);
    let pairs: Vec<(StackSymbol, StackString)> = match kind {
        GadgetKind::Or => vec![
            (s, one(u0)),
            (s, one(u1)),
            (sp, one(u2)),
            (sp, one(u3)),
            (u0, t1.clone()),
            (u0, t2.clone()),
            (u1, t1p.clone()),
            (u1, t2p.clone()),
            (u2, t1.clone()),
            (u2, t2p.clone()),
            (u3, t1p.clone()),
            (u3, t2.clone()),
        ],
        GadgetKind::And => vec![
            (s, one(u0)),
            (s, one(u2)),
            (sp, one(u1)),
            (sp, one(u3)),
            (u0, t1.clone()),
            (u1, t1p.clone()),
            (u2, t2.clone()),
            (u3, t2p.clone()),
            (u2, one(bottom)),
            (u3, one(bottom)),
        ],
    };
    Ok(pairs
        .into_iter()
        .map(|(head, body)| Rule { head, action, body })
        .collect())
}

/// Counter, bottom marker and the final pair: the smallest system in
/// which `fin alpha bot ~ fin' alpha bot` iff `num(alpha)` is the final
/// value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalCheck {
    pub bpa: Bpa,
    pub action: Action,
    pub bin: BinAlphabet,
    pub bottom: StackSymbol,
    pub fin: StackSymbol,
    pub fin_prime: StackSymbol,
}

impl FinalCheck {
    pub fn new(k_final: &BigUint, b: usize, mode: BottomMode) -> Result<Self> {
        Self::named(k_final, b, mode, "fin")
    }

    fn named(k_final: &BigUint, b: usize, mode: BottomMode, fin_name: &str) -> Result<Self> {
        if k_final.bits() > b as u64 {
            return Err(Error::OutOfRange(format!("2^{b} must exceed the final value {k_final}")));
        }
        let mut bpa = Bpa::new();
        let action = bpa.add_action("a")?;
        let bin = BinAlphabet::install(&mut bpa, b, action)?;
        let bottom = bpa.add_fresh_symbol("bot")?;
        if mode == BottomMode::Loop {
            let abar = bpa.add_action("abar")?;
            bpa.add_rule(bottom, abar, StackString(vec![bottom]))?;
        }
        let fin = bpa.add_fresh_symbol(fin_name)?;
        let fin_prime = bpa.add_fresh_symbol(&format!("{fin_name}'"))?;
        bpa.add_rule(fin, action, StackString::empty())?;
        let mut body = bin.bin(k_final)?;
        body.0.push(bottom);
        bpa.add_rule(fin_prime, action, body)?;
        Ok(FinalCheck {
            bpa,
            action,
            bin,
            bottom,
            fin,
            fin_prime,
        })
    }

    /// `fin alpha bot` and `fin' alpha bot`.
    pub fn pair(&self, alpha: &[StackSymbol]) -> (StackString, StackString) {
        let wrap = |head: StackSymbol| {
            let mut w = vec![head];
            w.extend_from_slice(alpha);
            w.push(self.bottom);
            StackString(w)
        };
        (wrap(self.fin), wrap(self.fin_prime))
    }
}

/// Output of [`reduce_hor_to_bpa`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedInstance {
    pub bpa: Bpa,
    /// `X`, rewriting to `s_init bot`.
    pub left: StackSymbol,
    /// `X'`, rewriting to `s_init' bot`.
    pub right: StackSymbol,
    pub mode: BottomMode,
    pub action: Action,
    pub bin: BinAlphabet,
    pub bottom: StackSymbol,
    pub fin: StackSymbol,
    pub fin_prime: StackSymbol,
    /// Unprimed and primed symbol of each game state.
    pub states: Vec<(StackSymbol, StackSymbol)>,
    /// Gadget kind and auxiliary symbols of each game state.
    pub gadgets: Vec<(GadgetKind, [StackSymbol; 4])>,
}

impl ReducedInstance {
    pub fn location_symbols(&self, loc: Location) -> (StackSymbol, StackSymbol) {
        match loc {
            Location::State(s) => self.states[s],
            Location::Final => (self.fin, self.fin_prime),
        }
    }

    /// `s bin(k) bot` and `s' bin(k) bot`.
    pub fn config_pair(&self, loc: Location, k: &BigUint) -> Result<(StackString, StackString)> {
        let (s, sp) = self.location_symbols(loc);
        let mut tail = self.bin.bin(k)?.0;
        tail.push(self.bottom);
        let wrap = |h: StackSymbol| StackString(std::iter::once(h).chain(tail.iter().copied()).collect());
        Ok((wrap(s), wrap(sp)))
    }

    /// `key: value` lines mapping game states to generated symbols.
    pub fn manifest(&self) -> String {
        let name = |s: StackSymbol| self.bpa.symbol_name(s);
        let mut out = String::new();
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(out, "b: {}", self.bin.b());
        let _ = writeln!(out, "bottom: {}", name(self.bottom));
        let _ = writeln!(out, "top: {} {}", name(self.left), name(self.right));
        let _ = writeln!(out, "final: {} {}", name(self.fin), name(self.fin_prime));
        for (i, &(s, sp)) in self.states.iter().enumerate() {
            let (kind, aux) = &self.gadgets[i];
            let aux: Vec<&str> = aux.iter().map(|&u| name(u)).collect();
            let kind = match kind {
                GadgetKind::Or => "or",
                GadgetKind::And => "and",
            };
            let _ = writeln!(out, "state: {} {} {} {kind} {}", name(s), name(s), name(sp), aux.join(" "));
        }
        out
    }
}

/// Least `b` with `2^b > final value` and `2^b >= every label`.
pub fn minimal_counter_width(game: &HorGame) -> usize {
    let k_bits = game.final_value().bits() as usize;
    let max = game.max_label();
    let label_bits = if max.is_zero() {
        0
    } else {
        (max - 1u32).bits() as usize
    };
    k_bits.max(label_bits)
}

/// Builds the BPA whose `X ~ X'` holds iff Player 0 wins the game.
/// The game must be binary (see [`crate::games::normalize_hor`]).
pub fn reduce_hor_to_bpa(game: &HorGame, mode: BottomMode) -> Result<ReducedInstance> {
    reduce_hor_to_bpa_with(game, mode, None)
}

/// As [`reduce_hor_to_bpa`], with an optional counter width override.
pub fn reduce_hor_to_bpa_with(game: &HorGame, mode: BottomMode, b: Option<usize>) -> Result<ReducedInstance> {
    if !game.is_binary() {
        return Err(Error::Validation(
            "every state needs exactly two transitions; normalize the game first".into(),
        ));
    }
    let minimal = minimal_counter_width(game);
    let b = match b {
        Some(b) if b < minimal => {
            return Err(Error::OutOfRange(format!(
                "counter width {b} is too small, need at least {minimal}"
            )))
        }
        Some(b) => b,
        None => minimal,
    };
    let base = FinalCheck::named(game.final_value(), b, mode, game.final_name())?;
    let FinalCheck {
        mut bpa,
        action,
        bin,
        bottom,
        fin,
        fin_prime,
    } = base;
    let mut states = Vec::with_capacity(game.state_count());
    for s in 0..game.state_count() {
        let name = game.name(s);
        states.push((bpa.add_fresh_symbol(name)?, bpa.add_fresh_symbol(&format!("{name}'"))?));
    }
    let loc_syms = |loc: Location| match loc {
        Location::State(s) => states[s],
        Location::Final => (fin, fin_prime),
    };
    let mut gadgets = Vec::with_capacity(game.state_count());
    for s in 0..game.state_count() {
        let kind = GadgetKind::for_owner(game.owner(s));
        let mut aux = [StackSymbol(0); 4];
        for (slot, suffix) in aux.iter_mut().zip(kind.aux_suffixes()) {
            *slot = bpa.add_fresh_symbol(&format!("u.{}.{suffix}", game.name(s)))?;
        }
        let tail = |c: usize, primed: bool| -> Result<StackString> {
            let t = &game.out(s)[c];
            let (x, xp) = loc_syms(t.target);
            let head = if primed { xp } else { x };
            Ok(StackString(vec![head]).concat(&bin.bin(&t.label)?))
        };
        let tails = Tails {
            t1: tail(0, false)?,
            t1_prime: tail(0, true)?,
            t2: tail(1, false)?,
            t2_prime: tail(1, true)?,
        };
        let syms = GadgetSymbols {
            s: states[s].0,
            s_prime: states[s].1,
            aux,
        };
        for r in build_gadget(kind, &syms, &tails, bottom, action)? {
            bpa.add_rule(r.head, r.action, r.body)?;
        }
        gadgets.push((kind, aux));
    }
    let left = bpa.add_fresh_symbol("X")?;
    let right = bpa.add_fresh_symbol("X'")?;
    let (init, init_prime) = states[game.initial()];
    bpa.add_rule(left, action, StackString(vec![init, bottom]))?;
    bpa.add_rule(right, action, StackString(vec![init_prime, bottom]))?;
    Ok(ReducedInstance {
        bpa,
        left,
        right,
        mode,
        action,
        bin,
        bottom,
        fin,
        fin_prime,
        states,
        gadgets,
    })
}
