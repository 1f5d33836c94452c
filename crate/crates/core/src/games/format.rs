use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Num;

use super::{CountdownGame, HorBuilder, HorGame, Location, Player};
use crate::error::{Error, Result};
use crate::text::{content_lines, header};

/// A parsed game file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameFile {
    Hor(HorGame),
    Countdown(CountdownGame),
}

impl GameFile {
    pub fn to_text(&self) -> String {
        match self {
            GameFile::Hor(g) => g.to_text(),
            GameFile::Countdown(g) => g.to_text(),
        }
    }
}

/// Parses a label in decimal or `0b` binary.
pub fn parse_label(text: &str) -> Option<BigUint> {
    match text.strip_prefix("0b") {
        Some(bits) if !bits.is_empty() => BigUint::from_str_radix(bits, 2).ok(),
        Some(_) => None,
        None => BigUint::from_str_radix(text, 10).ok(),
    }
}

struct Draft<'a> {
    kind: &'a str,
    owners: Vec<(usize, &'a str, Player)>,
    init: Option<(usize, &'a str)>,
    final_state: Option<(usize, &'a str)>,
    final_value: Option<BigUint>,
    edges: Vec<(usize, &'a str, BigUint, &'a str)>,
}

fn draft(text: &str) -> Result<Draft<'_>> {
    let mut lines = content_lines(text);
    let (first_no, kind) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty game file"))?;
    if kind != "hor" && kind != "countdown" {
        return Err(Error::parse(first_no, "expected header `hor` or `countdown`"));
    }
    let mut d = Draft {
        kind,
        owners: Vec::new(),
        init: None,
        final_state: None,
        final_value: None,
        edges: Vec::new(),
    };
    for (no, line) in lines {
        let owner = [
            ("player0", Player::Zero),
            ("player1", Player::One),
            ("states", Player::Zero),
        ]
        .into_iter()
        .find_map(|(key, p)| header(line, key).map(|rest| (rest, p)));
        if let Some((rest, p)) = owner {
            d.owners.extend(rest.split_whitespace().map(|s| (no, s, p)));
        } else if let Some(rest) = header(line, "init") {
            d.init = Some((no, rest));
        } else if let Some(rest) = header(line, "final_value") {
            let v = parse_label(rest).ok_or_else(|| Error::parse(no, "bad final value"))?;
            d.final_value = Some(v);
        } else if let Some(rest) = header(line, "final") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [name, value] = parts[..] else {
                return Err(Error::parse(no, "expected `final: <state> <value>`"));
            };
            d.final_state = Some((no, name));
            d.final_value = Some(parse_label(value).ok_or_else(|| Error::parse(no, "bad final value"))?);
        } else {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [src, label, dst] = parts[..] else {
                return Err(Error::parse(no, "expected `src +<label> dst`"));
            };
            let label = label
                .strip_prefix('+')
                .and_then(parse_label)
                .ok_or_else(|| Error::parse(no, format!("bad label `{label}`")))?;
            d.edges.push((no, src, label, dst));
        }
    }
    Ok(d)
}

/// Parses the game text format; the first content line selects the kind.
pub fn parse_game(text: &str) -> Result<GameFile> {
    let d = draft(text)?;
    let last = text.lines().count().max(1);
    let final_value = d
        .final_value
        .clone()
        .ok_or_else(|| Error::parse(last, "missing final value"))?;
    let (init_no, init) = d.init.ok_or_else(|| Error::parse(last, "missing `init:`"))?;
    if d.kind == "hor" {
        let (_, final_name) = d
            .final_state
            .ok_or_else(|| Error::parse(last, "missing `final: <state> <value>`"))?;
        let mut b = HorBuilder::new();
        for &(no, name, p) in &d.owners {
            b.state(name, p).map_err(|e| Error::parse(no, e.to_string()))?;
        }
        let loc = |b: &HorBuilder, no: usize, name: &str| {
            if name == final_name {
                Ok(Location::Final)
            } else {
                b.id(name)
                    .map(Location::State)
                    .ok_or_else(|| Error::parse(no, format!("undeclared state `{name}`")))
            }
        };
        for (no, src, label, dst) in d.edges {
            let Location::State(s) = loc(&b, no, src)? else {
                return Err(Error::parse(no, "the final state has no moves"));
            };
            let t = loc(&b, no, dst)?;
            b.edge(s, label, t);
        }
        let Location::State(i) = loc(&b, init_no, init)? else {
            return Err(Error::parse(init_no, "initial state cannot be final"));
        };
        Ok(GameFile::Hor(b.build(i, final_name, final_value)?))
    } else {
        let mut ids = HashMap::new();
        let mut names = Vec::new();
        for &(no, name, _) in &d.owners {
            if ids.insert(name, names.len()).is_some() {
                return Err(Error::parse(no, format!("duplicate state `{name}`")));
            }
            names.push(name.to_string());
        }
        let id = |no: usize, name: &str| {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::parse(no, format!("undeclared state `{name}`")))
        };
        let mut edges = Vec::new();
        for (no, src, label, dst) in d.edges {
            edges.push((id(no, src)?, label, id(no, dst)?));
        }
        let i = id(init_no, init)?;
        Ok(GameFile::Countdown(CountdownGame::new(names, edges, i, final_value)?))
    }
}

impl HorGame {
    pub fn parse(text: &str) -> Result<Self> {
        match parse_game(text)? {
            GameFile::Hor(g) => Ok(g),
            GameFile::Countdown(_) => Err(Error::parse(1, "expected a `hor` game")),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("hor\n");
        for p in [Player::Zero, Player::One] {
            let names: Vec<&str> = (0..self.state_count())
                .filter(|&s| self.owner(s) == p)
                .map(|s| self.name(s))
                .collect();
            if !names.is_empty() {
                let key = if p == Player::Zero { "player0" } else { "player1" };
                let _ = writeln!(out, "{key}: {}", names.join(" "));
            }
        }
        let _ = writeln!(out, "init: {}", self.name(self.initial()));
        let _ = writeln!(out, "final: {} {}", self.final_name(), self.final_value());
        for s in 0..self.state_count() {
            for t in self.out(s) {
                let _ = writeln!(out, "{} +{} {}", self.name(s), t.label, self.location_name(t.target));
            }
        }
        out
    }
}

impl CountdownGame {
    pub fn parse(text: &str) -> Result<Self> {
        match parse_game(text)? {
            GameFile::Countdown(g) => Ok(g),
            GameFile::Hor(_) => Err(Error::parse(1, "expected a `countdown` game")),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("countdown\n");
        let names: Vec<&str> = (0..self.state_count()).map(|q| self.name(q)).collect();
        let _ = writeln!(out, "states: {}", names.join(" "));
        let _ = writeln!(out, "init: {}", self.name(self.initial()));
        let _ = writeln!(out, "final_value: {}", self.final_value());
        for (q, l, r) in self.transitions() {
            let _ = writeln!(out, "{} +{} {}", self.name(q), l, self.name(r));
        }
        out
    }
}
