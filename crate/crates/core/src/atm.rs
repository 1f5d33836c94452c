//! Alternating Turing machines on a bounded tape, a reference evaluator,
//! and their reduction to hit-or-run games.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::games::{HorBuilder, HorGame, Location, Player};
use crate::lts::DEFAULT_BUDGET;
use crate::symbol::valid_token;
use crate::text::{content_lines, header};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// `(state, read) -> (next, write, dir)`, all as indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtmTransition {
    pub state: usize,
    pub read: usize,
    pub next: usize,
    pub write: usize,
    pub dir: Direction,
}

impl AtmTransition {
    /// Head position after the move, if it stays on the tape.
    pub fn target_cell(&self, head: usize, cells: usize) -> Option<usize> {
        match self.dir {
            Direction::L => head.checked_sub(1),
            Direction::R => Some(head + 1).filter(|&h| h < cells),
        }
    }
}

/// A machine whose alphabet letters are encoded by their position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atm {
    alphabet: Vec<String>,
    states: Vec<String>,
    quantifiers: Vec<Quantifier>,
    delta: Vec<AtmTransition>,
    initial: usize,
    accept: usize,
    reject: usize,
    tape_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtmOutcome {
    Accept,
    Reject,
    Timeout,
}

impl Atm {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<(String, Quantifier)>,
        delta: Vec<AtmTransition>,
        initial: usize,
        accept: usize,
        reject: usize,
        tape_cells: usize,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::Validation(m));
        if alphabet.is_empty() {
            return invalid("empty alphabet".into());
        }
        if tape_cells == 0 {
            return invalid("the tape needs at least one cell".into());
        }
        for names in [&alphabet, &states.iter().map(|s| s.0.clone()).collect::<Vec<_>>()] {
            let mut seen = std::collections::HashSet::new();
            for n in names {
                if !valid_token(n) || !seen.insert(n) {
                    return invalid(format!("invalid or duplicate name `{n}`"));
                }
            }
        }
        let (nq, g) = (states.len(), alphabet.len());
        if [initial, accept, reject].iter().any(|&q| q >= nq) || accept == reject {
            return invalid("initial, accept and reject must be distinct declared states".into());
        }
        let mut delta = delta;
        delta.sort();
        delta.dedup();
        if delta
            .iter()
            .any(|t| t.state >= nq || t.next >= nq || t.read >= g || t.write >= g)
        {
            return invalid("transition mentions an undeclared state or letter".into());
        }
        for q in 0..nq {
            for a in 0..g {
                let mut ts = delta.iter().filter(|t| t.state == q && t.read == a);
                let ok = if q == accept || q == reject {
                    ts.any(|t| t.next == q)
                } else {
                    ts.next().is_some()
                };
                if !ok {
                    let what = if q == accept || q == reject { "self-loop" } else { "transition" };
                    return invalid(format!("no {what} for state `{}` on `{}`", states[q].0, alphabet[a]));
                }
            }
        }
        let (states, quantifiers) = states.into_iter().unzip();
        Ok(Atm {
            alphabet,
            states,
            quantifiers,
            delta,
            initial,
            accept,
            reject,
            tape_cells,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letter(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == name)
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn quantifier(&self, q: usize) -> Quantifier {
        self.quantifiers[q]
    }

    pub fn delta(&self) -> &[AtmTransition] {
        &self.delta
    }

    pub fn tape_cells(&self) -> usize {
        self.tape_cells
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accept(&self) -> usize {
        self.accept
    }

    pub fn reject(&self) -> usize {
        self.reject
    }

    fn moves(&self, q: usize, a: usize) -> impl Iterator<Item = &AtmTransition> {
        self.delta.iter().filter(move |t| t.state == q && t.read == a)
    }

    /// Bound on the number of distinct configurations, `|Q| * N * G^N`.
    pub fn configuration_bound(&self) -> BigUint {
        BigUint::from(self.states.len())
            * BigUint::from(self.tape_cells)
            * BigUint::from(self.alphabet.len()).pow(self.tape_cells as u32)
    }

    /// `configuration_bound() + 1`, saturated to `usize`.
    pub fn default_step_bound(&self) -> usize {
        (self.configuration_bound() + 1u32).to_usize().unwrap_or(usize::MAX)
    }

    /// Input word padded with the first letter to the full tape.
    pub fn initial_tape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() > self.tape_cells {
            return Err(Error::Precondition(format!(
                "input of length {} exceeds {} tape cells",
                input.len(),
                self.tape_cells
            )));
        }
        if input.iter().any(|&a| a >= self.alphabet.len()) {
            return Err(Error::Precondition("input letter outside the alphabet".into()));
        }
        let mut tape = input.to_vec();
        tape.resize(self.tape_cells, 0);
        Ok(tape)
    }

    /// Reads an input word written as letter names separated by spaces, or
    /// as a run of one-character letters.
    pub fn parse_input(&self, text: &str) -> Result<Vec<usize>> {
        let tokens: Vec<&str> = if text.contains(char::is_whitespace) {
            text.split_whitespace().collect()
        } else {
            text.char_indices().map(|(i, c)| &text[i..i + c.len_utf8()]).collect()
        };
        tokens
            .iter()
            .map(|t| {
                self.letter(t)
                    .ok_or_else(|| Error::Precondition(format!("unknown letter `{t}`")))
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_atm(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet: {}", self.alphabet.join(" "));
        for (key, quant) in [("exists", Quantifier::Exists), ("forall", Quantifier::Forall)] {
            let names: Vec<&str> = (0..self.states.len())
                .filter(|&q| self.quantifiers[q] == quant)
                .map(|q| self.states[q].as_str())
                .collect();
            if !names.is_empty() {
                let _ = writeln!(out, "{key}: {}", names.join(" "));
            }
        }
        let _ = writeln!(out, "init: {}", self.states[self.initial]);
        let _ = writeln!(out, "accept: {}", self.states[self.accept]);
        let _ = writeln!(out, "reject: {}", self.states[self.reject]);
        let _ = writeln!(out, "tape_cells: {}", self.tape_cells);
        for t in &self.delta {
            let _ = writeln!(
                out,
                "{} {} -> {} {} {:?}",
                self.states[t.state], self.alphabet[t.read], self.states[t.next], self.alphabet[t.write], t.dir
            );
        }
        out
    }
}

fn parse_atm(text: &str) -> Result<Atm> {
    let mut alphabet: Vec<String> = Vec::new();
    let mut states: Vec<(String, Quantifier)> = Vec::new();
    let mut roles: [Option<(usize, String)>; 3] = Default::default();
    let mut cells = None;
    let mut rules = Vec::new();
    let mut last = 1;
    for (no, line) in content_lines(text) {
        last = no;
        if let Some(rest) = header(line, "alphabet") {
            alphabet.extend(rest.split_whitespace().map(str::to_string));
        } else if let Some(rest) = header(line, "exists") {
            states.extend(rest.split_whitespace().map(|s| (s.to_string(), Quantifier::Exists)));
        } else if let Some(rest) = header(line, "forall") {
            states.extend(rest.split_whitespace().map(|s| (s.to_string(), Quantifier::Forall)));
        } else if let Some(rest) = header(line, "tape_cells") {
            cells = Some(rest.parse::<usize>().map_err(|_| Error::parse(no, "bad tape_cells"))?);
        } else if let Some((slot, rest)) = ["init", "accept", "reject"]
            .iter()
            .enumerate()
            .find_map(|(i, k)| header(line, k).map(|r| (i, r)))
        {
            roles[slot] = Some((no, rest.to_string()));
        } else {
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| Error::parse(no, "expected `q a -> q' a' L|R`"))?;
            let l: Vec<&str> = lhs.split_whitespace().collect();
            let r: Vec<&str> = rhs.split_whitespace().collect();
            let (&[q, a], &[q2, a2, d]) = (&l[..], &r[..]) else {
                return Err(Error::parse(no, "expected `q a -> q' a' L|R`"));
            };
            let dir = match d {
                "L" => Direction::L,
                "R" => Direction::R,
                _ => return Err(Error::parse(no, format!("bad direction `{d}`"))),
            };
            rules.push((no, q.to_string(), a.to_string(), q2.to_string(), a2.to_string(), dir));
        }
    }
    // halting states need no quantifier line
    for (no, name) in roles[1..].iter().flatten() {
        if !states.iter().any(|(s, _)| s == name) {
            if !valid_token(name) {
                return Err(Error::parse(*no, format!("invalid state name `{name}`")));
            }
            states.push((name.clone(), Quantifier::Exists));
        }
    }
    let state = |no: usize, name: &str| {
        states
            .iter()
            .position(|(s, _)| s == name)
            .ok_or_else(|| Error::parse(no, format!("undeclared state `{name}`")))
    };
    let letter = |no: usize, name: &str| {
        alphabet
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::parse(no, format!("undeclared letter `{name}`")))
    };
    let role = |slot: usize, key: &str| {
        let (no, name) = roles[slot]
            .as_ref()
            .ok_or_else(|| Error::parse(last, format!("missing `{key}:`")))?;
        state(*no, name)
    };
    let (initial, accept, reject) = (role(0, "init")?, role(1, "accept")?, role(2, "reject")?);
    let mut delta = Vec::new();
    for (no, q, a, q2, a2, dir) in &rules {
        delta.push(AtmTransition {
            state: state(*no, q)?,
            read: letter(*no, a)?,
            next: state(*no, q2)?,
            write: letter(*no, a2)?,
            dir: *dir,
        });
    }
    let cells = cells.ok_or_else(|| Error::parse(last, "missing `tape_cells:`"))?;
    Atm::new(alphabet, states, delta, initial, accept, reject, cells)
}

/// `sum tape[i] * G^i`.
pub fn encode_tape(tape: &[usize], g: usize) -> BigUint {
    tape.iter()
        .rev()
        .fold(BigUint::zero(), |acc, &d| acc * g + BigUint::from(d))
}

fn check_digit(what: &str, v: usize, below: usize) -> Result<()> {
    if v >= below {
        return Err(Error::OutOfRange(format!("{what} = {v} must be below {below}")));
    }
    Ok(())
}

/// Counter increment for rewriting cell `i` from `a` to `a2`:
/// `G^i * (a2 - a) + G^N`, which is always positive.
pub fn tape_delta(i: usize, a: usize, a2: usize, g: usize, n: usize) -> Result<BigUint> {
    check_digit("position", i, n)?;
    check_digit("letter", a, g)?;
    check_digit("letter", a2, g)?;
    let gi = BigInt::from(g).pow(i as u32);
    let v = gi * (BigInt::from(a2) - BigInt::from(a)) + BigInt::from(g).pow(n as u32);
    Ok(v.to_biguint().expect("positive by construction"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Clears digit `j` of the tape encoding.
    Check,
    /// Raises digit `j` above the tape encoding.
    Fill,
}

/// Label of a checking-phase edge: `G^N - G^j * l` in the first phase,
/// `G^j * l` in the second.
pub fn phase_label(phase: Phase, j: usize, l: usize, g: usize, n: usize) -> Result<BigUint> {
    check_digit("digit", l, g)?;
    let gj = BigUint::from(g).pow(j as u32);
    match phase {
        Phase::Check => {
            check_digit("position", j, n)?;
            Ok(BigUint::from(g).pow(n as u32) - gj * l)
        }
        Phase::Fill => {
            if j < n {
                return Err(Error::OutOfRange(format!("second-phase position {j} is below {n}")));
            }
            Ok(gj * l)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Config {
    state: usize,
    head: usize,
    tape: Vec<usize>,
}

/// Evaluates the alternation tree from the initial configuration.
///
/// A configuration accepts (rejects) if it has an accepting (rejecting)
/// witness tree of height at most `step_bound`; anything else, including
/// configurations caught in cycles, times out.
pub fn eval_atm(atm: &Atm, input: &[usize], step_bound: usize) -> Result<AtmOutcome> {
    let start = Config {
        state: atm.initial,
        head: 0,
        tape: atm.initial_tape(input)?,
    };
    let mut index = HashMap::from([(start.clone(), 0usize)]);
    let mut configs = vec![start];
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < configs.len() {
        let c = configs[i].clone();
        let mut next = Vec::new();
        if c.state != atm.accept && c.state != atm.reject {
            for t in atm.moves(c.state, c.tape[c.head]) {
                let Some(head) = t.target_cell(c.head, atm.tape_cells) else {
                    continue;
                };
                let mut tape = c.tape.clone();
                tape[c.head] = t.write;
                let n = Config { state: t.next, head, tape };
                let id = match index.get(&n) {
                    Some(&id) => id,
                    None => {
                        if configs.len() >= DEFAULT_BUDGET {
                            return Err(Error::ResourceLimit {
                                what: "machine configurations",
                                budget: DEFAULT_BUDGET,
                            });
                        }
                        index.insert(n.clone(), configs.len());
                        configs.push(n);
                        configs.len() - 1
                    }
                };
                next.push(id);
            }
            if next.is_empty() {
                return Err(Error::Validation(format!(
                    "state `{}` at cell {} has no move that stays on the tape",
                    atm.states[c.state], c.head
                )));
            }
        }
        succ.push(next);
        i += 1;
    }

    let accept_height = witness_heights(atm, &configs, &succ, atm.accept);
    let reject_height = witness_heights(atm, &configs, &succ, atm.reject);
    let within = |h: Option<usize>| h.is_some_and(|h| h <= step_bound);
    Ok(if within(accept_height[0]) {
        AtmOutcome::Accept
    } else if within(reject_height[0]) {
        AtmOutcome::Reject
    } else {
        AtmOutcome::Timeout
    })
}

/// Least height of a witness tree reaching `goal`, where existential
/// states need one good successor and universal states need all of them
/// (dually when the goal is rejection).
fn witness_heights(atm: &Atm, configs: &[Config], succ: &[Vec<usize>], goal: usize) -> Vec<Option<usize>> {
    let n = configs.len();
    let mut preds = vec![Vec::new(); n];
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            preds[v].push(u);
        }
    }
    let needs_all = |q: usize| {
        let universal = atm.quantifiers[q] == Quantifier::Forall;
        if goal == atm.accept {
            universal
        } else {
            !universal
        }
    };
    let mut pending: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut height = vec![None; n];
    let mut queue = VecDeque::new();
    for (u, c) in configs.iter().enumerate() {
        if c.state == goal {
            height[u] = Some(0);
            queue.push_back(u);
        }
    }
    while let Some(v) = queue.pop_front() {
        let h = height[v].unwrap() + 1;
        for &u in &preds[v] {
            if height[u].is_some() {
                continue;
            }
            pending[u] -= 1;
            if !needs_all(configs[u].state) || pending[u] == 0 {
                height[u] = Some(h);
                queue.push_back(u);
            }
        }
    }
    height
}

/// Quantities fixed by the reduction for a given machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionParameters {
    pub g: usize,
    pub n: usize,
    /// `|Q| * N * G^N`.
    pub m: BigUint,
    /// Least `i` with `G^i - G^N >= G^N * (m + N)`.
    pub n_prime: usize,
    /// `G^N' - G^N`.
    pub k_final: BigUint,
}

impl ReductionParameters {
    pub fn for_atm(atm: &Atm) -> Result<Self> {
        let (g, n) = (atm.alphabet.len(), atm.tape_cells);
        if g < 2 {
            return Err(Error::Validation("the reduction needs at least two letters".into()));
        }
        let gn = BigUint::from(g).pow(n as u32);
        let m = atm.configuration_bound();
        let need = &gn * (&m + BigUint::from(n));
        let mut n_prime = n;
        let mut gi = gn.clone();
        while &gi - &gn < need {
            gi *= g;
            n_prime += 1;
        }
        Ok(ReductionParameters {
            g,
            n,
            m,
            n_prime,
            k_final: gi - gn,
        })
    }
}

/// Builds a hit-or-run game that Player 0 wins iff the machine accepts.
///
/// State names: `q.i` for the simulation, `q.i.a` for claims, `q.i.a.*`
/// for the machine's choice, `chk.i.a.j` for the first checking phase,
/// `s.j` for the second, and `start` for the initial state. Moves that
/// would leave the tape are not offered.
pub fn reduce_atm_to_hor(atm: &Atm, input: &[usize]) -> Result<HorGame> {
    let p = ReductionParameters::for_atm(atm)?;
    let (g, n) = (p.g, p.n);
    let tape = atm.initial_tape(input)?;
    let mut b = HorBuilder::new();

    let nq = atm.state_count();
    let mut sim = vec![vec![0usize; n]; nq];
    for (q, row) in sim.iter_mut().enumerate() {
        let owner = if q == atm.reject { Player::One } else { Player::Zero };
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = b.state(&format!("{}.{i}", atm.states[q]), owner)?;
        }
    }
    // second phase: s.n .. s.(n'-1), then the final s.n'
    let fill: Vec<usize> = (n..p.n_prime)
        .map(|j| b.state(&format!("s.{j}"), Player::Zero))
        .collect::<Result<_>>()?;
    let fill_loc = |j: usize| {
        if j == p.n_prime {
            Location::Final
        } else {
            Location::State(fill[j - n])
        }
    };
    for j in n..p.n_prime {
        for l in 0..g {
            b.edge(fill[j - n], phase_label(Phase::Fill, j, l, g, n)?, fill_loc(j + 1));
        }
    }
    // first phase: chk.i.a.0 .. chk.i.a.(n-1), merging into s.n
    let mut check = vec![vec![0usize; g]; n];
    for i in 0..n {
        for a in 0..g {
            let chain: Vec<usize> = (0..n)
                .map(|j| b.state(&format!("chk.{i}.{}.{j}", atm.alphabet[a]), Player::Zero))
                .collect::<Result<_>>()?;
            for j in 0..n {
                let next = if j + 1 == n { fill_loc(n) } else { Location::State(chain[j + 1]) };
                let digits: Vec<usize> = if j == i { vec![a] } else { (0..g).collect() };
                for l in digits {
                    b.edge(chain[j], phase_label(Phase::Check, j, l, g, n)?, next);
                }
            }
            check[i][a] = chain[0];
        }
    }
    for q in 0..nq {
        let choice_owner = match atm.quantifiers[q] {
            Quantifier::Exists => Player::Zero,
            Quantifier::Forall => Player::One,
        };
        for i in 0..n {
            for a in 0..g {
                let prefix = format!("{}.{i}.{}", atm.states[q], atm.alphabet[a]);
                let claim = b.state(&prefix, Player::One)?;
                let choice = b.state(&format!("{prefix}.*"), choice_owner)?;
                b.edge(sim[q][i], 0u32, Location::State(claim));
                b.edge(claim, 0u32, Location::State(choice));
                b.edge(claim, 0u32, Location::State(check[i][a]));
                for t in atm.moves(q, a) {
                    if let Some(i2) = t.target_cell(i, n) {
                        b.edge(choice, tape_delta(i, a, t.write, g, n)?, Location::State(sim[t.next][i2]));
                    }
                }
                if b.out_degree(choice) == 0 {
                    return Err(Error::Validation(format!(
                        "state `{}` reading `{}` at cell {i} has no move that stays on the tape",
                        atm.states[q], atm.alphabet[a]
                    )));
                }
            }
        }
        for i in 0..n {
            if q == atm.accept {
                b.edge(sim[q][i], 0u32, Location::State(sim[q][i]));
            } else if q == atm.reject {
                b.edge(sim[q][i], 1u32, Location::State(sim[q][i]));
                b.edge(sim[q][i], 0u32, Location::Final);
            }
        }
    }
    let start = b.state("start", Player::Zero)?;
    b.edge(start, encode_tape(&tape, g), Location::State(sim[atm.initial][0]));
    b.build(start, &format!("s.{}", p.n_prime), p.k_final)
}
