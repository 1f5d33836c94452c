//! Labelled transition systems, strong bisimilarity and its approximants.

mod engine;

use std::fmt::Debug;
use std::hash::Hash;

pub(crate) use engine::{first_separating_level, refine_full, Expansion, Graph};

use crate::error::{Error, Result};
use crate::symbol::{valid_token, Action, Interner};
use crate::text::{content_lines, header};

/// Default cap on the number of configurations any single exploration may
/// visit.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// A finitely branching transition system given by its successor function.
///
/// Implementations return successor lists sorted by `(action, state)` and
/// free of duplicates.
pub trait Lts {
    type State: Clone + Eq + Hash + Ord + Debug;

    fn successors(&self, state: &Self::State) -> Vec<(Action, Self::State)>;

    /// Maps a state to a representative with an isomorphic unfolding.
    /// Checkers apply it to the states they are handed; the default is the
    /// identity.
    fn canonical(&self, state: Self::State) -> Self::State {
        state
    }
}

pub(crate) fn expansion<L: Lts>(lts: &L) -> impl FnMut(&L::State) -> Expansion<L::State, ()> + '_ {
    move |s| {
        lts.successors(s)
            .into_iter()
            .map(|(a, t)| (a, vec![(t, ())]))
            .collect()
    }
}

/// Finite LTS with named states and actions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteLts {
    states: Interner,
    actions: Interner,
    out: Vec<Vec<(Action, usize)>>,
}

impl FiniteLts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: &str) -> usize {
        let id = self.states.intern(name) as usize;
        if self.out.len() <= id {
            self.out.resize_with(id + 1, Vec::new);
        }
        id
    }

    pub fn add_action(&mut self, name: &str) -> Action {
        Action(self.actions.intern(name))
    }

    pub fn add_transition(&mut self, src: usize, action: Action, dst: usize) -> Result<()> {
        let n = self.out.len();
        if src >= n || dst >= n {
            return Err(Error::Validation(format!(
                "transition endpoint out of range ({src} or {dst} >= {n})"
            )));
        }
        if action.index() >= self.actions.len() {
            return Err(Error::Validation(format!("undeclared action {}", action.0)));
        }
        let out = &mut self.out[src];
        if let Err(pos) = out.binary_search(&(action, dst)) {
            out.insert(pos, (action, dst));
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.out.len()
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.states.get(name).map(|i| i as usize)
    }

    pub fn state_name(&self, id: usize) -> &str {
        self.states.name(id as u32)
    }

    pub fn action_id(&self, name: &str) -> Option<Action> {
        self.actions.get(name).map(Action)
    }

    pub fn action_name(&self, action: Action) -> &str {
        self.actions.name(action.0)
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> {
        (0..self.actions.len() as u32).map(Action)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Action, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |&(a, t)| (s, a, t)))
    }

    pub fn out(&self, state: usize) -> &[(Action, usize)] {
        &self.out[state]
    }

    /// Parses `src action dst` lines. An optional `states:` line declares
    /// states that appear in no transition.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lts = FiniteLts::new();
        for (line_no, line) in content_lines(text) {
            if let Some(rest) = header(line, "states") {
                for name in rest.split_whitespace() {
                    check_token(line_no, name)?;
                    lts.add_state(name);
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [src, act, dst] = tokens[..] else {
                return Err(Error::parse(line_no, "expected `src action dst`"));
            };
            for t in [src, act, dst] {
                check_token(line_no, t)?;
            }
            let s = lts.add_state(src);
            let d = lts.add_state(dst);
            let a = lts.add_action(act);
            lts.add_transition(s, a, d)?;
        }
        Ok(lts)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let isolated: Vec<&str> = (0..self.state_count())
            .filter(|&s| self.out[s].is_empty() && !self.transitions().any(|(_, _, d)| d == s))
            .map(|s| self.state_name(s))
            .collect();
        if !isolated.is_empty() {
            out.push_str(&format!("states: {}\n", isolated.join(" ")));
        }
        for (s, a, d) in self.transitions() {
            out.push_str(&format!(
                "{} {} {}\n",
                self.state_name(s),
                self.action_name(a),
                self.state_name(d)
            ));
        }
        out
    }
}

fn check_token(line: usize, t: &str) -> Result<()> {
    if valid_token(t) {
        Ok(())
    } else {
        Err(Error::parse(line, format!("invalid name `{t}`")))
    }
}

impl Lts for FiniteLts {
    type State = usize;

    fn successors(&self, state: &usize) -> Vec<(Action, usize)> {
        self.out[*state].clone()
    }
}

/// An equivalence relation over `0..n` given by block ids. Blocks are
/// numbered in order of their smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn from_classes<C: Copy + Eq + Hash>(classes: &[C]) -> Self {
        let mut ids = std::collections::HashMap::new();
        let block = classes
            .iter()
            .map(|c| {
                let next = ids.len();
                *ids.entry(*c).or_insert(next)
            })
            .collect();
        Partition {
            block,
            count: ids.len(),
        }
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block[state]
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block[a] == self.block[b]
    }

    pub fn num_blocks(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.count];
        for (s, &b) in self.block.iter().enumerate() {
            blocks[b].push(s);
        }
        blocks
    }
}

/// Coarsest strong bisimulation on a finite LTS.
pub fn bisim_partition(lts: &FiniteLts) -> Partition {
    let n = lts.state_count();
    let mut graph: Graph<usize, ()> =
        Graph::new(0..n, n.max(1)).expect("budget covers all declared states");
    graph
        .explore_all(&mut expansion(lts))
        .expect("finite LTS has no unseen states");
    let refinement = refine_full(&graph, &[]);
    // graph ids coincide with state ids: roots were inserted in order and
    // every successor is itself a root
    Partition::from_classes(&refinement.classes)
}

/// Whether `s` and `t` are related by the level-`level` approximant.
pub fn approx_equiv<L: Lts>(
    lts: &L,
    s: &L::State,
    t: &L::State,
    level: usize,
    budget: usize,
) -> Result<bool> {
    Ok(distinguishing_level(lts, s, t, level, budget)?.is_none())
}

/// Least `l <= cap` with `s` and `t` not related at level `l`.
pub fn distinguishing_level<L: Lts>(
    lts: &L,
    s: &L::State,
    t: &L::State,
    cap: usize,
    budget: usize,
) -> Result<Option<usize>> {
    let (s, t) = (lts.canonical(s.clone()), lts.canonical(t.clone()));
    let (level, _) = first_separating_level(s, t, cap, budget, &mut expansion(lts))?;
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lts(text: &str) -> FiniteLts {
        FiniteLts::parse(text).unwrap()
    }

    #[test]
    fn loop_and_cycle_are_bisimilar() {
        let l = lts("p a p\nq a r\nr a q\n");
        let part = bisim_partition(&l);
        assert_eq!(part.num_blocks(), 1);
    }

    #[test]
    fn different_actions_split() {
        let l = lts("p a x\nq b y\n");
        let part = bisim_partition(&l);
        let (p, q) = (l.state_id("p").unwrap(), l.state_id("q").unwrap());
        assert!(!part.same_block(p, q));
        // both deadlocks are bisimilar
        assert!(part.same_block(l.state_id("x").unwrap(), l.state_id("y").unwrap()));
    }

    #[test]
    fn or_gadget_with_dead_tails() {
        let l = lts(
            "s a u12\ns a u1'2'\ns' a u12'\ns' a u1'2\n\
             u12 a t1\nu12 a t2\nu1'2' a t1'\nu1'2' a t2'\n\
             u12' a t1\nu12' a t2'\nu1'2 a t1'\nu1'2 a t2\n",
        );
        assert_eq!(l.state_count(), 10);
        let part = bisim_partition(&l);
        assert!(part.same_block(l.state_id("s").unwrap(), l.state_id("s'").unwrap()));
    }

    #[test]
    fn approximant_levels() {
        let l = lts("x a y\ny a z\np a q\nd a d\nstates: e\n");
        let id = |n| l.state_id(n).unwrap();
        assert!(approx_equiv(&l, &id("x"), &id("e"), 0, 100).unwrap());
        assert!(!approx_equiv(&l, &id("e"), &id("d"), 1, 100).unwrap());
        assert!(approx_equiv(&l, &id("x"), &id("p"), 1, 100).unwrap());
        assert!(!approx_equiv(&l, &id("x"), &id("p"), 2, 100).unwrap());
        assert_eq!(distinguishing_level(&l, &id("x"), &id("p"), 10, 100).unwrap(), Some(2));
        assert_eq!(distinguishing_level(&l, &id("e"), &id("d"), 10, 100).unwrap(), Some(1));
        assert_eq!(distinguishing_level(&l, &id("x"), &id("x"), 10, 100).unwrap(), None);
    }

    #[test]
    fn budget_is_reported() {
        struct Counter;
        impl Lts for Counter {
            type State = u64;
            fn successors(&self, s: &u64) -> Vec<(Action, u64)> {
                vec![(Action(0), s + 1)]
            }
        }
        let err = approx_equiv(&Counter, &0, &1000, 50, 20).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
        // the two unbounded chains never differ
        assert!(approx_equiv(&Counter, &0, &1000, 50, 1000).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let l = lts("# comment\np a q\nstates: lone\n");
        let again = lts(&l.to_text());
        assert_eq!(again.state_count(), 3);
        assert!(again.state_id("lone").is_some());
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = FiniteLts::parse("p a q\np a\n").unwrap_err();
        assert_eq!(err, Error::parse(2, "expected `src action dst`"));
    }
}
