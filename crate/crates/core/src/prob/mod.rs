//! Probabilistic transition systems and probabilistic bisimilarity.
//!
//! Every transition carries a distribution over successors with exact
//! rational probabilities. Level-`l` equivalence relates everything at
//! level 0; at level `l + 1` two states must offer, per action, the same
//! set of distributions once those are measured against level-`l` classes.

mod pbpa;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lts::{first_separating_level, refine_full, Expansion, FiniteLts, Graph, Partition};
use crate::symbol::{valid_token, Action, Interner};

pub use pbpa::{
    prob_exact_check_finite, prob_refute, reduce_hor_to_pbpa, uniformize, PBpa, PBpaLts, ProbReducedInstance,
};

/// A finitely supported probability distribution with exact masses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution<T> {
    // sorted by outcome, masses positive and summing to one
    entries: Vec<(T, BigRational)>,
}

impl<T: Ord + Clone> Distribution<T> {
    /// Merges repeated outcomes; rejects non-positive masses and totals
    /// other than one.
    pub fn new(entries: impl IntoIterator<Item = (T, BigRational)>) -> Result<Self> {
        let mut merged: BTreeMap<T, BigRational> = BTreeMap::new();
        for (t, p) in entries {
            if p <= BigRational::zero() {
                return Err(Error::Validation(format!("probability {p} is not positive")));
            }
            *merged.entry(t).or_insert_with(BigRational::zero) += p;
        }
        let total: BigRational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Distribution {
            entries: merged.into_iter().collect(),
        })
    }

    pub fn dirac(t: T) -> Self {
        Distribution {
            entries: vec![(t, BigRational::one())],
        }
    }

    /// Equal mass on each listed outcome (repetitions add up).
    pub fn uniform(items: impl IntoIterator<Item = T>) -> Result<Self> {
        let items: Vec<T> = items.into_iter().collect();
        if items.is_empty() {
            return Err(Error::Validation("uniform distribution over nothing".into()));
        }
        let p = BigRational::new(1.into(), items.len().into());
        Self::new(items.into_iter().map(|t| (t, p.clone())))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &BigRational)> {
        self.entries.iter().map(|(t, p)| (t, p))
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_dirac(&self) -> bool {
        self.entries.len() == 1
    }

    pub fn prob(&self, t: &T) -> BigRational {
        self.entries
            .binary_search_by(|(x, _)| x.cmp(t))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    /// Image under `f`, adding up the masses of merged outcomes.
    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> Distribution<U> {
        let mut merged: BTreeMap<U, BigRational> = BTreeMap::new();
        for (t, p) in &self.entries {
            *merged.entry(f(t)).or_insert_with(BigRational::zero) += p;
        }
        Distribution {
            entries: merged.into_iter().collect(),
        }
    }

    pub(crate) fn into_entries(self) -> Vec<(T, BigRational)> {
        self.entries
    }
}

/// A probabilistic transition system given by its transition function.
pub trait PLts {
    type State: Clone + Eq + Hash + Ord + Debug;

    /// Transitions sorted by `(action, distribution)` without duplicates.
    fn transitions(&self, state: &Self::State) -> Vec<(Action, Distribution<Self::State>)>;

    fn canonical(&self, state: Self::State) -> Self::State {
        state
    }
}

pub(crate) fn prob_expansion<P: PLts>(
    plts: &P,
) -> impl FnMut(&P::State) -> Expansion<P::State, BigRational> + '_ {
    move |s| {
        plts.transitions(s)
            .into_iter()
            .map(|(a, d)| (a, d.into_entries()))
            .collect()
    }
}

/// Finite pLTS with named states and actions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FinitePLts {
    states: Interner,
    actions: Interner,
    out: Vec<Vec<(Action, Distribution<usize>)>>,
}

impl FinitePLts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: &str) -> Result<usize> {
        if !valid_token(name) {
            return Err(Error::Validation(format!("invalid state name `{name}`")));
        }
        let id = self.states.intern(name) as usize;
        if self.out.len() <= id {
            self.out.resize_with(id + 1, Vec::new);
        }
        Ok(id)
    }

    pub fn add_action(&mut self, name: &str) -> Result<Action> {
        if !valid_token(name) {
            return Err(Error::Validation(format!("invalid action name `{name}`")));
        }
        Ok(Action(self.actions.intern(name)))
    }

    pub fn add_transition(&mut self, src: usize, action: Action, dist: Distribution<usize>) -> Result<()> {
        let n = self.out.len();
        if src >= n || dist.support().any(|&t| t >= n) {
            return Err(Error::Validation("transition endpoint out of range".into()));
        }
        if action.index() >= self.actions.len() {
            return Err(Error::Validation("undeclared action".into()));
        }
        let out = &mut self.out[src];
        let entry = (action, dist);
        if let Err(pos) = out.binary_search(&entry) {
            out.insert(pos, entry);
        }
        Ok(())
    }

    /// The same system with every transition as a Dirac distribution.
    pub fn from_lts(lts: &FiniteLts) -> Self {
        let mut p = FinitePLts::new();
        for s in 0..lts.state_count() {
            p.add_state(lts.state_name(s)).expect("names already validated");
        }
        for a in lts.actions() {
            p.add_action(lts.action_name(a)).expect("names already validated");
        }
        for (s, a, t) in lts.transitions() {
            p.add_transition(s, a, Distribution::dirac(t)).expect("endpoints declared");
        }
        p
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

    pub fn out(&self, state: usize) -> &[(Action, Distribution<usize>)] {
        &self.out[state]
    }
}

impl PLts for FinitePLts {
    type State = usize;

    fn transitions(&self, state: &usize) -> Vec<(Action, Distribution<usize>)> {
        self.out[*state].clone()
    }
}

/// Coarsest probabilistic bisimulation on a finite pLTS.
pub fn prob_bisim_partition(plts: &FinitePLts) -> Partition {
    let n = plts.state_count();
    let mut graph: Graph<usize, BigRational> =
        Graph::new(0..n, n.max(1)).expect("budget covers all declared states");
    graph
        .explore_all(&mut prob_expansion(plts))
        .expect("finite pLTS has no unseen states");
    Partition::from_classes(&refine_full(&graph, &[]).classes)
}

/// Whether `s` and `t` are related at level `level`.
pub fn prob_approx_equiv<P: PLts>(
    plts: &P,
    s: &P::State,
    t: &P::State,
    level: usize,
    budget: usize,
) -> Result<bool> {
    Ok(prob_distinguishing_level(plts, s, t, level, budget)?.is_none())
}

/// Least `l <= cap` at which `s` and `t` are not related.
pub fn prob_distinguishing_level<P: PLts>(
    plts: &P,
    s: &P::State,
    t: &P::State,
    cap: usize,
    budget: usize,
) -> Result<Option<usize>> {
    let (s, t) = (plts.canonical(s.clone()), plts.canonical(t.clone()));
    Ok(first_separating_level(s, t, cap, budget, &mut prob_expansion(plts))?.0)
}
