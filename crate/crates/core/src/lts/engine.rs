//! Explored transition graphs and signature-based refinement.
//!
//! A [`Graph`] is grown breadth-first from a set of roots, one layer per
//! call. The [`Stratifier`] assigns level-`j` classes to every state whose
//! depth-`j` unfolding lies inside the explored ball: a state at depth `d`
//! in a ball of radius `R` gets levels `0..=R-d`. Class ids are interned
//! per level from `(previous class, signature)`, so two states share an id
//! at level `j` iff they are related by the level-`j` approximant.
//!
//! Edges carry a weighted target list so the same machinery serves plain
//! transition systems (unit weights, one target per edge) and probabilistic
//! ones (exact rational masses).

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::symbol::Action;

pub(crate) trait Weight: Clone + Ord + Hash + Debug {
    fn merge(&mut self, other: &Self);
}

impl Weight for () {
    fn merge(&mut self, _other: &Self) {}
}

impl Weight for BigRational {
    fn merge(&mut self, other: &Self) {
        *self += other;
    }
}

pub(crate) type Edge<W> = (Action, Vec<(usize, W)>);
pub(crate) type Expansion<S, W> = Vec<(Action, Vec<(S, W)>)>;

type Signature<W> = (u32, Vec<(Action, Vec<(u32, W)>)>);

pub(crate) struct Graph<S, W> {
    states: Vec<S>,
    index: HashMap<S, usize>,
    by_depth: Vec<Vec<usize>>,
    edges: Vec<Option<Vec<Edge<W>>>>,
    frontier: Vec<usize>,
    budget: usize,
}

impl<S, W> Graph<S, W>
where
    S: Clone + Eq + Hash,
    W: Weight,
{
    pub fn new(roots: impl IntoIterator<Item = S>, budget: usize) -> Result<Self> {
        let mut g = Graph {
            states: Vec::new(),
            index: HashMap::new(),
            by_depth: vec![Vec::new()],
            edges: Vec::new(),
            frontier: Vec::new(),
            budget,
        };
        for root in roots {
            if let (id, true) = g.insert(root, 0)? {
                g.frontier.push(id);
            }
        }
        Ok(g)
    }

    fn insert(&mut self, state: S, depth: usize) -> Result<(usize, bool)> {
        if let Some(&id) = self.index.get(&state) {
            return Ok((id, false));
        }
        if self.states.len() >= self.budget {
            return Err(Error::ResourceLimit {
                what: "state-space exploration",
                budget: self.budget,
            });
        }
        let id = self.states.len();
        self.states.push(state.clone());
        self.index.insert(state, id);
        self.edges.push(None);
        if self.by_depth.len() <= depth {
            self.by_depth.resize_with(depth + 1, Vec::new);
        }
        self.by_depth[depth].push(id);
        Ok((id, true))
    }

    /// Expands every unexpanded state; new successors form the next layer.
    /// Returns the number of states added.
    pub fn grow(&mut self, expand: &mut impl FnMut(&S) -> Expansion<S, W>) -> Result<usize> {
        let depth = self.by_depth.len();
        let frontier = std::mem::take(&mut self.frontier);
        let mut next = Vec::new();
        for id in frontier {
            let succ = expand(&self.states[id]);
            let mut edges = Vec::with_capacity(succ.len());
            for (action, targets) in succ {
                let mut mapped = Vec::with_capacity(targets.len());
                for (t, w) in targets {
                    let (tid, fresh) = self.insert(t, depth)?;
                    if fresh {
                        next.push(tid);
                    }
                    mapped.push((tid, w));
                }
                edges.push((action, mapped));
            }
            self.edges[id] = Some(edges);
        }
        let added = next.len();
        self.frontier = next;
        Ok(added)
    }

    pub fn explore_all(&mut self, expand: &mut impl FnMut(&S) -> Expansion<S, W>) -> Result<()> {
        while !self.is_complete() {
            self.grow(expand)?;
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn id(&self, state: &S) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn edges(&self, id: usize) -> Option<&[Edge<W>]> {
        self.edges[id].as_deref()
    }

    pub fn states_at_depth(&self, depth: usize) -> &[usize] {
        self.by_depth.get(depth).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn signature<W: Weight>(prev: u32, edges: &[Edge<W>], class_of: impl Fn(usize) -> u32) -> Signature<W> {
    let mut sig: Vec<(Action, Vec<(u32, W)>)> = edges
        .iter()
        .map(|(a, targets)| {
            let mut by_class: Vec<(u32, W)> = Vec::with_capacity(targets.len());
            for (t, w) in targets {
                let c = class_of(*t);
                match by_class.iter_mut().find(|(k, _)| *k == c) {
                    Some((_, acc)) => acc.merge(w),
                    None => by_class.push((c, w.clone())),
                }
            }
            by_class.sort();
            (*a, by_class)
        })
        .collect();
    sig.sort();
    sig.dedup();
    (prev, sig)
}

fn intern<W: Weight>(table: &mut HashMap<Signature<W>, u32>, sig: Signature<W>) -> u32 {
    let next = table.len() as u32;
    *table.entry(sig).or_insert(next)
}

/// Incremental level classes over a growing [`Graph`].
pub(crate) struct Stratifier<W> {
    classes: Vec<Vec<u32>>,
    tables: Vec<HashMap<Signature<W>, u32>>,
    radius: usize,
}

impl<W: Weight> Stratifier<W> {
    pub fn new() -> Self {
        Stratifier {
            classes: Vec::new(),
            tables: Vec::new(),
            radius: 0,
        }
    }

    /// Brings classes up to date for a ball one layer larger than last time.
    /// The graph must have been grown (or be complete) beforehand.
    pub fn advance<S: Clone + Eq + Hash>(&mut self, graph: &Graph<S, W>) {
        while self.classes.len() < graph.len() {
            self.classes.push(vec![0]);
        }
        self.radius += 1;
        let r = self.radius;
        if self.tables.len() < r {
            self.tables.resize_with(r, HashMap::new);
        }
        for level in 1..=r {
            let depth = r - level;
            for &id in graph.states_at_depth(depth) {
                debug_assert_eq!(self.classes[id].len(), level);
                let edges = graph
                    .edges(id)
                    .expect("state inside the ball must be expanded");
                let classes = &self.classes;
                let sig = signature(classes[id][level - 1], edges, |t| classes[t][level - 1]);
                let c = intern(&mut self.tables[level - 1], sig);
                self.classes[id].push(c);
            }
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn class(&self, id: usize, level: usize) -> Option<u32> {
        self.classes.get(id).and_then(|c| c.get(level)).copied()
    }
}

/// Result of refining a fully explored graph to its fixpoint.
pub(crate) struct Refinement {
    pub classes: Vec<u32>,
    /// Per-level class history of the watched states, levels `0..=rounds`.
    pub watched: Vec<Vec<u32>>,
}

impl Refinement {
    /// Least level at which two watched states (by position) fall apart.
    pub fn first_split(&self, a: usize, b: usize) -> Option<usize> {
        self.watched[a]
            .iter()
            .zip(&self.watched[b])
            .position(|(x, y)| x != y)
    }
}

/// Level-by-level refinement of a complete graph until the partition is
/// stable. Terminates after at most `graph.len()` rounds.
pub(crate) fn refine_full<S: Clone + Eq + Hash, W: Weight>(
    graph: &Graph<S, W>,
    watch: &[usize],
) -> Refinement {
    assert!(graph.is_complete(), "refine_full needs a fully explored graph");
    let n = graph.len();
    let mut classes = vec![0u32; n];
    let mut count = usize::from(n > 0);
    let mut watched: Vec<Vec<u32>> = watch.iter().map(|_| vec![0]).collect();
    loop {
        let mut table = HashMap::new();
        let next: Vec<u32> = (0..n)
            .map(|id| {
                let edges = graph.edges(id).unwrap_or(&[]);
                intern(&mut table, signature(classes[id], edges, |t| classes[t]))
            })
            .collect();
        let stable = table.len() == count;
        count = table.len();
        classes = next;
        if stable {
            break;
        }
        for (h, &id) in watched.iter_mut().zip(watch) {
            h.push(classes[id]);
        }
    }
    Refinement { classes, watched }
}

/// Searches levels `1..=cap` for the least one separating `a` and `b`.
///
/// Grows the ball one layer per level; if exploration completes first, the
/// remaining levels are settled by a full refinement of the finite graph.
/// Returns the level and the number of explored states.
pub(crate) fn first_separating_level<S, W>(
    a: S,
    b: S,
    cap: usize,
    budget: usize,
    expand: &mut impl FnMut(&S) -> Expansion<S, W>,
) -> Result<(Option<usize>, usize)>
where
    S: Clone + Eq + Hash,
    W: Weight,
{
    if a == b || cap == 0 {
        return Ok((None, usize::from(cap > 0 || a == b)));
    }
    let mut graph = Graph::new([a.clone(), b.clone()], budget)?;
    let (ia, ib) = (graph.id(&a).unwrap(), graph.id(&b).unwrap());
    let mut strat = Stratifier::new();
    for level in 1..=cap {
        graph.grow(expand)?;
        if graph.is_complete() {
            let refinement = refine_full(&graph, &[ia, ib]);
            let split = refinement.first_split(0, 1).filter(|&l| l <= cap);
            return Ok((split, graph.len()));
        }
        strat.advance(&graph);
        debug_assert_eq!(strat.radius(), level);
        if strat.class(ia, level) != strat.class(ib, level) {
            return Ok((Some(level), graph.len()));
        }
    }
    Ok((None, graph.len()))
}
