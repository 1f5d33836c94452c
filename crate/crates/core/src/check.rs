//! Bisimilarity checks on BPA configurations.
//!
//! * [`exact_check_finite`] decides on the finite reachable fragment.
//! * [`refute`] searches for a distinguishing approximant level.
//! * [`decide_one_action_no_dead`] handles one-action BPAs without dead
//!   symbols through norms and the delta transform.

use std::fmt;

use crate::bpa::{dead_symbols, delta_bullet, generated_lts, has_finite_reach, norms, Bpa, BpaLts, Norm, StackString};
use crate::error::{Error, Result};
use crate::lts::{expansion, first_separating_level, refine_full, Graph, Lts, DEFAULT_BUDGET};
use crate::symbol::StackSymbol;

/// Default refutation depth.
pub const DEFAULT_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckVerdict {
    Bisimilar,
    /// Carries the least level at which the two sides differ.
    NotBisimilar { level: usize },
    /// No difference found up to `cap`; only refutation returns this.
    Inconclusive { cap: usize },
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckVerdict::Bisimilar => f.write_str("BISIMILAR"),
            CheckVerdict::NotBisimilar { level } => write!(f, "NOT_BISIMILAR level={level}"),
            CheckVerdict::Inconclusive { cap } => write!(f, "INCONCLUSIVE cap={cap}"),
        }
    }
}

impl CheckVerdict {
    pub fn is_not_bisimilar(&self) -> bool {
        matches!(self, CheckVerdict::NotBisimilar { .. })
    }

    pub fn outcome(&self) -> &'static str {
        match self {
            CheckVerdict::Bisimilar => "BISIMILAR",
            CheckVerdict::NotBisimilar { .. } => "NOT_BISIMILAR",
            CheckVerdict::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }

    /// Parses the one-line form produced by `Display`.
    pub fn parse(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace();
        let verdict = match parts.next()? {
            "BISIMILAR" => CheckVerdict::Bisimilar,
            "NOT_BISIMILAR" => CheckVerdict::NotBisimilar {
                level: parts.next()?.strip_prefix("level=")?.parse().ok()?,
            },
            "INCONCLUSIVE" => CheckVerdict::Inconclusive {
                cap: parts.next()?.strip_prefix("cap=")?.parse().ok()?,
            },
            _ => return None,
        };
        parts.next().is_none().then_some(verdict)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: CheckVerdict,
    pub explored_states: usize,
}

impl CheckReport {
    /// Machine-readable record with keys `outcome`, `level`, and
    /// `explored_states` (`level` is null unless the outcome is
    /// `NOT_BISIMILAR`).
    pub fn record(&self) -> String {
        let level = match self.verdict {
            CheckVerdict::NotBisimilar { level } => level.to_string(),
            _ => "null".to_string(),
        };
        format!(
            "{{\"outcome\": \"{}\", \"level\": {}, \"explored_states\": {}}}",
            self.verdict.outcome(),
            level,
            self.explored_states
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Maximum number of configurations any exploration may visit.
    pub budget: usize,
    /// Canonicalize runs of countdown symbols while exploring.
    pub compress: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: DEFAULT_BUDGET,
            compress: true,
        }
    }
}

impl CheckOptions {
    pub fn with_budget(budget: usize) -> Self {
        CheckOptions {
            budget,
            ..Self::default()
        }
    }
}

fn view<'a>(bpa: &'a Bpa, opts: &CheckOptions) -> BpaLts<'a> {
    if opts.compress {
        BpaLts::compressed(bpa)
    } else {
        generated_lts(bpa)
    }
}

fn check_word(bpa: &Bpa, w: &StackString) -> Result<()> {
    if w.iter().any(|s| s.index() >= bpa.symbol_count()) {
        return Err(Error::Precondition("configuration mentions an unknown symbol".into()));
    }
    Ok(())
}

/// Decides bisimilarity exactly when the configurations reachable from
/// both sides fit in the budget.
pub fn exact_check_finite(
    bpa: &Bpa,
    left: &StackString,
    right: &StackString,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if opts.budget == 0 {
        return Err(Error::Precondition("budget must be positive".into()));
    }
    check_word(bpa, left)?;
    check_word(bpa, right)?;
    if !has_finite_reach(bpa, &[left.clone(), right.clone()]) {
        return Err(Error::ResourceLimit {
            what: "an infinite reachable state space",
            budget: opts.budget,
        });
    }
    let lts = view(bpa, opts);
    let (l, r) = (lts.canonical(left.clone()), lts.canonical(right.clone()));
    let mut graph: Graph<StackString, ()> = Graph::new([l.clone(), r.clone()], opts.budget)?;
    graph.explore_all(&mut expansion(&lts))?;
    let (il, ir) = (graph.id(&l).unwrap(), graph.id(&r).unwrap());
    let refinement = refine_full(&graph, &[il, ir]);
    let verdict = match refinement.first_split(0, 1) {
        Some(level) => CheckVerdict::NotBisimilar { level },
        None => CheckVerdict::Bisimilar,
    };
    Ok(CheckReport {
        verdict,
        explored_states: graph.len(),
    })
}

/// Looks for the least level `<= cap` separating the two configurations.
/// Never answers `Bisimilar`.
pub fn refute(
    bpa: &Bpa,
    left: &StackString,
    right: &StackString,
    cap: usize,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    check_word(bpa, left)?;
    check_word(bpa, right)?;
    let lts = view(bpa, opts);
    let (l, r) = (lts.canonical(left.clone()), lts.canonical(right.clone()));
    let (level, explored) = first_separating_level(l, r, cap, opts.budget, &mut expansion(&lts))?;
    let verdict = match level {
        Some(level) => CheckVerdict::NotBisimilar { level },
        None => CheckVerdict::Inconclusive { cap },
    };
    Ok(CheckReport {
        verdict,
        explored_states: explored,
    })
}

/// Least distinguishing level for a pair known to be non-bisimilar.
fn known_level(
    bpa: &Bpa,
    left: &StackString,
    right: &StackString,
    cap: usize,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let report = refute(bpa, left, right, cap, opts)?;
    match report.verdict {
        CheckVerdict::NotBisimilar { .. } => Ok(report),
        // only reachable if the caller's non-bisimilarity claim was wrong
        _ => Err(Error::Precondition(
            "expected a distinguishing level within the search bound".into(),
        )),
    }
}

/// Decision procedure for BPAs with one action and no dead symbols.
///
/// Two infinite-norm symbols are always bisimilar, a finite and an infinite
/// one never are; two finite-norm symbols are compared in the delta
/// transform, which only keeps finite-norm symbols. `NotBisimilar` levels
/// refer to the original BPA.
pub fn decide_one_action_no_dead(
    bpa: &Bpa,
    left: StackSymbol,
    right: StackSymbol,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if bpa.action_count() != 1 {
        return Err(Error::Precondition(format!(
            "expected exactly one action, found {}",
            bpa.action_count()
        )));
    }
    let dead = dead_symbols(bpa);
    if let Some(&d) = dead.iter().next() {
        return Err(Error::Precondition(format!(
            "symbol `{}` is dead",
            bpa.symbol_name(d)
        )));
    }
    for s in [left, right] {
        if s.index() >= bpa.symbol_count() {
            return Err(Error::Precondition("unknown symbol".into()));
        }
    }
    let norm = norms(bpa);
    let (nl, nr) = (&norm[left.index()], &norm[right.index()]);
    let (wl, wr) = (StackString(vec![left]), StackString(vec![right]));
    match (nl, nr) {
        (Norm::Infinite, Norm::Infinite) => Ok(CheckReport {
            verdict: CheckVerdict::Bisimilar,
            explored_states: 0,
        }),
        (Norm::Finite(n), Norm::Infinite) | (Norm::Infinite, Norm::Finite(n)) => {
            // the finite side deadlocks after n steps, the other never does
            let cap = usize::try_from(n)
                .ok()
                .and_then(|n| n.checked_add(1))
                .unwrap_or(usize::MAX);
            known_level(bpa, &wl, &wr, cap, opts)
        }
        (Norm::Finite(_), Norm::Finite(_)) => {
            let fresh = fresh_action_name(bpa);
            let reduced = delta_bullet(bpa, &fresh)?;
            let rename = |s: StackSymbol| {
                reduced
                    .symbol(bpa.symbol_name(s))
                    .map(|x| StackString(vec![x]))
                    .expect("finite-norm symbols survive the transform")
            };
            let inner = exact_check_finite(&reduced, &rename(left), &rename(right), opts)?;
            match inner.verdict {
                CheckVerdict::NotBisimilar { .. } => {
                    let mut report = known_level(bpa, &wl, &wr, usize::MAX, opts)?;
                    report.explored_states += inner.explored_states;
                    Ok(report)
                }
                verdict => Ok(CheckReport {
                    verdict,
                    explored_states: inner.explored_states,
                }),
            }
        }
    }
}

fn fresh_action_name(bpa: &Bpa) -> String {
    let mut name = format!("{}_bar", bpa.action_name(crate::Action(0)));
    while bpa.action(&name).is_some() {
        name.push('_');
    }
    name
}
