//! Randomized end-to-end consistency harness.
//!
//! Each random game is normalized and solved, then reduced to a BPA and a
//! pBPA in both bottom modes. A Player-1 win must be refuted within the
//! cap and a Player-0 win must not be refuted at all.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::bpa::StackString;
use crate::check::{refute, CheckOptions, CheckReport, CheckVerdict, DEFAULT_CAP};
use crate::error::Result;
use crate::gen::{random_hor, rng, HorParams};
use crate::games::{normalize_hor, solve_hor, HorBuilder, HorGame, Location, Player};
use crate::prob::{prob_refute, uniformize};
use crate::reduction::{reduce_hor_to_bpa, BottomMode, ReducedInstance};

/// Deliberate breakage used to check that the harness notices bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Removes the first rule of the initial state's gadget.
    DropGadgetRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOptions {
    pub seed: u64,
    pub count: usize,
    pub cap: usize,
    pub check: CheckOptions,
    pub params: HorParams,
    pub fault: Option<Fault>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            seed: 1,
            count: 10,
            cap: DEFAULT_CAP,
            check: CheckOptions::default(),
            params: HorParams::default(),
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRecord {
    /// `dead`, `loop`, `prob-dead` or `prob-loop`.
    pub stage: &'static str,
    pub symbols: usize,
    pub rules: usize,
    pub report: CheckReport,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceRecord {
    pub index: usize,
    pub digest: String,
    pub states: usize,
    pub transitions: usize,
    pub final_value: BigUint,
    pub normalized_states: usize,
    pub winner: Player,
    pub stages: Vec<StageRecord>,
    pub wall: Duration,
}

impl InstanceRecord {
    pub fn is_consistent(&self) -> bool {
        self.stages.iter().all(|s| s.consistent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub index: usize,
    pub stage: &'static str,
    pub message: String,
    /// Shrunk game, in the game text format, that still fails.
    pub counterexample: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineReport {
    pub seed: u64,
    pub count: usize,
    pub cap: usize,
    pub instances: Vec<InstanceRecord>,
    pub failures: Vec<Failure>,
}

impl PipelineReport {
    pub fn is_consistent(&self) -> bool {
        self.failures.is_empty()
    }

    /// `key: value` lines; wall times only when `timing` is set.
    pub fn to_text(&self, timing: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "count: {}", self.count);
        let _ = writeln!(out, "cap: {}", self.cap);
        for r in &self.instances {
            let p = format!("instance.{}", r.index);
            let _ = writeln!(out, "{p}.digest: {}", r.digest);
            let _ = writeln!(out, "{p}.states: {}", r.states);
            let _ = writeln!(out, "{p}.transitions: {}", r.transitions);
            let _ = writeln!(out, "{p}.final_value: {}", r.final_value);
            let _ = writeln!(out, "{p}.normalized_states: {}", r.normalized_states);
            let _ = writeln!(out, "{p}.winner: {}", r.winner);
            for s in &r.stages {
                let q = format!("{p}.{}", s.stage);
                let _ = writeln!(out, "{q}.symbols: {}", s.symbols);
                let _ = writeln!(out, "{q}.rules: {}", s.rules);
                let _ = writeln!(out, "{q}.verdict: {}", s.report.verdict);
                let _ = writeln!(out, "{q}.explored_states: {}", s.report.explored_states);
                let _ = writeln!(out, "{q}.consistent: {}", s.consistent);
            }
            if timing {
                let _ = writeln!(out, "{p}.wall_ms: {}", r.wall.as_millis());
            }
        }
        let _ = writeln!(out, "failures: {}", self.failures.len());
        for f in &self.failures {
            let p = format!("failure.{}", f.index);
            let _ = writeln!(out, "{p}.stage: {}", f.stage);
            let _ = writeln!(out, "{p}.message: {}", f.message);
            for line in f.counterexample.lines() {
                let _ = writeln!(out, "{p}.game: {line}");
            }
        }
        let _ = writeln!(out, "consistent: {}", self.is_consistent());
        out
    }
}

/// Hex SHA-256 of the game text.
pub fn digest(game: &HorGame) -> String {
    Sha256::digest(game.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn apply_fault(game: &HorGame, r: &mut ReducedInstance, fault: Option<Fault>) {
    if fault == Some(Fault::DropGadgetRule) {
        let (s, _) = r.states[game.initial()];
        let (_, aux) = r.gadgets[game.initial()];
        r.bpa.remove_rule(s, r.action, &StackString(vec![aux[0]]));
    }
}

fn expected(winner: Player, verdict: &CheckVerdict) -> std::result::Result<(), String> {
    match (winner, verdict) {
        (Player::One, CheckVerdict::NotBisimilar { .. }) => Ok(()),
        (Player::Zero, CheckVerdict::Inconclusive { .. }) => Ok(()),
        (Player::One, v) => Err(format!("Player1 wins but refutation gave {v}")),
        (Player::Zero, v) => Err(format!("Player0 wins but refutation gave {v}")),
    }
}

/// Runs every stage on one game. Errors inside a stage count as
/// inconsistencies rather than aborting the run.
pub fn run_instance(
    index: usize,
    game: &HorGame,
    opts: &PipelineOptions,
) -> Result<(InstanceRecord, Option<(&'static str, String)>)> {
    let start = Instant::now();
    let normalized = normalize_hor(game);
    let winner = solve_hor(&normalized, opts.check.budget)?.winner_at_initial();
    let mut stages = Vec::new();
    let mut failure = None;
    for mode in [BottomMode::Dead, BottomMode::Loop] {
        let mut reduced = reduce_hor_to_bpa(&normalized, mode)?;
        apply_fault(&normalized, &mut reduced, opts.fault);
        let (l, r) = (StackString(vec![reduced.left]), StackString(vec![reduced.right]));
        let pbpa = uniformize(&reduced.bpa);
        let runs: [(&'static str, usize, usize, Result<CheckReport>); 2] = [
            (
                if mode == BottomMode::Dead { "dead" } else { "loop" },
                reduced.bpa.symbol_count(),
                reduced.bpa.rule_count(),
                refute(&reduced.bpa, &l, &r, opts.cap, &opts.check),
            ),
            (
                if mode == BottomMode::Dead { "prob-dead" } else { "prob-loop" },
                pbpa.symbol_count(),
                pbpa.rule_count(),
                prob_refute(&pbpa, &l, &r, opts.cap, &opts.check),
            ),
        ];
        for (stage, symbols, rules, outcome) in runs {
            let (report, check) = match outcome {
                Ok(report) => {
                    let check = expected(winner, &report.verdict);
                    (report, check)
                }
                Err(e) => {
                    let report = CheckReport {
                        verdict: CheckVerdict::Inconclusive { cap: opts.cap },
                        explored_states: 0,
                    };
                    (report, Err(e.to_string()))
                }
            };
            if let (Err(message), None) = (&check, &failure) {
                failure = Some((stage, message.clone()));
            }
            stages.push(StageRecord {
                stage,
                symbols,
                rules,
                report,
                consistent: check.is_ok(),
            });
        }
    }
    let record = InstanceRecord {
        index,
        digest: digest(game),
        states: game.state_count(),
        transitions: game.transition_count(),
        final_value: game.final_value().clone(),
        normalized_states: normalized.state_count(),
        winner,
        stages,
        wall: start.elapsed(),
    };
    Ok((record, failure))
}

/// Generates `count` games from `seed` and checks each one.
pub fn verify(opts: &PipelineOptions) -> Result<PipelineReport> {
    let mut r = rng(opts.seed);
    let mut instances = Vec::with_capacity(opts.count);
    let mut failures = Vec::new();
    for index in 0..opts.count {
        let game = random_hor(&mut r, &opts.params);
        let (record, failure) = run_instance(index, &game, opts)?;
        if let Some((stage, message)) = failure {
            failures.push(Failure {
                index,
                stage,
                message,
                counterexample: shrink(&game, opts).to_text(),
            });
        }
        instances.push(record);
    }
    Ok(PipelineReport {
        seed: opts.seed,
        count: opts.count,
        cap: opts.cap,
        instances,
        failures,
    })
}

#[derive(Clone)]
struct Draft {
    names: Vec<String>,
    owners: Vec<Player>,
    out: Vec<Vec<(BigUint, Location)>>,
    initial: usize,
    final_name: String,
    k: BigUint,
}

impl Draft {
    fn of(game: &HorGame) -> Self {
        let n = game.state_count();
        Draft {
            names: (0..n).map(|s| game.name(s).to_string()).collect(),
            owners: (0..n).map(|s| game.owner(s)).collect(),
            out: (0..n)
                .map(|s| game.out(s).iter().map(|t| (t.label.clone(), t.target)).collect())
                .collect(),
            initial: game.initial(),
            final_name: game.final_name().to_string(),
            k: game.final_value().clone(),
        }
    }

    /// Keeps only the states reachable from the initial one.
    fn build(&self) -> Option<HorGame> {
        let mut keep = vec![None; self.names.len()];
        let mut order = vec![self.initial];
        keep[self.initial] = Some(0);
        let mut i = 0;
        while i < order.len() {
            for (_, t) in &self.out[order[i]] {
                if let Location::State(t) = *t {
                    if keep[t].is_none() {
                        keep[t] = Some(order.len());
                        order.push(t);
                    }
                }
            }
            i += 1;
        }
        let mut b = HorBuilder::new();
        for &s in &order {
            b.state(&self.names[s], self.owners[s]).ok()?;
        }
        for (new, &s) in order.iter().enumerate() {
            for (l, t) in &self.out[s] {
                let t = match *t {
                    Location::State(t) => Location::State(keep[t]?),
                    Location::Final => Location::Final,
                };
                b.edge(new, l.clone(), t);
            }
        }
        b.build(0, &self.final_name, self.k.clone()).ok()
    }

    fn candidates(&self) -> Vec<Draft> {
        let mut all = Vec::new();
        let mut push = |f: &dyn Fn(&mut Draft)| {
            let mut d = self.clone();
            f(&mut d);
            all.push(d);
        };
        if self.k > BigUint::default() {
            push(&|d| d.k = BigUint::default());
            push(&|d| d.k = &d.k >> 1u32);
            push(&|d| d.k -= 1u32);
        }
        for s in 0..self.out.len() {
            for i in 0..self.out[s].len() {
                if self.out[s].len() > 1 {
                    push(&|d| {
                        d.out[s].remove(i);
                    });
                }
                if self.out[s][i].0 > BigUint::default() {
                    push(&|d| d.out[s][i].0 = BigUint::default());
                    push(&|d| d.out[s][i].0 = &d.out[s][i].0 >> 1u32);
                }
                if self.out[s][i].1 != Location::Final {
                    push(&|d| d.out[s][i].1 = Location::Final);
                }
            }
        }
        all
    }
}

/// Greedy shrinking: accepts any simplification that still fails.
fn shrink(game: &HorGame, opts: &PipelineOptions) -> HorGame {
    let fails = |g: &HorGame| !matches!(run_instance(0, g, opts), Ok((_, None)));
    let mut best = game.clone();
    let mut attempts = 0;
    'outer: while attempts < 200 {
        for cand in Draft::of(&best).candidates() {
            attempts += 1;
            if let Some(g) = cand.build() {
                if g != best && fails(&g) {
                    best = g;
                    continue 'outer;
                }
            }
        }
        break;
    }
    best
}
