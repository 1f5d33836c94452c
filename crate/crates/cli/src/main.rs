use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bpa_bisim::atm::{eval_atm, reduce_atm_to_hor, Atm, ReductionParameters};
use bpa_bisim::bpa::Bpa;
use bpa_bisim::check::{
    decide_one_action_no_dead, exact_check_finite, refute, CheckOptions, CheckReport, CheckVerdict, DEFAULT_CAP,
};
use bpa_bisim::games::{
    normalize_hor, parse_game, reduce_cd_to_hor, solve_countdown, solve_hor, Counter, CountdownGame, GameFile,
    HorGame, Location,
};
use bpa_bisim::gen::{random_countdown, random_hor, random_one_action_bpa, rng, BpaParams, CountdownParams, HorParams};
use bpa_bisim::lts::DEFAULT_BUDGET;
use bpa_bisim::pipeline::{verify, Fault, PipelineOptions};
use bpa_bisim::prob::{prob_exact_check_finite, prob_refute, uniformize, PBpa};
use bpa_bisim::reduction::{reduce_hor_to_bpa_with, BottomMode};
use bpa_bisim::Error;

/// BPA bisimilarity checks, counter games and the reductions between them.
#[derive(Parser)]
#[command(name = "bpa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Limits {
    /// Maximum number of explored configurations.
    #[arg(long, env = "BPA_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two configurations of a BPA (or pBPA) file.
    Check {
        file: PathBuf,
        /// Left configuration, e.g. "X" or "s a b bot".
        left: String,
        right: String,
        #[arg(long, value_enum, default_value_t = CheckMode::Exact)]
        mode: CheckMode,
        /// Refutation depth.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[command(flatten)]
        limits: Limits,
        /// Read the file as a probabilistic BPA.
        #[arg(long)]
        prob: bool,
        /// Print a JSON record instead of the text form.
        #[arg(long)]
        json: bool,
        /// Explore raw configurations without chain compression.
        #[arg(long)]
        no_compress: bool,
    },
    /// Solve a hit-or-run or countdown game.
    Solve {
        file: PathBuf,
        /// Also print the positional strategies.
        #[arg(long)]
        strategy: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Run one of the reductions, writing the artifact and `<out>.manifest`.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = "dead")]
        mode: BottomMode,
        /// Counter width; the least admissible width by default.
        #[arg(long)]
        b: Option<usize>,
        /// Machine input for `atm2hor`, e.g. "01".
        #[arg(long)]
        input_word: Option<String>,
    },
    /// Randomized consistency checks.
    Pipeline {
        #[command(subcommand)]
        action: PipelineAction,
    },
    /// Print seeded random instances.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        size: SizeFlags,
        /// Write `<kind>-<i>.txt` files here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PipelineAction {
    /// Generate games, reduce them both ways and check the verdicts agree.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        size: SizeFlags,
        /// Add per-instance wall times to the report.
        #[arg(long)]
        timing: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Args, Clone, Copy)]
struct SizeFlags {
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    max_final: Option<u32>,
    #[arg(long)]
    max_label: Option<u32>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum CheckMode {
    Exact,
    Refute,
    Prop2,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ReduceKind {
    Atm2hor,
    Cd2hor,
    Hor2bpa,
    Hor2pbpa,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum GenKind {
    Hor,
    Countdown,
    Bpa,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn verdict_code(v: &CheckVerdict) -> u8 {
    match v {
        CheckVerdict::Bisimilar => 0,
        CheckVerdict::NotBisimilar { .. } => 1,
        CheckVerdict::Inconclusive { .. } => 2,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    left: &str,
    right: &str,
    mode: CheckMode,
    cap: usize,
    opts: CheckOptions,
    prob: bool,
    json: bool,
) -> anyhow::Result<u8> {
    let text = read(file)?;
    let report: CheckReport = if prob {
        let p = PBpa::parse(&text)?;
        let (l, r) = (p.parse_word(left)?, p.parse_word(right)?);
        match mode {
            CheckMode::Exact => prob_exact_check_finite(&p, &l, &r, &opts)?,
            CheckMode::Refute => prob_refute(&p, &l, &r, cap, &opts)?,
            CheckMode::Prop2 => bail!(Error::Precondition(
                "prop2 mode applies to nondeterministic BPAs only".into()
            )),
        }
    } else {
        let bpa = Bpa::parse(&text)?;
        let (l, r) = (bpa.parse_word(left)?, bpa.parse_word(right)?);
        match mode {
            CheckMode::Exact => exact_check_finite(&bpa, &l, &r, &opts)?,
            CheckMode::Refute => refute(&bpa, &l, &r, cap, &opts)?,
            CheckMode::Prop2 => {
                let ([x], [y]) = (&l.0[..], &r.0[..]) else {
                    bail!(Error::Precondition("prop2 mode compares single symbols".into()));
                };
                decide_one_action_no_dead(&bpa, *x, *y, &opts)?
            }
        }
    };
    if json {
        println!("{}", report.record());
    } else {
        println!("{}", report.verdict);
        println!("explored_states: {}", report.explored_states);
    }
    Ok(verdict_code(&report.verdict))
}

fn print_hor_strategy(game: &HorGame, budget: usize) -> anyhow::Result<()> {
    let sol = solve_hor(game, budget)?;
    let counters = (0..=sol.k_final()).map(Counter::Exact).chain([Counter::Top]);
    for c in counters {
        let shown = match c {
            Counter::Exact(k) => k.to_string(),
            Counter::Top => "top".to_string(),
        };
        for s in 0..game.state_count() {
            let owner = game.owner(s);
            if sol.winner(Location::State(s), c) != owner {
                continue;
            }
            if let Some(i) = sol.strategy(s, c) {
                let t = &game.out(s)[i];
                println!(
                    "strategy: {} {shown} {owner} +{} {}",
                    game.name(s),
                    t.label,
                    game.location_name(t.target)
                );
            }
        }
    }
    Ok(())
}

fn cmd_solve(file: &Path, strategy: bool, budget: usize) -> anyhow::Result<u8> {
    match parse_game(&read(file)?)? {
        GameFile::Hor(g) => {
            println!("{}", solve_hor(&g, budget)?.winner_at_initial());
            if strategy {
                print_hor_strategy(&g, budget)?;
            }
        }
        GameFile::Countdown(g) => {
            println!("{}", solve_countdown(&g, budget)?);
            if strategy {
                for (q, row) in g.player0_table(budget)?.iter().enumerate() {
                    let bits: String = row.iter().map(|&w| if w { '0' } else { '1' }).collect();
                    println!("winners: {} {bits}", g.name(q));
                }
            }
        }
    }
    Ok(0)
}

fn cmd_reduce(
    kind: ReduceKind,
    input: &Path,
    output: &Path,
    mode: BottomMode,
    b: Option<usize>,
    word: Option<&str>,
) -> anyhow::Result<u8> {
    let text = read(input)?;
    let (artifact, manifest) = match kind {
        ReduceKind::Atm2hor => {
            let atm = Atm::parse(&text)?;
            let w = atm.parse_input(word.context("atm2hor needs --input-word")?)?;
            let game = reduce_atm_to_hor(&atm, &w)?;
            let p = ReductionParameters::for_atm(&atm)?;
            let outcome = eval_atm(&atm, &w, atm.default_step_bound())?;
            let manifest = format!(
                "kind: atm2hor\nG: {}\nN: {}\nm: {}\nN_prime: {}\nk_final: {}\nstates: {}\ntransitions: {}\nmachine: {outcome:?}\n",
                p.g,
                p.n,
                p.m,
                p.n_prime,
                p.k_final,
                game.state_count(),
                game.transition_count()
            );
            (game.to_text(), manifest)
        }
        ReduceKind::Cd2hor => {
            let cd = CountdownGame::parse(&text)?;
            let game = reduce_cd_to_hor(&cd)?;
            let manifest = format!(
                "kind: cd2hor\nstates: {}\ntransitions: {}\nfinal_value: {}\n",
                game.state_count(),
                game.transition_count(),
                game.final_value()
            );
            (game.to_text(), manifest)
        }
        ReduceKind::Hor2bpa | ReduceKind::Hor2pbpa => {
            let game = HorGame::parse(&text)?;
            let normalized = !game.is_binary();
            let game = if normalized { normalize_hor(&game) } else { game };
            let r = reduce_hor_to_bpa_with(&game, mode, b)?;
            let (name, artifact) = if kind == ReduceKind::Hor2bpa {
                ("hor2bpa", r.bpa.to_text())
            } else {
                ("hor2pbpa", uniformize(&r.bpa).to_text())
            };
            let manifest = format!("kind: {name}\nnormalized: {normalized}\n{}", r.manifest());
            (artifact, manifest)
        }
    };
    write(output, &artifact)?;
    let mut m = output.as_os_str().to_owned();
    m.push(".manifest");
    write(Path::new(&m), &manifest)?;
    Ok(0)
}

fn hor_params(size: SizeFlags) -> HorParams {
    let d = HorParams::default();
    HorParams {
        max_states: size.max_states.unwrap_or(d.max_states),
        max_final: size.max_final.unwrap_or(d.max_final),
        max_label: size.max_label.unwrap_or(d.max_label),
        ..d
    }
}

fn cmd_gen(kind: GenKind, seed: u64, count: usize, size: SizeFlags, out_dir: Option<&Path>) -> anyhow::Result<u8> {
    let mut r = rng(seed);
    let (name, mut next): (&str, Box<dyn FnMut() -> String>) = match kind {
        GenKind::Hor => {
            let p = hor_params(size);
            ("hor", Box::new(move || random_hor(&mut r, &p).to_text()))
        }
        GenKind::Countdown => {
            let d = CountdownParams::default();
            let p = CountdownParams {
                max_states: size.max_states.unwrap_or(d.max_states),
                max_final: size.max_final.unwrap_or(d.max_final),
                max_label: size.max_label.unwrap_or(d.max_label),
                ..d
            };
            ("countdown", Box::new(move || random_countdown(&mut r, &p).to_text()))
        }
        GenKind::Bpa => {
            let d = BpaParams::default();
            let p = BpaParams {
                max_symbols: size.max_states.unwrap_or(d.max_symbols),
                ..d
            };
            ("bpa", Box::new(move || random_one_action_bpa(&mut r, &p).to_text()))
        }
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for i in 0..count {
        let text = next();
        match out_dir {
            Some(dir) => write(&dir.join(format!("{name}-{i}.txt")), &text)?,
            None => print!("# instance {i} seed {seed}\n{text}\n"),
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Check {
            file,
            left,
            right,
            mode,
            cap,
            limits,
            prob,
            json,
            no_compress,
        } => {
            let opts = CheckOptions {
                budget: limits.budget,
                compress: !no_compress,
            };
            cmd_check(&file, &left, &right, mode, cap, opts, prob, json)
        }
        Command::Solve { file, strategy, limits } => cmd_solve(&file, strategy, limits.budget),
        Command::Reduce {
            kind,
            input,
            output,
            mode,
            b,
            input_word,
        } => cmd_reduce(kind, &input, &output, mode, b, input_word.as_deref()),
        Command::Pipeline {
            action:
                PipelineAction::Verify {
                    seed,
                    count,
                    cap,
                    limits,
                    size,
                    timing,
                    inject_fault,
                },
        } => {
            let opts = PipelineOptions {
                seed,
                count,
                cap,
                check: CheckOptions::with_budget(limits.budget),
                params: hor_params(size),
                fault: inject_fault.then_some(Fault::DropGadgetRule),
            };
            let report = verify(&opts)?;
            print!("{}", report.to_text(timing));
            Ok(if report.is_consistent() { 0 } else { 1 })
        }
        Command::Gen {
            kind,
            seed,
            count,
            size,
            out_dir,
        } => cmd_gen(kind, seed, count, size, out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let limit = matches!(e.downcast_ref::<Error>(), Some(Error::ResourceLimit { .. }));
            ExitCode::from(if limit { 4 } else { 3 })
        }
    }
}
