use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bpa_bisim::bpa::Bpa;
use bpa_bisim::games::{parse_game, solve_countdown, CountdownGame, GameFile};
use bpa_bisim::prob::PBpa;
use bpa_bisim::reduction::{BottomMode, FinalCheck};
use num_bigint::BigUint;
use tempfile::TempDir;

const SOME_ONE: &str = "\
alphabet: 0 1
exists: q0
init: q0
accept: qacc
reject: qrej
tape_cells: 2
q0 1 -> qacc 1 L
q0 1 -> qacc 1 R
q0 0 -> q0 0 R
q0 0 -> qrej 0 L
qacc 0 -> qacc 0 L
qacc 0 -> qacc 0 R
qacc 1 -> qacc 1 L
qacc 1 -> qacc 1 R
qrej 0 -> qrej 0 L
qrej 0 -> qrej 0 R
qrej 1 -> qrej 1 L
qrej 1 -> qrej 1 R
";

fn bpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpa"))
        .args(args)
        .env_remove("BPA_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The final-value pair for `k = 5` and the word for `n`.
fn final_pair(dir: &TempDir, n: u32) -> (PathBuf, String, String) {
    let fc = FinalCheck::new(&BigUint::from(5u32), 3, BottomMode::Dead).unwrap();
    let alpha = fc.bpa.show(&fc.bin.bin(&BigUint::from(n)).unwrap().0);
    let f = file(dir, "final.bpa", &fc.bpa.to_text());
    (f, format!("fin {alpha} bot"), format!("fin' {alpha} bot"))
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let (f, l, r) = final_pair(&dir, 5);
    let out = bpa(&["check", s(&f), &l, &r]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("BISIMILAR\n"));

    let (f, l, r) = final_pair(&dir, 4);
    let out = bpa(&["check", s(&f), &l, &r]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("NOT_BISIMILAR level="));

    let out = bpa(&["check", s(&f), &l, &r, "--mode", "refute", "--json"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("{\"outcome\": \"NOT_BISIMILAR\", \"level\": "));

    let out = bpa(&["check", s(&f), "fin bot", "fin bot", "--mode", "refute", "--cap", "5"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).starts_with("INCONCLUSIVE cap=5\n"));
}

#[test]
fn decider_mode_needs_one_action() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "two.bpa", "actions: a b\nX a -> X\nX b -> .\n");
    let out = bpa(&["check", s(&f), "X", "X", "--mode", "prop2"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));

    let f = file(&dir, "one.bpa", "actions: a\nA a -> A\nB a -> B B\nC a -> .\n");
    assert_eq!(code(&bpa(&["check", s(&f), "A", "B", "--mode", "prop2"])), 0);
    assert_eq!(code(&bpa(&["check", s(&f), "A", "C", "--mode", "prop2"])), 1);
}

#[test]
fn errors_exit_above_two() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "bad.bpa", "actions: a\nX a -> X\nX -> Y\n");
    let out = bpa(&["check", s(&f), "X", "X"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let f = file(&dir, "grow.bpa", "actions: a\nX a -> X X\nY a -> Y Y Y\n");
    let out = bpa(&["check", s(&f), "X", "Y", "--budget", "50"]);
    assert_eq!(code(&out), 4);
    let out = Command::new(env!("CARGO_BIN_EXE_bpa"))
        .args(["check", s(&f), "X", "Y"])
        .env("BPA_BUDGET", "50")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    assert_eq!(code(&bpa(&["check", "/nonexistent", "X", "Y"])), 3);
}

#[test]
fn prob_check() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "p.pbpa", "actions: a b\nX a -> 1/2: Y | 1/2: Z\nW a -> Y\nY b -> .\nZ b -> .\n");
    assert_eq!(code(&bpa(&["check", s(&f), "X", "W", "--prob"])), 0);
    let f = file(&dir, "q.pbpa", "actions: a b c\nX a -> 1/2: Y | 1/2: Z\nW a -> Y\nY b -> .\nZ c -> .\n");
    assert_eq!(code(&bpa(&["check", s(&f), "X", "W", "--prob"])), 1);
}

#[test]
fn solve_games() {
    let dir = TempDir::new().unwrap();
    let forever = file(&dir, "forever.hor", "hor\nplayer0: s\ninit: s\nfinal: fin 3\ns +0 s\n");
    let out = bpa(&["solve", s(&forever)]);
    assert_eq!((code(&out), stdout(&out)), (0, "Player0\n".to_string()));

    let one = file(&dir, "one.hor", "hor\nplayer1: s\ninit: s\nfinal: fin 0\ns +1 fin\ns +0 fin\n");
    let out = bpa(&["solve", s(&one), "--strategy"]);
    let text = stdout(&out);
    assert!(text.starts_with("Player1\n"));
    assert!(text.contains("strategy: s 0 Player1 +1 fin"));

    let cd = file(&dir, "loop.cd", "countdown\nstates: q\ninit: q\nfinal_value: 4\nq +2 q\n");
    assert_eq!(stdout(&bpa(&["solve", s(&cd)])), "Player0\n");
}

#[test]
fn cd2hor_agrees_with_direct_solve() {
    let dir = TempDir::new().unwrap();
    let out = bpa(&["gen", "countdown", "--seed", "4", "--count", "8", "--out-dir", s(dir.path())]);
    assert_eq!(code(&out), 0);
    for i in 0..8 {
        let cd_path = dir.path().join(format!("countdown-{i}.txt"));
        let game = CountdownGame::parse(&fs::read_to_string(&cd_path).unwrap()).unwrap();
        let hor = dir.path().join(format!("reduced-{i}.hor"));
        assert_eq!(code(&bpa(&["reduce", "cd2hor", s(&cd_path), s(&hor)])), 0);
        let solved = stdout(&bpa(&["solve", s(&hor)]));
        assert_eq!(solved.trim(), solve_countdown(&game, 1 << 20).unwrap().to_string());
    }
}

#[test]
fn hor2bpa_round_trips_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let game = file(&dir, "g.hor", "hor\nplayer0: s\nplayer1: t\ninit: s\nfinal: fin 2\ns +1 t\ns +2 fin\nt +1 fin\nt +0 s\n");
    for (kind, mode) in [("hor2bpa", "dead"), ("hor2bpa", "loop"), ("hor2pbpa", "dead")] {
        let a = dir.path().join(format!("a-{kind}-{mode}"));
        let b = dir.path().join(format!("b-{kind}-{mode}"));
        for out in [&a, &b] {
            assert_eq!(code(&bpa(&["reduce", kind, s(&game), s(out), "--mode", mode])), 0);
        }
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text, fs::read_to_string(&b).unwrap());
        if kind == "hor2bpa" {
            assert_eq!(Bpa::parse(&text).unwrap().to_text(), text);
        } else {
            assert!(PBpa::parse(&text).unwrap().is_fully_probabilistic());
        }
        let manifest = fs::read_to_string(format!("{}.manifest", a.display())).unwrap();
        assert!(manifest.contains(&format!("mode: {mode}")));
        assert!(manifest.contains("top: X X'"));
    }
    let out = bpa(&["reduce", "hor2bpa", s(&game), s(&dir.path().join("w")), "--b", "1"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn reduced_instance_check_matches_winner() {
    let dir = TempDir::new().unwrap();
    let game = file(&dir, "g.hor", "hor\nplayer1: t\ninit: t\nfinal: fin 1\nt +1 fin\nt +0 fin\n");
    let out_bpa = dir.path().join("g.bpa");
    assert_eq!(code(&bpa(&["reduce", "hor2bpa", s(&game), s(&out_bpa)])), 0);
    assert_eq!(stdout(&bpa(&["solve", s(&game)])), "Player1\n");
    assert_eq!(code(&bpa(&["check", s(&out_bpa), "X", "X'", "--mode", "refute"])), 1);
}

#[test]
fn atm2hor() {
    let dir = TempDir::new().unwrap();
    let accepting = SOME_ONE.replace("init: q0", "init: qacc");
    let m = file(&dir, "acc.atm", &accepting);
    let out = dir.path().join("acc.hor");
    assert_eq!(code(&bpa(&["reduce", "atm2hor", s(&m), s(&out), "--input-word", "00"])), 0);
    assert_eq!(stdout(&bpa(&["solve", s(&out)])), "Player0\n");
    let manifest = fs::read_to_string(format!("{}.manifest", out.display())).unwrap();
    assert!(manifest.contains("k_final: 124\n"));
    assert!(matches!(parse_game(&fs::read_to_string(&out).unwrap()).unwrap(), GameFile::Hor(_)));

    let m = file(&dir, "m.atm", SOME_ONE);
    assert_eq!(code(&bpa(&["reduce", "atm2hor", s(&m), s(&out)])), 3);
}

#[test]
fn gen_is_seeded() {
    for kind in ["hor", "countdown", "bpa"] {
        let a = stdout(&bpa(&["gen", kind, "--seed", "7", "--count", "3"]));
        let b = stdout(&bpa(&["gen", kind, "--seed", "7", "--count", "3"]));
        assert_eq!(a, b);
        assert_eq!(a.matches("# instance").count(), 3);
    }
}

#[test]
fn pipeline_verify() {
    let out = bpa(&["pipeline", "verify", "--seed", "1", "--count", "10"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.ends_with("failures: 0\nconsistent: true\n"));
    assert!(!text.contains("wall_ms"));
    assert_eq!(text, stdout(&bpa(&["pipeline", "verify", "--seed", "1", "--count", "10"])));

    let out = bpa(&["pipeline", "verify", "--count", "0"]);
    assert_eq!(code(&out), 0);
    assert!(!stdout(&out).contains("instance."));

    let out = bpa(&["pipeline", "verify", "--seed", "1", "--count", "10", "--inject-fault"]);
    assert_ne!(code(&out), 0);
    assert!(stdout(&out).contains("failure."));
}
