use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudospace")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pseudospace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn reduce_word_prints_the_normal_form() {
    let o = run(&["reduce-word", "0.2.01"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("2.01"));
    assert_eq!(run(&["reduce-word", "0.3"]).status.code(), Some(2));
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(run(&["audit", "missing.psg"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let bad = temp("loop.psg", "psg 1\ncolors none\nv 5 0\ne 5 5\n");
    let o = run(&["audit", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    let f = golden("fresh_flag.psg");
    assert_eq!(run(&["fcl", f.to_str().unwrap(), "0,17"]).status.code(), Some(2));
}

#[test]
fn fresh_flag_matches_golden() {
    let o = run(&["build", "--stages", "0"]);
    let want = std::fs::read_to_string(golden("fresh_flag.psg")).unwrap();
    assert_eq!(stdout(&o), want);
    assert_eq!(want.lines().count(), 7);
}

#[test]
fn cycle_demo_matches_golden() {
    let o = run(&["cycle-demo", "--k", "3", "--stages", "200", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), std::fs::read_to_string(golden("cycle_demo_k3.txt")).unwrap());
}

#[test]
fn queries_on_a_built_stage() {
    let dir = std::env::temp_dir().join(format!("pseudospace-cli-q{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let psg = dir.join("k3.psg");
    let p = psg.to_str().unwrap();
    assert_eq!(run(&["build", "--k", "3", "--stages", "200", "--seed", "42", "-o", p]).status.code(), Some(0));

    let audit = run(&["audit", p]);
    assert_eq!(audit.status.code(), Some(0), "{}", stdout(&audit));
    assert!(stdout(&run(&["defect", p, "0,1,2"])).contains("defect: 1"));
    assert!(stdout(&run(&["acl", p, "0,2"])).contains("acl: {0,2}"));
    assert!(stdout(&run(&["dword", p, "0,1,2", "0,1,2"])).contains("word: "));

    // Cycle witness for color 0 at this seed: a=0 b=1 c=2 c'=53.
    let indep = run(&["indep", p, "--x", "2", "--y", "0", "--z", "1", "--consequences"]);
    assert_eq!(indep.status.code(), Some(0), "{}", stdout(&indep));
    assert_eq!(run(&["indep", p, "--x", "53", "--y", "0", "--z", "1"]).status.code(), Some(1));
    assert_eq!(run(&["pf-check", p, "--base", "1", "--a", "2", "--a2", "53", "--b", "0"]).status.code(), Some(0));
    assert_eq!(run(&["type-eq", p, "2,0", "53,0"]).status.code(), Some(1));
    assert_eq!(run(&["type-eq", p, "2,0", "2,0"]).status.code(), Some(0));
    assert!(stdout(&run(&["kernel", p, "1", "1", "1", "1"])).contains("kernel: {1}"));

    // The same plane in both columns sees the first point.
    let m = temp("m.txt", "predicate section-color=0\na 0 0: 0\nb 0 0: 2\na 0 1: 0\nb 0 1: 53\n");
    let o = run(&["ms-check", p, m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("predicate-diagonal: fail cell (0,1,0)"));
}

#[test]
fn pi_cycle_lengths() {
    let o = run(&["pi-cycle", "--pi", "1,0,3,4,2"]);
    assert!(stdout(&o).contains("shortest-cycle: 2"));
    assert_eq!(run(&["pi-cycle", "--pi", "0,1"]).status.code(), Some(2));
}
