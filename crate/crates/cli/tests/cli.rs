use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ptm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptm"))
        .args(args)
        .output()
        .expect("spawn ptm")
}

fn ptm_args(args: Vec<String>) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ptm(&refs)
}

fn lopro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lopro"))
        .args(args)
        .output()
        .expect("spawn lopro")
}

/// Splits `args` on whitespace; `{}` placeholders take `paths` in order.
fn argv(args: &str, paths: &[&Path]) -> Vec<String> {
    let mut paths = paths.iter();
    args.split_whitespace()
        .map(|a| match a {
            "{}" => s(paths.next().unwrap()).to_string(),
            _ => a.to_string(),
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Compiles the Exists program with `--lower` and builds the machine.
fn exists_network(dir: &Path) -> std::path::PathBuf {
    let src = dir.join("exists.lp");
    fs::write(&src, ptm::lopro::programs::EXISTS).unwrap();
    let machine = dir.join("exists.ptm");
    let net = dir.join("exists.net");
    let o = lopro(&["compile", s(&src), "--lower", "-o", s(&machine)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ptm_args(argv(
        "build -m {} --max-nodes 100000 -o {}",
        &[&machine, &net],
    ));
    assert!(o.status.success(), "{}", stderr(&o));
    net
}

#[test]
fn compile_build_run_exists() {
    let dir = tempfile::tempdir().unwrap();
    let net = exists_network(dir.path());
    let o = ptm(&["run", "-n", s(&net), "--input", "001101"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "1");
    let o = ptm(&["run", "-n", s(&net), "--input", "000000"]);
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn wrong_input_length_names_dims() {
    let dir = tempfile::tempdir().unwrap();
    let net = exists_network(dir.path());
    let o = ptm(&["run", "-n", s(&net), "--input", "0011"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[6]"), "{}", stderr(&o));
}

#[test]
fn evolve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut histories = Vec::new();
    for i in 0..2 {
        let h = dir.path().join(format!("h{i}.csv"));
        let o = ptm_args(argv(
            "evolve --task exists --n 4 --pop 30 --gens 8 --seed 42 --history {}",
            &[&h],
        ));
        assert!(o.status.success(), "{}", stderr(&o));
        histories.push(fs::read_to_string(&h).unwrap());
    }
    assert_eq!(histories[0], histories[1]);
    assert_eq!(histories[0].lines().count(), 9);
}

#[test]
fn evolve_writes_genotype_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let best = dir.path().join("best.ptm");
    let manifest = dir.path().join("run.json");
    let o = ptm_args(argv(
        "evolve --task all --n 2 --pop 10 --gens 2 --seed 1 -o {} --manifest {}",
        &[&best, &manifest],
    ));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(ptm::format::parse_machine(&fs::read_to_string(&best).unwrap()).is_ok());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 1);
    assert_eq!(m["population"], 10);
}

#[test]
fn diagnostics_carry_file_line_col() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.lp");
    fs::write(&src, "machine {\n  state output;\n  output = nowhere;\n}\n").unwrap();
    let o = lopro(&["compile", s(&src)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.lp:3:"), "{err}");
    assert!(err.contains("nowhere"), "{err}");
}

#[test]
fn malformed_machine_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.ptm");
    fs::write(&m, "ptm v1\nstates 2\ntape 0 work cells x\n").unwrap();
    let o = ptm(&["build", "-m", s(&m)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_one_help_exits_zero() {
    assert_eq!(ptm(&["build", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ptm(&["frobnicate"]).status.code(), Some(1));
    let o = ptm(&["evolve", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    for flag in ["--seed-genotype", "--workers", "--elitism", "--max-len"] {
        assert!(stdout(&o).contains(flag), "missing {flag}");
    }
}

#[test]
fn inspect_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("all.lp");
    fs::write(&src, ptm::lopro::programs::ALL).unwrap();
    let net = dir.path().join("all.net");
    let o = ptm(&["compile", s(&src), "-D", "n=3", "-o", s(&net)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ptm(&["inspect", "-n", s(&net)]);
    assert!(stdout(&o).contains("depth: "), "{}", stdout(&o));
    let o = ptm(&["export", "-n", s(&net), "--dot"]);
    assert!(stdout(&o).starts_with("digraph"));
    let o = ptm(&["run", "-n", s(&net), "--input", "111"]);
    assert_eq!(stdout(&o).trim(), "1");
    let o = ptm(&["run", "-n", s(&net), "--input", "110"]);
    assert_eq!(stdout(&o).trim(), "0");
}
