use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scheloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scheloc"))
        .args(args)
        .env("SCHELOC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn toy() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy.txt").display().to_string()
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key:?} in {text}"))
}

#[test]
fn solves_toy_to_optimality() {
    let out = scheloc(&["solve", &toy()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(line(&text, "makespan"), "makespan 10");
    assert_eq!(line(&text, "opt"), "opt true");
}

#[test]
fn solve_output_is_reproducible() {
    let keep = |o: &Output| {
        stdout(o).lines().filter(|l| l.starts_with("makespan") || l.starts_with("bounds") || l.starts_with("location")).map(String::from).collect::<Vec<_>>()
    };
    let a = scheloc(&["solve", &toy(), "--seed", "3"]);
    let b = scheloc(&["solve", &toy(), "--seed", "3"]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(keep(&a), keep(&b));
}

#[test]
fn zero_time_full_stage_returns_incumbent() {
    let out = scheloc(&["solve", &toy(), "--stage", "full", "--time-limit", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(line(&stdout(&out), "makespan").starts_with("makespan "));
}

#[test]
fn exit_codes() {
    assert_eq!(scheloc(&["solve", "/no/such/file"]).status.code(), Some(3));
    assert_eq!(scheloc(&["solve"]).status.code(), Some(2));
    assert_eq!(scheloc(&["solve", &toy(), "--stage", "nope"]).status.code(), Some(2));
    assert_eq!(scheloc(&["oracle", &toy(), "--cap", "10"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.txt");
    let bad = scheloc(&["generate", "--n", "5", "--m", "6", "--p", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_on_toy() {
    let out = scheloc(&["oracle", &toy()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(line(&stdout(&out), "makespan"), "makespan 10");
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = ["a.txt", "b.txt"].iter().map(|f| dir.path().join(f)).collect();
    for p in &paths {
        let out = scheloc(&["generate", "--n", "100", "--m", "20", "--p", "2", "--seed", "9", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn solution_file_reports_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("toy.json");
    let out = scheloc(&["solve", &toy(), "--out", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rep = scheloc(&["report", sol.to_str().unwrap(), "--instance", &toy()]);
    assert_eq!(rep.status.code(), Some(0));
    let text = stdout(&rep);
    assert_eq!(line(&text, "valid makespan"), "valid makespan 10");
    assert_eq!(line(&text, "bounds"), "bounds [10, 10]");
}

#[test]
fn bench_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let md = scheloc(&["bench", dir.path().to_str().unwrap()]);
    assert_eq!(md.status.code(), Some(0));
    assert_eq!(stdout(&md).lines().count(), 2);
    let csv = scheloc(&["bench", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(stdout(&csv).trim(), "set,ratio_bucket,n,m,p,lb,ub,gap_pct,stage_closed,time_s");
}

#[test]
fn bench_counts_every_closed_instance() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("tiny");
    std::fs::create_dir(&set).unwrap();
    for seed in 0..6 {
        let p = set.join(format!("g{seed}.txt"));
        let n = (8 + seed % 3).to_string();
        scheloc(&["generate", "--n", &n, "--m", "4", "--p", "2", "--seed", &seed.to_string(), "--out", p.to_str().unwrap()]);
    }
    std::fs::write(set.join("broken.txt"), "not an instance").unwrap();
    let out = scheloc(&["bench", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.starts_with("tiny,") && !r.contains(",-,")));

    let md = stdout(&scheloc(&["bench", dir.path().to_str().unwrap()]));
    let opt: usize = md
        .lines()
        .skip(2)
        .map(|l| l.split('|').map(str::trim).filter(|c| !c.is_empty()).nth(8).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(opt, 6);
}
