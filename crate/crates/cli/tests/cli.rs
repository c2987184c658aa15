use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maf_cli::CSV_HEADER;

fn maf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maf"))
        .args(args)
        .current_dir(dir)
        .env_remove("MAF_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn order_of(o: &Output) -> usize {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("order "))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn pmaf_and_amaf_on_small_files() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("same.nwk"), "((a,b),(c,d));\n((a,b),(c,d));\n").unwrap();
    fs::write(d.path().join("spr.nwk"), "((a,b),c);\n((a,c),b);\n").unwrap();
    for cmd in ["pmaf", "amaf"] {
        let o = maf(&[cmd, "same.nwk", "--verify"], d.path());
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(order_of(&o), 1);
        assert!(stdout(&o).ends_with("((a,b),(c,d));\n"));
    }
    let o = maf(&["pmaf", "spr.nwk", "--verify", "--out", "cert.nwk"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(order_of(&o), 2);
    assert_eq!(fs::read_to_string(d.path().join("cert.nwk")).unwrap(), "(b,c);\na;\n");
    let o = maf(&["pmaf", "spr.nwk", "--unrooted"], d.path());
    assert_eq!(order_of(&o), 1);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("spr.nwk"), "((a,b),c);\n((a,c),b);\n").unwrap();
    fs::write(d.path().join("bad.nwk"), "((a,b),c;\n").unwrap();
    fs::write(d.path().join("mismatch.nwk"), "((a,b),c);\n((a,b),d);\n").unwrap();
    assert_eq!(maf(&["pmaf", "spr.nwk", "--k", "1"], d.path()).status.code(), Some(1));
    assert_eq!(maf(&["pmaf", "spr.nwk", "--k", "2"], d.path()).status.code(), Some(0));
    let o = maf(&["pmaf", "bad.nwk"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1, column 9"));
    assert_eq!(maf(&["amaf", "mismatch.nwk"], d.path()).status.code(), Some(2));
    assert_eq!(maf(&["pmaf", "missing.nwk"], d.path()).status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let a = stdout(&maf(&["gen", "-n", "5", "-m", "2", "-x", "0", "--seed", "7"], d.path()));
    let b = stdout(&maf(&["gen", "-n", "5", "-m", "2", "-x", "0", "--seed", "7"], d.path()));
    assert_eq!(a, b);
    let trees: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(trees.len(), 2);
    assert_eq!(trees[0], trees[1]);
    let env = Command::new(env!("CARGO_BIN_EXE_maf"))
        .args(["gen", "-n", "5", "-m", "2", "-x", "0"])
        .env("MAF_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(stdout(&env), a);
}

#[test]
fn generated_instance_respects_bound() {
    let d = tempfile::tempdir().unwrap();
    let g = maf(&["gen", "-n", "40", "-m", "5", "-x", "2", "--seed", "1", "--out", "t40-5.nwk"], d.path());
    assert_eq!(g.status.code(), Some(0));
    let o = maf(&["pmaf", "t40-5.nwk", "--verify"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(order_of(&o) <= 9);
}

#[test]
fn bench_empty_directory() {
    let d = tempfile::tempdir().unwrap();
    let o = maf(&["bench", "."], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn bench_groups_and_ratios() {
    let d = tempfile::tempdir().unwrap();
    let runs = d.path().join("runs");
    fs::create_dir(&runs).unwrap();
    for (name, n, m, seed) in [("t7-2-a", "7", "2", "1"), ("t7-2-b", "7", "2", "2"), ("t7-3-a", "7", "3", "3")] {
        let out = format!("runs/{name}.nwk");
        let g = maf(&["gen", "-n", n, "-m", m, "-x", "2", "--seed", seed, "--out", &out], d.path());
        assert_eq!(g.status.code(), Some(0));
    }
    fs::write(runs.join("zz-broken.nwk"), "(a,b;\n").unwrap();
    let o = maf(&["bench", "runs", "--mode", "all", "--jobs", "2", "--out", "report.csv"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(d.path().join("report.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let kind = |r: &csv::StringRecord| r[0].to_string();
    let names: Vec<String> = rows.iter().filter(|r| kind(r) != "aggregate").map(|r| r[1].to_string()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted, "rows follow file names");
    assert_eq!(rows.iter().filter(|r| kind(r) == "warning").count(), 1);
    let groups: std::collections::BTreeSet<String> =
        rows.iter().filter(|r| kind(r) == "aggregate").map(|r| r[1].to_string()).collect();
    assert_eq!(groups.into_iter().collect::<Vec<_>>(), ["t7-2", "t7-3"]);
    for r in rows.iter().filter(|r| kind(r) == "run" && &r[5] == "approx") {
        let ratio: f64 = r[7].parse().unwrap();
        assert!((1.0..=3.0).contains(&ratio));
    }
    // exact and oracle agree on every file
    for name in ["t7-2-a.nwk", "t7-2-b.nwk", "t7-3-a.nwk"] {
        let order = |m: &str| rows.iter().find(|r| &r[1] == name && &r[5] == m).unwrap()[6].to_string();
        assert_eq!(order("fpt"), order("oracle"), "{name}");
    }
}
