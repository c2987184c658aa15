//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p maf-cli --test acceptance -- --nocapture` to see them.
//!
//! Criterion 7 needs external tree files and is skipped unless
//! `MAF_TABLE1_DIR` points at a directory holding three instance files whose
//! sorted names match the expected orders 5, 8 and 10.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use maf_cli::{cmd_amaf, cmd_pmaf, run_pmaf, verify_certificate, Rooting, SolveArgs};
use maf_core::approx::{approximate, check_metastep_ratio};
use maf_core::datagen::{generate_instance, generate_instance_text, small_corpus, GenSpec};
use maf_core::fpt::{find_min_k_with_stats, SearchStats};
use maf_core::newick::{parse_forest, parse_instance, parse_tree, serialize};
use maf_core::oracle::{brute_force_maf, DEFAULT_MAX_EDGES};
use maf_core::reduction::reduce_instance;
use maf_core::{EdgeId, Instance};

const CORPUS_SIZE: usize = 240;
const CORPUS_SEED: u64 = 2024;
const GEN_BOUND_INSTANCES: usize = 60;
const REDUCTION_INSTANCES: usize = 120;
const AMAF_LIMIT: Duration = Duration::from_secs(1);
const PMAF_LIMIT: Duration = Duration::from_secs(60);
const TABLE1_ORDERS: [usize; 3] = [5, 8, 10];

#[derive(PartialEq)]
enum Verdict {
    Pass,
    /// Over target but within twice the target.
    Report,
    Fail,
    Skip,
}

struct Outcome {
    id: &'static str,
    verdict: Verdict,
    detail: String,
}

fn line(o: &Outcome) -> String {
    let tag = match o.verdict {
        Verdict::Pass => "PASS",
        Verdict::Report => "PASS (reported: over target, within 2x)",
        Verdict::Fail => "FAIL",
        Verdict::Skip => "SKIP",
    };
    format!("[{tag}] criterion {}: {}", o.id, o.detail)
}

fn pass_if(id: &'static str, ok: bool, detail: String) -> Outcome {
    Outcome {
        id,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

struct CorpusRun {
    rooted: bool,
    opt: usize,
    fpt: usize,
    approx: usize,
    leaves: u64,
    k: usize,
}

fn corpus() -> Vec<CorpusRun> {
    small_corpus(CORPUS_SIZE, CORPUS_SEED)
        .into_iter()
        .map(|spec| {
            let inst = generate_instance(&spec).unwrap();
            let opt = brute_force_maf(&inst, DEFAULT_MAX_EDGES).unwrap().opt_order;
            let exact = find_min_k_with_stats(&inst, 1, inst.taxa() + 1).unwrap();
            assert!(exact.forest.verify(&inst).unwrap());
            let approx = approximate(&inst).unwrap();
            assert!(approx.forest.verify(&inst).unwrap());
            CorpusRun {
                rooted: inst.is_rooted(),
                opt,
                fpt: exact.order,
                approx: approx.order(),
                leaves: exact.final_stats().leaves,
                k: exact.order,
            }
        })
        .collect()
}

fn criterion_1(runs: &[CorpusRun]) -> Outcome {
    let bad = runs.iter().filter(|r| r.fpt != r.opt).count();
    let rooted = runs.iter().filter(|r| r.rooted).count();
    pass_if(
        "1 (exact order equals oracle)",
        bad == 0 && runs.len() >= 200,
        format!(
            "{} instances ({} rooted, {} unrooted), {} mismatches",
            runs.len(),
            rooted,
            runs.len() - rooted,
            bad
        ),
    )
}

fn criterion_2(runs: &[CorpusRun]) -> Outcome {
    let mut worst = [0.0f64; 2];
    let mut bad = 0;
    for r in runs {
        let cap = if r.rooted { 3 } else { 4 };
        if r.approx > cap * r.opt || r.approx < r.opt {
            bad += 1;
        }
        let w = &mut worst[usize::from(!r.rooted)];
        *w = w.max(r.approx as f64 / r.opt as f64);
    }
    pass_if(
        "2 (approximation within 3x rooted, 4x unrooted)",
        bad == 0 && worst[0] <= 3.0,
        format!("worst ratio rooted {:.3}, unrooted {:.3}, {} violations", worst[0], worst[1], bad),
    )
}

fn criterion_3(runs: &[CorpusRun]) -> Outcome {
    let bad = runs
        .iter()
        .filter(|r| r.leaves > SearchStats::leaf_bound(r.rooted, r.k))
        .count();
    let max_leaves = runs.iter().map(|r| r.leaves).max().unwrap_or(0);
    pass_if(
        "3 (search-tree leaves within 3^k rooted, 4^k unrooted)",
        bad == 0,
        format!("{} runs checked, max leaves {}, {} violations", runs.len(), max_leaves, bad),
    )
}

fn criterion_4() -> Outcome {
    let mut bad = 0;
    let mut worst_slack = usize::MAX;
    for seed in 0..GEN_BOUND_INSTANCES as u64 {
        let spec = GenSpec::new(4 + (seed as usize % 5), 2 + (seed as usize % 2), (seed as usize / 2) % 3, 7000 + seed);
        let inst = generate_instance(&spec).unwrap();
        let opt = brute_force_maf(&inst, DEFAULT_MAX_EDGES).unwrap().opt_order;
        if opt > spec.order_bound() {
            bad += 1;
        } else {
            worst_slack = worst_slack.min(spec.order_bound() - opt);
        }
    }
    pass_if(
        "4 (generated optimum at most x(m-1)+1)",
        bad == 0,
        format!(
            "{GEN_BOUND_INSTANCES} rooted instances, {bad} violations, tightest slack {worst_slack}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut bad = 0;
    let mut reduced = 0;
    for (i, spec) in small_corpus(REDUCTION_INSTANCES, 31).into_iter().enumerate() {
        let inst = generate_instance(&spec).unwrap();
        // odd instances get a forest as last input so the rule has work to do
        let inst = if i % 2 == 1 {
            let mut fs = inst.into_forests();
            let last = fs.pop().unwrap();
            let cut: Vec<EdgeId> = last.edge_ids().filter(|e| (e.0 as usize + i).is_multiple_of(4)).collect();
            fs.push(last.remove_edges(&cut).unwrap());
            Instance::new(fs).unwrap()
        } else {
            inst
        };
        let (red, trace) = reduce_instance(&inst);
        if !trace.is_empty() {
            reduced += 1;
        }
        let before = brute_force_maf(&inst, DEFAULT_MAX_EDGES).unwrap().opt_order;
        let after = brute_force_maf(&red, DEFAULT_MAX_EDGES).unwrap().opt_order;
        if before != after {
            bad += 1;
        }
    }
    pass_if(
        "5 (reduction preserves the optimum)",
        bad == 0,
        format!("{REDUCTION_INSTANCES} instances ({reduced} changed by reduction), {bad} violations"),
    )
}

fn timed(id: &'static str, elapsed: Duration, limit: Duration, what: &str) -> Outcome {
    let verdict = if elapsed < limit {
        Verdict::Pass
    } else if elapsed < 2 * limit {
        Verdict::Report
    } else {
        Verdict::Fail
    };
    Outcome {
        id,
        verdict,
        detail: format!("{what}: {:.1} ms (limit {} ms)", elapsed.as_secs_f64() * 1e3, limit.as_millis()),
    }
}

fn criterion_6(dir: &Path) -> Vec<Outcome> {
    let mut out = Vec::new();
    let path = dir.join("t50-5.nwk");
    fs::write(&path, generate_instance_text(&GenSpec::new(50, 5, 3, 1)).unwrap()).unwrap();
    let args = SolveArgs {
        input: path,
        rooting: Rooting {
            rooted: true,
            unrooted: false,
        },
        k: None,
        verify: false,
        out: None,
    };
    let t = Instant::now();
    let r = cmd_amaf(&args, &mut Vec::new());
    let el = t.elapsed();
    out.push(match r {
        Ok(_) => timed("6a (amaf on t50-5)", el, AMAF_LIMIT, "t50-5"),
        Err(e) => pass_if("6a (amaf on t50-5)", false, e.to_string()),
    });

    let mut worst = Duration::ZERO;
    let mut solved = 0;
    let mut detail = String::new();
    for seed in 1..=4u64 {
        let path = dir.join(format!("t40-2-{seed}.nwk"));
        fs::write(&path, generate_instance_text(&GenSpec::new(40, 2, 5, seed)).unwrap()).unwrap();
        let args = SolveArgs {
            input: path,
            rooting: Rooting {
                rooted: true,
                unrooted: false,
            },
            k: None,
            verify: true,
            out: None,
        };
        let t = Instant::now();
        match cmd_pmaf(&args, &mut Vec::new()) {
            Ok(r) if r.report.order <= 6 => {
                worst = worst.max(t.elapsed());
                solved += 1;
            }
            Ok(r) => detail.push_str(&format!(" seed {seed} has order {} > 6, not counted;", r.report.order)),
            Err(e) => detail.push_str(&format!(" seed {seed} failed: {e};")),
        }
    }
    let mut o = timed("6b (pmaf on t40-2, order <= 6)", worst, PMAF_LIMIT, &format!("slowest of {solved}"));
    o.detail.push_str(&detail);
    if solved == 0 {
        o.verdict = Verdict::Fail;
    }
    out.push(o);
    out
}

fn criterion_7() -> Outcome {
    let Ok(dir) = std::env::var("MAF_TABLE1_DIR") else {
        return Outcome {
            id: "7 (external tree sets, optional)",
            verdict: Verdict::Skip,
            detail: "set MAF_TABLE1_DIR to run".into(),
        };
    };
    let mut files: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut orders = Vec::new();
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        let inst = parse_instance(&text, true).unwrap();
        orders.push(run_pmaf(&inst, "", None, true).map(|r| r.report.order).unwrap_or(0));
    }
    pass_if(
        "7 (external tree sets, optional)",
        orders == TABLE1_ORDERS,
        format!("orders {orders:?}, expected {TABLE1_ORDERS:?}"),
    )
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for seed in 0..100u64 {
        for rooted in [true, false] {
            let spec = GenSpec {
                rooted,
                ..GenSpec::new(3 + (seed as usize % 12), 2, 1 + (seed as usize % 2), seed)
            };
            let inst = generate_instance(&spec).unwrap();
            let t = &inst.forests()[0];
            // contraction idempotence
            let cut: Vec<EdgeId> = t.edge_ids().filter(|e| (e.0 + seed as u32).is_multiple_of(3)).collect();
            let f = t.remove_edges(&cut).unwrap();
            if f.force_contract() != f || !f.is_irreducible() || serialize(&f.force_contract()) != serialize(&f) {
                bad.push(format!("contraction seed {seed}"));
            }
            // parse/serialize fixpoint for trees and forests
            let text = serialize(t);
            if serialize(&parse_tree(&text, rooted).unwrap()) != text {
                bad.push(format!("tree round trip seed {seed}"));
            }
            let ftext = serialize(&f);
            if serialize(&parse_forest(&ftext, rooted).unwrap()) != ftext {
                bad.push(format!("forest round trip seed {seed}"));
            }
            // certificates re-validate
            let a = approximate(&inst).unwrap();
            if verify_certificate(&serialize(&a.forest.forest), &inst).is_err()
                || !a.trace.iter().all(|r| check_metastep_ratio(r, &r.before))
            {
                bad.push(format!("approx certificate seed {seed}"));
            }
            if spec.n <= 10 {
                match run_pmaf(&inst, "", None, true) {
                    Ok(_) => {}
                    Err(e) => bad.push(format!("exact certificate seed {seed}: {e}")),
                }
            }
            checked += 1;
        }
    }
    pass_if(
        "8 (round-trip and certificate validity)",
        bad.is_empty(),
        format!("{checked} cases, failures: {bad:?}"),
    )
}

#[test]
fn acceptance() {
    let dir = std::env::temp_dir().join(format!("maf-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();

    let runs = corpus();
    let mut outcomes = vec![criterion_1(&runs), criterion_2(&runs), criterion_3(&runs), criterion_4(), criterion_5()];
    outcomes.extend(criterion_6(&dir));
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    let _ = fs::remove_dir_all(&dir);

    for o in &outcomes {
        println!("{}", line(o));
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| o.verdict == Verdict::Fail).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
