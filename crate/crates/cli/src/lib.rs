//! Commands behind the `maf` binary: exact and approximate solving,
//! instance generation and batch benchmarking.

pub mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use maf_core::approx::{approximate, ApproxError, MetaStepKind};
use maf_core::datagen::{generate_instance_text, GenError, GenSpec};
use maf_core::fpt::{find_min_k_with_stats, SearchStats, SolveError};
use maf_core::newick::{parse_forest_in, parse_instance, serialize};
use maf_core::oracle::{brute_force_maf, DEFAULT_MAX_EDGES};
use maf_core::{AgreementForest, Instance};
use rayon::prelude::*;
use thiserror::Error;

pub use report::{aggregate, write_csv, Aggregate, Method, Row, RunReport, CSV_HEADER};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("no agreement forest of order at most {0}")]
    NoSolution(usize),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NoSolution(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NoSolution(k) => CliError::NoSolution(k),
            SolveError::EmptyRange { hi, .. } => CliError::NoSolution(hi),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn read_instance(path: &Path, rooted: bool) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_instance(&text, rooted).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Re-parses the printed certificate and checks it against every input.
pub fn verify_certificate(text: &str, inst: &Instance) -> Result<(), CliError> {
    let f = parse_forest_in(text, inst.labels()).map_err(|e| CliError::Internal(format!("certificate: {e}")))?;
    for (i, g) in inst.forests().iter().enumerate() {
        let ok = f
            .is_subforest_of(g)
            .map_err(|e| CliError::Internal(format!("certificate: {e}")))?;
        if !ok {
            return Err(CliError::Internal(format!("certificate is not a subforest of input {}", i + 1)));
        }
    }
    Ok(())
}

fn check(af: &AgreementForest, inst: &Instance, verify: bool) -> Result<String, CliError> {
    let text = serialize(&af.forest);
    if verify {
        verify_certificate(&text, inst)?;
    }
    Ok(text)
}

/// Exact solve result.
#[derive(Clone, Debug)]
pub struct PmafOutput {
    pub report: RunReport,
    pub approx_order: usize,
    pub k_start: usize,
    pub certificate: String,
    pub total_stats: SearchStats,
}

/// Lower bound from an approximate order: `⌊k'/3⌋` rooted, `⌊k'/4⌋` unrooted.
pub fn lower_bound(approx_order: usize, rooted: bool) -> usize {
    let r = if rooted { 3 } else { 4 };
    (approx_order / r).max(1)
}

pub fn run_pmaf(inst: &Instance, name: &str, k_cap: Option<usize>, verify: bool) -> Result<PmafOutput, CliError> {
    let t = Instant::now();
    let approx = approximate(inst)?;
    let k_prime = approx.order();
    let k_start = lower_bound(k_prime, inst.is_rooted());
    let k_hi = k_cap.map_or(k_prime, |c| c.min(k_prime));
    let res = find_min_k_with_stats(inst, k_start, k_hi)?;
    let wall_ms = ms_since(t);
    info!("{name}: approx {k_prime}, searched k={k_start}..={}", res.order);
    let certificate = check(&res.forest, inst, verify)?;
    Ok(PmafOutput {
        report: RunReport {
            instance: name.to_string(),
            n: inst.taxa(),
            m: inst.len(),
            rooted: inst.is_rooted(),
            method: Method::Fpt,
            order: res.order,
            ratio: Some(k_prime as f64 / res.order as f64),
            wall_ms,
            stats: Some(res.final_stats()),
            note: String::new(),
        },
        approx_order: k_prime,
        k_start,
        certificate,
        total_stats: res.total_stats(),
    })
}

/// Approximation result with meta-step counts.
#[derive(Clone, Debug)]
pub struct AmafOutput {
    pub report: RunReport,
    pub certificate: String,
    pub steps: Vec<(MetaStepKind, usize)>,
    pub ratio_bound: u32,
}

const KINDS: [MetaStepKind; 5] = [
    MetaStepKind::Rule1,
    MetaStepKind::Group,
    MetaStepKind::MS2,
    MetaStepKind::MS3_1,
    MetaStepKind::MS3_2,
];

pub fn run_amaf(inst: &Instance, name: &str, verify: bool) -> Result<AmafOutput, CliError> {
    let t = Instant::now();
    let r = approximate(inst)?;
    let wall_ms = ms_since(t);
    let certificate = check(&r.forest, inst, verify)?;
    Ok(AmafOutput {
        report: RunReport {
            instance: name.to_string(),
            n: inst.taxa(),
            m: inst.len(),
            rooted: inst.is_rooted(),
            method: Method::Approx,
            order: r.order(),
            ratio: None,
            wall_ms,
            stats: None,
            note: String::new(),
        },
        certificate,
        steps: KINDS.iter().map(|k| (*k, r.count(*k))).collect(),
        ratio_bound: r.ratio_bound,
    })
}

pub fn run_oracle(inst: &Instance, name: &str) -> Result<RunReport, CliError> {
    let t = Instant::now();
    let r = brute_force_maf(inst, DEFAULT_MAX_EDGES).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(RunReport {
        instance: name.to_string(),
        n: inst.taxa(),
        m: inst.len(),
        rooted: inst.is_rooted(),
        method: Method::Oracle,
        order: r.opt_order,
        ratio: None,
        wall_ms: ms_since(t),
        stats: None,
        note: format!("subsets={}", r.subsets_examined),
    })
}

// ----- command-line surface ---------------------------------------------------------

#[derive(Debug, Parser)]
#[command(name = "maf", version, about = "Maximum agreement forests of phylogenetic trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact order with a certificate.
    Pmaf(SolveArgs),
    /// Approximate order with a certificate.
    Amaf(SolveArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run every instance file in a directory and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Rooting {
    /// Treat inputs as rooted trees (the default).
    #[arg(long, global = true)]
    pub rooted: bool,
    /// Treat inputs as unrooted trees.
    #[arg(long, global = true, conflicts_with = "rooted")]
    pub unrooted: bool,
}

impl Rooting {
    pub fn is_rooted(&self) -> bool {
        !self.unrooted
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub rooting: Rooting,
    /// Give up above this order (exit code 1).
    #[arg(long)]
    pub k: Option<usize>,
    /// Re-check the certificate against every input.
    #[arg(long)]
    pub verify: bool,
    /// Write the certificate here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(short = 'n', long)]
    pub taxa: usize,
    #[arg(short = 'm', long, default_value_t = 2)]
    pub trees: usize,
    /// SPR moves per perturbed tree.
    #[arg(short = 'x', long, default_value_t = 1)]
    pub moves: usize,
    /// Internal edges to contract; random when omitted.
    #[arg(long)]
    pub contract: Option<usize>,
    #[arg(long, env = "MAF_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub rooting: Rooting,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMode {
    Fpt,
    Approx,
    Oracle,
    All,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value_t = BenchMode::All)]
    pub mode: BenchMode,
    #[command(flatten)]
    pub rooting: Rooting,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

fn stats_line(s: &SearchStats) -> String {
    format!(
        "nodes={} leaves={} max_depth={} pruned={} case1={} case2={} case3_1={} case3_2={} rule1={}",
        s.nodes, s.leaves, s.max_depth, s.pruned, s.case1, s.case2, s.case3_1, s.case3_2, s.rule1
    )
}

pub fn cmd_pmaf(args: &SolveArgs, out: &mut dyn Write) -> Result<PmafOutput, CliError> {
    let inst = read_instance(&args.input, args.rooting.is_rooted())?;
    let name = args.input.display().to_string();
    let res = run_pmaf(&inst, &name, args.k, args.verify)?;
    let s = res.report.stats.unwrap_or_default();
    let mut text = format!(
        "order {}\napprox_order {}\nk_start {}\nwall_ms {:.3}\nstats {}\n",
        res.report.order,
        res.approx_order,
        res.k_start,
        res.report.wall_ms,
        stats_line(&s)
    );
    text.push_str(&format!("total_stats {}\n", stats_line(&res.total_stats)));
    text.push_str(&res.certificate);
    text.push('\n');
    print(out, &text)?;
    if let Some(p) = &args.out {
        write_out(p, &format!("{}\n", res.certificate))?;
    }
    Ok(res)
}

pub fn cmd_amaf(args: &SolveArgs, out: &mut dyn Write) -> Result<AmafOutput, CliError> {
    let inst = read_instance(&args.input, args.rooting.is_rooted())?;
    let name = args.input.display().to_string();
    let res = run_amaf(&inst, &name, args.verify)?;
    if let Some(k) = args.k {
        if res.report.order > k {
            return Err(CliError::NoSolution(k));
        }
    }
    let steps: Vec<String> = res.steps.iter().map(|(k, c)| format!("{}={c}", k.name())).collect();
    let text = format!(
        "order {}\nratio_bound {}\nwall_ms {:.3}\nsteps {}\n{}\n",
        res.report.order,
        res.ratio_bound,
        res.report.wall_ms,
        steps.join(" "),
        res.certificate
    );
    print(out, &text)?;
    if let Some(p) = &args.out {
        write_out(p, &format!("{}\n", res.certificate))?;
    }
    Ok(res)
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<String, CliError> {
    let spec = GenSpec {
        n: args.taxa,
        m: args.trees,
        x: args.moves,
        contract_count: args.contract,
        seed: args.seed,
        rooted: args.rooting.is_rooted(),
    };
    let text = generate_instance_text(&spec)?;
    match &args.out {
        Some(p) => write_out(p, &text)?,
        None => print(out, &text)?,
    }
    Ok(text)
}

fn bench_one(path: &Path, mode: BenchMode, rooted: bool) -> Vec<Row> {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let inst = match read_instance(path, rooted) {
        Ok(i) => i,
        Err(e) => {
            warn!("skipping {name}: {e}");
            return vec![Row::Warning {
                instance: name,
                note: e.to_string(),
            }];
        }
    };
    let want = |m: BenchMode| mode == m || mode == BenchMode::All;
    let mut rows = Vec::new();
    let mut exact: Option<usize> = None;
    let mut reports: Vec<RunReport> = Vec::new();
    if want(BenchMode::Oracle) {
        let edges = inst.forests()[0].edge_count();
        if edges <= DEFAULT_MAX_EDGES {
            match run_oracle(&inst, &name) {
                Ok(r) => {
                    exact = Some(r.order);
                    reports.push(r);
                }
                Err(e) => rows.push(Row::Warning {
                    instance: name.clone(),
                    note: format!("oracle: {e}"),
                }),
            }
        } else if mode == BenchMode::Oracle {
            rows.push(Row::Warning {
                instance: name.clone(),
                note: format!("oracle skipped: {edges} edges"),
            });
        }
    }
    if want(BenchMode::Fpt) {
        match run_pmaf(&inst, &name, None, true) {
            Ok(mut p) => {
                if let Some(o) = exact {
                    if o != p.report.order {
                        p.report.note = format!("oracle disagrees: {o}");
                    }
                }
                exact = exact.or(Some(p.report.order));
                reports.push(p.report);
            }
            Err(e) => rows.push(Row::Warning {
                instance: name.clone(),
                note: format!("fpt: {e}"),
            }),
        }
    }
    if want(BenchMode::Approx) {
        match run_amaf(&inst, &name, true) {
            Ok(mut a) => {
                a.report.ratio = exact.map(|o| a.report.order as f64 / o as f64);
                reports.push(a.report);
            }
            Err(e) => rows.push(Row::Warning {
                instance: name.clone(),
                note: format!("approx: {e}"),
            }),
        }
    }
    // the fpt row's ratio is only meaningful next to the approx row
    for r in &mut reports {
        if r.method != Method::Approx {
            r.ratio = None;
        }
    }
    rows.extend(reports.into_iter().map(Row::Run));
    rows
}

/// Instance files in `dir`, sorted by name. Hidden files are ignored.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    files.sort();
    Ok(files)
}

/// Benchmarks every file; rows come back in file-name order followed by
/// aggregates.
pub fn run_bench(dir: &Path, mode: BenchMode, rooted: bool, jobs: usize) -> Result<Vec<Row>, CliError> {
    let files = instance_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let per_file: Vec<Vec<Row>> = pool.install(|| files.par_iter().map(|p| bench_one(p, mode, rooted)).collect());
    let mut rows: Vec<Row> = per_file.into_iter().flatten().collect();
    let runs: Vec<RunReport> = rows
        .iter()
        .filter_map(|r| match r {
            Row::Run(r) => Some(r.clone()),
            _ => None,
        })
        .collect();
    rows.extend(aggregate(&runs).into_iter().map(Row::Aggregate));
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<Vec<Row>, CliError> {
    let rows = run_bench(&args.dir, args.mode, args.rooting.is_rooted(), args.jobs)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).map_err(|e| CliError::Internal(e.to_string()))?;
    let text = String::from_utf8(buf).expect("csv output is utf-8");
    match &args.out {
        Some(p) => write_out(p, &text)?,
        None => print(out, &text)?,
    }
    Ok(rows)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match &cli.command {
        Command::Pmaf(a) => cmd_pmaf(a, out).map(|_| ()),
        Command::Amaf(a) => cmd_amaf(a, out).map(|_| ()),
        Command::Gen(a) => cmd_gen(a, out).map(|_| ()),
        Command::Bench(a) => cmd_bench(a, out).map(|_| ()),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "maf: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound(1, true), 1);
        assert_eq!(lower_bound(7, true), 2);
        assert_eq!(lower_bound(9, true), 3);
        assert_eq!(lower_bound(7, false), 1);
        assert_eq!(lower_bound(8, false), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::NoSolution(2).exit_code(), 1);
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Internal("x".into()).exit_code(), 3);
        assert_eq!(CliError::from(SolveError::EmptyRange { lo: 3, hi: 2 }).exit_code(), 1);
    }

    #[test]
    fn rooted_by_default() {
        let cli = Cli::try_parse_from(["maf", "pmaf", "in.nwk"]).unwrap();
        let Command::Pmaf(a) = cli.command else { panic!() };
        assert!(a.rooting.is_rooted());
        let cli = Cli::try_parse_from(["maf", "amaf", "in.nwk", "--unrooted"]).unwrap();
        let Command::Amaf(a) = cli.command else { panic!() };
        assert!(!a.rooting.is_rooted());
        assert!(Cli::try_parse_from(["maf", "amaf", "in.nwk", "--rooted", "--unrooted"]).is_err());
    }
}
