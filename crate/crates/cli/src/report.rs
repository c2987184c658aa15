//! Per-run reports and the benchmark CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use maf_core::fpt::SearchStats;

pub const CSV_HEADER: [&str; 13] = [
    "kind", "instance", "n", "m", "rooted", "method", "order", "ratio", "wall_ms", "nodes", "leaves", "max_depth", "note",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Fpt,
    Approx,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fpt => "fpt",
            Method::Approx => "approx",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one method on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub rooted: bool,
    pub method: Method,
    pub order: usize,
    /// Approximate order over exact order, when both are known.
    pub ratio: Option<f64>,
    pub wall_ms: f64,
    pub stats: Option<SearchStats>,
    pub note: String,
}

impl RunReport {
    /// `t{n}-{m}`, the grouping used by aggregate rows.
    pub fn group(&self) -> String {
        format!("t{}-{}", self.n, self.m)
    }
}

/// A CSV row: a run, a skipped file, or an aggregate.
#[derive(Clone, Debug, PartialEq)]
pub enum Row {
    Run(RunReport),
    Warning { instance: String, note: String },
    Aggregate(Aggregate),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub group: String,
    pub n: usize,
    pub m: usize,
    pub rooted: bool,
    pub method: Method,
    pub runs: usize,
    pub mean_order: f64,
    pub worst_ratio: Option<f64>,
    pub mean_wall_ms: f64,
}

/// One aggregate per `(n, m, rooted, method)`, in that order.
pub fn aggregate(reports: &[RunReport]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, usize, bool, Method), Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        groups.entry((r.n, r.m, r.rooted, r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((n, m, rooted, method), rs)| {
            let count = rs.len() as f64;
            Aggregate {
                group: format!("t{n}-{m}"),
                n,
                m,
                rooted,
                method,
                runs: rs.len(),
                mean_order: rs.iter().map(|r| r.order as f64).sum::<f64>() / count,
                worst_ratio: rs.iter().filter_map(|r| r.ratio).fold(None, |acc, x| {
                    Some(acc.map_or(x, |a: f64| a.max(x)))
                }),
                mean_wall_ms: rs.iter().map(|r| r.wall_ms).sum::<f64>() / count,
            }
        })
        .collect()
}

fn fmt_f(x: f64) -> String {
    format!("{x:.3}")
}

impl Row {
    fn record(&self) -> Vec<String> {
        match self {
            Row::Run(r) => {
                let (nodes, leaves, depth) = match &r.stats {
                    Some(s) => (s.nodes.to_string(), s.leaves.to_string(), s.max_depth.to_string()),
                    None => Default::default(),
                };
                vec![
                    "run".into(),
                    r.instance.clone(),
                    r.n.to_string(),
                    r.m.to_string(),
                    r.rooted.to_string(),
                    r.method.to_string(),
                    r.order.to_string(),
                    r.ratio.map(fmt_f).unwrap_or_default(),
                    fmt_f(r.wall_ms),
                    nodes,
                    leaves,
                    depth,
                    r.note.clone(),
                ]
            }
            Row::Warning { instance, note } => {
                let mut v = vec![String::new(); CSV_HEADER.len()];
                v[0] = "warning".into();
                v[1] = instance.clone();
                v[12] = note.clone();
                v
            }
            Row::Aggregate(a) => vec![
                "aggregate".into(),
                a.group.clone(),
                a.n.to_string(),
                a.m.to_string(),
                a.rooted.to_string(),
                a.method.to_string(),
                fmt_f(a.mean_order),
                a.worst_ratio.map(fmt_f).unwrap_or_default(),
                fmt_f(a.mean_wall_ms),
                String::new(),
                String::new(),
                String::new(),
                format!("runs={}", a.runs),
            ],
        }
    }
}

/// Writes the header and every row.
pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}
