//! Exact parameterized search for agreement forests of order at most `k`.
//!
//! The pair `(F_1, F_2)` is reduced, then a maximal sibling set `S` of `F_2`
//! decides the case: group `S` when it is also maximal in `F_1`, otherwise
//! branch on cutting `a`, cutting `b`, or cutting the edges that keep `a` and
//! `b` apart in `F_1`. Once `F_2` has no maximal sibling set the pair has a
//! unique maximal agreement forest `F'`, and the search continues on
//! `(F', F_3, ...)`. Rooted branching is three-way, unrooted four-way.

use log::debug;
use thiserror::Error;

use crate::forest::{group_pair, unify_tables, EdgeId, Forest, ForestError, SiblingContext};
use crate::instance::{AgreementForest, Instance};
use crate::label::LabelId;
use crate::reduction::reduce_pair;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("the rooted solver needs a rooted instance")]
    NotRooted,
    #[error("the unrooted solver needs an unrooted instance")]
    NotUnrooted,
    #[error("parameter k must be at least 1")]
    BadK,
    #[error("k range [{lo}, {hi}] is empty")]
    EmptyRange { lo: usize, hi: usize },
    #[error("no agreement forest of order at most {0}")]
    NoSolution(usize),
    #[error("second forest still has a maximal sibling set")]
    HasSiblingSet,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Counters for one search at a fixed `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub leaves: u64,
    pub max_depth: usize,
    pub pruned: u64,
    pub case1: u64,
    pub case2: u64,
    pub case3_1: u64,
    pub case3_2: u64,
    pub rule1: u64,
}

impl SearchStats {
    pub fn merge(&mut self, o: &SearchStats) {
        self.nodes += o.nodes;
        self.leaves += o.leaves;
        self.max_depth = self.max_depth.max(o.max_depth);
        self.pruned += o.pruned;
        self.case1 += o.case1;
        self.case2 += o.case2;
        self.case3_1 += o.case3_1;
        self.case3_2 += o.case3_2;
        self.rule1 += o.rule1;
    }

    /// Largest number of leaves the search tree may have at parameter `k`.
    pub fn leaf_bound(rooted: bool, k: usize) -> u64 {
        let base: u64 = if rooted { 3 } else { 4 };
        base.saturating_pow(k as u32)
    }
}

/// Result of one parameterized search.
#[derive(Clone, Debug)]
pub struct Solution {
    pub forest: Option<AgreementForest>,
    pub stats: SearchStats,
}

/// One way to continue from a branching node.
enum Branch {
    /// Cut the leaf edge of a label in both forests.
    Isolate(LabelId),
    /// Cut edges of `F_1` only.
    Cut(Vec<EdgeId>),
}

struct Search<'a> {
    inputs: &'a [Forest],
    k: usize,
    stats: SearchStats,
}

impl Search<'_> {
    fn leaf(&mut self) {
        self.stats.leaves += 1;
    }

    /// Continues with `f1` as the running agreement forest of the first
    /// `next` inputs.
    fn stage(&mut self, f1: Forest, next: usize, depth: usize) -> Result<Option<Forest>, SolveError> {
        if f1.order() > self.k {
            self.stats.pruned += 1;
            self.leaf();
            return Ok(None);
        }
        if next == self.inputs.len() {
            self.leaf();
            return Ok(Some(f1));
        }
        let f2 = self.inputs[next].clone();
        self.pair(f1, f2, next, depth)
    }

    fn pair(&mut self, f1: Forest, f2: Forest, next: usize, depth: usize) -> Result<Option<Forest>, SolveError> {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let (mut f1, mut f2) = unify_tables(f1, f2)?;
        loop {
            if f1.order() > self.k {
                self.stats.pruned += 1;
                self.leaf();
                return Ok(None);
            }
            let (r1, r2, trace) = reduce_pair(&f1, &f2);
            self.stats.rule1 += trace.len() as u64;
            f1 = r1;
            f2 = r2;
            if f1.order() > self.k {
                self.stats.pruned += 1;
                self.leaf();
                return Ok(None);
            }
            let Some(s) = f2.find_mss() else {
                let fp = unique_maximal_af(&f1, &f2)?.expand_labels();
                return self.stage(fp, next + 1, depth);
            };
            let branches = match f1.sibling_context(&s.labels) {
                SiblingContext::Mss(_) => {
                    self.stats.case1 += 1;
                    (f1, f2) = group_pair(&f1, &f2, &s.labels)?;
                    continue;
                }
                SiblingContext::Siblings(set) => {
                    self.stats.case2 += 1;
                    let (a, b) = (s.labels[0], s.labels[1]);
                    let mut out = vec![Branch::Isolate(a), Branch::Isolate(b)];
                    if f1.is_rooted() {
                        out.push(Branch::Cut(set.surplus_edges.clone()));
                    } else {
                        let first = set.surplus_edges[0];
                        let last = *set.surplus_edges.last().unwrap();
                        out.push(Branch::Cut(vec![first]));
                        out.push(Branch::Cut(vec![last]));
                    }
                    out
                }
                SiblingContext::NotSiblings => {
                    let (a, b) = first_non_sibling_pair(&f1, &s.labels)
                        .ok_or_else(|| SolveError::Internal("no non-sibling pair".into()))?;
                    let mut out = vec![Branch::Isolate(a), Branch::Isolate(b)];
                    if f1.same_component(a, b) {
                        self.stats.case3_2 += 1;
                        for cut in path_cuts(&f1, a, b) {
                            out.push(Branch::Cut(cut));
                        }
                    } else {
                        self.stats.case3_1 += 1;
                    }
                    out
                }
            };
            for br in branches {
                let (g1, g2) = match br {
                    Branch::Isolate(l) => (isolate(&f1, l)?, isolate(&f2, l)?),
                    Branch::Cut(edges) => (f1.remove_edges(&edges)?, f2.clone()),
                };
                if let Some(found) = self.pair(g1, g2, next, depth + 1)? {
                    return Ok(Some(found));
                }
            }
            return Ok(None);
        }
    }
}

fn isolate(f: &Forest, l: LabelId) -> Result<Forest, ForestError> {
    match f.leaf_edge(l) {
        Some(e) => f.remove_edge(e),
        None => Ok(f.clone()),
    }
}

/// First pair of `labels`, in key order, that are not siblings in `f`.
pub(crate) fn first_non_sibling_pair(f: &Forest, labels: &[LabelId]) -> Option<(LabelId, LabelId)> {
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            if !f.are_siblings(*a, *b) {
                return Some((*a, *b));
            }
        }
    }
    None
}

/// Edges off the `a`-`b` path whose removal the third (and fourth) branch
/// performs. Rooted: one set, all off-path edges at internal path vertices
/// other than the lowest common ancestor. Unrooted: two sets, the off-path
/// edges at the first and at the last internal path vertex.
pub(crate) fn path_cuts(f: &Forest, a: LabelId, b: LabelId) -> Vec<Vec<EdgeId>> {
    let va = f.vertex_of(a).unwrap();
    let vb = f.vertex_of(b).unwrap();
    let path = f.path(va, vb).expect("same component");
    let inner = &path[1..path.len() - 1];
    let off_path = |i: usize| -> Vec<EdgeId> {
        let c = inner[i];
        let prev = path[i];
        let next = path[i + 2];
        let mut es: Vec<EdgeId> = f
            .incident_edges(c)
            .iter()
            .copied()
            .filter(|e| {
                let w = f.other_end(*e, c);
                w != prev && w != next
            })
            .collect();
        es.sort();
        es
    };
    if f.is_rooted() {
        let lca = f.lca(va, vb).unwrap();
        let mut es: Vec<EdgeId> = (0..inner.len())
            .filter(|i| inner[*i] != lca)
            .flat_map(off_path)
            .collect();
        es.sort();
        vec![es]
    } else {
        vec![off_path(0), off_path(inner.len() - 1)]
    }
}

/// The unique maximal agreement forest of a pair whose second forest has no
/// maximal sibling set.
pub fn unique_maximal_af(f1: &Forest, f2: &Forest) -> Result<Forest, SolveError> {
    if f2.find_mss().is_some() {
        return Err(SolveError::HasSiblingSet);
    }
    let edges: Vec<EdgeId> = f2.edge_ids().collect();
    match edges.as_slice() {
        [] => Ok(f2.clone()),
        [e] => {
            let [x, y] = f2.endpoints(*e).unwrap();
            let (lx, ly) = match (f2.label_of(x), f2.label_of(y)) {
                (Some(lx), Some(ly)) => (lx, ly),
                _ => return Err(SolveError::Internal("lone edge with an unlabeled end".into())),
            };
            if f1.same_component(lx, ly) {
                Ok(f2.clone())
            } else {
                Ok(f2.singletons())
            }
        }
        _ => Err(SolveError::Internal("forest without sibling set has several edges".into())),
    }
}

fn search(inst: &Instance, k: usize) -> Result<Solution, SolveError> {
    if k == 0 {
        return Err(SolveError::BadK);
    }
    let inputs = inst.forests();
    let mut s = Search {
        inputs,
        k,
        stats: SearchStats::default(),
    };
    let found = s.stage(inputs[0].clone(), 1, 0)?;
    let forest = match found {
        None => None,
        Some(f) => {
            let af = AgreementForest::certify(f, inst)?
                .ok_or_else(|| SolveError::Internal("result is not an agreement forest".into()))?;
            if af.order() > k {
                return Err(SolveError::Internal("result exceeds k".into()));
            }
            Some(af)
        }
    };
    debug!("k={k} found={} stats={:?}", forest.is_some(), s.stats);
    Ok(Solution { forest, stats: s.stats })
}

/// Searches a rooted instance for an agreement forest of order at most `k`.
pub fn solve_rmaf(inst: &Instance, k: usize) -> Result<Solution, SolveError> {
    if !inst.is_rooted() {
        return Err(SolveError::NotRooted);
    }
    search(inst, k)
}

/// Searches an unrooted instance for an agreement forest of order at most `k`.
pub fn solve_umaf(inst: &Instance, k: usize) -> Result<Solution, SolveError> {
    if inst.is_rooted() {
        return Err(SolveError::NotUnrooted);
    }
    search(inst, k)
}

/// Dispatches on rootedness.
pub fn solve(inst: &Instance, k: usize) -> Result<Solution, SolveError> {
    if inst.is_rooted() {
        solve_rmaf(inst, k)
    } else {
        solve_umaf(inst, k)
    }
}

#[derive(Clone, Debug)]
pub struct MinK {
    pub order: usize,
    pub forest: AgreementForest,
    /// Stats of every search run, by `k`.
    pub runs: Vec<(usize, SearchStats)>,
}

impl MinK {
    pub fn total_stats(&self) -> SearchStats {
        let mut t = SearchStats::default();
        for (_, s) in &self.runs {
            t.merge(s);
        }
        t
    }

    /// Stats of the successful run.
    pub fn final_stats(&self) -> SearchStats {
        self.runs.last().map(|r| r.1).unwrap_or_default()
    }
}

/// Tries `k = k_lo, k_lo + 1, ..., k_hi` and returns the first success.
pub fn find_min_k_with_stats(inst: &Instance, k_lo: usize, k_hi: usize) -> Result<MinK, SolveError> {
    let lo = k_lo.max(1);
    if lo > k_hi {
        return Err(SolveError::EmptyRange { lo, hi: k_hi });
    }
    let mut runs = Vec::new();
    for k in lo..=k_hi {
        let sol = solve(inst, k)?;
        runs.push((k, sol.stats));
        if let Some(af) = sol.forest {
            return Ok(MinK {
                order: af.order(),
                forest: af,
                runs,
            });
        }
    }
    Err(SolveError::NoSolution(k_hi))
}

/// Smallest order in `[k_lo, k_hi]` admitting an agreement forest, with a
/// certificate.
pub fn find_min_k(inst: &Instance, k_lo: usize, k_hi: usize) -> Result<(usize, AgreementForest), SolveError> {
    find_min_k_with_stats(inst, k_lo, k_hi).map(|r| (r.order, r.forest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{parse_forest_in, parse_instance, serialize};

    #[test]
    fn identical_trees_have_order_one() {
        for rooted in [true, false] {
            let inst = parse_instance("((a,b),(c,d,e));\n((a,b),(c,d,e));", rooted).unwrap();
            let sol = solve(&inst, 1).unwrap();
            assert_eq!(sol.forest.unwrap().order(), 1);
        }
    }

    #[test]
    fn one_spr_rooted_pair() {
        let inst = parse_instance("((a,b),c);\n((a,c),b);", true).unwrap();
        assert!(solve_rmaf(&inst, 1).unwrap().forest.is_none());
        let af = solve_rmaf(&inst, 2).unwrap().forest.unwrap();
        assert_eq!(af.order(), 2);
        assert!(af.verify(&inst).unwrap());
        let (order, _) = find_min_k(&inst, 1, 4).unwrap();
        assert_eq!(order, 2);
    }

    #[test]
    fn conflicting_quartets() {
        let inst = parse_instance("((a,b),(c,d));\n((a,c),(b,d));", false).unwrap();
        assert!(solve_umaf(&inst, 1).unwrap().forest.is_none());
        let af = solve_umaf(&inst, 2).unwrap().forest.unwrap();
        assert_eq!(af.order(), 2);
        assert!(af.verify(&inst).unwrap());
    }

    #[test]
    fn wrong_rootedness_is_rejected() {
        let r = parse_instance("((a,b),c);", true).unwrap();
        let u = parse_instance("((a,b),c);", false).unwrap();
        assert_eq!(solve_umaf(&r, 2).unwrap_err(), SolveError::NotUnrooted);
        assert_eq!(solve_rmaf(&u, 2).unwrap_err(), SolveError::NotRooted);
        assert_eq!(solve(&r, 0).unwrap_err(), SolveError::BadK);
    }

    #[test]
    fn unique_maximal_af_cases() {
        let inst = parse_instance("((a,b),c);", true).unwrap();
        let t = &inst.forests()[0];
        let s = t.singletons();
        assert_eq!(unique_maximal_af(t, &s).unwrap(), s);

        let f2 = parse_forest_in("a;\nb;\nc;", inst.labels()).unwrap();
        assert_eq!(f2.edge_count(), 1);
        assert_eq!(unique_maximal_af(t, &f2).unwrap(), f2);

        let f1 = parse_forest_in("(b,c);\na;", inst.labels()).unwrap();
        let f1 = f1.remove_edge(f1.leaf_edge(LabelId(0)).unwrap()).unwrap();
        assert_eq!(serialize(&f1), "ρ;\na;\n(b,c);");
        assert_eq!(unique_maximal_af(&f1, &f2).unwrap(), s);

        assert_eq!(unique_maximal_af(&s, t).unwrap_err(), SolveError::HasSiblingSet);
    }

    #[test]
    fn multifurcating_three_trees() {
        let inst = parse_instance("((a,b,c),(d,e));\n((a,b),(c,d,e));\n(a,b,c,d,e);", true).unwrap();
        let r = find_min_k_with_stats(&inst, 1, 6).unwrap();
        let oracle = crate::oracle::brute_force_maf(&inst, 18).unwrap();
        assert_eq!(r.order, oracle.opt_order);
        assert!(r.forest.verify(&inst).unwrap());
        for (k, s) in &r.runs {
            assert!(s.leaves <= SearchStats::leaf_bound(true, *k));
        }
    }
}
