//! Ratio-3 (rooted) and ratio-4 (unrooted) approximation.
//!
//! For `i = 2..m` the running forest `F_1` is driven towards `F_i` by
//! meta-steps until the two are equal: Reduction Rule 1, grouping a shared
//! maximal sibling set, or cutting `a`, `b` and a few extra edges of `F_1`.
//! Every meta-step is recorded with the edges it removed and an essential
//! subset of its `F_1` edges, so the ratio bookkeeping can be audited.

use thiserror::Error;

use crate::forest::{group_pair, unify_tables, EdgeId, Forest, ForestError, SiblingContext};
use crate::fpt::{first_non_sibling_pair, path_cuts};
use crate::instance::{AgreementForest, Instance};
use crate::reduction::removable_edges;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApproxError {
    #[error("the rooted approximation needs a rooted instance")]
    NotRooted,
    #[error("the unrooted approximation needs an unrooted instance")]
    NotUnrooted,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaStepKind {
    Rule1,
    Group,
    MS2,
    MS3_1,
    MS3_2,
}

impl MetaStepKind {
    pub fn name(self) -> &'static str {
        match self {
            MetaStepKind::Rule1 => "rule1",
            MetaStepKind::Group => "group",
            MetaStepKind::MS2 => "ms2",
            MetaStepKind::MS3_1 => "ms3.1",
            MetaStepKind::MS3_2 => "ms3.2",
        }
    }

    /// Ratio kept by this meta-step.
    pub fn ratio(self, rooted: bool) -> u32 {
        match (self, rooted) {
            (MetaStepKind::Rule1 | MetaStepKind::Group, _) => 1,
            (MetaStepKind::MS3_1, _) => 2,
            (MetaStepKind::MS2 | MetaStepKind::MS3_2, true) => 3,
            (MetaStepKind::MS2 | MetaStepKind::MS3_2, false) => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetaStepRecord {
    pub kind: MetaStepKind,
    /// Round index `i` (0-based forest index of `F_i`).
    pub round: usize,
    /// Removed edges as `(forest index, edge)`; index 0 is `F_1`.
    pub removed: Vec<(usize, EdgeId)>,
    /// The removed edges that belong to `F_1`.
    pub removed_f1: Vec<EdgeId>,
    /// A subset of `removed_f1` with the same effect whose every edge splits
    /// a component.
    pub essential: Vec<EdgeId>,
    pub declared_ratio: u32,
    /// `F_1` just before the meta-step.
    pub before: Forest,
}

#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub forest: AgreementForest,
    pub trace: Vec<MetaStepRecord>,
    pub ratio_bound: u32,
}

impl ApproxResult {
    pub fn order(&self) -> usize {
        self.forest.order()
    }

    pub fn count(&self, kind: MetaStepKind) -> usize {
        self.trace.iter().filter(|r| r.kind == kind).count()
    }
}

/// Greedy essential subset: drop each edge (in id order) whose removal from
/// the set leaves `F \ E` unchanged.
pub fn essential_subset(f: &Forest, edges: &[EdgeId]) -> Result<Vec<EdgeId>, ForestError> {
    let mut keep: Vec<EdgeId> = edges.to_vec();
    keep.sort();
    keep.dedup();
    let target = f.remove_edges(&keep)?.canonical();
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        if f.remove_edges(&trial)?.canonical() == target {
            keep = trial;
        } else {
            i += 1;
        }
    }
    Ok(keep)
}

/// Audits one record against the forest it was applied to.
pub fn check_metastep_ratio(rec: &MetaStepRecord, before: &Forest) -> bool {
    let rooted = before.is_rooted();
    let Ok(all) = before.remove_edges(&rec.removed_f1) else {
        return false;
    };
    let Ok(ess) = before.remove_edges(&rec.essential) else {
        return false;
    };
    let f1_part: Vec<EdgeId> = rec.removed.iter().filter(|(i, _)| *i == 0).map(|(_, e)| *e).collect();
    let n = rec.essential.len();
    let bookkeeping = rec.essential.iter().all(|e| rec.removed_f1.contains(e))
        && f1_part == rec.removed_f1
        && all == ess
        && ess.order() == before.order() + n
        && rec.declared_ratio == rec.kind.ratio(rooted);
    if !bookkeeping {
        return false;
    }
    let m1 = rec.removed_f1.len();
    match rec.kind {
        MetaStepKind::Rule1 => n == m1 && m1 <= 1,
        MetaStepKind::Group => rec.removed.is_empty(),
        MetaStepKind::MS3_1 => m1 == 2 && n <= 2,
        MetaStepKind::MS2 | MetaStepKind::MS3_2 => {
            let r = rec.declared_ratio as usize;
            m1 == r && n <= r
        }
    }
}

struct Run {
    rooted: bool,
    trace: Vec<MetaStepRecord>,
}

impl Run {
    fn record(
        &mut self,
        kind: MetaStepKind,
        round: usize,
        before: &Forest,
        f1_edges: Vec<EdgeId>,
        fi_edges: Vec<EdgeId>,
    ) -> Result<(), ForestError> {
        let essential = essential_subset(before, &f1_edges)?;
        let mut removed: Vec<(usize, EdgeId)> = f1_edges.iter().map(|e| (0, *e)).collect();
        removed.extend(fi_edges.iter().map(|e| (round, *e)));
        self.trace.push(MetaStepRecord {
            kind,
            round,
            removed,
            removed_f1: f1_edges,
            essential,
            declared_ratio: kind.ratio(self.rooted),
            before: before.clone(),
        });
        Ok(())
    }

    /// Applies Rule 1 between the two forests until it no longer applies.
    fn reduce(&mut self, f1: &mut Forest, fi: &mut Forest, round: usize) -> Result<(), ForestError> {
        loop {
            if let Some(e) = removable_edges(f1, fi).first().copied() {
                self.record(MetaStepKind::Rule1, round, f1, vec![], vec![e])?;
                *fi = fi.remove_edge(e)?;
            } else if let Some(e) = removable_edges(fi, f1).first().copied() {
                self.record(MetaStepKind::Rule1, round, f1, vec![e], vec![])?;
                *f1 = f1.remove_edge(e)?;
            } else {
                return Ok(());
            }
        }
    }

    fn round(&mut self, f1: Forest, fi: Forest, round: usize) -> Result<Forest, ApproxError> {
        let (mut f1, mut fi) = unify_tables(f1, fi)?;
        loop {
            self.reduce(&mut f1, &mut fi, round)?;
            if f1 == fi {
                return Ok(f1.expand_labels());
            }
            let s = fi
                .find_mss()
                .ok_or_else(|| ApproxError::Internal("forests differ but no sibling set".into()))?;
            let (a, b, kind, extra) = match f1.sibling_context(&s.labels) {
                SiblingContext::Mss(_) => {
                    let before = f1.clone();
                    (f1, fi) = group_pair(&f1, &fi, &s.labels)?;
                    self.record(MetaStepKind::Group, round, &before, vec![], vec![])?;
                    continue;
                }
                SiblingContext::Siblings(set) => {
                    let take = if self.rooted { 1 } else { 2 };
                    if set.surplus_edges.len() < take {
                        return Err(ApproxError::Internal("hub has too few surplus edges".into()));
                    }
                    let extra = set.surplus_edges[..take].to_vec();
                    (s.labels[0], s.labels[1], MetaStepKind::MS2, extra)
                }
                SiblingContext::NotSiblings => {
                    let (a, b) = first_non_sibling_pair(&f1, &s.labels)
                        .ok_or_else(|| ApproxError::Internal("no non-sibling pair".into()))?;
                    if f1.same_component(a, b) {
                        let cuts = path_cuts(&f1, a, b);
                        // rooted: any edge of E_p; unrooted: one at each end of the path
                        let extra = cuts.iter().map(|c| c[0]).collect();
                        (a, b, MetaStepKind::MS3_2, extra)
                    } else {
                        (a, b, MetaStepKind::MS3_1, vec![])
                    }
                }
            };
            let leaf = |f: &Forest, l| f.leaf_edge(l).ok_or_else(|| ApproxError::Internal("label without edge".into()));
            let mut f1_edges = vec![leaf(&f1, a)?, leaf(&f1, b)?];
            f1_edges.extend(extra);
            let fi_edges = vec![leaf(&fi, a)?, leaf(&fi, b)?];
            self.record(kind, round, &f1, f1_edges.clone(), fi_edges.clone())?;
            f1 = f1.remove_edges(&f1_edges)?;
            fi = fi.remove_edges(&fi_edges)?;
        }
    }
}

fn approx(inst: &Instance) -> Result<ApproxResult, ApproxError> {
    let mut run = Run {
        rooted: inst.is_rooted(),
        trace: Vec::new(),
    };
    let mut f1 = inst.forests()[0].clone();
    for (i, fi) in inst.forests().iter().enumerate().skip(1) {
        f1 = run.round(f1, fi.clone(), i)?;
    }
    let forest = AgreementForest::certify(f1, inst)?
        .ok_or_else(|| ApproxError::Internal("result is not an agreement forest".into()))?;
    let ratio_bound = run.trace.iter().map(|r| r.declared_ratio).max().unwrap_or(1);
    Ok(ApproxResult {
        forest,
        trace: run.trace,
        ratio_bound,
    })
}

pub fn approx_rmaf(inst: &Instance) -> Result<ApproxResult, ApproxError> {
    if !inst.is_rooted() {
        return Err(ApproxError::NotRooted);
    }
    approx(inst)
}

pub fn approx_umaf(inst: &Instance) -> Result<ApproxResult, ApproxError> {
    if inst.is_rooted() {
        return Err(ApproxError::NotUnrooted);
    }
    approx(inst)
}

/// Dispatches on rootedness.
pub fn approximate(inst: &Instance) -> Result<ApproxResult, ApproxError> {
    if inst.is_rooted() {
        approx_rmaf(inst)
    } else {
        approx_umaf(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_instance;

    fn audit(r: &ApproxResult) {
        for rec in &r.trace {
            assert!(check_metastep_ratio(rec, &rec.before), "{rec:?}");
        }
    }

    #[test]
    fn identical_trees() {
        for rooted in [true, false] {
            let inst = parse_instance("((a,b),(c,d,e));\n((a,b),(c,d,e));", rooted).unwrap();
            let r = approximate(&inst).unwrap();
            assert_eq!(r.order(), 1);
            assert!(r.trace.iter().all(|x| x.kind == MetaStepKind::Group));
            audit(&r);
        }
    }

    #[test]
    fn one_spr_rooted_pair() {
        let inst = parse_instance("((a,b),c);\n((a,c),b);", true).unwrap();
        let r = approx_rmaf(&inst).unwrap();
        assert!((2..=6).contains(&r.order()));
        assert!(r.forest.verify(&inst).unwrap());
        assert!(r.ratio_bound <= 3);
        audit(&r);
    }

    #[test]
    fn conflicting_quartets() {
        let inst = parse_instance("((a,b),(c,d));\n((a,c),(b,d));", false).unwrap();
        let r = approx_umaf(&inst).unwrap();
        assert!((2..=8).contains(&r.order()));
        assert!(r.forest.verify(&inst).unwrap());
        assert!(r.ratio_bound <= 4);
        audit(&r);
    }

    #[test]
    fn rootedness_checked() {
        let inst = parse_instance("((a,b),c);", true).unwrap();
        assert_eq!(approx_umaf(&inst).unwrap_err(), ApproxError::NotUnrooted);
        let r = approx_rmaf(&inst).unwrap();
        assert_eq!(r.order(), 1);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn essential_subset_drops_redundant_edges() {
        let inst = parse_instance("((a,b),c);", true).unwrap();
        let t = &inst.forests()[0];
        let a = t.leaf_edge(inst.labels().id_of("a").unwrap()).unwrap();
        let b = t.leaf_edge(inst.labels().id_of("b").unwrap()).unwrap();
        let ab = t.parent_edge(t.parent(t.vertex_of(inst.labels().id_of("a").unwrap()).unwrap()).unwrap()).unwrap();
        // cutting a and b already dissolves their parent
        let e = essential_subset(t, &[a, b, ab]).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(t.remove_edges(&e).unwrap(), t.remove_edges(&[a, b, ab]).unwrap());
    }
}
