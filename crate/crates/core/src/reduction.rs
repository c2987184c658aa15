//! Reduction Rule 1.
//!
//! An edge `e` of `F_q` may be removed when no component of `F_p` has labels
//! on both sides of `e`. Removals are applied one at a time: the first
//! applicable edge in id order is cut and the scan restarts.

use std::collections::HashMap;

use crate::forest::{EdgeId, Forest, VertexId};
use crate::instance::Instance;
use crate::label::{LabelId, LabelSet};

/// One application of the rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    /// Index of the forest that lost the edge.
    pub q: usize,
    pub edge: EdgeId,
    /// Index of the forest whose components justify the removal.
    pub p: usize,
    /// Label sets of the witnessing components of `F_p`, those meeting the
    /// pendant side of the edge.
    pub witnesses: Vec<LabelSet>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub removals: Vec<Removal>,
}

impl ReductionTrace {
    pub fn len(&self) -> usize {
        self.removals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removals.is_empty()
    }
}

/// All edges of `fq` that the rule allows removing given `fp`, ascending.
pub fn removable_edges(fp: &Forest, fq: &Forest) -> Vec<EdgeId> {
    let comp_of = fp.component_index_of_labels();
    let ncomp = comp_of.values().max().map_or(0, |m| m + 1);
    let mut out = Vec::new();
    for comp in fq.components() {
        // number of labels per F_p component inside this F_q component
        let mut total = vec![0usize; ncomp];
        for v in &comp {
            if let Some(c) = fq.label_of(*v).and_then(|l| comp_of.get(&l)) {
                total[*c] += 1;
            }
        }
        let order = fq.preorder(comp[0]);
        let mut below: HashMap<VertexId, HashMap<usize, usize>> = HashMap::new();
        for (v, from) in order.iter().rev() {
            let mut mine = below.remove(v).unwrap_or_default();
            if let Some(c) = fq.label_of(*v).and_then(|l| comp_of.get(&l)) {
                *mine.entry(*c).or_default() += 1;
            }
            let Some(p) = from else { continue };
            let split = mine.iter().any(|(c, n)| *n < total[*c]);
            if !split {
                out.push(fq.edge_between(*p, *v).unwrap());
            }
            let up = below.entry(*p).or_default();
            for (c, n) in mine {
                *up.entry(c).or_default() += n;
            }
        }
    }
    out.sort();
    out
}

fn first_removable(fp: &Forest, fq: &Forest) -> Option<EdgeId> {
    removable_edges(fp, fq).into_iter().next()
}

fn witnesses(fp: &Forest, fq: &Forest, e: EdgeId) -> Vec<LabelSet> {
    let split = fq.split_labels(e).expect("edge of fq");
    fp.component_label_sets()
        .into_iter()
        .filter(|s| !s.is_disjoint(&split.side1_labels))
        .collect()
}

fn apply(forests: &mut [Forest], p: usize, q: usize, e: EdgeId, trace: &mut ReductionTrace) {
    let w = witnesses(&forests[p], &forests[q], e);
    forests[q] = forests[q].remove_edge(e).expect("edge of fq");
    trace.removals.push(Removal {
        q,
        edge: e,
        p,
        witnesses: w,
    });
}

/// Applies the rule between two forests until neither admits a removal.
/// Forest indices in the trace are 0 for `fp` and 1 for `fq`.
pub fn reduce_pair(fp: &Forest, fq: &Forest) -> (Forest, Forest, ReductionTrace) {
    let mut fs = [fp.clone(), fq.clone()];
    let mut trace = ReductionTrace::default();
    loop {
        if let Some(e) = first_removable(&fs[0], &fs[1]) {
            apply(&mut fs, 0, 1, e, &mut trace);
        } else if let Some(e) = first_removable(&fs[1], &fs[0]) {
            apply(&mut fs, 1, 0, e, &mut trace);
        } else {
            break;
        }
    }
    let [a, b] = fs;
    (a, b, trace)
}

/// Applies the rule over all ordered forest pairs until none applies.
pub fn reduce_instance(inst: &Instance) -> (Instance, ReductionTrace) {
    let mut fs: Vec<Forest> = inst.forests().to_vec();
    let mut trace = ReductionTrace::default();
    'scan: loop {
        for p in 0..fs.len() {
            for q in 0..fs.len() {
                if p == q {
                    continue;
                }
                if let Some(e) = first_removable(&fs[p], &fs[q]) {
                    apply(&mut fs, p, q, e, &mut trace);
                    continue 'scan;
                }
            }
        }
        break;
    }
    let mut out = Instance::new(fs).expect("reduction keeps labels");
    if let Some(k) = inst.k() {
        out = out.with_k(k).expect("k already valid");
    }
    (out, trace)
}

/// True when no ordered pair admits a removal.
pub fn is_strongly_reducible(forests: &[Forest]) -> bool {
    forests.iter().enumerate().all(|(p, fp)| {
        forests
            .iter()
            .enumerate()
            .all(|(q, fq)| p == q || first_removable(fp, fq).is_none())
    })
}

/// Labels of `f` grouped by component, for trace display.
pub fn component_labels(f: &Forest) -> Vec<Vec<LabelId>> {
    f.component_label_sets().iter().map(|s| s.iter().collect()).collect()
}
