//! Rooted and unrooted X-forests.
//!
//! A [`Forest`] stores vertices and edges in arenas with tombstones, so vertex
//! and edge ids stay stable across every operation derived from one value.
//! Rooted forests store edges as `[parent, child]`; unrooted forests ignore the
//! orientation. All public operations return new, irreducible values.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::label::{LabelId, LabelSet, LabelTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl VertexId {
    #[inline]
    fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

pub type EdgeSet = BTreeSet<EdgeId>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("label {0} appears more than once")]
    DuplicateLabel(LabelId),
    #[error("label {0} is missing from the forest")]
    MissingLabel(LabelId),
    #[error("label {0} is not in the label table")]
    UnknownLabel(LabelId),
    #[error("vertex has more than one parent")]
    MultipleParents,
    #[error("edge list contains a cycle")]
    Cycle,
    #[error("root label must be a parentless leaf")]
    BadRoot,
    #[error("forests disagree on rootedness")]
    RootednessMismatch,
    #[error("forests are over different label sets")]
    LabelMismatch,
    #[error("labels do not form a maximal sibling set")]
    NotASiblingSet,
}

#[derive(Clone, Debug)]
struct Vertex {
    label: Option<LabelId>,
    adj: Vec<EdgeId>,
    alive: bool,
}

/// The two label sides of an edge.
///
/// `side1_labels` is the pendant side for a leaf edge, otherwise the side
/// below the edge (rooted) or the side of its second endpoint (unrooted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub edge: EdgeId,
    pub side1_labels: LabelSet,
    pub side2_labels: LabelSet,
}

/// A maximal sibling set and its hub.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiblingSet {
    /// Member labels ordered by original-label key.
    pub labels: Vec<LabelId>,
    /// Common parent (rooted) or common neighbour (unrooted); absent for an
    /// unrooted single-edge tree.
    pub hub: Option<VertexId>,
    /// Edges at the hub that do not lead to a member and are not the hub's
    /// parent edge.
    pub surplus_edges: Vec<EdgeId>,
}

/// Canonical structural form, used for equality up to vertex renaming.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Canonical {
    rooted: bool,
    tokens: Vec<u32>,
}

const OPEN: u32 = 0;
const CLOSE: u32 = 1;
const SEP: u32 = 2;
const LABEL_BASE: u32 = 3;

#[derive(Clone)]
pub struct Forest {
    rooted: bool,
    labels: Arc<LabelTable>,
    verts: Vec<Vertex>,
    edges: Vec<Option<[VertexId; 2]>>,
    leaf_of: BTreeMap<LabelId, VertexId>,
}

/// Incremental construction of a forest from vertices and oriented edges.
pub struct ForestBuilder {
    forest: Forest,
}

impl ForestBuilder {
    pub fn new(labels: Arc<LabelTable>, rooted: bool) -> Self {
        ForestBuilder {
            forest: Forest {
                rooted,
                labels,
                verts: Vec::new(),
                edges: Vec::new(),
                leaf_of: BTreeMap::new(),
            },
        }
    }

    pub fn add_vertex(&mut self, label: Option<LabelId>) -> VertexId {
        self.forest.push_vertex(label)
    }

    /// Adds an edge; in rooted forests `parent` must be the endpoint closer
    /// to the root.
    pub fn add_edge(&mut self, parent: VertexId, child: VertexId) -> EdgeId {
        self.forest.push_edge(parent, child)
    }

    /// Validates the structure and applies forced contraction. Every base
    /// label of the table must occur exactly once.
    pub fn build(self) -> Result<Forest, ForestError> {
        let mut f = self.forest;
        let mut seen = BTreeMap::new();
        for (i, v) in f.verts.iter().enumerate() {
            if let Some(l) = v.label {
                if l.index() >= f.labels.len() {
                    return Err(ForestError::UnknownLabel(l));
                }
                if seen.insert(l, VertexId(i as u32)).is_some() {
                    return Err(ForestError::DuplicateLabel(l));
                }
            }
        }
        if f.labels.is_rooted() != f.rooted {
            return Err(ForestError::RootednessMismatch);
        }
        for l in f.labels.base_ids() {
            if !seen.contains_key(&l) {
                return Err(ForestError::MissingLabel(l));
            }
        }
        f.leaf_of = seen;
        if f.rooted {
            for v in 0..f.verts.len() {
                let parents = f.verts[v]
                    .adj
                    .iter()
                    .filter(|e| f.ends(**e)[1] == VertexId(v as u32))
                    .count();
                if parents > 1 {
                    return Err(ForestError::MultipleParents);
                }
            }
            if let Some(r) = f.labels.root() {
                let rv = f.leaf_of[&r];
                if f.parent_edge(rv).is_some() || f.verts[rv.index()].adj.len() > 1 {
                    return Err(ForestError::BadRoot);
                }
            }
        }
        // a forest has |V| - |E| components; anything else means a cycle
        let comps = f.components().len();
        let nv = f.verts.len();
        let ne = f.edges.len();
        if nv - comps != ne {
            return Err(ForestError::Cycle);
        }
        f.contract_in_place();
        Ok(f)
    }
}

impl Forest {
    // ----- raw arena manipulation -------------------------------------------------

    fn push_vertex(&mut self, label: Option<LabelId>) -> VertexId {
        let id = VertexId(self.verts.len() as u32);
        self.verts.push(Vertex {
            label,
            adj: Vec::new(),
            alive: true,
        });
        if let Some(l) = label {
            self.leaf_of.insert(l, id);
        }
        id
    }

    fn push_edge(&mut self, parent: VertexId, child: VertexId) -> EdgeId {
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(Some([parent, child]));
        self.verts[parent.index()].adj.push(id);
        self.verts[child.index()].adj.push(id);
        id
    }

    fn drop_edge(&mut self, e: EdgeId) {
        if let Some([a, b]) = self.edges[e.index()].take() {
            self.verts[a.index()].adj.retain(|x| *x != e);
            self.verts[b.index()].adj.retain(|x| *x != e);
        }
    }

    fn kill_vertex(&mut self, v: VertexId) {
        let adj = std::mem::take(&mut self.verts[v.index()].adj);
        for e in adj {
            self.drop_edge(e);
        }
        let vert = &mut self.verts[v.index()];
        vert.alive = false;
        if let Some(l) = vert.label.take() {
            self.leaf_of.remove(&l);
        }
    }

    fn ends(&self, e: EdgeId) -> [VertexId; 2] {
        self.edges[e.index()].expect("dead edge")
    }

    /// Replaces an unlabeled degree-2 vertex by a single edge that keeps the
    /// smaller of the two edge ids.
    fn splice(&mut self, v: VertexId) {
        let (e1, e2) = {
            let adj = &self.verts[v.index()].adj;
            (adj[0], adj[1])
        };
        let x = self.other_end(e1, v);
        let y = self.other_end(e2, v);
        let (keep, lose) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let ends = if self.rooted {
            // one of x, y is the parent of v
            if self.ends(e1)[1] == v {
                [x, y]
            } else {
                [y, x]
            }
        } else {
            [x, y]
        };
        self.edges[lose.index()] = None;
        self.edges[keep.index()] = Some(ends);
        for (w, old) in [(x, e1), (y, e2)] {
            for slot in self.verts[w.index()].adj.iter_mut() {
                if *slot == old {
                    *slot = keep;
                }
            }
        }
        let vert = &mut self.verts[v.index()];
        vert.adj.clear();
        vert.alive = false;
    }

    /// Forced contraction in place.
    fn contract_in_place(&mut self) {
        let mut stack: Vec<VertexId> = (0..self.verts.len() as u32).map(VertexId).collect();
        while let Some(v) = stack.pop() {
            let vert = &self.verts[v.index()];
            if !vert.alive || vert.label.is_some() {
                continue;
            }
            match vert.adj.len() {
                0 => self.kill_vertex(v),
                1 => {
                    let e = vert.adj[0];
                    let u = self.other_end(e, v);
                    self.kill_vertex(v);
                    stack.push(u);
                }
                2 => {
                    if self.rooted && self.parent_edge(v).is_none() {
                        continue;
                    }
                    self.splice(v);
                }
                _ => {}
            }
        }
    }

    // ----- accessors --------------------------------------------------------------

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn labels(&self) -> &Arc<LabelTable> {
        &self.labels
    }

    /// Label ids carried by this forest, ascending.
    pub fn label_ids(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.leaf_of.keys().copied()
    }

    pub fn label_count(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn vertex_of(&self, label: LabelId) -> Option<VertexId> {
        self.leaf_of.get(&label).copied()
    }

    pub fn label_of(&self, v: VertexId) -> Option<LabelId> {
        self.verts.get(v.index()).and_then(|x| x.label)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.verts
            .iter()
            .enumerate()
            .filter(|(_, v)| v.alive)
            .map(|(i, _)| VertexId(i as u32))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_some())
            .map(|(i, _)| EdgeId(i as u32))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_some()).count()
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.get(e.index()).is_some_and(|x| x.is_some())
    }

    /// Endpoints of `e`; `[parent, child]` in rooted forests.
    pub fn endpoints(&self, e: EdgeId) -> Option<[VertexId; 2]> {
        self.edges.get(e.index()).copied().flatten()
    }

    pub fn other_end(&self, e: EdgeId, v: VertexId) -> VertexId {
        let [a, b] = self.ends(e);
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.verts[v.index()].adj.len()
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.verts[v.index()].adj
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.verts[v.index()]
            .adj
            .iter()
            .map(move |e| self.other_end(*e, v))
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        if !self.rooted {
            return None;
        }
        self.verts[v.index()]
            .adj
            .iter()
            .copied()
            .find(|e| self.ends(*e)[1] == v)
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent_edge(v).map(|e| self.ends(e)[0])
    }

    /// Child edges of `v` (rooted forests only).
    pub fn child_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let rooted = self.rooted;
        self.verts[v.index()]
            .adj
            .iter()
            .copied()
            .filter(move |e| rooted && self.ends(*e)[0] == v)
    }

    pub fn children(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.child_edges(v).map(move |e| self.ends(e)[1])
    }

    /// Edge incident to the leaf carrying `label`, if any.
    pub fn leaf_edge(&self, label: LabelId) -> Option<EdgeId> {
        let v = self.vertex_of(label)?;
        self.verts[v.index()].adj.first().copied()
    }

    pub fn has_grouped_labels(&self) -> bool {
        self.leaf_of.keys().any(|l| self.labels.get(*l).is_grouped())
    }

    /// Replaces the label table by an extension of it.
    pub fn with_label_table(mut self, table: Arc<LabelTable>) -> Self {
        debug_assert!(self.labels.is_prefix_of(&table));
        self.labels = table;
        self
    }

    // ----- components -------------------------------------------------------------

    /// Connected components as vertex lists, ordered by first vertex id.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.verts.len()];
        let mut out = Vec::new();
        for v in self.vertices() {
            if seen[v.index()] {
                continue;
            }
            seen[v.index()] = true;
            let mut comp = vec![v];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for w in self.neighbors(u) {
                    if !seen[w.index()] {
                        seen[w.index()] = true;
                        comp.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Number of connected components.
    pub fn order(&self) -> usize {
        let nv = self.verts.iter().filter(|v| v.alive).count();
        nv - self.edge_count()
    }

    /// Label sets of the components, ordered by smallest key.
    pub fn component_label_sets(&self) -> Vec<LabelSet> {
        let mut sets: Vec<(u32, LabelSet)> = self
            .components()
            .into_iter()
            .map(|c| {
                let set: LabelSet = c.iter().filter_map(|v| self.label_of(*v)).collect();
                let key = set.iter().map(|l| self.labels.key(l)).min().unwrap_or(u32::MAX);
                (key, set)
            })
            .collect();
        sets.sort_by_key(|(k, _)| *k);
        sets.into_iter().map(|(_, s)| s).collect()
    }

    /// Map from each label to the index of its component.
    pub fn component_index_of_labels(&self) -> HashMap<LabelId, usize> {
        let mut out = HashMap::with_capacity(self.leaf_of.len());
        for (i, comp) in self.components().into_iter().enumerate() {
            for v in comp {
                if let Some(l) = self.label_of(v) {
                    out.insert(l, i);
                }
            }
        }
        out
    }

    /// Designated root of the component containing `v` (rooted forests).
    pub fn root_of(&self, mut v: VertexId) -> VertexId {
        while let Some(p) = self.parent(v) {
            v = p;
        }
        v
    }

    pub fn same_component(&self, a: LabelId, b: LabelId) -> bool {
        let (Some(va), Some(vb)) = (self.vertex_of(a), self.vertex_of(b)) else {
            return false;
        };
        if self.rooted {
            return self.root_of(va) == self.root_of(vb);
        }
        self.path(va, vb).is_some()
    }

    // ----- operations -------------------------------------------------------------

    /// Forced contraction: suppresses unlabeled degree-2 vertices (except
    /// rooted component roots) and drops unlabeled debris.
    pub fn force_contract(&self) -> Forest {
        let mut f = self.clone();
        f.contract_in_place();
        f
    }

    /// `F \ E` followed by forced contraction.
    pub fn remove_edges<'a, I>(&self, edges: I) -> Result<Forest, ForestError>
    where
        I: IntoIterator<Item = &'a EdgeId>,
    {
        let mut f = self.clone();
        for e in edges {
            if !self.has_edge(*e) {
                return Err(ForestError::UnknownEdge(*e));
            }
            f.drop_edge(*e);
        }
        f.contract_in_place();
        Ok(f)
    }

    pub fn remove_edge(&self, e: EdgeId) -> Result<Forest, ForestError> {
        self.remove_edges(std::iter::once(&e))
    }

    /// Labels reachable from `start` without crossing `blocked`.
    fn labels_reachable(&self, start: VertexId, blocked: EdgeId) -> LabelSet {
        let mut out = LabelSet::new();
        let mut seen = vec![false; self.verts.len()];
        let mut stack = vec![start];
        seen[start.index()] = true;
        while let Some(u) = stack.pop() {
            if let Some(l) = self.label_of(u) {
                out.insert(l);
            }
            for &e in &self.verts[u.index()].adj {
                if e == blocked {
                    continue;
                }
                let w = self.other_end(e, u);
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    stack.push(w);
                }
            }
        }
        out
    }

    pub fn split_labels(&self, e: EdgeId) -> Result<EdgeSplit, ForestError> {
        let [a, b] = self.endpoints(e).ok_or(ForestError::UnknownEdge(e))?;
        let a_leaf = self.label_of(a).is_some();
        let b_leaf = self.label_of(b).is_some();
        let first = match (a_leaf, b_leaf) {
            (true, false) => a,
            (false, true) => b,
            (true, true) => {
                if self.labels.key(self.label_of(a).unwrap()) <= self.labels.key(self.label_of(b).unwrap()) {
                    a
                } else {
                    b
                }
            }
            (false, false) => b,
        };
        let second = if first == a { b } else { a };
        Ok(EdgeSplit {
            edge: e,
            side1_labels: self.labels_reachable(first, e),
            side2_labels: self.labels_reachable(second, e),
        })
    }

    /// Vertex path from `a` to `b`, inclusive, if they are connected.
    pub fn path(&self, a: VertexId, b: VertexId) -> Option<Vec<VertexId>> {
        if a == b {
            return Some(vec![a]);
        }
        if self.rooted {
            let mut up_a = vec![a];
            while let Some(p) = self.parent(*up_a.last().unwrap()) {
                up_a.push(p);
            }
            let mut up_b = vec![b];
            loop {
                let cur = *up_b.last().unwrap();
                if let Some(pos) = up_a.iter().position(|x| *x == cur) {
                    up_a.truncate(pos + 1);
                    up_b.pop();
                    up_a.extend(up_b.into_iter().rev());
                    return Some(up_a);
                }
                {
                    let p = self.parent(cur)?;
                    up_b.push(p)
                }
            }
        }
        let mut prev: HashMap<VertexId, VertexId> = HashMap::new();
        let mut queue = VecDeque::from([a]);
        prev.insert(a, a);
        while let Some(u) = queue.pop_front() {
            if u == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for w in self.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(w) {
                    slot.insert(u);
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Lowest common ancestor of two connected vertices of a rooted forest.
    pub fn lca(&self, a: VertexId, b: VertexId) -> Option<VertexId> {
        if !self.rooted {
            return None;
        }
        let path = self.path(a, b)?;
        // the LCA is the path vertex with no parent on the path
        path.iter().copied().find(|v| match self.parent(*v) {
            None => true,
            Some(p) => !path.contains(&p),
        })
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.verts[a.index()]
            .adj
            .iter()
            .copied()
            .find(|e| self.other_end(*e, a) == b)
    }

    /// Whether two labels are siblings: same parent (rooted), or adjacent or
    /// sharing a neighbour (unrooted).
    pub fn are_siblings(&self, a: LabelId, b: LabelId) -> bool {
        let (Some(va), Some(vb)) = (self.vertex_of(a), self.vertex_of(b)) else {
            return false;
        };
        if self.rooted {
            return matches!((self.parent(va), self.parent(vb)), (Some(x), Some(y)) if x == y);
        }
        let na: Vec<VertexId> = self.neighbors(va).collect();
        if na.contains(&vb) {
            return true;
        }
        self.neighbors(vb).any(|w| na.contains(&w))
    }

    /// Common parent (rooted) or common neighbour (unrooted) of all `labels`.
    pub fn common_hub(&self, labels: &[LabelId]) -> Option<VertexId> {
        let mut hub = None;
        for l in labels {
            let v = self.vertex_of(*l)?;
            let h = if self.rooted {
                self.parent(v)?
            } else {
                if self.degree(v) != 1 {
                    return None;
                }
                self.neighbors(v).next()?
            };
            if self.label_of(h).is_some() {
                return None;
            }
            match hub {
                None => hub = Some(h),
                Some(x) if x == h => {}
                Some(_) => return None,
            }
        }
        hub
    }

    fn sibling_set_at(&self, labels: Vec<LabelId>, hub: Option<VertexId>) -> SiblingSet {
        let surplus_edges = match hub {
            None => Vec::new(),
            Some(h) => {
                let parent = self.parent_edge(h);
                let mut out: Vec<EdgeId> = self.verts[h.index()]
                    .adj
                    .iter()
                    .copied()
                    .filter(|e| Some(*e) != parent)
                    .filter(|e| {
                        let w = self.other_end(*e, h);
                        !self.label_of(w).is_some_and(|l| labels.contains(&l))
                    })
                    .collect();
                out.sort();
                out
            }
        };
        SiblingSet {
            labels,
            hub,
            surplus_edges,
        }
    }

    /// Describes how `labels` sit in this forest: as a maximal sibling set,
    /// as siblings under a larger hub, or not as siblings at all.
    pub fn sibling_context(&self, labels: &[LabelId]) -> SiblingContext {
        let labels = self.sort_by_key(labels.to_vec());
        if !self.rooted && labels.len() == 2 {
            let (va, vb) = (self.vertex_of(labels[0]), self.vertex_of(labels[1]));
            if let (Some(va), Some(vb)) = (va, vb) {
                if self.degree(va) == 1 && self.degree(vb) == 1 && self.edge_between(va, vb).is_some() {
                    return SiblingContext::Mss(self.sibling_set_at(labels, None));
                }
            }
        }
        let Some(hub) = self.common_hub(&labels) else {
            return SiblingContext::NotSiblings;
        };
        let set = self.sibling_set_at(labels, Some(hub));
        let maximal = if self.rooted {
            set.surplus_edges.is_empty()
        } else {
            self.degree(hub) <= set.labels.len() + 1
        };
        if maximal {
            SiblingContext::Mss(set)
        } else {
            SiblingContext::Siblings(set)
        }
    }

    pub(crate) fn sort_by_key(&self, mut labels: Vec<LabelId>) -> Vec<LabelId> {
        labels.sort_by_key(|l| (self.labels.key(*l), *l));
        labels
    }

    /// Finds a maximal sibling set, choosing the one with the smallest
    /// original-label key.
    pub fn find_mss(&self) -> Option<SiblingSet> {
        let mut best: Option<(u32, SiblingSet)> = None;
        let offer = |set: SiblingSet, best: &mut Option<(u32, SiblingSet)>| {
            let key = self.labels.key(set.labels[0]);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                *best = Some((key, set));
            }
        };
        for v in self.vertices() {
            if self.label_of(v).is_some() {
                if !self.rooted && self.degree(v) == 1 {
                    let w = self.neighbors(v).next().unwrap();
                    if v < w && self.label_of(w).is_some() && self.degree(w) == 1 {
                        let labels = self.sort_by_key(vec![self.label_of(v).unwrap(), self.label_of(w).unwrap()]);
                        offer(self.sibling_set_at(labels, None), &mut best);
                    }
                }
                continue;
            }
            let leaves: Vec<LabelId> = if self.rooted {
                let kids: Vec<VertexId> = self.children(v).collect();
                if kids.iter().any(|k| self.label_of(*k).is_none()) {
                    continue;
                }
                kids.iter().filter_map(|k| self.label_of(*k)).collect()
            } else {
                let leaves: Vec<LabelId> = self.neighbors(v).filter_map(|w| self.label_of(w)).collect();
                if self.degree(v) > leaves.len() + 1 {
                    continue;
                }
                leaves
            };
            if leaves.len() < 2 {
                continue;
            }
            let labels = self.sort_by_key(leaves);
            offer(self.sibling_set_at(labels, Some(v)), &mut best);
        }
        best.map(|(_, s)| s)
    }

    /// Collapses a maximal sibling set into one leaf carrying a grouped label.
    pub fn group_labels(&self, set: &SiblingSet) -> Result<Forest, ForestError> {
        let members = self.sort_by_key(set.labels.clone());
        let (table, id) = self.labels.intern_group(&members);
        self.clone().with_label_table(table).group_as(&members, id)
    }

    /// Groups `members` under the already-interned label `id`.
    pub(crate) fn group_as(&self, members: &[LabelId], id: LabelId) -> Result<Forest, ForestError> {
        let set = match self.sibling_context(members) {
            SiblingContext::Mss(s) => s,
            _ => return Err(ForestError::NotASiblingSet),
        };
        let mut f = self.clone();
        match set.hub {
            Some(hub) => {
                for l in &set.labels {
                    let v = f.leaf_of[l];
                    f.kill_vertex(v);
                }
                f.verts[hub.index()].label = Some(id);
                f.leaf_of.insert(id, hub);
            }
            None => {
                let keep = f.leaf_of[&set.labels[0]];
                let gone = f.leaf_of[&set.labels[1]];
                f.kill_vertex(gone);
                f.leaf_of.remove(&set.labels[0]);
                f.verts[keep.index()].label = Some(id);
                f.leaf_of.insert(id, keep);
            }
        }
        Ok(f)
    }

    /// Replaces every grouped label by the structure it stands for.
    pub fn expand_labels(&self) -> Forest {
        if !self.has_grouped_labels() {
            return self.clone();
        }
        let mut f = self.clone();
        let mut work: Vec<LabelId> = f
            .leaf_of
            .keys()
            .copied()
            .filter(|l| f.labels.get(*l).is_grouped())
            .collect();
        while let Some(g) = work.pop() {
            let v = f.leaf_of.remove(&g).unwrap();
            f.verts[v.index()].label = None;
            let members = f.labels.get(g).grouped.clone();
            for m in members {
                let w = f.push_vertex(Some(m));
                f.push_edge(v, w);
                if f.labels.get(m).is_grouped() {
                    work.push(m);
                }
            }
        }
        f.contract_in_place();
        f
    }

    // ----- structure --------------------------------------------------------------

    /// Vertex from which a component is canonically traversed: the designated
    /// root (rooted) or the leaf with the smallest key (unrooted).
    fn anchor(&self, comp: &[VertexId]) -> VertexId {
        if self.rooted {
            return self.root_of(comp[0]);
        }
        comp.iter()
            .copied()
            .filter(|v| self.label_of(*v).is_some())
            .min_by_key(|v| self.labels.key(self.label_of(*v).unwrap()))
            .unwrap_or(comp[0])
    }

    /// Preorder traversal from `start`, yielding `(vertex, parent in traversal)`.
    pub(crate) fn preorder(&self, start: VertexId) -> Vec<(VertexId, Option<VertexId>)> {
        let mut out = Vec::new();
        let mut stack = vec![(start, None)];
        while let Some((v, from)) = stack.pop() {
            out.push((v, from));
            for w in self.neighbors(v) {
                if Some(w) != from {
                    stack.push((w, Some(v)));
                }
            }
        }
        out
    }

    /// Components as `(key, anchor)` pairs ordered by key.
    pub(crate) fn anchored_components(&self) -> Vec<(u32, VertexId)> {
        let mut out: Vec<(u32, VertexId)> = self
            .components()
            .iter()
            .map(|c| {
                let key = c
                    .iter()
                    .filter_map(|v| self.label_of(*v))
                    .map(|l| self.labels.key(l))
                    .min()
                    .unwrap_or(u32::MAX);
                (key, self.anchor(c))
            })
            .collect();
        out.sort();
        out
    }

    /// Minimum key below each vertex when traversing from `start`, plus the
    /// children of each vertex in key order.
    pub(crate) fn ordered_children(&self, start: VertexId) -> HashMap<VertexId, Vec<VertexId>> {
        let order = self.preorder(start);
        let mut min_key: HashMap<VertexId, u32> = HashMap::with_capacity(order.len());
        let mut kids: HashMap<VertexId, Vec<VertexId>> = HashMap::with_capacity(order.len());
        for (v, from) in order.iter().rev() {
            let own = self.label_of(*v).map(|l| self.labels.key(l)).unwrap_or(u32::MAX);
            let below = kids
                .get(v)
                .map(|ks| ks.iter().map(|k| min_key[k]).min().unwrap_or(u32::MAX))
                .unwrap_or(u32::MAX);
            min_key.insert(*v, own.min(below));
            if let Some(p) = from {
                kids.entry(*p).or_default().push(*v);
            }
        }
        for ks in kids.values_mut() {
            ks.sort_by_key(|k| min_key[k]);
        }
        kids
    }

    pub fn canonical(&self) -> Canonical {
        let mut tokens = Vec::new();
        for (_, anchor) in self.anchored_components() {
            let kids = self.ordered_children(anchor);
            self.encode(anchor, &kids, &mut tokens);
            tokens.push(SEP);
        }
        Canonical {
            rooted: self.rooted,
            tokens,
        }
    }

    fn encode(&self, v: VertexId, kids: &HashMap<VertexId, Vec<VertexId>>, out: &mut Vec<u32>) {
        if let Some(l) = self.label_of(v) {
            out.push(LABEL_BASE + l.0);
        }
        if let Some(ks) = kids.get(&v) {
            out.push(OPEN);
            for k in ks {
                self.encode(*k, kids, out);
            }
            out.push(CLOSE);
        }
    }

    /// Checks the irreducibility and labelling invariants.
    pub fn is_irreducible(&self) -> bool {
        self.vertices().all(|v| {
            let deg = self.degree(v);
            match self.label_of(v) {
                Some(_) => deg <= 1,
                None => {
                    if self.rooted && self.parent_edge(v).is_none() {
                        deg >= 2
                    } else {
                        deg >= 3
                    }
                }
            }
        }) && self.leaf_of.iter().all(|(l, v)| self.label_of(*v) == Some(*l))
    }

    /// Label sets of all original labels after expansion.
    pub fn original_label_set(&self) -> LabelSet {
        self.leaf_of
            .keys()
            .flat_map(|l| self.labels.originals(*l))
            .collect()
    }

    /// Edges of the minimal subtrees spanning each block, or `None` when a
    /// block spans several components or two blocks share an edge.
    pub fn steiner_edges(&self, blocks: &[LabelSet]) -> Option<EdgeSet> {
        let mut block_of: HashMap<LabelId, usize> = HashMap::new();
        for (i, b) in blocks.iter().enumerate() {
            for l in b.iter() {
                block_of.insert(l, i);
            }
        }
        let totals: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        let mut used = EdgeSet::new();
        let mut seen_blocks = vec![None; blocks.len()];
        for (ci, comp) in self.components().iter().enumerate() {
            let start = comp[0];
            let order = self.preorder(start);
            let mut counts: HashMap<VertexId, HashMap<usize, usize>> = HashMap::new();
            for (v, from) in order.iter().rev() {
                let mut mine = counts.remove(v).unwrap_or_default();
                if let Some(b) = self.label_of(*v).and_then(|l| block_of.get(&l)) {
                    *mine.entry(*b).or_default() += 1;
                    match seen_blocks[*b] {
                        None => seen_blocks[*b] = Some(ci),
                        Some(c) if c != ci => return None,
                        _ => {}
                    }
                }
                if let Some(p) = from {
                    let e = self.edge_between(*p, *v).unwrap();
                    let mut inside = 0;
                    for (b, c) in &mine {
                        if *c > 0 && *c < totals[*b] {
                            inside += 1;
                        }
                    }
                    if inside > 1 {
                        return None;
                    }
                    if inside == 1 {
                        used.insert(e);
                    }
                    let parent_counts = counts.entry(*p).or_default();
                    for (b, c) in mine {
                        *parent_counts.entry(b).or_default() += c;
                    }
                }
            }
        }
        Some(used)
    }

    /// Edge set whose removal turns this forest into a forest with the given
    /// component label sets, if the blocks are separable.
    pub fn witness_for_partition(&self, blocks: &[LabelSet]) -> Option<EdgeSet> {
        let keep = self.steiner_edges(blocks)?;
        Some(self.edge_ids().filter(|e| !keep.contains(e)).collect())
    }

    /// Whether `self` is, up to forced contraction, a subforest of `host`.
    pub fn is_subforest_of(&self, host: &Forest) -> Result<bool, ForestError> {
        Ok(self.subforest_witness(host)?.is_some())
    }

    /// The edge set of `host` whose removal yields `self`, if one exists.
    pub fn subforest_witness(&self, host: &Forest) -> Result<Option<EdgeSet>, ForestError> {
        if self.rooted != host.rooted {
            return Err(ForestError::RootednessMismatch);
        }
        let sub = self.expand_labels();
        let host = host.expand_labels();
        if !sub.labels.same_base(&host.labels) || sub.original_label_set() != host.original_label_set() {
            return Err(ForestError::LabelMismatch);
        }
        let blocks = sub.component_label_sets();
        let Some(cut) = host.witness_for_partition(&blocks) else {
            return Ok(None);
        };
        let reduced = host.remove_edges(&cut)?;
        Ok((reduced.canonical() == sub.canonical()).then_some(cut))
    }

    /// A forest over the same labels in which every label is isolated.
    pub fn singletons(&self) -> Forest {
        let all: Vec<EdgeId> = self.edge_ids().collect();
        self.remove_edges(&all).expect("own edges")
    }

    // ----- in-place edits used by the generator ------------------------------------

    /// Merges the endpoints of an edge whose endpoints are both unlabeled.
    /// The first endpoint (the parent, when rooted) survives.
    pub(crate) fn contract_edge(&mut self, e: EdgeId) {
        let [u, v] = self.ends(e);
        self.drop_edge(e);
        let moved = std::mem::take(&mut self.verts[v.index()].adj);
        for m in moved {
            let slot = self.edges[m.index()].as_mut().unwrap();
            for end in slot.iter_mut() {
                if *end == v {
                    *end = u;
                }
            }
            self.verts[u.index()].adj.push(m);
        }
        self.verts[v.index()].alive = false;
    }

    /// Deletes an edge without contracting.
    pub(crate) fn detach(&mut self, e: EdgeId) {
        self.drop_edge(e);
    }

    /// Subdivides `e` with a new vertex and hangs `child` below it.
    pub(crate) fn regraft(&mut self, e: EdgeId, child: VertexId) {
        let [p, c] = self.ends(e);
        self.drop_edge(e);
        let w = self.push_vertex(None);
        self.push_edge(p, w);
        self.push_edge(w, c);
        self.push_edge(w, child);
    }

    pub(crate) fn contract(&mut self) {
        self.contract_in_place();
    }
}

/// Brings two forests onto the longer of their label tables.
pub fn unify_tables(a: Forest, b: Forest) -> Result<(Forest, Forest), ForestError> {
    if Arc::ptr_eq(a.labels(), b.labels()) {
        return Ok((a, b));
    }
    if a.labels().is_prefix_of(b.labels()) {
        let t = Arc::clone(b.labels());
        return Ok((a.with_label_table(t), b));
    }
    if b.labels().is_prefix_of(a.labels()) {
        let t = Arc::clone(a.labels());
        return Ok((a, b.with_label_table(t)));
    }
    Err(ForestError::LabelMismatch)
}

/// Groups the same label set in both forests under one shared grouped label.
pub fn group_pair(a: &Forest, b: &Forest, members: &[LabelId]) -> Result<(Forest, Forest), ForestError> {
    let (a, b) = unify_tables(a.clone(), b.clone())?;
    let members = a.sort_by_key(members.to_vec());
    let (table, id) = a.labels().intern_group(&members);
    let a = a.with_label_table(Arc::clone(&table)).group_as(&members, id)?;
    let b = b.with_label_table(table).group_as(&members, id)?;
    Ok((a, b))
}

/// How a label set sits in a forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiblingContext {
    Mss(SiblingSet),
    Siblings(SiblingSet),
    NotSiblings,
}

impl PartialEq for Forest {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for Forest {}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Forest[{}]", crate::newick::serialize(self).replace('\n', " "))
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::newick::serialize(self))
    }
}

/// `is_subforest(sub, host)`.
pub fn is_subforest(sub: &Forest, host: &Forest) -> Result<bool, ForestError> {
    sub.is_subforest_of(host)
}
