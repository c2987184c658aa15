//! Label tables and label sets.
//!
//! Every forest of an instance shares one [`LabelTable`]. Base labels are the
//! taxa read from input; grouped labels are appended when the solvers collapse
//! a maximal sibling set into a single leaf. A grouped label remembers its
//! member ids so it can be expanded back into the original structure.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// Reserved name of the root leaf in rooted instances.
pub const ROOT_NAME: &str = "ρ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub id: LabelId,
    pub name: String,
    /// Constituent labels, non-empty only for grouped labels.
    pub grouped: Vec<LabelId>,
    /// Smallest base id reachable by expanding this label.
    key: u32,
}

impl Label {
    pub fn is_grouped(&self) -> bool {
        !self.grouped.is_empty()
    }

    /// Smallest original label id contained in this label.
    pub fn key(&self) -> u32 {
        self.key
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("duplicate label `{0}`")]
    Duplicate(String),
    #[error("label `{0}` is reserved in rooted mode")]
    ReservedRoot(String),
    #[error("label set is empty")]
    Empty,
}

#[derive(Clone, Debug)]
pub struct LabelTable {
    labels: Vec<Label>,
    by_name: HashMap<String, LabelId>,
    base_len: usize,
    rooted: bool,
}

impl LabelTable {
    /// Builds a table from taxon names. In rooted mode the root label is
    /// added with id 0; the remaining names get ids in natural order
    /// (numeric names compare as numbers).
    pub fn new<I, S>(names: I, rooted: bool) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(LabelError::Empty);
        }
        if rooted {
            if let Some(n) = names.iter().find(|n| n.as_str() == ROOT_NAME) {
                return Err(LabelError::ReservedRoot(n.clone()));
            }
        }
        names.sort_by(|a, b| natural_cmp(a, b));
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(LabelError::Duplicate(w[0].clone()));
            }
        }
        if rooted {
            names.insert(0, ROOT_NAME.to_string());
        }
        let mut table = LabelTable {
            labels: Vec::with_capacity(names.len()),
            by_name: HashMap::with_capacity(names.len()),
            base_len: names.len(),
            rooted,
        };
        for (i, name) in names.into_iter().enumerate() {
            let id = LabelId(i as u32);
            table.by_name.insert(name.clone(), id);
            table.labels.push(Label {
                id,
                name,
                grouped: Vec::new(),
                key: i as u32,
            });
        }
        Ok(table)
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    /// Id of the root label, present only in rooted tables.
    pub fn root(&self) -> Option<LabelId> {
        self.rooted.then_some(LabelId(0))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of original (non-grouped) labels.
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn base_ids(&self) -> impl Iterator<Item = LabelId> + '_ {
        (0..self.base_len as u32).map(LabelId)
    }

    pub fn get(&self, id: LabelId) -> &Label {
        &self.labels[id.index()]
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.labels[id.index()].name
    }

    pub fn key(&self, id: LabelId) -> u32 {
        self.labels[id.index()].key
    }

    pub fn id_of(&self, name: &str) -> Option<LabelId> {
        self.by_name.get(name).copied()
    }

    /// Recursively expanded base labels of `id`.
    pub fn originals(&self, id: LabelId) -> Vec<LabelId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(l) = stack.pop() {
            let label = self.get(l);
            if label.is_grouped() {
                stack.extend(label.grouped.iter().rev());
            } else {
                out.push(l);
            }
        }
        out.sort_unstable();
        out
    }

    /// True when `other` is this table or an extension of it.
    pub fn is_prefix_of(&self, other: &LabelTable) -> bool {
        self.labels.len() <= other.labels.len()
            && self.rooted == other.rooted
            && self.labels.iter().zip(&other.labels).all(|(a, b)| a == b)
    }

    /// True when both tables have the same original labels under the same ids.
    pub fn same_base(&self, other: &LabelTable) -> bool {
        self.base_len == other.base_len
            && self.rooted == other.rooted
            && self.labels[..self.base_len]
                .iter()
                .zip(&other.labels[..other.base_len])
                .all(|(a, b)| a.name == b.name)
    }

    /// Returns a table containing a grouped label with exactly these members,
    /// reusing an existing entry when one matches.
    pub fn intern_group(self: &Arc<Self>, members: &[LabelId]) -> (Arc<Self>, LabelId) {
        if let Some(l) = self.labels[self.base_len..]
            .iter()
            .find(|l| l.grouped.as_slice() == members)
        {
            return (Arc::clone(self), l.id);
        }
        let mut next = (**self).clone();
        let id = LabelId(next.labels.len() as u32);
        let name = members
            .iter()
            .map(|m| self.name(*m))
            .collect::<Vec<_>>()
            .join("+");
        let key = members.iter().map(|m| self.key(*m)).min().unwrap_or(u32::MAX);
        next.labels.push(Label {
            id,
            name,
            grouped: members.to_vec(),
            key,
        });
        (Arc::new(next), id)
    }
}

/// Natural ordering: purely numeric names compare numerically, everything
/// else lexicographically, numbers before words.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// A set of label ids backed by a growable bitset.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LabelSet(FixedBitSet);

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: LabelId) {
        if id.index() >= self.0.len() {
            self.0.grow(id.index() + 1);
        }
        self.0.insert(id.index());
    }

    pub fn contains(&self, id: LabelId) -> bool {
        self.0.contains(id.index())
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.ones().all(|i| other.0.contains(i))
    }

    pub fn is_disjoint(&self, other: &LabelSet) -> bool {
        self.0.ones().all(|i| !other.0.contains(i))
    }

    pub fn union_with(&mut self, other: &LabelSet) {
        if other.0.len() > self.0.len() {
            self.0.grow(other.0.len());
        }
        self.0.union_with(&other.0);
    }

    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.0.ones().map(|i| LabelId(i as u32))
    }

    pub fn min(&self) -> Option<LabelId> {
        self.iter().next()
    }
}

impl FromIterator<LabelId> for LabelSet {
    fn from_iter<T: IntoIterator<Item = LabelId>>(iter: T) -> Self {
        let mut s = LabelSet::new();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|l| l.0)).finish()
    }
}
