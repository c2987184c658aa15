//! Problem instances and certified agreement forests.

use std::sync::Arc;

use thiserror::Error;

use crate::forest::{EdgeSet, Forest, ForestError};
use crate::label::LabelTable;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance has no forests")]
    Empty,
    #[error("forests disagree on rootedness")]
    RootednessMismatch,
    #[error("forests do not share a label table")]
    LabelMismatch,
    #[error("expected a rooted instance")]
    NotRooted,
    #[error("expected an unrooted instance")]
    NotUnrooted,
    #[error("parameter k must be at least 1")]
    BadK,
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// An ordered list of forests over one label set.
#[derive(Clone, Debug)]
pub struct Instance {
    forests: Vec<Forest>,
    labels: Arc<LabelTable>,
    rooted: bool,
    k: Option<usize>,
}

impl Instance {
    pub fn new(forests: Vec<Forest>) -> Result<Self, InstanceError> {
        let first = forests.first().ok_or(InstanceError::Empty)?;
        let rooted = first.is_rooted();
        let mut labels = Arc::clone(first.labels());
        for f in &forests[1..] {
            if f.is_rooted() != rooted {
                return Err(InstanceError::RootednessMismatch);
            }
            if f.labels().is_prefix_of(&labels) {
                continue;
            }
            if labels.is_prefix_of(f.labels()) {
                labels = Arc::clone(f.labels());
                continue;
            }
            return Err(InstanceError::LabelMismatch);
        }
        let base = first.original_label_set();
        for f in &forests[1..] {
            if f.original_label_set() != base {
                return Err(InstanceError::LabelMismatch);
            }
        }
        let forests = forests
            .into_iter()
            .map(|f| f.with_label_table(Arc::clone(&labels)))
            .collect();
        Ok(Instance {
            forests,
            labels,
            rooted,
            k: None,
        })
    }

    pub fn with_k(mut self, k: usize) -> Result<Self, InstanceError> {
        if k == 0 {
            return Err(InstanceError::BadK);
        }
        self.k = Some(k);
        Ok(self)
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn forests(&self) -> &[Forest] {
        &self.forests
    }

    pub fn into_forests(self) -> Vec<Forest> {
        self.forests
    }

    pub fn labels(&self) -> &Arc<LabelTable> {
        &self.labels
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn len(&self) -> usize {
        self.forests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }

    /// Number of original taxa, not counting the root leaf.
    pub fn taxa(&self) -> usize {
        self.labels.base_len() - usize::from(self.rooted)
    }

    /// Same instance with the forests permuted.
    pub fn permuted(&self, order: &[usize]) -> Instance {
        Instance {
            forests: order.iter().map(|i| self.forests[*i].clone()).collect(),
            labels: Arc::clone(&self.labels),
            rooted: self.rooted,
            k: self.k,
        }
    }
}

/// A forest certified as a subforest of every input forest, with the edge set
/// cut from each input to obtain it.
#[derive(Clone, Debug)]
pub struct AgreementForest {
    pub forest: Forest,
    pub witnesses: Vec<EdgeSet>,
}

impl AgreementForest {
    /// Certifies `forest` against `inst`, or returns `None` if it is not an
    /// agreement forest.
    pub fn certify(forest: Forest, inst: &Instance) -> Result<Option<Self>, ForestError> {
        let forest = forest.expand_labels();
        let mut witnesses = Vec::with_capacity(inst.len());
        for f in inst.forests() {
            match forest.subforest_witness(f)? {
                Some(w) => witnesses.push(w),
                None => return Ok(None),
            }
        }
        Ok(Some(AgreementForest { forest, witnesses }))
    }

    pub fn order(&self) -> usize {
        self.forest.order()
    }

    /// Re-checks the certificate: each witness applied to its input forest
    /// must reproduce the forest.
    pub fn verify(&self, inst: &Instance) -> Result<bool, ForestError> {
        if self.witnesses.len() != inst.len() {
            return Ok(false);
        }
        let target = self.forest.expand_labels();
        for (f, w) in inst.forests().iter().zip(&self.witnesses) {
            if f.remove_edges(w)?.expand_labels() != target {
                return Ok(false);
            }
            if !target.is_subforest_of(f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
