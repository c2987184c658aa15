//! Brute-force maximum agreement forests for small instances.
//!
//! Every agreement forest is `F_1 \ E` for an edge set `E` of `F_1` whose
//! removal splits a component with every edge. Trying such sets by
//! increasing size, the first one that yields a subforest of all inputs is
//! optimal.

use itertools::Itertools;
use thiserror::Error;

use crate::forest::{EdgeId, EdgeSet, ForestError};
use crate::instance::{AgreementForest, Instance};

pub const DEFAULT_MAX_EDGES: usize = 18;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("first forest has {edges} edges, more than the limit of {limit}")]
    TooLarge { edges: usize, limit: usize },
    #[error(transparent)]
    Forest(#[from] ForestError),
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub opt_order: usize,
    pub witness: AgreementForest,
    /// Edges of `F_1` removed to obtain the witness.
    pub cut: EdgeSet,
    pub subsets_examined: u64,
}

pub fn brute_force_maf(inst: &Instance, max_edges: usize) -> Result<OracleResult, OracleError> {
    let f1 = &inst.forests()[0];
    let edges: Vec<EdgeId> = f1.edge_ids().collect();
    if edges.len() > max_edges {
        return Err(OracleError::TooLarge {
            edges: edges.len(),
            limit: max_edges,
        });
    }
    let base = f1.order();
    let mut examined = 0u64;
    for size in 0..=edges.len() {
        for combo in edges.iter().copied().combinations(size) {
            examined += 1;
            let cand = f1.remove_edges(&combo)?;
            if cand.order() != base + size {
                continue;
            }
            let mut ok = true;
            for f in &inst.forests()[1..] {
                if !cand.is_subforest_of(f)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                let witness = AgreementForest::certify(cand, inst)?.expect("checked against every input");
                return Ok(OracleResult {
                    opt_order: base + size,
                    witness,
                    cut: combo.into_iter().collect(),
                    subsets_examined: examined,
                });
            }
        }
    }
    unreachable!("removing every edge always gives an agreement forest")
}
