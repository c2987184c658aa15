#![allow(dead_code)]

use maf_core::datagen::{contract_random_edges, internal_edges, random_binary_tree};
use maf_core::newick::{parse_tree, serialize};
use maf_core::{EdgeId, Forest};

/// Random multifurcating tree on `n` taxa.
pub fn tree(n: usize, seed: u64, rooted: bool) -> Forest {
    let t = random_binary_tree(n, seed).unwrap();
    let c = internal_edges(&t).len() / 2;
    let t = contract_random_edges(&t, (seed as usize) % (c + 1), seed).unwrap();
    if rooted {
        t
    } else {
        parse_tree(&serialize(&t), false).unwrap()
    }
}

/// Edges of `f` picked by the bits of `mask`.
pub fn pick(f: &Forest, mask: u64) -> Vec<EdgeId> {
    f.edge_ids()
        .enumerate()
        .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
        .map(|(_, e)| e)
        .collect()
}
