//! Simulated instances: a random binary tree, made multifurcating by random
//! edge contractions, plus copies perturbed by rooted SPR moves.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forest::{EdgeId, Forest, ForestBuilder, VertexId};
use crate::instance::Instance;
use crate::label::LabelTable;
use crate::newick::{parse_instance, serialize};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least {min} leaves, got {got}")]
    TooFewLeaves { min: usize, got: usize },
    #[error("need at least 2 trees, got {0}")]
    TooFewTrees(usize),
    #[error("cannot contract {wanted} edges, only {available} internal edges")]
    TooManyContractions { wanted: usize, available: usize },
    #[error("tree admits no SPR move")]
    NoSprMove,
    #[error("expected a rooted tree")]
    NotRootedTree,
}

/// Parameters of one generated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    /// SPR moves applied to each perturbed copy.
    pub x: usize,
    /// Internal edges to contract; drawn at random when `None`.
    pub contract_count: Option<usize>,
    pub seed: u64,
    pub rooted: bool,
}

impl GenSpec {
    pub fn new(n: usize, m: usize, x: usize, seed: u64) -> Self {
        GenSpec {
            n,
            m,
            x,
            contract_count: None,
            seed,
            rooted: true,
        }
    }

    /// Upper bound on the optimum of a rooted instance built from this spec.
    pub fn order_bound(&self) -> usize {
        self.x * (self.m - 1) + 1
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.n < 3 {
            return Err(GenError::TooFewLeaves { min: 3, got: self.n });
        }
        if self.m < 2 {
            return Err(GenError::TooFewTrees(self.m));
        }
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Rooted binary tree on labels `1..=n` by recursive random bipartition of a
/// shuffled list, with the root leaf above it.
pub fn random_binary_tree_with<R: Rng>(n: usize, rng: &mut R) -> Result<Forest, GenError> {
    if n < 2 {
        return Err(GenError::TooFewLeaves { min: 2, got: n });
    }
    let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let table = Arc::new(LabelTable::new(names.clone(), true).expect("distinct names"));
    let mut ids: Vec<_> = names.iter().map(|s| table.id_of(s).unwrap()).collect();
    ids.shuffle(rng);
    let mut b = ForestBuilder::new(Arc::clone(&table), true);
    let root = b.add_vertex(table.root());
    // (parent, slice) work list
    let mut work = vec![(root, ids)];
    while let Some((parent, list)) = work.pop() {
        if list.len() == 1 {
            let v = b.add_vertex(Some(list[0]));
            b.add_edge(parent, v);
            continue;
        }
        let v = b.add_vertex(None);
        b.add_edge(parent, v);
        let cut = rng.gen_range(1..list.len());
        let (left, right) = list.split_at(cut);
        work.push((v, right.to_vec()));
        work.push((v, left.to_vec()));
    }
    Ok(b.build().expect("well-formed tree"))
}

pub fn random_binary_tree(n: usize, seed: u64) -> Result<Forest, GenError> {
    random_binary_tree_with(n, &mut rng_for(seed, 0))
}

/// Edges whose endpoints are both unlabeled.
pub fn internal_edges(t: &Forest) -> Vec<EdgeId> {
    t.edge_ids()
        .filter(|e| {
            let [u, v] = t.endpoints(*e).unwrap();
            t.label_of(u).is_none() && t.label_of(v).is_none()
        })
        .collect()
}

pub fn contract_random_edges_with<R: Rng>(t: &Forest, count: usize, rng: &mut R) -> Result<Forest, GenError> {
    let internal = internal_edges(t);
    if count > internal.len() {
        return Err(GenError::TooManyContractions {
            wanted: count,
            available: internal.len(),
        });
    }
    let mut f = t.clone();
    let picked: Vec<EdgeId> = internal.choose_multiple(rng, count).copied().collect();
    for e in picked {
        f.contract_edge(e);
    }
    Ok(f)
}

pub fn contract_random_edges(t: &Forest, count: usize, seed: u64) -> Result<Forest, GenError> {
    contract_random_edges_with(t, count, &mut rng_for(seed, 0))
}

fn root_leaf(t: &Forest) -> Result<VertexId, GenError> {
    let r = t.labels().root().ok_or(GenError::NotRootedTree)?;
    t.vertex_of(r).ok_or(GenError::NotRootedTree)
}

/// One rooted SPR move: prune a random non-root edge, regraft the detached
/// subtree onto a random edge of the remaining tree other than the root
/// leaf's edge.
pub fn random_spr_with<R: Rng>(t: &Forest, rng: &mut R) -> Result<Forest, GenError> {
    if !t.is_rooted() || t.order() != 1 {
        return Err(GenError::NotRootedTree);
    }
    let rho = root_leaf(t)?;
    let rho_edge = t.incident_edges(rho).first().copied();
    let mut candidates: Vec<EdgeId> = t.edge_ids().filter(|e| Some(*e) != rho_edge).collect();
    candidates.shuffle(rng);
    for prune in candidates {
        let [_, child] = t.endpoints(prune).unwrap();
        let mut f = t.clone();
        f.detach(prune);
        f.contract();
        let main: Vec<VertexId> = f
            .components()
            .into_iter()
            .find(|c| c.contains(&rho))
            .expect("root leaf survives");
        let rho_edge = f.incident_edges(rho).first().copied();
        let mut targets: Vec<EdgeId> = f
            .edge_ids()
            .filter(|e| Some(*e) != rho_edge)
            .filter(|e| main.contains(&f.endpoints(*e).unwrap()[0]))
            .collect();
        if targets.is_empty() {
            continue;
        }
        targets.sort();
        let target = *targets.choose(rng).unwrap();
        f.regraft(target, child);
        f.contract();
        return Ok(f);
    }
    Err(GenError::NoSprMove)
}

pub fn apply_random_spr_with<R: Rng>(t: &Forest, x: usize, rng: &mut R) -> Result<Forest, GenError> {
    let mut f = t.clone();
    for _ in 0..x {
        f = random_spr_with(&f, rng)?;
    }
    Ok(f)
}

pub fn apply_random_spr(t: &Forest, x: usize, seed: u64) -> Result<Forest, GenError> {
    apply_random_spr_with(t, x, &mut rng_for(seed, 0))
}

/// Builds the base tree and the perturbed copies as rooted trees.
fn rooted_trees(spec: &GenSpec) -> Result<Vec<Forest>, GenError> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, 0);
    let t0 = random_binary_tree_with(spec.n, &mut rng)?;
    let available = internal_edges(&t0).len();
    let count = match spec.contract_count {
        Some(c) => c,
        None => rng.gen_range(0..=available / 2),
    };
    let t0 = contract_random_edges_with(&t0, count, &mut rng)?;
    let mut trees = vec![t0.clone()];
    for i in 1..spec.m {
        let mut r = rng_for(spec.seed, i as u64);
        trees.push(apply_random_spr_with(&t0, spec.x, &mut r)?);
    }
    Ok(trees)
}

/// Instance file text: a metadata comment followed by one tree per line.
pub fn generate_instance_text(spec: &GenSpec) -> Result<String, GenError> {
    let trees = rooted_trees(spec)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# spec n={} m={} x={} seed={} rooted={}",
        spec.n, spec.m, spec.x, spec.seed, spec.rooted
    );
    for t in &trees {
        out.push_str(&serialize(t));
        out.push('\n');
    }
    Ok(out)
}

/// Generates an instance. Unrooted instances are the rooted ones with the
/// root leaf dropped and orientation forgotten.
pub fn generate_instance(spec: &GenSpec) -> Result<Instance, GenError> {
    let text = generate_instance_text(spec)?;
    Ok(parse_instance(&text, spec.rooted).expect("generated text parses"))
}

/// Specs for small instances that the brute-force oracle can still solve:
/// 4 to 8 taxa, 2 or 3 trees, up to 2 SPR moves, alternating rootedness.
pub fn small_corpus(count: usize, base_seed: u64) -> Vec<GenSpec> {
    let mut rng = rng_for(base_seed, 0);
    (0..count)
        .map(|i| GenSpec {
            n: rng.gen_range(4..=8),
            m: rng.gen_range(2..=3),
            x: rng.gen_range(0..=2),
            contract_count: None,
            seed: base_seed.wrapping_add(i as u64),
            rooted: i % 2 == 0,
        })
        .collect()
}
