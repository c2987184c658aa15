//! Random instances: a binary tree, partially contracted, plus copies
//! perturbed by SPR moves.

use maf_core::datagen::{apply_random_spr, contract_random_edges, generate_instance_text, random_binary_tree, GenSpec};
use maf_core::newick::serialize;

fn main() {
    let t = random_binary_tree(8, 3).unwrap();
    println!("binary:      {}", serialize(&t));
    let c = contract_random_edges(&t, 2, 3).unwrap();
    println!("contracted:  {}", serialize(&c));
    let s = apply_random_spr(&c, 1, 4).unwrap();
    println!("one SPR:     {}", serialize(&s));

    let spec = GenSpec::new(10, 3, 2, 42);
    println!("\noptimum at most {}:", spec.order_bound());
    print!("{}", generate_instance_text(&spec).unwrap());

    let unrooted = GenSpec { rooted: false, ..spec };
    print!("{}", generate_instance_text(&unrooted).unwrap());
}
