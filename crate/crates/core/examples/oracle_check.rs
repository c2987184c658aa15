//! Cross-check the exact search and the approximation against brute force
//! on small random instances.

use maf_core::approx::approximate;
use maf_core::datagen::{generate_instance, small_corpus};
use maf_core::fpt::find_min_k;
use maf_core::oracle::{brute_force_maf, DEFAULT_MAX_EDGES};

fn main() {
    let mut worst = 0.0f64;
    let specs = small_corpus(50, 1);
    for spec in &specs {
        let inst = generate_instance(spec).unwrap();
        let oracle = brute_force_maf(&inst, DEFAULT_MAX_EDGES).unwrap();
        let (order, _) = find_min_k(&inst, 1, inst.taxa() + 1).unwrap();
        assert_eq!(order, oracle.opt_order, "{spec:?}");
        let approx = approximate(&inst).unwrap().order();
        worst = worst.max(approx as f64 / order as f64);
    }
    println!("{} instances agree with brute force", specs.len());
    println!("worst approximation ratio: {worst:.3}");
}
