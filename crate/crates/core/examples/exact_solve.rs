//! Exact maximum agreement forest by iterating the parameterized search
//! over increasing `k`.

use maf_core::fpt::{find_min_k_with_stats, solve};
use maf_core::newick::{parse_instance, serialize};

fn main() {
    let text = "((a,b),(c,(d,e)));\n((a,(d,b)),(c,e));\n(((a,b),c),(d,e));";
    for rooted in [true, false] {
        let inst = parse_instance(text, rooted).unwrap();
        let r = find_min_k_with_stats(&inst, 1, inst.taxa() + 1).unwrap();
        println!("{} order {}", if rooted { "rooted" } else { "unrooted" }, r.order);
        println!("{}", serialize(&r.forest.forest));
        for (k, s) in &r.runs {
            println!("  k={k}: nodes={} leaves={} pruned={}", s.nodes, s.leaves, s.pruned);
        }
        assert!(r.forest.verify(&inst).unwrap());

        // a single decision query
        let below = solve(&inst, r.order - 1).unwrap();
        println!("  order {} possible: {}", r.order - 1, below.forest.is_some());
    }
}
