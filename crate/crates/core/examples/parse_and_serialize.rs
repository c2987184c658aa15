//! Parse multifurcating Newick, inspect the forest, and write it back in
//! canonical form.

use maf_core::newick::{parse_forest, parse_instance, parse_tree, serialize};

fn main() {
    // branch lengths and internal labels are accepted and dropped
    let t = parse_tree("((b:0.1,a:0.2)x,(c,d,e));", true).unwrap();
    println!("rooted tree: {}", serialize(&t));
    println!("  labels (with root leaf): {}", t.label_count());
    println!("  edges: {}, order: {}", t.edge_count(), t.order());

    let u = parse_tree("((b,a),(c,d,e));", false).unwrap();
    println!("same text, unrooted: {}", serialize(&u));

    // one component per line
    let f = parse_forest("(a,b);\nc;\n(d,e);", true).unwrap();
    println!("forest of order {}:\n{}", f.order(), serialize(&f));

    let inst = parse_instance("# two trees\n((a,b),c);\n((a,c),b);\n", true).unwrap();
    println!("instance: {} trees on {} taxa", inst.len(), inst.taxa());

    match parse_tree("((a,b),c;", true) {
        Ok(_) => unreachable!(),
        Err(e) => println!("error: {e}"),
    }
}
