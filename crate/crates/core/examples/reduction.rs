//! Cut edges that no component of the other forest straddles.

use maf_core::newick::{parse_forest_in, parse_tree, serialize};
use maf_core::reduction::{is_strongly_reducible, reduce_pair, removable_edges};

fn main() {
    let t = parse_tree("((a,b),((c,d),e));", true).unwrap();
    // a forest over the same labels: {c, d} and {e} are already apart
    let f = parse_forest_in("(a,b);\n(c,d);\ne;", t.labels()).unwrap();
    println!("tree:   {}", serialize(&t));
    println!("forest:\n{}", serialize(&f));
    println!("removable edges of the tree: {:?}", removable_edges(&f, &t));

    let (f2, t2, trace) = reduce_pair(&f, &t);
    println!("after {} removals:", trace.len());
    println!("{}\n--\n{}", serialize(&t2), serialize(&f2));
    println!("strongly reducible: {}", is_strongly_reducible(&[f2, t2]));
}
