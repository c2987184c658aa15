use maf_core::datagen::{generate_instance, small_corpus};
use maf_core::newick::parse_instance;
use maf_core::oracle::{brute_force_maf, DEFAULT_MAX_EDGES};
use maf_core::reduction::{is_strongly_reducible, reduce_instance};
use maf_core::{EdgeId, Instance};

fn opt(inst: &Instance) -> usize {
    brute_force_maf(inst, DEFAULT_MAX_EDGES).unwrap().opt_order
}

#[test]
fn reduction_preserves_the_optimum() {
    let mut reduced_any = 0;
    for (i, spec) in small_corpus(120, 77).into_iter().enumerate() {
        let inst = generate_instance(&spec).unwrap();
        // trees never reduce; cut a few edges of the last input to get a forest
        let mut forests = inst.into_forests();
        let last = forests.pop().unwrap();
        let cut: Vec<EdgeId> = last.edge_ids().filter(|e| (e.0 as usize + i).is_multiple_of(4)).collect();
        forests.push(last.remove_edges(&cut).unwrap());
        let inst = Instance::new(forests).unwrap();
        let (red, trace) = reduce_instance(&inst);
        assert!(is_strongly_reducible(red.forests()), "{spec:?}");
        assert_eq!(opt(&red), opt(&inst), "{spec:?}");
        if !trace.is_empty() {
            reduced_any += 1;
        }
    }
    assert!(reduced_any > 0);
}

#[test]
fn reduction_of_a_split_instance() {
    // `d` is alone in the second input, so the first must cut it off
    let inst = parse_instance("((a,b),(c,d));\n((a,b),c);", true);
    assert!(inst.is_err(), "label sets differ");
    let text = "((a,b),(c,d));\n(((a,b),c),d);";
    let inst = parse_instance(text, true).unwrap();
    let (red, _) = reduce_instance(&inst);
    assert_eq!(opt(&red), opt(&inst));
    assert_eq!(opt(&inst), 2);
}
