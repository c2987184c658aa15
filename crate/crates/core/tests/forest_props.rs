mod common;

use common::{pick, tree};
use maf_core::approx::essential_subset;
use maf_core::newick::serialize;
use maf_core::is_subforest;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn contraction_is_idempotent(n in 3usize..14, seed: u64, rooted: bool, mask: u64) {
        let t = tree(n, seed, rooted);
        prop_assert!(t.is_irreducible());
        let f = t.remove_edges(&pick(&t, mask)).unwrap();
        prop_assert!(f.is_irreducible());
        let g = f.force_contract();
        prop_assert_eq!(serialize(&g), serialize(&f));
        prop_assert_eq!(g.edge_count(), f.edge_count());
        prop_assert_eq!(g.order(), f.order());
    }

    #[test]
    fn removal_raises_order_by_at_most_the_cut(n in 3usize..14, seed: u64, rooted: bool, mask: u64) {
        let t = tree(n, seed, rooted);
        let cut = pick(&t, mask);
        let f = t.remove_edges(&cut).unwrap();
        prop_assert!(f.order() <= t.order() + cut.len());
        let ess = essential_subset(&t, &cut).unwrap();
        let g = t.remove_edges(&ess).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(g.order(), t.order() + ess.len());
    }

    #[test]
    fn subforest_order_relations(n in 3usize..12, seed: u64, rooted: bool, m1: u64, m2: u64) {
        let t = tree(n, seed, rooted);
        prop_assert!(is_subforest(&t, &t).unwrap());
        let a = t.remove_edges(&pick(&t, m1)).unwrap();
        let b = a.remove_edges(&pick(&a, m2)).unwrap();
        prop_assert!(is_subforest(&a, &t).unwrap());
        prop_assert!(is_subforest(&b, &a).unwrap());
        prop_assert!(is_subforest(&b, &t).unwrap());
        prop_assert!(is_subforest(&t.singletons(), &b).unwrap());
        // a strictly finer forest is never a host for a coarser one
        if b.order() > a.order() {
            prop_assert!(!is_subforest(&a, &b).unwrap());
        }
    }

    #[test]
    fn group_then_expand_is_identity(n in 3usize..14, seed: u64, rooted: bool, mask: u64) {
        let t = tree(n, seed, rooted);
        let mut f = t.remove_edges(&pick(&t, mask & 0x5555)).unwrap();
        let orig = f.clone();
        let mut groups = 0;
        while let Some(s) = f.find_mss() {
            f = f.group_labels(&s).unwrap();
            groups += 1;
            prop_assert!(groups <= n + 1);
        }
        prop_assert_eq!(f.expand_labels(), orig);
    }

    #[test]
    fn sibling_sets_exist_unless_trivial(n in 3usize..12, seed: u64, rooted: bool, mask: u64) {
        let t = tree(n, seed, rooted);
        let f = t.remove_edges(&pick(&t, mask)).unwrap();
        let trivial = if rooted { f.edge_count() <= 1 } else { f.edge_count() == 0 };
        prop_assert_eq!(f.find_mss().is_none(), trivial);
    }
}
