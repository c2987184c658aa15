use maf_core::datagen::{generate_instance, generate_instance_text, GenSpec};
use maf_core::oracle::{brute_force_maf, DEFAULT_MAX_EDGES};
use proptest::prelude::*;

#[test]
fn optimum_respects_the_spr_bound() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let spec = GenSpec::new(4 + (seed as usize % 5), 2 + (seed as usize % 2), (seed as usize / 3) % 3, seed);
        let inst = generate_instance(&spec).unwrap();
        let opt = brute_force_maf(&inst, DEFAULT_MAX_EDGES).unwrap().opt_order;
        assert!(opt <= spec.order_bound(), "{spec:?}: {opt}");
        checked += 1;
    }
    assert!(checked >= 50);
}

#[test]
fn header_records_the_spec() {
    let text = generate_instance_text(&GenSpec::new(6, 3, 1, 5)).unwrap();
    assert!(text.starts_with("# spec n=6 m=3 x=1 seed=5 rooted=true\n"));
    assert_eq!(text.lines().count(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_seed_same_instance(n in 3usize..30, m in 2usize..5, x in 0usize..4, seed: u64, rooted: bool) {
        let spec = GenSpec { rooted, ..GenSpec::new(n, m, x, seed) };
        let a = generate_instance_text(&spec).unwrap();
        prop_assert_eq!(&a, &generate_instance_text(&spec).unwrap());
        let inst = generate_instance(&spec).unwrap();
        prop_assert_eq!(inst.len(), m);
        prop_assert_eq!(inst.taxa(), n);
        for f in inst.forests() {
            prop_assert_eq!(f.order(), 1);
            prop_assert!(f.is_irreducible());
        }
    }
}
