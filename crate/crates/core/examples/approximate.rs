//! Approximate agreement forest with the per-step trace.

use maf_core::approx::{approximate, check_metastep_ratio, MetaStepKind};
use maf_core::datagen::{generate_instance, GenSpec};
use maf_core::newick::serialize;

fn main() {
    let inst = generate_instance(&GenSpec::new(30, 4, 3, 11)).unwrap();
    let r = approximate(&inst).unwrap();
    println!("order {} (each step within factor {})", r.order(), r.ratio_bound);
    for kind in [
        MetaStepKind::Rule1,
        MetaStepKind::Group,
        MetaStepKind::MS2,
        MetaStepKind::MS3_1,
        MetaStepKind::MS3_2,
    ] {
        println!("  {:>6}: {}", kind.name(), r.count(kind));
    }
    let audited = r.trace.iter().filter(|s| check_metastep_ratio(s, &s.before)).count();
    println!("audited steps: {audited}/{}", r.trace.len());
    println!("{}", serialize(&r.forest.forest));
}
