//! Generate a small corpus into a temporary directory and benchmark it.

use maf_cli::{run_bench, write_csv, BenchMode};
use maf_core::datagen::{generate_instance_text, GenSpec};

fn main() {
    let dir = std::env::temp_dir().join(format!("maf-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (n, m) in [(8, 2), (8, 3), (20, 2)] {
        for seed in 0..3 {
            let text = generate_instance_text(&GenSpec::new(n, m, 2, seed)).unwrap();
            std::fs::write(dir.join(format!("t{n}-{m}-{seed}.nwk")), text).unwrap();
        }
    }
    let rows = run_bench(&dir, BenchMode::All, true, 0).unwrap();
    write_csv(std::io::stdout(), &rows).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
}
