//! Runs the synthetic uncertainty ensemble and prints its statistics.

use std::time::Instant;

use hypocal_core::benchmark::{synthetic_bounds, synthetic_dataset};
use hypocal_core::ga::GENE_NAMES;
use hypocal_core::{run_ensemble, GaConfig};

fn main() {
    let trials: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let t = Instant::now();
    let e = run_ensemble(
        &GaConfig::new(synthetic_bounds()),
        &synthetic_dataset(),
        trials,
        0,
    )
    .unwrap();
    println!(
        "{} trials, {} failed, {:.1?}",
        trials,
        e.failed,
        t.elapsed()
    );
    for (name, s) in GENE_NAMES.iter().zip(e.summary.unwrap()) {
        println!(
            "{name:>6} mean {:.5e} std {:.3e} cv {:.4} [{:.4e}, {:.4e}]",
            s.mean,
            s.std,
            s.cv(),
            s.min,
            s.max
        );
    }
    for row in e.pearson.unwrap() {
        println!("{}", row.map(|r| format!("{r:7.3}")).join(" "));
    }
}
