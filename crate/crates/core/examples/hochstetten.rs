//! Calibrates the Hochstetten surrogate and compares with the reference sets.

use hypocal_core::benchmark::{
    hochstetten_bounds, hochstetten_ga, hochstetten_h, hochstetten_surrogate, hochstetten_w,
};
use hypocal_core::metrics::{CostModel, CostWeights};
use hypocal_core::stats::reporting_units;
use hypocal_core::{ga, GaConfig};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let model = CostModel::new(&hochstetten_surrogate(), CostWeights::unit()).unwrap();
    for (name, p) in [
        ("W", hochstetten_w()),
        ("H", hochstetten_h()),
        ("GA", hochstetten_ga()),
    ] {
        println!("{name:>3} {:?}", model.evaluate(&p));
    }
    let iters: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let cfg = GaConfig {
        n_iterations: iters,
        seed,
        ..GaConfig::new(hochstetten_bounds())
    };
    let r = ga::run_with_model(&cfg, &model);
    println!(
        "calibrated {:?}\n{:?}\n{:?}",
        r.cost,
        reporting_units(&r.genome),
        r.params
    );
}
