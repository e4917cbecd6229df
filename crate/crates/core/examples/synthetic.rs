//! Calibrates the synthetic benchmark a few times and prints the results.

use std::time::Instant;

use hypocal_core::benchmark::{synthetic_bounds, synthetic_dataset, synthetic_search};
use hypocal_core::metrics::{CostModel, CostWeights};
use hypocal_core::stats::reporting_units;
use hypocal_core::{ga, GaConfig};

fn main() {
    let runs: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let data = synthetic_dataset();
    let model = CostModel::new(&data, CostWeights::unit()).unwrap();
    let floor = model.evaluate_search(&synthetic_search());
    println!("floor {:.3e} {:?}", floor.total, floor.deltas);
    for seed in 0..runs {
        let cfg = GaConfig {
            seed,
            ..GaConfig::new(synthetic_bounds())
        };
        let t = Instant::now();
        let r = ga::run_with_model(&cfg, &model);
        let h0 = r.history[0].pool_mean_cost;
        let hn = r.history.last().unwrap().pool_mean_cost;
        println!(
            "seed {seed} cost {:.4} pool {:.3} -> {:.4} {:.1?} {:?}",
            r.cost.total,
            h0,
            hn,
            t.elapsed(),
            reporting_units(&r.genome)
        );
    }
}
