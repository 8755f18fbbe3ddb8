//! Failure cascades in the simulator are branching processes: with mean
//! offspring b the expected cascade size is 1 / (1 - b).

use emergence_lab::bundle::failure_cascade_sizes;
use emergence_lab::sim::{self, Offspring, SimConfig};

fn main() {
    for (b, offspring) in [
        (0.3, Offspring::Geometric),
        (0.5, Offspring::Geometric),
        (0.5, Offspring::PowerLaw),
    ] {
        let cfg = SimConfig {
            seed: 4,
            steps: 400,
            n_ai: 12,
            branching_ratio: b,
            topology_coupling: 0.0,
            offspring,
            ..SimConfig::default()
        };
        let sizes = failure_cascade_sizes(&sim::run(&cfg).log);
        let mean = sizes.iter().sum::<u64>() as f64 / sizes.len() as f64;
        let max = sizes.iter().max().copied().unwrap_or(0);
        println!(
            "b = {b} {offspring:?}: {} cascades, mean size {mean:.3} (theory {:.3}), largest {max}",
            sizes.len(),
            1.0 / (1.0 - b)
        );
    }
}
