//! Agents learn a success model that lags the true one as drift
//! accumulates; their prediction error grows with cumulative drift.

use emergence_lab::sim::{self, calibration_series, SimConfig};
use emergence_lab::stats::spearman;

fn main() -> emergence_lab::Result<()> {
    for drift in [0.0, 0.002] {
        let cfg = SimConfig {
            seed: 9,
            steps: 200,
            drift,
            capability_growth: 0.0,
            ..SimConfig::preset("high-agent")?
        };
        let series = calibration_series(&sim::run(&cfg).truth);
        let (d, mse): (Vec<f64>, Vec<f64>) = series.into_iter().unzip();
        match spearman(&d, &mse) {
            Ok(c) => println!(
                "drift {drift}: rho(drift, squared error) = {:.3}, p = {:.2e}",
                c.rho, c.p_positive
            ),
            Err(e) => println!("drift {drift}: {e}"),
        }
    }
    Ok(())
}
