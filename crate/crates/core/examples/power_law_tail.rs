//! Fit a discrete power law to cascade sizes and check the fit.

use emergence_lab::rng;
use emergence_lab::stats::{fit_power_law, fit_power_law_auto, power_law_gof, sample_power_law};

fn main() -> emergence_lab::Result<()> {
    let mut r = rng::substream(2, "example");
    let data = sample_power_law(&mut r, 2.5, 1, 10_000);
    let fixed = fit_power_law(&data, 1)?;
    println!("x_min = 1: alpha {:.3}, KS {:.4}", fixed.alpha, fixed.ks);

    let auto = fit_power_law_auto(&data, 50)?;
    println!(
        "automatic: x_min {}, alpha {:.3}, tail {} of {}",
        auto.x_min,
        auto.alpha,
        auto.n_tail,
        data.len()
    );
    println!("goodness of fit p = {:.3}", power_law_gof(&auto, 100, 3));
    Ok(())
}
