//! Mann–Kendall trend test and a single structural break in the mean.

use emergence_lab::rng;
use emergence_lab::stats::{mann_kendall, spearman, structural_break};
use rand_distr::{Distribution, Normal};

fn main() -> emergence_lab::Result<()> {
    let rising: Vec<f64> = (0..10).map(f64::from).collect();
    let mk = mann_kendall(&rising)?;
    println!(
        "strictly increasing n = 10: S = {}, z = {:.2}, p = {:.2e}",
        mk.s, mk.z, mk.p_increasing
    );

    // reliability drops from 0.9 to 0.7 halfway through
    let mut r = rng::substream(5, "example");
    let noise = Normal::new(0.0, 0.05).expect("valid sigma");
    let y: Vec<f64> = (0..100)
        .map(|i| if i < 50 { 0.9 } else { 0.7 } + noise.sample(&mut r))
        .collect();
    let brk = structural_break(&y, 2000, 5)?;
    println!(
        "break at index {} (sup-F {:.1}, p = {:.4}): mean {:.3} -> {:.3}",
        brk.index, brk.sup_f, brk.p_value, brk.mean_before, brk.mean_after
    );

    let x: Vec<f64> = (0..30).map(f64::from).collect();
    let noisy: Vec<f64> = x.iter().map(|v| v + 8.0 * noise.sample(&mut r) * 20.0).collect();
    let c = spearman(&x, &noisy)?;
    println!("spearman rho {:.3}, one-sided p {:.4}", c.rho, c.p_positive);
    Ok(())
}
