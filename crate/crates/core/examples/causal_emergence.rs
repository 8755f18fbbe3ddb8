//! Effective information of a lumpable Markov chain: three interchangeable
//! micro states merge into one macro state and the macro level gains EI.

use emergence_lab::ei::{effective_information, estimate_transitions_pairs, TransitionMatrix};
use emergence_lab::rng;
use rand::Rng;

fn main() -> emergence_lab::Result<()> {
    let third = 1.0 / 3.0;
    let micro = TransitionMatrix::from_rows(&[
        vec![third, third, third, 0.0],
        vec![third, third, third, 0.0],
        vec![third, third, third, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ])?;
    let map = [0, 0, 0, 1];
    let lumped = micro.lump(&map)?;
    let (ei_micro, ei_macro) = (effective_information(&micro), effective_information(&lumped));
    println!(
        "analytic   EI micro {ei_micro:.4}  EI macro {ei_macro:.4}  ce {:.4}",
        ei_macro - ei_micro
    );

    // intervene: set a uniformly random state, record where the chain goes
    let mut r = rng::substream(11, "example");
    let pairs: Vec<(usize, usize)> = (0..50_000)
        .map(|_| {
            let from = r.random_range(0..4);
            let to = if from == 3 { 3 } else { r.random_range(0..3) };
            (from, to)
        })
        .collect();
    let macro_pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (map[a], map[b])).collect();
    let est_micro = effective_information(&estimate_transitions_pairs(&pairs, 4, 0.0)?);
    let est_macro = effective_information(&estimate_transitions_pairs(&macro_pairs, 2, 0.0)?);
    println!(
        "sampled    EI micro {est_micro:.4}  EI macro {est_macro:.4}  ce {:.4}",
        est_macro - est_micro
    );
    Ok(())
}
