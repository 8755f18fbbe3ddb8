//! Window a simulated log into macro variables: quality Q, coupling C,
//! coherence A, structural entropy E and defect rate D.

use emergence_lab::bundle::SIM_DT;
use emergence_lab::coarse::build_series;
use emergence_lab::sim::{self, SimConfig};

fn main() -> emergence_lab::Result<()> {
    let cfg = SimConfig {
        seed: 3,
        steps: 40,
        ..SimConfig::preset("supercritical")?
    };
    let run = sim::run(&cfg);
    // one window per simulated week
    let series = build_series(&run.log, &[], 7 * SIM_DT)?;

    println!("window      Q      C      A      E      D  clustering  density");
    for (i, w) in series.windows.iter().enumerate() {
        let m = &w.macro_state;
        println!(
            "{i:>6}  {:>5}  {:.3}  {:>5.3}  {:.3}  {:>5}  {:>10.3}  {:.4}",
            m.q.map_or("-".into(), |q| format!("{q:.3}")),
            m.c,
            m.a,
            m.e,
            m.d.map_or("-".into(), |d| format!("{d:.3}")),
            w.clustering,
            w.link_density,
        );
    }
    Ok(())
}
