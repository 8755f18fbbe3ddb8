//! Run the full proposition battery on a simulated world and print one
//! line per proposition.
//!
//!     cargo run --release --example battery -- supercritical 1 [bonferroni]

use std::time::Instant;

use emergence_lab::bundle::{simulate_bundle, BundlePlan, SIM_DT};
use emergence_lab::ei::PipelineOptions;
use emergence_lab::harness::{run_battery, HarnessConfig, LegibilityProxy, Proposition};
use emergence_lab::sim::SimConfig;

fn main() -> emergence_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let world = args.next().unwrap_or_else(|| "supercritical".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let bonferroni = args.next().is_some_and(|a| a == "bonferroni");

    let started = Instant::now();
    let cfg = SimConfig::preset(&world)?;
    let bundle = simulate_bundle(&cfg, &BundlePlan::new(seed));
    let inputs = bundle.inputs(SIM_DT, LegibilityProxy::default())?;
    let harness = HarnessConfig {
        seed,
        bonferroni,
        ..HarnessConfig::default()
    };
    let verdicts = run_battery(&inputs, &Proposition::ALL, &PipelineOptions::default(), &harness)?;

    println!("world {world}, seed {seed}");
    for v in &verdicts {
        let p: Vec<String> = v.p_values.iter().map(|(k, p)| format!("{k}={p:.4}")).collect();
        let e: Vec<String> = v.effect.iter().map(|(k, x)| format!("{k}={x:.4}")).collect();
        println!(
            "{} {:<12} p[{}] effect[{}]",
            v.id,
            v.verdict.to_string(),
            p.join(" "),
            e.join(" ")
        );
        for n in &v.notes {
            println!("    note: {n}");
        }
    }
    println!("elapsed {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
