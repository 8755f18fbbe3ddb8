//! Simulate a preset world and print what happened step by step.
//!
//!     cargo run --release --example simulate_world -- supercritical 7

use emergence_lab::sim::{self, SimConfig};

fn main() -> emergence_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "high-agent".into());
    let mut cfg = SimConfig::preset(&preset)?;
    cfg.seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    cfg.steps = 60;

    let run = sim::run(&cfg);
    println!(
        "{preset}: {} commits, AI share {:.2}",
        run.log.len(),
        run.log.ai_share()
    );
    println!("step  r     depth  semantic  success  branching  gates");
    for t in run.truth.iter().step_by(10) {
        println!(
            "{:>4}  {:.2}  {:.2}   {:<8}  {:.3}    {:.3}      {}",
            t.step, t.r, t.review_depth, t.semantic_review, t.success_prob, t.branching, t.epoch
        );
    }
    let failed = run.log.events().iter().filter(|e| !e.ci_passed).count();
    let reworked = run.log.events().iter().filter(|e| e.required_rework).count();
    println!("CI failures {failed}, rework {reworked}");
    Ok(())
}
