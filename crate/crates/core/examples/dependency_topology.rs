//! Topology observables of a module graph and the failure cascades of a
//! small hand-written log.

use std::collections::HashMap;

use emergence_lab::coarse::{architectural_coherence, coupling_density, structural_entropy};
use emergence_lab::graph::{
    clustering_coefficient, extract_cascades, fan_out_ratio, link_density, CascadeOptions,
};
use emergence_lab::state::{validate_event_log, AgentId, CommitEvent, DependencyGraph};

fn main() -> emergence_lab::Result<()> {
    // two directory communities joined by one edge
    let g = DependencyGraph::from_parts(
        0,
        [
            ("core/a", 200.0),
            ("core/b", 100.0),
            ("core/c", 100.0),
            ("ui/x", 50.0),
            ("ui/y", 50.0),
        ],
        [
            ("core/a", "core/b"),
            ("core/b", "core/c"),
            ("core/c", "core/a"),
            ("ui/x", "ui/y"),
            ("ui/x", "core/a"),
        ],
    )?;
    let partition: HashMap<String, String> = g
        .nodes()
        .map(|(n, _)| (n.to_string(), n.split('/').next().unwrap_or(n).to_string()))
        .collect();
    println!("clustering   {:.3}", clustering_coefficient(&g));
    println!("link density {:.3}", link_density(&g)?);
    println!("coupling C   {:.3}", coupling_density(&g)?);
    println!("coherence A  {:.3}", architectural_coherence(&g, &partition)?);
    println!("entropy E    {:.3} bits", structural_entropy(&g)?);

    let ai = AgentId::ai("agent-1");
    let human = AgentId::human("dana");
    let fail = |c: CommitEvent| CommitEvent {
        ci_passed: false,
        ..c
    };
    let log = validate_event_log(vec![
        fail(CommitEvent::new("r1", 10, ai.clone()).with_modules(["core/a"])),
        CommitEvent::new("k1", 20, ai.clone()).with_parents(["r1"]),
        fail(CommitEvent::new("k2", 30, human.clone()).with_parents(["r1"])),
        CommitEvent::new("k3", 40, ai.clone()).with_parents(["k2"]),
        fail(CommitEvent::new("r2", 50, human)),
    ])?;
    for c in extract_cascades(&log, CascadeOptions::default()) {
        println!("cascade from {}: size {}, depth {}", c.root, c.size, c.depth);
    }
    println!("fan-out ratio {:.2}", fan_out_ratio(&log)?);
    Ok(())
}
