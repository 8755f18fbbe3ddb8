//! Topology observables: transitivity, link density, commit fan-out and
//! failure cascades.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::coarse::csv_err;
use crate::error::{Error, Result};
use crate::state::{DependencyGraph, EventLog};

/// Global transitivity of the undirected projection:
/// `3 · triangles / connected triples`, or 0 without triples.
pub fn clustering_coefficient(g: &DependencyGraph) -> f64 {
    let adj = g.undirected_adjacency();
    let mut triples = 0usize;
    let mut closed = 0usize;
    for nbrs in &adj {
        let d = nbrs.len();
        triples += d * d.saturating_sub(1) / 2;
        let list: Vec<usize> = nbrs.iter().copied().collect();
        for (x, &u) in list.iter().enumerate() {
            for &v in &list[x + 1..] {
                if adj[u].contains(&v) {
                    closed += 1;
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// Directed edge density `|E| / (|V|·(|V|−1))`.
pub fn link_density(g: &DependencyGraph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooFewNodes { needed: 2, got: n });
    }
    Ok(g.edge_count() as f64 / (n * (n - 1)) as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cascade {
    pub root: String,
    /// Member commit ids in log order; the root comes first.
    pub members: Vec<String>,
    pub size: usize,
    /// Longest trigger chain starting at the root.
    pub depth: usize,
    pub start_ts: i64,
    pub end_ts: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeOptions {
    /// Also link a CI-failing commit to later commits touching the same
    /// modules within `horizon` seconds.
    pub heuristic: bool,
    pub horizon: i64,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            heuristic: false,
            horizon: 24 * 3600,
        }
    }
}

/// Explicit trigger edges as `(parent index, child index)` in log order.
fn trigger_edges(log: &EventLog, opts: CascadeOptions) -> Vec<(usize, usize)> {
    let events = log.events();
    let index: HashMap<&str, usize> = events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.commit_id.as_str(), i))
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, ev) in events.iter().enumerate() {
        for p in &ev.parent_triggers {
            if let Some(&pi) = index.get(p.as_str()) {
                edges.insert((pi, i));
            }
        }
    }
    if opts.heuristic {
        for (i, broken) in events.iter().enumerate().filter(|(_, e)| !e.ci_passed) {
            for (j, later) in events.iter().enumerate().skip(i + 1) {
                if later.timestamp - broken.timestamp > opts.horizon {
                    break;
                }
                if later.timestamp > broken.timestamp
                    && !later.modules_touched.is_disjoint(&broken.modules_touched)
                {
                    edges.insert((i, j));
                }
            }
        }
    }
    edges.into_iter().collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Weakly connected components of the trigger DAG. Every commit lands in
/// exactly one cascade; untriggered, childless commits are size-1 cascades.
pub fn extract_cascades(log: &EventLog, opts: CascadeOptions) -> Vec<Cascade> {
    let events = log.events();
    let n = events.len();
    let edges = trigger_edges(log, opts);

    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        children[a].push(b);
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let g = *group_of.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }

    // edges always point forward in log order, so one reverse sweep gives
    // the longest chain below each node
    let mut height = vec![0usize; n];
    for i in (0..n).rev() {
        height[i] = children[i].iter().map(|&c| height[c] + 1).max().unwrap_or(0);
    }

    groups
        .into_iter()
        .map(|members| {
            let root = members[0];
            Cascade {
                root: events[root].commit_id.clone(),
                size: members.len(),
                depth: height[root],
                start_ts: events[root].timestamp,
                end_ts: members.iter().map(|&m| events[m].timestamp).max().unwrap_or(0),
                members: members.iter().map(|&m| events[m].commit_id.clone()).collect(),
            }
        })
        .collect()
}

/// Mean number of direct trigger children per commit.
pub fn fan_out_ratio(log: &EventLog) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let edges = trigger_edges(log, CascadeOptions::default());
    Ok(edges.len() as f64 / log.len() as f64)
}

pub fn write_cascades_csv<W: Write>(cascades: &[Cascade], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["root", "size", "depth", "start_ts", "end_ts"])
        .map_err(csv_err)?;
    for c in cascades {
        out.write_record([
            c.root.clone(),
            c.size.to_string(),
            c.depth.to_string(),
            c.start_ts.to_string(),
            c.end_ts.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{validate_event_log, AgentId, CommitEvent};

    fn g(n: usize, edges: &[(usize, usize)]) -> DependencyGraph {
        let name = |i: usize| format!("m{i}");
        DependencyGraph::from_parts(
            0,
            (0..n).map(|i| (name(i), 1.0)),
            edges.iter().map(|&(a, b)| (name(a), name(b))),
        )
        .unwrap()
    }

    #[test]
    fn transitivity_cases() {
        assert_eq!(clustering_coefficient(&g(3, &[(0, 1), (1, 2), (2, 0)])), 1.0);
        assert_eq!(clustering_coefficient(&g(3, &[(0, 1), (1, 2)])), 0.0);
        let k4_minus = g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(clustering_coefficient(&k4_minus), 0.75);
        assert_eq!(clustering_coefficient(&g(1, &[])), 0.0);
    }

    #[test]
    fn density_cases() {
        let full = g(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
        assert_eq!(link_density(&full).unwrap(), 1.0);
        assert_eq!(link_density(&g(3, &[])).unwrap(), 0.0);
        assert!((link_density(&g(3, &[(0, 1), (1, 2)])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(link_density(&g(1, &[])), Err(Error::TooFewNodes { .. })));
    }

    fn commit(id: &str, ts: i64, parents: &[&str]) -> CommitEvent {
        CommitEvent::new(id, ts, AgentId::ai("bot"))
            .with_modules(["m"])
            .with_parents(parents.iter().copied())
    }

    #[test]
    fn chain_cascade() {
        let log = validate_event_log(vec![
            commit("a", 1, &[]),
            commit("b", 2, &["a"]),
            commit("c", 3, &["b"]),
        ])
        .unwrap();
        let cs = extract_cascades(&log, CascadeOptions::default());
        assert_eq!(cs.len(), 1);
        assert_eq!((cs[0].size, cs[0].depth), (3, 2));
        assert!((fan_out_ratio(&log).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singletons_and_stars() {
        let five: Vec<_> = (0..5).map(|i| commit(&format!("c{i}"), i, &[])).collect();
        let log = validate_event_log(five).unwrap();
        let cs = extract_cascades(&log, CascadeOptions::default());
        assert_eq!(cs.len(), 5);
        assert!(cs.iter().all(|c| c.size == 1 && c.depth == 0));
        assert_eq!(fan_out_ratio(&log).unwrap(), 0.0);

        let star = validate_event_log(vec![
            commit("r", 1, &[]),
            commit("x", 2, &["r"]),
            commit("y", 3, &["r"]),
            commit("z", 4, &["r"]),
        ])
        .unwrap();
        let cs = extract_cascades(&star, CascadeOptions::default());
        assert_eq!((cs[0].size, cs[0].depth), (4, 1));
        assert_eq!(fan_out_ratio(&star).unwrap(), 0.75);
    }

    #[test]
    fn heuristic_edges_follow_broken_modules() {
        let mut broken = commit("a", 0, &[]);
        broken.ci_passed = false;
        let log =
            validate_event_log(vec![broken, commit("b", 3600, &[]), commit("c", 48 * 3600, &[])]).unwrap();
        assert_eq!(extract_cascades(&log, CascadeOptions::default()).len(), 3);
        let opts = CascadeOptions {
            heuristic: true,
            ..CascadeOptions::default()
        };
        let cs = extract_cascades(&log, opts);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].members, ["a", "b"]);
    }

    #[test]
    fn empty_log_fan_out() {
        let log = validate_event_log(vec![]).unwrap();
        assert_eq!(fan_out_ratio(&log), Err(Error::EmptyLog));
    }
}
