//! Coarse-graining: the macro observables `Q, C, A, E, D` and the assembly
//! of windowed micro/macro state series from an event log.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::ei::micro_features;
use crate::error::{Error, Result};
use crate::graph::{clustering_coefficient, link_density};
use crate::ingest::DependencySnapshot;
use crate::state::{CommitEvent, DependencyGraph, EventLog, MacroState, MicroState, StateSeries, Window};

/// Equal-weight mean of the quality scores of the scored commits in a
/// window; `None` when no commit carries a score.
pub fn quality_index<'a, I>(events: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a CommitEvent>,
{
    let (sum, n) = events
        .into_iter()
        .filter_map(|e| e.quality_score)
        .fold((0.0, 0usize), |(s, n), q| (s + q, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `C(t) = (1/|V|) · #{(i, j) : i imports j}`. This is not a density: it
/// can exceed 1. See [`crate::graph::link_density`] for the normalized form.
pub fn coupling_density(g: &DependencyGraph) -> Result<f64> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(g.edge_count() as f64 / g.node_count() as f64)
}

/// Shannon entropy, in bits, of the lines-of-code distribution over modules.
pub fn structural_entropy(g: &DependencyGraph) -> Result<f64> {
    entropy_bits(g.nodes().map(|(_, w)| w))
}

pub(crate) fn entropy_bits(weights: impl Iterator<Item = f64> + Clone) -> Result<f64> {
    let total: f64 = weights.clone().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroTotalWeight);
    }
    let h = weights
        .filter(|&w| w > 0.0)
        .map(|w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Community label for each module: the part before the first `/`, or the
/// whole name for flat module names.
pub fn directory_partition(g: &DependencyGraph) -> HashMap<String, String> {
    g.nodes()
        .map(|(name, _)| {
            let community = name.split_once('/').map_or(name, |(dir, _)| dir);
            (name.to_string(), community.to_string())
        })
        .collect()
}

/// Newman modularity of the undirected projection of `g` under `partition`.
///
/// Reciprocal edges collapse into one undirected edge. A graph without
/// edges has modularity 0.
pub fn architectural_coherence(g: &DependencyGraph, partition: &HashMap<String, String>) -> Result<f64> {
    let names: Vec<&str> = g.nodes().map(|(n, _)| n).collect();
    let mut labels: Vec<&str> = Vec::with_capacity(names.len());
    for name in &names {
        let label = partition
            .get(*name)
            .ok_or_else(|| Error::UncoveredNode(name.to_string()))?;
        labels.push(label);
    }
    let adj = g.undirected_adjacency();
    let twice_m: usize = adj.iter().map(|n| n.len()).sum();
    if twice_m == 0 {
        return Ok(0.0);
    }
    let m = twice_m as f64 / 2.0;

    let mut internal: BTreeMap<&str, f64> = BTreeMap::new();
    let mut degree: BTreeMap<&str, f64> = BTreeMap::new();
    for (i, nbrs) in adj.iter().enumerate() {
        *degree.entry(labels[i]).or_default() += nbrs.len() as f64;
        for &j in nbrs {
            if j > i && labels[i] == labels[j] {
                *internal.entry(labels[i]).or_default() += 1.0;
            }
        }
    }
    Ok(degree
        .iter()
        .map(|(c, d)| internal.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .sum())
}

/// Share of commits in a window that failed CI; `None` for an empty window.
pub fn defect_rate<'a, I>(events: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a CommitEvent>,
{
    let (failed, n) = events.into_iter().fold((0usize, 0usize), |(f, n), e| {
        (f + usize::from(!e.ci_passed), n + 1)
    });
    (n > 0).then(|| failed as f64 / n as f64)
}

/// Window tiling for [`build_series_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub dt: i64,
    /// Start of the first window; defaults to the first event timestamp.
    pub origin: Option<i64>,
    /// End of the last window; defaults to the last event timestamp.
    pub end: Option<i64>,
}

impl SeriesOptions {
    pub fn new(dt: i64) -> Self {
        Self {
            dt,
            origin: None,
            end: None,
        }
    }
}

/// Tile the log into `⌈span / dt⌉` windows (at least one) and compute the
/// micro and macro state of each.
pub fn build_series(log: &EventLog, snapshots: &[DependencySnapshot], dt: i64) -> Result<StateSeries> {
    build_series_with(log, snapshots, SeriesOptions::new(dt))
}

pub fn build_series_with(
    log: &EventLog,
    snapshots: &[DependencySnapshot],
    opts: SeriesOptions,
) -> Result<StateSeries> {
    let (first, last) = log.span().ok_or(Error::EmptyLog)?;
    if opts.dt <= 0 {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {}",
            opts.dt
        )));
    }
    let origin = opts.origin.unwrap_or(first);
    let end = opts.end.unwrap_or(last).max(origin);
    let span = end - origin;
    let n_windows = ((span + opts.dt - 1) / opts.dt).max(1) as usize;

    let roster = log.roster();
    let agent_index: HashMap<&str, usize> = roster
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.as_str(), i))
        .collect();
    let author_of: HashMap<&str, usize> = log
        .events()
        .iter()
        .map(|e| (e.commit_id.as_str(), agent_index[e.author.id.as_str()]))
        .collect();

    let mut buckets: Vec<Vec<&CommitEvent>> = vec![Vec::new(); n_windows];
    for ev in log.events() {
        if ev.timestamp < origin || ev.timestamp > end {
            continue;
        }
        let k = (((ev.timestamp - origin) / opts.dt) as usize).min(n_windows - 1);
        buckets[k].push(ev);
    }

    let mut snaps: Vec<&DependencySnapshot> = snapshots.iter().collect();
    snaps.sort_by_key(|s| s.ts);
    let mut snap_iter = snaps.into_iter().peekable();

    let mut graph = DependencyGraph::new(origin);
    let mut windows = Vec::with_capacity(n_windows);
    let n = roster.len();
    for (k, bucket) in buckets.iter().enumerate() {
        let t_end = origin + (k as i64 + 1) * opts.dt;
        let mut micro = MicroState::empty(t_end, n);
        for ev in bucket {
            while let Some(s) = snap_iter.next_if(|s| s.ts <= ev.timestamp) {
                apply_snapshot(&mut graph, s);
            }
            apply_event(&mut graph, ev);

            let a = agent_index[ev.author.id.as_str()];
            micro.commit_counts[a] += 1;
            if ev.ci_passed {
                micro.test_results[a].passed += 1;
            } else {
                micro.test_results[a].failed += 1;
            }
            if let Some(r) = &ev.review {
                let j = agent_index[r.reviewer.id.as_str()];
                micro.review_counts[j] += 1;
                micro.comm.record(j, a);
            }
            for parent in &ev.parent_triggers {
                if let Some(&p) = author_of.get(parent.as_str()) {
                    micro.comm.record(p, a);
                }
            }
            for target in &ev.messages_to {
                micro.comm.record(a, agent_index[target.id.as_str()]);
            }
        }
        while let Some(s) = snap_iter.next_if(|s| s.ts < t_end) {
            apply_snapshot(&mut graph, s);
        }
        graph.snapshot_time = t_end;

        let partition = directory_partition(&graph);
        let macro_state = MacroState {
            t: t_end,
            q: quality_index(bucket.iter().copied()),
            c: coupling_density(&graph).unwrap_or(0.0),
            a: architectural_coherence(&graph, &partition)?,
            e: structural_entropy(&graph).unwrap_or(0.0),
            d: defect_rate(bucket.iter().copied()),
            q_filled: false,
            d_filled: false,
        };
        windows.push(Window {
            micro,
            macro_state,
            clustering: clustering_coefficient(&graph),
            link_density: link_density(&graph).unwrap_or(0.0),
        });
    }

    fill_gaps(&mut windows, |m| &mut m.q, |m| &mut m.q_filled);
    fill_gaps(&mut windows, |m| &mut m.d, |m| &mut m.d_filled);

    Ok(StateSeries {
        dt: opts.dt,
        roster,
        windows,
    })
}

/// Forward-fill `None` values, back-filling any leading gap from the first
/// observed value. Filled entries are flagged.
fn fill_gaps(
    windows: &mut [Window],
    value: impl Fn(&mut MacroState) -> &mut Option<f64>,
    flag: impl Fn(&mut MacroState) -> &mut bool,
) {
    let Some(first) = windows.iter_mut().find_map(|w| *value(&mut w.macro_state)) else {
        return;
    };
    let mut carry = first;
    for w in windows.iter_mut() {
        let slot = value(&mut w.macro_state);
        match *slot {
            Some(v) => carry = v,
            None => {
                *slot = Some(carry);
                *flag(&mut w.macro_state) = true;
            }
        }
    }
}

fn apply_snapshot(graph: &mut DependencyGraph, snap: &DependencySnapshot) {
    graph.replace_edges(snap.edges.iter().cloned());
    for m in &snap.modules {
        graph.add_node(m.clone());
    }
    if let Some(loc) = &snap.loc {
        for (m, &w) in loc {
            graph.set_weight(m.clone(), w);
        }
    }
}

fn apply_event(graph: &mut DependencyGraph, ev: &CommitEvent) {
    for m in &ev.modules_touched {
        graph.add_node(m.clone());
    }
    if !ev.modules_touched.is_empty() {
        let share = ev.loc_delta as f64 / ev.modules_touched.len() as f64;
        for m in &ev.modules_touched {
            graph.add_loc(m, share);
        }
    }
    for (from, to) in &ev.deps_removed {
        graph.remove_edge(from, to);
    }
    for (from, to) in &ev.deps_added {
        // self-edges were rejected by validation
        let _ = graph.add_edge(from.clone(), to.clone());
    }
}

const FIXED_COLUMNS: [&str; 10] = [
    "t",
    "Q",
    "C",
    "A",
    "E",
    "D",
    "q_filled",
    "d_filled",
    "clustering",
    "density",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the series as CSV: macro columns, then per-agent commit, review,
/// pass, fail, outgoing and incoming interaction counts.
pub fn write_series_csv<W: Write>(series: &StateSeries, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for prefix in ["c", "r", "pass", "fail", "out", "in"] {
        header.extend(series.roster.iter().map(|a| format!("{prefix}:{}", a.id)));
    }
    out.write_record(&header).map_err(csv_err)?;
    for win in &series.windows {
        let m = &win.macro_state;
        let micro = &win.micro;
        let mut row = vec![
            m.t.to_string(),
            fmt_opt(m.q),
            m.c.to_string(),
            m.a.to_string(),
            m.e.to_string(),
            fmt_opt(m.d),
            u8::from(m.q_filled).to_string(),
            u8::from(m.d_filled).to_string(),
            win.clustering.to_string(),
            win.link_density.to_string(),
        ];
        row.extend(micro.commit_counts.iter().map(u32::to_string));
        row.extend(micro.review_counts.iter().map(u32::to_string));
        row.extend(micro.test_results.iter().map(|t| t.passed.to_string()));
        row.extend(micro.test_results.iter().map(|t| t.failed.to_string()));
        row.extend(micro.comm.row_sums().iter().map(u32::to_string));
        row.extend(micro.comm.col_sums().iter().map(u32::to_string));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Column-oriented view of a series, as read back from the series CSV or
/// taken from a freshly built [`StateSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub agents: Vec<String>,
    pub macro_states: Vec<MacroState>,
    /// Per window: activity per agent, then outgoing and incoming
    /// interaction totals per agent.
    pub micro_features: Vec<Vec<f64>>,
    pub clustering: Vec<f64>,
    pub link_density: Vec<f64>,
}

impl SeriesTable {
    pub fn from_series(series: &StateSeries) -> Self {
        Self {
            agents: series.roster.iter().map(|a| a.id.clone()).collect(),
            macro_states: series.macro_states().cloned().collect(),
            micro_features: micro_features(&series.micro_states().cloned().collect::<Vec<_>>()),
            clustering: series.windows.iter().map(|w| w.clustering).collect(),
            link_density: series.windows.iter().map(|w| w.link_density).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.macro_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macro_states.is_empty()
    }
}

fn parse_cell<T: std::str::FromStr>(line: usize, col: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::MalformedLine {
        line,
        detail: format!("column {col}: cannot parse {raw:?}"),
    })
}

fn parse_opt(line: usize, col: &str, raw: &str) -> Result<Option<f64>> {
    if raw.trim().is_empty() {
        Ok(None)
    } else {
        parse_cell(line, col, raw).map(Some)
    }
}

/// Read a series CSV written by [`write_series_csv`].
pub fn read_series_csv<R: std::io::Read>(r: R) -> Result<SeriesTable> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let col = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedHeader {
                line: 1,
                detail: format!("missing column {name}"),
            })
    };
    let fixed: Vec<usize> = FIXED_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let agents: Vec<String> = header
        .iter()
        .filter_map(|h| h.strip_prefix("c:").map(str::to_string))
        .collect();
    let per_agent = |prefix: &str| -> Result<Vec<usize>> {
        agents.iter().map(|a| col(&format!("{prefix}:{a}"))).collect()
    };
    let (c_cols, r_cols, out_cols, in_cols) = (
        per_agent("c")?,
        per_agent("r")?,
        per_agent("out")?,
        per_agent("in")?,
    );

    let mut table = SeriesTable {
        agents: agents.clone(),
        macro_states: Vec::new(),
        micro_features: Vec::new(),
        clustering: Vec::new(),
        link_density: Vec::new(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err)?;
        let cell = |j: usize| rec.get(j).unwrap_or("");
        let f = |j: usize| parse_cell::<f64>(line, &header[j], cell(j));
        table.macro_states.push(MacroState {
            t: parse_cell(line, "t", cell(fixed[0]))?,
            q: parse_opt(line, "Q", cell(fixed[1]))?,
            c: f(fixed[2])?,
            a: f(fixed[3])?,
            e: f(fixed[4])?,
            d: parse_opt(line, "D", cell(fixed[5]))?,
            q_filled: cell(fixed[6]).trim() == "1",
            d_filled: cell(fixed[7]).trim() == "1",
        });
        table.clustering.push(f(fixed[8])?);
        table.link_density.push(f(fixed[9])?);
        let mut feat = Vec::with_capacity(3 * agents.len());
        for (&c, &r) in c_cols.iter().zip(&r_cols) {
            feat.push(f(c)? + f(r)?);
        }
        for &j in out_cols.iter().chain(&in_cols) {
            feat.push(f(j)?);
        }
        table.micro_features.push(feat);
    }
    Ok(table)
}

/// Write the communication tensors as `t,row,col,count` triples.
pub fn write_tensor_csv<W: Write>(series: &StateSeries, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "row", "col", "count"]).map_err(csv_err)?;
    for win in &series.windows {
        for (i, j, c) in win.micro.comm.triples() {
            out.write_record([
                win.micro.t.to_string(),
                i.to_string(),
                j.to_string(),
                c.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::MalformedLine {
            line: e.position().map_or(0, |p| p.line() as usize),
            detail: e.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{validate_event_log, AgentId, Review};

    fn graph(nodes: &[(&str, f64)], edges: &[(&str, &str)]) -> DependencyGraph {
        DependencyGraph::from_parts(0, nodes.iter().copied(), edges.iter().copied()).unwrap()
    }

    fn scored(id: &str, q: f64) -> CommitEvent {
        CommitEvent {
            quality_score: Some(q),
            ..CommitEvent::new(id, 0, AgentId::human("h"))
        }
    }

    #[test]
    fn quality_mean_and_empty() {
        let evs = [scored("a", 0.8), scored("b", 0.6)];
        assert!((quality_index(&evs).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(quality_index(&[scored("a", 1.0)]), Some(1.0));
        assert_eq!(quality_index(&[]), None);
    }

    #[test]
    fn coupling_follows_the_unnormalized_formula() {
        let abc = [("a", 1.0), ("b", 1.0), ("c", 1.0)];
        let g = graph(&abc, &[("a", "b"), ("b", "c")]);
        assert!((coupling_density(&g).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(coupling_density(&graph(&[("a", 1.0)], &[])).unwrap(), 0.0);
        let ab = graph(&[("a", 1.0), ("b", 1.0)], &[("a", "b"), ("b", "a")]);
        assert_eq!(coupling_density(&ab).unwrap(), 1.0);
        assert_eq!(coupling_density(&DependencyGraph::new(0)), Err(Error::EmptyGraph));
    }

    #[test]
    fn entropy_cases() {
        let four = graph(&[("a", 5.0), ("b", 5.0), ("c", 5.0), ("d", 5.0)], &[]);
        assert!((structural_entropy(&four).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(structural_entropy(&graph(&[("a", 9.0)], &[])).unwrap(), 0.0);
        let skew = graph(&[("a", 2.0), ("b", 1.0), ("c", 1.0)], &[]);
        assert_eq!(structural_entropy(&skew).unwrap(), 1.5);
        let zero = graph(&[("a", 0.0)], &[]);
        assert_eq!(structural_entropy(&zero), Err(Error::ZeroTotalWeight));
    }

    #[test]
    fn modularity_of_complete_graph_in_one_community_is_zero() {
        let nodes = [("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)];
        let g = graph(
            &nodes,
            &[
                ("a", "b"),
                ("a", "c"),
                ("a", "d"),
                ("b", "c"),
                ("b", "d"),
                ("c", "d"),
            ],
        );
        let one: HashMap<_, _> = nodes
            .iter()
            .map(|(n, _)| (n.to_string(), "x".to_string()))
            .collect();
        assert!(architectural_coherence(&g, &one).unwrap().abs() < 1e-12);
        let empty = graph(&nodes, &[]);
        assert_eq!(architectural_coherence(&empty, &one).unwrap(), 0.0);
        let partial: HashMap<_, _> = [("a".to_string(), "x".to_string())].into();
        assert!(matches!(
            architectural_coherence(&g, &partial),
            Err(Error::UncoveredNode(_))
        ));
    }

    #[test]
    fn defect_rate_cases() {
        let mut evs: Vec<_> = (0..10).map(|i| scored(&i.to_string(), 1.0)).collect();
        assert_eq!(defect_rate(&evs), Some(0.0));
        evs[0].ci_passed = false;
        evs[1].ci_passed = false;
        assert_eq!(defect_rate(&evs), Some(0.2));
        assert_eq!(defect_rate(&[]), None);
    }

    const DAY: i64 = 86_400;

    #[test]
    fn ten_day_log_gives_ten_windows() {
        let evs = vec![
            CommitEvent::new("a", 0, AgentId::human("h")).with_modules(["m"]),
            CommitEvent::new("b", 10 * DAY, AgentId::human("h")).with_modules(["m"]),
        ];
        let log = validate_event_log(evs).unwrap();
        let s = build_series(&log, &[], DAY).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.windows[9].micro.commit_counts, [1]);
    }

    #[test]
    fn silent_agents_and_interactions() {
        let reviewed = CommitEvent {
            review: Some(Review {
                reviewer: AgentId::human("j"),
                depth: 1.0,
            }),
            ..CommitEvent::new("root", 0, AgentId::ai("i")).with_modules(["m"])
        };
        let follow = CommitEvent::new("child", 10, AgentId::ai("k"))
            .with_modules(["m"])
            .with_parents(["root"]);
        let late = CommitEvent::new("late", 3 * DAY, AgentId::human("j")).with_modules(["m"]);
        let log = validate_event_log(vec![reviewed, follow, late]).unwrap();
        let s = build_series(&log, &[], DAY).unwrap();
        assert_eq!(s.len(), 3);
        // roster sorted: i, j, k
        let w0 = &s.windows[0].micro;
        assert_eq!(w0.comm.get(1, 0), 1, "reviewer j -> author i");
        assert_eq!(w0.comm.get(0, 2), 1, "trigger author i -> follower k");
        assert_eq!(w0.review_counts, [0, 1, 0]);
        assert_eq!(s.windows[1].micro.commit_counts, [0, 0, 0]);
        assert!(s.windows[1].macro_state.d_filled);
    }

    #[test]
    fn series_tracks_snapshot_edges() {
        let evs = vec![
            CommitEvent::new("a", 0, AgentId::human("h")).with_modules(["x"]),
            CommitEvent::new("b", 2 * DAY, AgentId::human("h")).with_modules(["y"]),
        ];
        let log = validate_event_log(evs).unwrap();
        let mut snap = DependencySnapshot::new(DAY + 5, vec![("x".into(), "y".into())]);
        snap.loc = Some([("x".to_string(), 10.0), ("y".to_string(), 10.0)].into());
        let s = build_series(&log, &[snap], DAY).unwrap();
        assert_eq!(s.windows[0].macro_state.c, 0.0);
        assert_eq!(s.windows[1].macro_state.c, 0.5);
        assert_eq!(s.windows[1].macro_state.e, 1.0);
    }

    #[test]
    fn empty_log_is_an_error() {
        let log = validate_event_log(vec![]).unwrap();
        assert_eq!(build_series(&log, &[], DAY), Err(Error::EmptyLog));
    }
}
