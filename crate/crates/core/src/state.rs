//! Domain types shared by every stage: agents, commit events, the micro and
//! macro state vectors, and module dependency graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AgentKind {
    Ai,
    Human,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Ai => "AI",
            AgentKind::Human => "HUMAN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub id: String,
    pub kind: AgentKind,
}

impl AgentId {
    pub fn new(id: impl Into<String>, kind: AgentKind) -> Self {
        Self { id: id.into(), kind }
    }

    pub fn ai(id: impl Into<String>) -> Self {
        Self::new(id, AgentKind::Ai)
    }

    pub fn human(id: impl Into<String>) -> Self {
        Self::new(id, AgentKind::Human)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub reviewer: AgentId,
    /// Fraction of a full semantic review, in `[0, 1]`.
    pub depth: f64,
}

/// Ordered module pair `(from, to)`: `from` imports `to`.
pub type DepEdge = (String, String);

/// One atomic ecosystem action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitEvent {
    pub commit_id: String,
    /// Seconds since the epoch.
    pub timestamp: i64,
    pub author: AgentId,
    pub modules_touched: BTreeSet<String>,
    pub deps_added: Vec<DepEdge>,
    pub deps_removed: Vec<DepEdge>,
    /// Commits that causally triggered this one.
    pub parent_triggers: Vec<String>,
    pub ci_passed: bool,
    pub required_rework: bool,
    pub review: Option<Review>,
    /// Static-analysis score in `[0, 1]`; `None` when no score was supplied.
    pub quality_score: Option<f64>,
    pub complexity_delta: Option<f64>,
    pub loc_delta: i64,
    /// Explicit messages sent by the author to other agents.
    pub messages_to: Vec<AgentId>,
}

impl CommitEvent {
    /// A minimal passing commit; the remaining fields can be filled in
    /// with struct-update syntax.
    pub fn new(commit_id: impl Into<String>, timestamp: i64, author: AgentId) -> Self {
        Self {
            commit_id: commit_id.into(),
            timestamp,
            author,
            modules_touched: BTreeSet::new(),
            deps_added: Vec::new(),
            deps_removed: Vec::new(),
            parent_triggers: Vec::new(),
            ci_passed: true,
            required_rework: false,
            review: None,
            quality_score: None,
            complexity_delta: None,
            loc_delta: 0,
            messages_to: Vec::new(),
        }
    }

    pub fn with_modules<I, S>(mut self, modules: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.modules_touched = modules.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_parents<I, S>(mut self, parents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.parent_triggers = parents.into_iter().map(Into::into).collect();
        self
    }

    fn sort_key(&self) -> (i64, &str) {
        (self.timestamp, self.commit_id.as_str())
    }
}

/// A commit log that has passed [`validate_event_log`]: ordered by
/// `(timestamp, commit_id)` with every invariant checked.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EventLog {
    events: Vec<CommitEvent>,
}

impl EventLog {
    pub fn events(&self) -> &[CommitEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<CommitEvent> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// All authors, reviewers and message recipients, sorted by id.
    pub fn roster(&self) -> Vec<AgentId> {
        let mut seen: BTreeMap<&str, AgentKind> = BTreeMap::new();
        for ev in &self.events {
            seen.insert(&ev.author.id, ev.author.kind);
            if let Some(r) = &ev.review {
                seen.insert(&r.reviewer.id, r.reviewer.kind);
            }
            for m in &ev.messages_to {
                seen.insert(&m.id, m.kind);
            }
        }
        seen.into_iter()
            .map(|(id, kind)| AgentId::new(id, kind))
            .collect()
    }

    /// Fraction of commits authored by AI agents; 0 for an empty log.
    pub fn ai_share(&self) -> f64 {
        if self.events.is_empty() {
            return 0.0;
        }
        let ai = self
            .events
            .iter()
            .filter(|e| e.author.kind == AgentKind::Ai)
            .count();
        ai as f64 / self.events.len() as f64
    }

    pub fn span(&self) -> Option<(i64, i64)> {
        Some((self.events.first()?.timestamp, self.events.last()?.timestamp))
    }
}

impl<'a> IntoIterator for &'a EventLog {
    type Item = &'a CommitEvent;
    type IntoIter = std::slice::Iter<'a, CommitEvent>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

fn out_of_range(ev: &CommitEvent, field: &'static str, detail: String) -> Error {
    Error::FieldOutOfRange {
        commit: ev.commit_id.clone(),
        field,
        detail,
    }
}

fn check_unit(ev: &CommitEvent, field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(out_of_range(ev, field, format!("{v} not in [0, 1]")))
    }
}

fn check_fields(ev: &CommitEvent) -> Result<()> {
    if ev.commit_id.is_empty() {
        return Err(out_of_range(ev, "commit_id", "empty".into()));
    }
    if ev.author.id.is_empty() {
        return Err(out_of_range(ev, "author", "empty agent id".into()));
    }
    if let Some(q) = ev.quality_score {
        check_unit(ev, "quality_score", q)?;
    }
    if let Some(r) = &ev.review {
        check_unit(ev, "review.depth", r.depth)?;
        if r.reviewer.id.is_empty() {
            return Err(out_of_range(ev, "review.reviewer", "empty agent id".into()));
        }
    }
    if let Some(c) = ev.complexity_delta {
        if !c.is_finite() {
            return Err(out_of_range(ev, "complexity_delta", format!("{c}")));
        }
    }
    for (from, to) in ev.deps_added.iter().chain(&ev.deps_removed) {
        if from == to {
            return Err(out_of_range(ev, "deps", format!("self-edge on `{from}`")));
        }
    }
    Ok(())
}

/// Sort a raw event list into canonical order and check every invariant.
///
/// Validation is idempotent, and the stable sort on `(timestamp, commit_id)`
/// makes the output independent of input order.
pub fn validate_event_log(mut events: Vec<CommitEvent>) -> Result<EventLog> {
    events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let mut position: HashMap<&str, usize> = HashMap::with_capacity(events.len());
    for (i, ev) in events.iter().enumerate() {
        check_fields(ev)?;
        if position.insert(ev.commit_id.as_str(), i).is_some() {
            return Err(Error::DuplicateId(ev.commit_id.clone()));
        }
    }

    let mut kinds: HashMap<&str, AgentKind> = HashMap::new();
    for (i, ev) in events.iter().enumerate() {
        for parent in &ev.parent_triggers {
            match position.get(parent.as_str()) {
                Some(&p) if p < i => {}
                _ => {
                    return Err(Error::DanglingTrigger {
                        commit: ev.commit_id.clone(),
                        parent: parent.clone(),
                    })
                }
            }
        }
        let agents = std::iter::once(&ev.author)
            .chain(ev.review.as_ref().map(|r| &r.reviewer))
            .chain(&ev.messages_to);
        for agent in agents {
            match kinds.insert(agent.id.as_str(), agent.kind) {
                Some(k) if k != agent.kind => return Err(Error::InconsistentAgentKind(agent.id.clone())),
                _ => {}
            }
        }
    }
    Ok(EventLog { events })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestTally {
    pub passed: u32,
    pub failed: u32,
}

/// Square matrix of directed agent-to-agent interaction counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommTensor {
    n: usize,
    counts: Vec<u32>,
}

impl CommTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> u32 {
        self.counts[from * self.n + to]
    }

    /// Self-interactions are dropped: the diagonal stays zero.
    pub fn record(&mut self, from: usize, to: usize) {
        if from != to {
            self.counts[from * self.n + to] += 1;
        }
    }

    pub fn row_sums(&self) -> Vec<u32> {
        self.counts
            .chunks(self.n.max(1))
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u32> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Non-zero entries as `(row, col, count)` triples in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(k, &c)| (k / self.n, k % self.n, c))
    }
}

/// Agent-level state `m(t)` for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroState {
    /// Window end time.
    pub t: i64,
    pub commit_counts: Vec<u32>,
    pub review_counts: Vec<u32>,
    pub test_results: Vec<TestTally>,
    pub comm: CommTensor,
}

impl MicroState {
    pub fn empty(t: i64, n: usize) -> Self {
        Self {
            t,
            commit_counts: vec![0; n],
            review_counts: vec![0; n],
            test_results: vec![TestTally::default(); n],
            comm: CommTensor::zeros(n),
        }
    }
}

/// Ecosystem-level state `M(t) = (Q, C, A, E, D)` for one window.
///
/// `q` and `d` are `None` when neither the window nor any earlier window
/// had data; otherwise gaps are forward-filled and flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub t: i64,
    pub q: Option<f64>,
    pub c: f64,
    pub a: f64,
    pub e: f64,
    pub d: Option<f64>,
    pub q_filled: bool,
    pub d_filled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub micro: MicroState,
    pub macro_state: MacroState,
    /// Transitivity of the dependency graph at the window end.
    pub clustering: f64,
    /// Directed link density at the window end; 0 with fewer than two modules.
    pub link_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSeries {
    /// Window length in seconds.
    pub dt: i64,
    pub roster: Vec<AgentId>,
    pub windows: Vec<Window>,
}

impl StateSeries {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn macro_states(&self) -> impl Iterator<Item = &MacroState> {
        self.windows.iter().map(|w| &w.macro_state)
    }

    pub fn micro_states(&self) -> impl Iterator<Item = &MicroState> {
        self.windows.iter().map(|w| &w.micro)
    }
}

/// Module dependency digraph at one point in time. Edges have multiplicity
/// one and never loop; node weights are lines of code.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub snapshot_time: i64,
    nodes: BTreeMap<String, f64>,
    edges: BTreeSet<DepEdge>,
}

impl DependencyGraph {
    pub fn new(snapshot_time: i64) -> Self {
        Self {
            snapshot_time,
            ..Self::default()
        }
    }

    /// Build from explicit node weights and edges; edge endpoints must be nodes.
    pub fn from_parts<N, E, S>(snapshot_time: i64, nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = (S, f64)>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut g = Self::new(snapshot_time);
        for (name, w) in nodes {
            g.set_weight(name, w);
        }
        for (from, to) in edges {
            let (from, to) = (from.into(), to.into());
            for end in [&from, &to] {
                if !g.nodes.contains_key(end) {
                    return Err(Error::InvalidParameter(format!(
                        "edge endpoint `{end}` is not a node"
                    )));
                }
            }
            g.add_edge(from, to)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, name: impl Into<String>) {
        self.nodes.entry(name.into()).or_insert(0.0);
    }

    pub fn set_weight(&mut self, name: impl Into<String>, loc: f64) {
        self.nodes.insert(name.into(), loc.max(0.0));
    }

    pub fn add_loc(&mut self, name: &str, delta: f64) {
        let w = self.nodes.entry(name.to_string()).or_insert(0.0);
        *w = (*w + delta).max(0.0);
    }

    /// Adds an edge, creating missing endpoints. Returns whether it was new.
    pub fn add_edge(&mut self, from: impl Into<String>, to: impl Into<String>) -> Result<bool> {
        let (from, to) = (from.into(), to.into());
        if from == to {
            return Err(Error::InvalidParameter(format!("self-edge on `{from}`")));
        }
        self.add_node(from.clone());
        self.add_node(to.clone());
        Ok(self.edges.insert((from, to)))
    }

    pub fn remove_edge(&mut self, from: &str, to: &str) -> bool {
        self.edges.remove(&(from.to_string(), to.to_string()))
    }

    pub fn replace_edges(&mut self, edges: impl IntoIterator<Item = DepEdge>) {
        self.edges.clear();
        for (from, to) in edges {
            if from != to {
                self.add_node(from.clone());
                self.add_node(to.clone());
                self.edges.insert((from, to));
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, f64)> + Clone {
        self.nodes.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn contains_edge(&self, from: &str, to: &str) -> bool {
        self.edges.contains(&(from.to_string(), to.to_string()))
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.nodes.get(name).copied()
    }

    /// Undirected simple projection as sorted neighbour sets, indexed in
    /// node order.
    pub fn undirected_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let index: HashMap<&str, usize> = self
            .nodes
            .keys()
            .enumerate()
            .map(|(i, k)| (k.as_str(), i))
            .collect();
        let mut adj = vec![BTreeSet::new(); self.nodes.len()];
        for (a, b) in &self.edges {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            adj[i].insert(j);
            adj[j].insert(i);
        }
        adj
    }

    pub fn in_degree(&self, name: &str) -> usize {
        self.edges.iter().filter(|(_, to)| to == name).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(id: &str, ts: i64) -> CommitEvent {
        CommitEvent::new(id, ts, AgentId::human("alice"))
    }

    #[test]
    fn sorts_out_of_order_events() {
        let log = validate_event_log(vec![ev("c", 30), ev("a", 10), ev("b", 20)]).unwrap();
        let ids: Vec<_> = log.events().iter().map(|e| e.commit_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn ties_break_on_commit_id() {
        let log = validate_event_log(vec![ev("z", 5), ev("m", 5), ev("a", 9)]).unwrap();
        let ids: Vec<_> = log.events().iter().map(|e| e.commit_id.as_str()).collect();
        assert_eq!(ids, ["m", "z", "a"]);
    }

    #[test]
    fn rejects_quality_above_one() {
        let bad = CommitEvent {
            quality_score: Some(1.5),
            ..ev("a", 1)
        };
        assert!(matches!(
            validate_event_log(vec![bad]),
            Err(Error::FieldOutOfRange {
                field: "quality_score",
                ..
            })
        ));
    }

    #[test]
    fn rejects_trigger_pointing_forward() {
        let early = ev("a", 1).with_parents(["b"]);
        assert!(matches!(
            validate_event_log(vec![early, ev("b", 2)]),
            Err(Error::DanglingTrigger { .. })
        ));
        let unknown = ev("a", 1).with_parents(["nope"]);
        assert!(matches!(
            validate_event_log(vec![unknown]),
            Err(Error::DanglingTrigger { .. })
        ));
    }

    #[test]
    fn rejects_duplicates_and_kind_flips() {
        assert_eq!(
            validate_event_log(vec![ev("a", 1), ev("a", 2)]),
            Err(Error::DuplicateId("a".into()))
        );
        let flip = CommitEvent::new("b", 2, AgentId::ai("alice"));
        assert_eq!(
            validate_event_log(vec![ev("a", 1), flip]),
            Err(Error::InconsistentAgentKind("alice".into()))
        );
    }

    #[test]
    fn roster_includes_reviewers() {
        let reviewed = CommitEvent {
            review: Some(Review {
                reviewer: AgentId::human("bob"),
                depth: 0.5,
            }),
            ..CommitEvent::new("a", 1, AgentId::ai("bot"))
        };
        let log = validate_event_log(vec![reviewed]).unwrap();
        let ids: Vec<_> = log.roster().into_iter().map(|a| a.id).collect();
        assert_eq!(ids, ["bob", "bot"]);
    }

    #[test]
    fn tensor_keeps_zero_diagonal() {
        let mut t = CommTensor::zeros(2);
        t.record(0, 0);
        t.record(0, 1);
        assert_eq!(t.get(0, 0), 0);
        assert_eq!(t.row_sums(), [1, 0]);
        assert_eq!(t.col_sums(), [0, 1]);
    }

    #[test]
    fn graph_rejects_self_edges() {
        let mut g = DependencyGraph::new(0);
        assert!(g.add_edge("a", "a").is_err());
        assert!(g.add_edge("a", "b").unwrap());
        assert!(!g.add_edge("a", "b").unwrap());
        assert_eq!(g.edge_count(), 1);
    }
}
