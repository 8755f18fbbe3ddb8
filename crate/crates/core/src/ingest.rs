//! Readers for repository evidence: the canonical JSONL event format, git
//! numstat dumps, CI and review sidecars, and dependency snapshots.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use regex::Regex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{AgentId, AgentKind, CommitEvent, DepEdge, EventLog, Review};

const REQUIRED: [&str; 6] = ["commit_id", "ts", "author", "author_kind", "modules", "ci_passed"];

/// Wire form of one canonical event line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonEvent {
    commit_id: String,
    ts: i64,
    author: String,
    author_kind: AgentKind,
    modules: Vec<String>,
    ci_passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    deps_added: Vec<DepEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    deps_removed: Vec<DepEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parents_triggered_by: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    review_depth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reviewer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reviewer_kind: Option<AgentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quality: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complexity_delta: Option<f64>,
    #[serde(default)]
    loc_delta: i64,
    #[serde(default)]
    rework: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    messages_to: Vec<AgentId>,
}

impl JsonEvent {
    fn into_event(self, line: usize) -> Result<CommitEvent> {
        let review = match (self.reviewer, self.review_depth) {
            (Some(id), depth) => Some(Review {
                reviewer: AgentId::new(id, self.reviewer_kind.unwrap_or(AgentKind::Human)),
                depth: depth.unwrap_or(1.0),
            }),
            (None, Some(_)) => {
                return Err(Error::MissingRequiredField {
                    line,
                    field: "reviewer".into(),
                })
            }
            (None, None) => None,
        };
        Ok(CommitEvent {
            commit_id: self.commit_id,
            timestamp: self.ts,
            author: AgentId::new(self.author, self.author_kind),
            modules_touched: self.modules.into_iter().collect(),
            deps_added: self.deps_added,
            deps_removed: self.deps_removed,
            parent_triggers: self.parents_triggered_by,
            ci_passed: self.ci_passed,
            required_rework: self.rework,
            review,
            quality_score: self.quality,
            complexity_delta: self.complexity_delta,
            loc_delta: self.loc_delta,
            messages_to: self.messages_to,
        })
    }

    fn from_event(ev: &CommitEvent) -> Self {
        Self {
            commit_id: ev.commit_id.clone(),
            ts: ev.timestamp,
            author: ev.author.id.clone(),
            author_kind: ev.author.kind,
            modules: ev.modules_touched.iter().cloned().collect(),
            ci_passed: ev.ci_passed,
            deps_added: ev.deps_added.clone(),
            deps_removed: ev.deps_removed.clone(),
            parents_triggered_by: ev.parent_triggers.clone(),
            review_depth: ev.review.as_ref().map(|r| r.depth),
            reviewer: ev.review.as_ref().map(|r| r.reviewer.id.clone()),
            reviewer_kind: ev.review.as_ref().map(|r| r.reviewer.kind),
            quality: ev.quality_score,
            complexity_delta: ev.complexity_delta,
            loc_delta: ev.loc_delta,
            rework: ev.required_rework,
            messages_to: ev.messages_to.clone(),
        }
    }
}

/// Parse newline-delimited records, skipping blank lines. Line numbers in
/// errors are 1-based.
fn parse_lines<R, T, F>(reader: R, mut convert: F) -> Result<Vec<T>>
where
    R: BufRead,
    F: FnMut(serde_json::Value, usize) -> Result<T>,
{
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            detail: e.to_string(),
        })?;
        if !value.is_object() {
            return Err(Error::MalformedLine {
                line: line_no,
                detail: "expected a JSON object".into(),
            });
        }
        out.push(convert(value, line_no)?);
    }
    Ok(out)
}

fn require(value: &serde_json::Value, fields: &[&str], line: usize) -> Result<()> {
    for field in fields {
        if value.get(field).is_none_or(|v| v.is_null()) {
            return Err(Error::MissingRequiredField {
                line,
                field: (*field).to_string(),
            });
        }
    }
    Ok(())
}

fn decode<T: DeserializeOwned>(value: serde_json::Value, line: usize) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::MalformedLine {
        line,
        detail: e.to_string(),
    })
}

/// Parse the canonical event JSONL format. Unknown fields are ignored and
/// input order is preserved.
pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<Vec<CommitEvent>> {
    parse_lines(reader, |value, line| {
        require(&value, &REQUIRED, line)?;
        decode::<JsonEvent>(value, line)?.into_event(line)
    })
}

/// Serialize events in the canonical JSONL format, one object per line.
pub fn emit_jsonl<'a, I>(events: I) -> String
where
    I: IntoIterator<Item = &'a CommitEvent>,
{
    let mut out = String::new();
    for ev in events {
        let line =
            serde_json::to_string(&JsonEvent::from_event(ev)).expect("event fields are always serializable");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_jsonl<W: std::io::Write>(log: &EventLog, mut w: W) -> Result<()> {
    w.write_all(emit_jsonl(log).as_bytes())?;
    Ok(())
}

/// Module dependency edges observed at one instant. `loc` and `modules`
/// are optional extensions carrying node weights and isolated nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencySnapshot {
    pub ts: i64,
    pub edges: Vec<DepEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loc: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modules: Vec<String>,
}

impl DependencySnapshot {
    pub fn new(ts: i64, edges: Vec<DepEdge>) -> Self {
        Self {
            ts,
            edges,
            loc: None,
            modules: Vec::new(),
        }
    }

    fn edge_set(&self) -> BTreeSet<DepEdge> {
        self.edges.iter().cloned().collect()
    }
}

pub fn parse_dep_snapshots<R: BufRead>(reader: R) -> Result<Vec<DependencySnapshot>> {
    parse_lines(reader, |value, line| {
        require(&value, &["ts", "edges"], line)?;
        let snap: DependencySnapshot = decode(value, line)?;
        if let Some((a, _)) = snap.edges.iter().find(|(a, b)| a == b) {
            return Err(Error::MalformedLine {
                line,
                detail: format!("self-edge on `{a}`"),
            });
        }
        Ok(snap)
    })
}

/// CI outcome for one commit. `quality` and `complexity_delta` carry
/// optional static-analysis results from the same pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRecord {
    pub commit_id: String,
    pub passed: bool,
    #[serde(default)]
    pub rework: Option<bool>,
    #[serde(default)]
    pub quality: Option<f64>,
    #[serde(default)]
    pub complexity_delta: Option<f64>,
}

pub fn parse_ci_records<R: BufRead>(reader: R) -> Result<Vec<CiRecord>> {
    parse_lines(reader, |value, line| {
        require(&value, &["commit_id", "passed"], line)?;
        decode(value, line)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub commit_id: String,
    pub reviewer: String,
    #[serde(default)]
    pub reviewer_kind: Option<AgentKind>,
    pub depth: f64,
}

pub fn parse_review_records<R: BufRead>(reader: R) -> Result<Vec<ReviewRecord>> {
    parse_lines(reader, |value, line| {
        require(&value, &["commit_id", "reviewer", "depth"], line)?;
        decode(value, line)
    })
}

/// Regular expressions identifying AI authors in git histories.
#[derive(Debug, Clone, Default)]
pub struct AiAuthorPatterns(Vec<Regex>);

impl AiAuthorPatterns {
    pub fn new<I, S>(patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        patterns
            .into_iter()
            .map(|p| {
                Regex::new(p.as_ref())
                    .map_err(|e| Error::Config(format!("bad author pattern `{}`: {e}", p.as_ref())))
            })
            .collect::<Result<_>>()
            .map(Self)
    }

    /// Comma-separated list, blank entries ignored.
    pub fn parse_list(list: &str) -> Result<Self> {
        Self::new(list.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    pub fn kind_of(&self, author: &str) -> AgentKind {
        if self.0.iter().any(|re| re.is_match(author)) {
            AgentKind::Ai
        } else {
            AgentKind::Human
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStat {
    /// `None` for binary files (`-` in numstat output).
    pub lines: Option<(u64, u64)>,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGitRecord {
    pub commit_id: String,
    pub timestamp: i64,
    pub author: String,
    pub files: Vec<FileStat>,
}

impl RawGitRecord {
    pub fn loc_delta(&self) -> i64 {
        self.files
            .iter()
            .filter_map(|f| f.lines)
            .map(|(a, d)| a as i64 - d as i64)
            .sum()
    }

    pub fn into_event(self, patterns: &AiAuthorPatterns) -> CommitEvent {
        let loc_delta = self.loc_delta();
        let modules = self
            .files
            .iter()
            .filter(|f| f.lines.is_some())
            .map(|f| module_of(&f.path));
        let kind = patterns.kind_of(&self.author);
        CommitEvent {
            loc_delta,
            ..CommitEvent::new(self.commit_id, self.timestamp, AgentId::new(self.author, kind))
                .with_modules(modules)
        }
    }
}

/// Module identity is the first path segment; files at the repository root
/// belong to the `(root)` module. Rename arrows keep the new path.
pub fn module_of(path: &str) -> String {
    let path = match path.find("=>") {
        Some(pos) if !path.contains('{') => path[pos + 2..].trim(),
        _ => path,
    };
    let path = path.trim_start_matches('{');
    match path.split_once('/') {
        Some((first, _)) if !first.is_empty() => first.to_string(),
        _ => "(root)".to_string(),
    }
}

/// Parse a `H|<id>|<unix-ts>|<author>` + numstat dump into raw records.
pub fn parse_git_records(text: &str) -> Result<Vec<RawGitRecord>> {
    let mut records: Vec<RawGitRecord> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("H|") {
            let mut parts = rest.splitn(3, '|');
            let (id, ts, author) = match (parts.next(), parts.next(), parts.next()) {
                (Some(id), Some(ts), Some(author)) if !id.is_empty() && !author.is_empty() => {
                    (id, ts, author)
                }
                _ => {
                    return Err(Error::MalformedHeader {
                        line: line_no,
                        detail: format!("expected H|id|ts|author, got `{line}`"),
                    })
                }
            };
            let timestamp = ts.trim().parse::<i64>().map_err(|_| Error::MalformedHeader {
                line: line_no,
                detail: format!("non-numeric timestamp `{ts}`"),
            })?;
            records.push(RawGitRecord {
                commit_id: id.to_string(),
                timestamp,
                author: author.to_string(),
                files: Vec::new(),
            });
            continue;
        }
        let Some(current) = records.last_mut() else {
            return Err(Error::MalformedHeader {
                line: line_no,
                detail: "numstat line before any commit header".into(),
            });
        };
        let mut cols = line.splitn(3, '\t');
        let (added, deleted, path) = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(d), Some(p)) => (a, d, p),
            _ => {
                return Err(Error::NonNumericStat {
                    line: line_no,
                    detail: format!("expected <added>\\t<deleted>\\t<path>, got `{line}`"),
                })
            }
        };
        let lines = if added == "-" && deleted == "-" {
            None
        } else {
            let parse = |s: &str| {
                s.parse::<u64>().map_err(|_| Error::NonNumericStat {
                    line: line_no,
                    detail: format!("`{s}`"),
                })
            };
            Some((parse(added)?, parse(deleted)?))
        };
        current.files.push(FileStat {
            lines,
            path: path.to_string(),
        });
    }
    Ok(records)
}

/// Parse a git numstat dump into partial events: CI defaults to passed,
/// review and quality stay empty until [`merge_evidence`] fills them.
pub fn parse_git_log(text: &str, patterns: &AiAuthorPatterns) -> Result<Vec<CommitEvent>> {
    Ok(parse_git_records(text)?
        .into_iter()
        .map(|r| r.into_event(patterns))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MergeReport {
    pub events: Vec<CommitEvent>,
    pub unmatched_ci: Vec<String>,
    pub unmatched_reviews: Vec<String>,
    /// Snapshot transitions with no commit between them.
    pub unattributed_dep_changes: usize,
}

/// Join sidecar evidence onto git events by commit id.
///
/// Dependency changes between consecutive snapshots are attributed to the
/// latest commit in `(previous.ts, next.ts]`. The result does not depend on
/// the order of any input list.
pub fn merge_evidence(
    git_events: Vec<CommitEvent>,
    ci: &[CiRecord],
    reviews: &[ReviewRecord],
    snapshots: &[DependencySnapshot],
) -> Result<MergeReport> {
    let mut events = git_events;
    events.sort_by(|a, b| (a.timestamp, &a.commit_id).cmp(&(b.timestamp, &b.commit_id)));
    let index: HashMap<String, usize> = events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.commit_id.clone(), i))
        .collect();

    let mut report = MergeReport::default();

    let mut ci_by_commit: BTreeMap<&str, &CiRecord> = BTreeMap::new();
    for rec in ci {
        if let Some(prev) = ci_by_commit.insert(&rec.commit_id, rec) {
            if prev.passed != rec.passed {
                return Err(Error::ConflictingEvidence {
                    commit: rec.commit_id.clone(),
                    detail: "CI records disagree on the outcome".into(),
                });
            }
        }
    }
    for (id, rec) in ci_by_commit {
        let Some(&i) = index.get(id) else {
            report.unmatched_ci.push(id.to_string());
            continue;
        };
        let ev = &mut events[i];
        ev.ci_passed = rec.passed;
        ev.required_rework |= rec.rework.unwrap_or(false);
        ev.quality_score = rec.quality.or(ev.quality_score);
        ev.complexity_delta = rec.complexity_delta.or(ev.complexity_delta);
    }

    // deepest review wins; ties go to the smallest reviewer id
    let mut best: BTreeMap<&str, &ReviewRecord> = BTreeMap::new();
    for rec in reviews {
        best.entry(&rec.commit_id)
            .and_modify(|cur| {
                if rec.depth > cur.depth || (rec.depth == cur.depth && rec.reviewer < cur.reviewer) {
                    *cur = rec;
                }
            })
            .or_insert(rec);
    }
    for (id, rec) in best {
        let Some(&i) = index.get(id) else {
            report.unmatched_reviews.push(id.to_string());
            continue;
        };
        events[i].review = Some(Review {
            reviewer: AgentId::new(
                rec.reviewer.clone(),
                rec.reviewer_kind.unwrap_or(AgentKind::Human),
            ),
            depth: rec.depth,
        });
    }

    let mut snaps: Vec<&DependencySnapshot> = snapshots.iter().collect();
    snaps.sort_by_key(|s| (s.ts, s.edges.clone()));
    for pair in snaps.windows(2) {
        let (prev, next) = (pair[0].edge_set(), pair[1].edge_set());
        let added: Vec<DepEdge> = next.difference(&prev).cloned().collect();
        let removed: Vec<DepEdge> = prev.difference(&next).cloned().collect();
        if added.is_empty() && removed.is_empty() {
            continue;
        }
        let target = events
            .iter()
            .rposition(|e| e.timestamp > pair[0].ts && e.timestamp <= pair[1].ts);
        match target {
            Some(i) => {
                events[i].deps_added.extend(added);
                events[i].deps_removed.extend(removed);
            }
            None => report.unattributed_dep_changes += 1,
        }
    }

    report.events = events;
    Ok(report)
}
