use std::fmt::Write;

use emergence_lab::ingest::{emit_jsonl, parse_git_log, parse_jsonl, AiAuthorPatterns};
use emergence_lab::sim::{self, SimConfig};
use emergence_lab::state::{validate_event_log, AgentKind};

#[test]
fn thousand_commit_log_survives_emit_and_parse() {
    let cfg = SimConfig {
        seed: 11,
        steps: 120,
        ..SimConfig::preset("high-agent").unwrap()
    };
    let run = sim::run(&cfg);
    let events = &run.log.events()[..1000];
    let text = emit_jsonl(events);
    assert_eq!(text.lines().count(), 1000);
    let back = parse_jsonl(text.as_bytes()).unwrap();
    assert_eq!(back, events);
    assert!(validate_event_log(back).is_ok());
}

/// Fifty commits with a deterministic mix of text and binary files.
fn git_fixture() -> (String, Vec<i64>) {
    let mut text = String::new();
    let mut sums = Vec::new();
    for c in 0..50i64 {
        let author = if c % 3 == 0 { "bot-builder" } else { "dana" };
        writeln!(text, "H|c{c:03}|{}|{author}", 1_700_000_000 + c * 3_600).unwrap();
        let mut sum = 0;
        for f in 0..(c % 4 + 1) {
            let (a, d) = ((c * 7 + f * 3) % 40, (c * 5 + f) % 25);
            writeln!(text, "{a}\t{d}\tsrc/mod{}/file{f}.rs", (c + f) % 5).unwrap();
            sum += a - d;
        }
        if c % 10 == 0 {
            writeln!(text, "-\t-\tassets/logo.png").unwrap();
        }
        text.push('\n');
        sums.push(sum);
    }
    (text, sums)
}

#[test]
fn fifty_commit_git_log() {
    let (text, sums) = git_fixture();
    let patterns = AiAuthorPatterns::parse_list("^bot-").unwrap();
    let events = parse_git_log(&text, &patterns).unwrap();
    assert_eq!(events.len(), 50);
    let got: Vec<i64> = events.iter().map(|e| e.loc_delta).collect();
    assert_eq!(got, sums);
    assert_eq!(
        events.iter().filter(|e| e.author.kind == AgentKind::Ai).count(),
        17
    );
    assert!(events.iter().all(|e| e.ci_passed && e.review.is_none()));
    // binary-only paths carry no line counts and touch no module
    assert!(events
        .iter()
        .all(|e| e.modules_touched.iter().all(|m| m == "src")));
}
