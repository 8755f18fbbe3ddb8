//! Turn a `git log --numstat` dump plus CI and review sidecars into a
//! validated event log.

use std::io::Cursor;

use emergence_lab::ingest::{
    emit_jsonl, merge_evidence, parse_ci_records, parse_git_log, parse_review_records, AiAuthorPatterns,
};
use emergence_lab::state::validate_event_log;

// produced by: git log --numstat --format='H|%H|%at|%an <%ae>'
const GIT: &str = "\
H|a1|1704067200|alice <alice@example.org>
12\t3\tcore/lib.rs
4\t0\tdocs/guide.md

H|b2|1704070800|codebot[bot] <bot@example.org>
40\t2\tcore/parser.rs
-\t-\tassets/logo.png

H|c3|1704074400|codebot[bot] <bot@example.org>
5\t5\tapi/routes.rs
";

const CI: &str = r#"{"commit_id":"b2","passed":false,"rework":true}
{"commit_id":"c3","passed":true,"complexity_delta":2.5}
"#;

const REVIEWS: &str = r#"{"commit_id":"b2","reviewer":"alice","depth":0.3}
{"commit_id":"b2","reviewer":"bob","depth":0.8}
"#;

fn main() -> emergence_lab::Result<()> {
    let patterns = AiAuthorPatterns::parse_list(r"\[bot\]")?;
    let events = parse_git_log(GIT, &patterns)?;
    let ci = parse_ci_records(Cursor::new(CI))?;
    let reviews = parse_review_records(Cursor::new(REVIEWS))?;
    let merged = merge_evidence(events, &ci, &reviews, &[])?;
    let log = validate_event_log(merged.events)?;

    for e in log.events() {
        println!(
            "{} {:<6} loc {:+4} modules {:?} ci {} review {:?}",
            e.commit_id,
            e.author.kind.to_string(),
            e.loc_delta,
            e.modules_touched,
            e.ci_passed,
            e.review.as_ref().map(|r| (r.reviewer.id.as_str(), r.depth)),
        );
    }
    println!("AI share {:.2}\n", log.ai_share());
    print!("{}", emit_jsonl(log.events()));
    Ok(())
}
