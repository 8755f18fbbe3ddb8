//! Command-line front end. Every subcommand maps library errors onto the
//! exit-code contract: 0 success, 2 usage or validation, 3 I/O, 4 conflicting
//! evidence.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bundle::{self, BundlePlan, BundleView, SIM_DT};
use crate::coarse::{build_series, read_series_csv, write_series_csv};
use crate::ei::{emergence_from_table, PipelineOptions};
use crate::error::{Error, Result};
use crate::graph::{extract_cascades, write_cascades_csv, CascadeOptions};
use crate::harness::{
    report_json, run_battery, HarnessConfig, LegibilityProxy, Proposition, PropositionVerdict,
};
use crate::ingest::{
    merge_evidence, parse_ci_records, parse_dep_snapshots, parse_git_log, parse_jsonl, parse_review_records,
    write_jsonl, AiAuthorPatterns,
};
use crate::plot;
use crate::sim::{self, parse_truth_jsonl, SimConfig, StepTruth};
use crate::state::{validate_event_log, AgentKind, EventLog};

#[derive(Debug, Parser)]
#[command(
    name = "emergence-lab",
    version,
    about = "Measure and simulate multi-agent software ecosystems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic event log with ground truth.
    Simulate(SimulateArgs),
    /// Validate a git or JSONL history, join sidecar evidence, emit canonical JSONL.
    Ingest {
        #[command(subcommand)]
        source: IngestSource,
    },
    /// Build the per-window state series and the cascade table.
    Measure(MeasureArgs),
    /// Compare effective information of the micro and macro levels.
    Ei(EiArgs),
    /// Run the proposition battery.
    TestPropositions(TestArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(true).args(["config", "preset"]))]
pub struct SimulateArgs {
    /// Flat key = value parameter file; a `preset` key picks the base.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides the seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, required_unless_present = "bundle")]
    pub out: Option<PathBuf>,
    /// Per-step ground truth as JSONL.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Write a whole battery bundle (arms, ramp, ensemble) into this directory.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum IngestSource {
    /// `git log --numstat --format='H|%H|%at|%an <%ae>'` output.
    Git(IngestArgs),
    /// Canonical JSONL events.
    Jsonl(IngestArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub ci: Option<PathBuf>,
    #[arg(long)]
    pub reviews: Option<PathBuf>,
    #[arg(long)]
    pub deps: Option<PathBuf>,
    /// Comma-separated regular expressions matching AI author names.
    #[arg(long, default_value = "")]
    pub ai_authors: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// Window length in seconds.
    #[arg(long, default_value_t = SIM_DT)]
    pub dt: i64,
    #[arg(long)]
    pub out_series: PathBuf,
    #[arg(long)]
    pub out_cascades: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EiArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub bins: usize,
    #[arg(long, default_value_t = 16)]
    pub budget: usize,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Directory written by `simulate --bundle`.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Longitudinal log for P2 to P6 (and P7 without an ensemble).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Simulator truth for `--events`; without it agent counts come from the active roster.
    #[arg(long, requires = "events")]
    pub truth: Option<PathBuf>,
    /// Logs from the high-AI-share arm of P1.
    #[arg(long, num_args = 1..)]
    pub high: Vec<PathBuf>,
    /// Logs from the low-AI-share arm of P1.
    #[arg(long, num_args = 1..)]
    pub low: Vec<PathBuf>,
    /// Logs pooled for P7.
    #[arg(long, num_args = 1..)]
    pub ensemble: Vec<PathBuf>,
    /// Series CSV for P3, replacing the one measured from `--events`.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = SIM_DT)]
    pub dt: i64,
    /// Comma-separated subset, e.g. `p1,p4`.
    #[arg(long, value_delimiter = ',')]
    pub propositions: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Divide alpha by the number of propositions in the battery (seven).
    #[arg(long)]
    pub bonferroni: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Legibility complexity threshold; defaults to the 75th percentile.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Legibility review-depth threshold.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

/// Parse `args`, run the command, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Ingest { source } => cmd_ingest(source),
        Command::Measure(a) => cmd_measure(a),
        Command::Ei(a) => cmd_ei(a),
        Command::TestPropositions(a) => cmd_test_propositions(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_log(path: &Path) -> Result<EventLog> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    validate_event_log(parse_jsonl(BufReader::new(file))?)
}

fn write_log(log: &EventLog, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_jsonl(log, &mut w)?;
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn sim_config(a: &SimulateArgs) -> Result<SimConfig> {
    let mut text = match &a.config {
        Some(p) => read_text(p)?,
        None => String::new(),
    };
    if let Some(preset) = &a.preset {
        text = format!("preset = {preset:?}\n{text}");
    }
    let mut cfg = SimConfig::from_toml_str(&text)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = sim_config(&a)?;
    if let Some(dir) = &a.bundle {
        write_bundle(&cfg, dir)?;
    }
    if let Some(out) = &a.out {
        let run = sim::run(&cfg);
        write_log(&run.log, out)?;
        if let Some(t) = &a.truth {
            write_file(t, &run.truth_jsonl())?;
        }
    }
    Ok(())
}

const BUNDLE_CONFIG: &str = "world.toml";

fn bundle_name(group: &str, i: usize) -> String {
    format!("{group}-{i:03}.jsonl")
}

/// Write every run of a battery bundle as `high-000.jsonl`, `low-000.jsonl`,
/// `ensemble-000.jsonl`, `ramp.jsonl` and `ramp.truth.jsonl`.
pub fn write_bundle(world: &SimConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let b = bundle::simulate_bundle(world, &BundlePlan::new(world.seed));
    for (group, runs) in [("high", &b.high), ("low", &b.low), ("ensemble", &b.ensemble)] {
        for (i, r) in runs.iter().enumerate() {
            write_log(&r.log, &dir.join(bundle_name(group, i)))?;
        }
    }
    write_log(&b.ramp.log, &dir.join("ramp.jsonl"))?;
    write_file(&dir.join("ramp.truth.jsonl"), &b.ramp.truth_jsonl())?;
    write_file(&dir.join(BUNDLE_CONFIG), &world.to_toml_string())
}

/// Paths of one group of a bundle directory, in index order.
fn bundle_group(dir: &Path, group: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    while dir.join(bundle_name(group, out.len())).exists() {
        out.push(dir.join(bundle_name(group, out.len())));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn open_lines(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_ingest(source: IngestSource) -> Result<()> {
    let (git, a) = match source {
        IngestSource::Git(a) => (true, a),
        IngestSource::Jsonl(a) => (false, a),
    };
    let patterns = AiAuthorPatterns::parse_list(&a.ai_authors)?;
    let mut events = if git {
        parse_git_log(&read_text(&a.log)?, &patterns)?
    } else {
        parse_jsonl(open_lines(&a.log)?)?
    };
    if !git && !a.ai_authors.trim().is_empty() {
        for e in &mut events {
            if patterns.kind_of(&e.author.id) == AgentKind::Ai {
                e.author.kind = AgentKind::Ai;
            }
        }
    }
    let ci =
        a.ci.as_deref()
            .map(|p| parse_ci_records(open_lines(p)?))
            .transpose()?;
    let reviews = a
        .reviews
        .as_deref()
        .map(|p| parse_review_records(open_lines(p)?))
        .transpose()?;
    let deps = a
        .deps
        .as_deref()
        .map(|p| parse_dep_snapshots(open_lines(p)?))
        .transpose()?;
    let merged = merge_evidence(
        events,
        ci.as_deref().unwrap_or(&[]),
        reviews.as_deref().unwrap_or(&[]),
        deps.as_deref().unwrap_or(&[]),
    )?;
    if !merged.unmatched_ci.is_empty() {
        eprintln!(
            "warning: {} CI records match no commit",
            merged.unmatched_ci.len()
        );
    }
    if !merged.unmatched_reviews.is_empty() {
        eprintln!(
            "warning: {} reviews match no commit",
            merged.unmatched_reviews.len()
        );
    }
    if merged.unattributed_dep_changes > 0 {
        eprintln!(
            "warning: {} dependency changes fall between commits",
            merged.unattributed_dep_changes
        );
    }
    let log = validate_event_log(merged.events)?;
    write_log(&log, &a.out)?;
    print!("{}", summary(&log));
    Ok(())
}

fn iso_date(ts: i64) -> String {
    let fmt = time::macros::format_description!("[year]-[month]-[day]T[hour]:[minute]:[second]Z");
    time::OffsetDateTime::from_unix_timestamp(ts)
        .ok()
        .and_then(|t| t.format(fmt).ok())
        .unwrap_or_else(|| ts.to_string())
}

/// Commit count, AI share and date span.
pub fn summary(log: &EventLog) -> String {
    let mut s = format!("commits: {}\nai_share: {:.4}\n", log.len(), log.ai_share());
    if let Some((a, b)) = log.span() {
        s += &format!("span: {} .. {}\n", iso_date(a), iso_date(b));
    }
    s
}

// ---------------------------------------------------------------------------
// measure, ei
// ---------------------------------------------------------------------------

fn cmd_measure(a: MeasureArgs) -> Result<()> {
    let log = read_log(&a.events)?;
    let series = build_series(&log, &[], a.dt)?;
    let mut w = create(&a.out_series)?;
    write_series_csv(&series, &mut w)?;
    w.flush()?;
    if let Some(p) = &a.out_cascades {
        let mut w = create(p)?;
        write_cascades_csv(&extract_cascades(&log, CascadeOptions::default()), &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_ei(a: EiArgs) -> Result<()> {
    let table = read_series_csv(
        File::open(&a.series).map_err(|e| Error::Io(format!("{}: {e}", a.series.display())))?,
    )?;
    let mut opts = PipelineOptions {
        bins: a.bins,
        budget: a.budget,
        ..PipelineOptions::default()
    };
    opts.ce.bootstrap = a.bootstrap;
    opts.ce.seed = a.seed;
    let res = emergence_from_table(&table, &opts)?;
    let report = json!({ "result": res, "config": opts, "windows": table.len() });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &a.out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// test-propositions
// ---------------------------------------------------------------------------

fn cmd_test_propositions(a: TestArgs) -> Result<()> {
    let selected: Vec<Proposition> = if a.propositions.is_empty() {
        Proposition::ALL.to_vec()
    } else {
        a.propositions.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 1), got {}",
            a.alpha
        )));
    }

    let (mut high, mut low, mut ensemble) = (a.high.clone(), a.low.clone(), a.ensemble.clone());
    let (mut events, mut truth) = (a.events.clone(), a.truth.clone());
    if let Some(dir) = &a.bundle {
        high.extend(bundle_group(dir, "high")?);
        low.extend(bundle_group(dir, "low")?);
        ensemble.extend(bundle_group(dir, "ensemble")?);
        events = events.or_else(|| Some(dir.join("ramp.jsonl")));
        if truth.is_none() && dir.join("ramp.truth.jsonl").exists() {
            truth = Some(dir.join("ramp.truth.jsonl"));
        }
    }
    let read_all = |paths: &[PathBuf]| paths.iter().map(|p| read_log(p)).collect::<Result<Vec<_>>>();
    let (high, low, ensemble) = (read_all(&high)?, read_all(&low)?, read_all(&ensemble)?);
    let ramp_log = events.as_deref().map(read_log).transpose()?;
    let ramp_truth: Option<Vec<StepTruth>> = truth
        .as_deref()
        .map(|p| parse_truth_jsonl(&read_text(p)?))
        .transpose()?;

    let proxy = LegibilityProxy {
        theta: a.theta,
        rho: a.rho,
    };
    let view = BundleView {
        high: &high,
        low: &low,
        ramp: ramp_log.as_ref().map(|l| (l, ramp_truth.as_deref())),
        ensemble: &ensemble,
    };
    let mut inputs = bundle::measure_inputs(view, a.dt, proxy)?;
    if let Some(p) = &a.series {
        inputs.p3 = Some(read_series_csv(
            File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )?);
    }

    let cfg = HarnessConfig {
        alpha: a.alpha,
        seed: a.seed,
        bonferroni: a.bonferroni,
        ..HarnessConfig::default()
    };
    let mut pipeline = PipelineOptions::default();
    pipeline.ce.seed = a.seed;
    let verdicts = run_battery(&inputs, &selected, &pipeline, &cfg)?;

    let report = report_json(&verdicts, &cfg, &pipeline, &proxy);
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &a.report {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    for v in &verdicts {
        eprintln!("{} {}", v.id, v.verdict);
    }
    if let Some(dir) = &a.plots {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        draw_plots(dir, &inputs, &verdicts)?;
    }
    Ok(())
}

fn draw_plots(
    dir: &Path,
    inputs: &crate::harness::PropositionInputs,
    verdicts: &[PropositionVerdict],
) -> Result<()> {
    let find = |p: Proposition| verdicts.iter().find(|v| v.id == p);
    if let (Some((h, l)), Some(_)) = (&inputs.p1, find(Proposition::P1)) {
        plot::entropy_trajectories(&dir.join("entropy_trajectories.svg"), h, l)?;
    }
    if let (Some((rel, r)), Some(v)) = (&inputs.p2, find(Proposition::P2)) {
        let r_star = v.effect.get("r_star").copied();
        plot::reliability_vs_ratio(&dir.join("reliability_vs_ratio.svg"), rel, r, r_star)?;
    }
    if let (Some((rates, _)), Some(_)) = (&inputs.p4, find(Proposition::P4)) {
        plot::rate_fit(&dir.join("rate_fit.svg"), rates)?;
    }
    if let Some(v) = find(Proposition::P3) {
        if let (Some(&m), Some(&n)) = (v.statistics.get("ei_micro"), v.statistics.get("ei_macro")) {
            plot::ei_bars(&dir.join("ei_bars.svg"), m, n)?;
        }
    }
    if let (Some((o, c, _)), Some(_)) = (&inputs.p7, find(Proposition::P7)) {
        plot::cascade_vs_clustering(&dir.join("cascade_vs_clustering.svg"), o, c)?;
    }
    Ok(())
}
