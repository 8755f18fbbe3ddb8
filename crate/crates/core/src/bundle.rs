//! Simulation bundles for the proposition battery, and the measurements
//! that turn event logs (plus the controlled agent counts and governance
//! record from the ground-truth sidecar) into proposition inputs.
//!
//! A bundle derives four kinds of runs from one world configuration: two
//! agent-mix arms for the entropy comparison, a run whose AI head-count
//! ramps from `r = 0` to `r = 4`, and an ensemble of projects that varies
//! triadic closure, boundary-violation rate and refactoring to spread the
//! topology.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::coarse::{build_series_with, SeriesOptions, SeriesTable};
use crate::error::{Error, Result};
use crate::graph::{extract_cascades, Cascade, CascadeOptions};
use crate::harness::{legibility_fractions, LegibilityProxy, PropositionInputs};
use crate::sim::{self, SimConfig, SimRun, StepTruth, STEP_SECONDS};
use crate::state::{AgentKind, EventLog, StateSeries};

/// Shape of a bundle. Seeds for every run derive from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePlan {
    pub seed: u64,
    pub arm_runs: usize,
    pub arm_steps: usize,
    pub ramp_steps: usize,
    /// Final agent-to-human ratio of the ramp.
    pub ramp_ratio: f64,
    pub ensemble_steps: usize,
    pub ensemble_closure: Vec<f64>,
    pub ensemble_violation: Vec<f64>,
    pub ensemble_refactor: Vec<f64>,
    /// Runs per ensemble cell.
    pub ensemble_replicates: usize,
}

impl BundlePlan {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            arm_runs: 10,
            arm_steps: 120,
            ramp_steps: 340,
            ramp_ratio: 4.0,
            ensemble_steps: 150,
            ensemble_closure: vec![0.0, 0.3, 0.6, 0.9],
            ensemble_violation: vec![0.01, 0.05, 0.1, 0.2],
            ensemble_refactor: vec![0.02, 0.1],
            ensemble_replicates: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub high: Vec<SimRun>,
    pub low: Vec<SimRun>,
    pub ramp: SimRun,
    pub ensemble: Vec<SimRun>,
}

/// Agent mix of the high arm: six AI agents beside four humans.
pub fn high_arm(world: &SimConfig) -> SimConfig {
    SimConfig {
        n_ai: 6,
        n_human: 4,
        human_rate: 1.5,
        n_ai_final: None,
        ..world.clone()
    }
}

/// Agent mix of the low arm: one AI agent beside eleven humans, with the
/// same expected commit volume as the high arm.
pub fn low_arm(world: &SimConfig) -> SimConfig {
    SimConfig {
        n_ai: 1,
        n_human: 11,
        human_rate: 1.0,
        n_ai_final: None,
        ..world.clone()
    }
}

fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add(stream.wrapping_mul(10_007))
        .wrapping_add(index)
}

/// Simulate every run of a bundle. Arm run `i` uses the same seed in both
/// arms so the comparison is paired on common random numbers.
pub fn simulate_bundle(world: &SimConfig, plan: &BundlePlan) -> Bundle {
    let mut configs: Vec<SimConfig> = Vec::new();
    for i in 0..plan.arm_runs {
        let seed = derive_seed(plan.seed, 1, i as u64);
        configs.push(SimConfig {
            seed,
            steps: plan.arm_steps,
            ..high_arm(world)
        });
        configs.push(SimConfig {
            seed,
            steps: plan.arm_steps,
            ..low_arm(world)
        });
    }
    configs.push(SimConfig {
        seed: derive_seed(plan.seed, 2, 0),
        steps: plan.ramp_steps,
        n_ai: 0,
        n_ai_final: Some((plan.ramp_ratio * world.n_human as f64).round() as usize),
        ..world.clone()
    });
    let mut k = 0;
    for &closure in &plan.ensemble_closure {
        for &violation_base in &plan.ensemble_violation {
            for &refactor_rate in &plan.ensemble_refactor {
                for _ in 0..plan.ensemble_replicates {
                    configs.push(SimConfig {
                        seed: derive_seed(plan.seed, 3, k),
                        steps: plan.ensemble_steps,
                        closure,
                        violation_base,
                        refactor_rate,
                        ..world.clone()
                    });
                    k += 1;
                }
            }
        }
    }
    let mut runs: Vec<SimRun> = configs.par_iter().map(sim::run).collect();
    let ensemble = runs.split_off(2 * plan.arm_runs + 1);
    let ramp = runs.pop().expect("ramp run");
    let (mut high, mut low) = (Vec::new(), Vec::new());
    for (i, r) in runs.into_iter().enumerate() {
        if i % 2 == 0 {
            high.push(r);
        } else {
            low.push(r);
        }
    }
    Bundle {
        high,
        low,
        ramp,
        ensemble,
    }
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

/// Window series of a log. With ground truth the grid is pinned to the
/// simulated steps, so empty trailing steps still count.
pub fn series_for(log: &EventLog, truth: Option<&[StepTruth]>, dt: i64) -> Result<StateSeries> {
    let mut opts = SeriesOptions::new(dt);
    if let Some(tr) = truth {
        let (first, _) = log.span().ok_or(Error::EmptyLog)?;
        opts.origin = Some(first);
        opts.end = Some(first + tr.len() as i64 * STEP_SECONDS);
    }
    build_series_with(log, &[], opts)
}

/// Per-window quantities that do not come from the commits themselves.
/// `NaN` marks windows where a value is unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowContext {
    /// Agent-to-human ratio.
    pub r: Vec<f64>,
    /// AI head-count.
    pub n_ai: Vec<f64>,
    /// Governance rules in force, when known.
    pub rules: Option<Vec<f64>>,
    /// Underlying agent capability, when known.
    pub capability: Option<Vec<f64>>,
}

impl WindowContext {
    /// Averages of the simulator's per-step truth over each window.
    pub fn from_truth(truth: &[StepTruth], series: &StateSeries) -> Self {
        let (dt, n) = (series.dt, series.len());
        Self {
            r: truth_per_window(truth, dt, n, |t| t.r),
            n_ai: truth_per_window(truth, dt, n, |t| t.n_ai as f64),
            rules: Some(truth_per_window(truth, dt, n, |t| t.epoch as f64)),
            capability: Some(truth_per_window(truth, dt, n, |t| t.capability)),
        }
    }

    /// Distinct authors active in each window, for logs without truth.
    pub fn from_roster(log: &EventLog, series: &StateSeries) -> Self {
        let n = series.len();
        let origin = series.windows[0].micro.t - series.dt;
        let mut active: Vec<(BTreeSet<&str>, BTreeSet<&str>)> = vec![Default::default(); n];
        for e in log.events() {
            if let Some(w) = window_index(e.timestamp, origin, series.dt, n) {
                match e.author.kind {
                    AgentKind::Ai => active[w].0.insert(&e.author.id),
                    AgentKind::Human => active[w].1.insert(&e.author.id),
                };
            }
        }
        let n_ai: Vec<f64> = active.iter().map(|(a, _)| a.len() as f64).collect();
        let r = active
            .iter()
            .map(|(a, h)| {
                if h.is_empty() {
                    f64::NAN
                } else {
                    a.len() as f64 / h.len() as f64
                }
            })
            .collect();
        Self {
            r,
            n_ai,
            rules: None,
            capability: None,
        }
    }
}

/// Average of a per-step truth quantity over the steps in each window.
fn truth_per_window(truth: &[StepTruth], dt: i64, n: usize, f: impl Fn(&StepTruth) -> f64) -> Vec<f64> {
    let mut acc = vec![(0.0, 0usize); n];
    for t in truth {
        let w = ((t.step as i64 * STEP_SECONDS) / dt) as usize;
        if w < n {
            acc[w].0 += f(t);
            acc[w].1 += 1;
        }
    }
    acc.into_iter()
        .map(|(s, c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect()
}

fn window_index(ts: i64, origin: i64, dt: i64, n: usize) -> Option<usize> {
    (ts >= origin).then(|| (((ts - origin) / dt) as usize).min(n - 1))
}

/// Structural entropy per window.
pub fn entropy_trajectory(series: &StateSeries) -> Vec<f64> {
    series.macro_states().map(|m| m.e).collect()
}

/// Per-window CI pass share paired with the agent-to-human ratio.
pub fn reliability_vs_ratio(series: &StateSeries, ctx: &WindowContext) -> (Vec<f64>, Vec<f64>) {
    series
        .macro_states()
        .zip(&ctx.r)
        .filter(|(m, r)| m.d.is_some() && !m.d_filled && r.is_finite())
        .map(|(m, &r)| (1.0 - m.d.unwrap_or(0.0), r))
        .unzip()
}

/// `(AI head-count, AI commits)` per window, for windows with a whole
/// number of active agents.
pub fn change_rates(log: &EventLog, series: &StateSeries, ctx: &WindowContext) -> Vec<(f64, f64)> {
    let n = series.len();
    let origin = series.windows[0].micro.t - series.dt;
    let mut commits = vec![0.0; n];
    for e in log.events().iter().filter(|e| e.author.kind == AgentKind::Ai) {
        if let Some(w) = window_index(e.timestamp, origin, series.dt, n) {
            commits[w] += 1.0;
        }
    }
    ctx.n_ai
        .iter()
        .zip(commits)
        .filter(|(k, _)| k.is_finite() && k.fract() == 0.0)
        .map(|(&k, c)| (k, c))
        .collect()
}

/// Sizes of cascades whose root failed CI.
pub fn failure_cascade_sizes(log: &EventLog) -> Vec<u64> {
    failure_cascades(log).into_iter().map(|c| c.size as u64).collect()
}

/// Cascades rooted at a CI-failing commit.
fn failure_cascades(log: &EventLog) -> Vec<Cascade> {
    let failed: BTreeMap<&str, bool> = log
        .events()
        .iter()
        .map(|e| (e.commit_id.as_str(), !e.ci_passed))
        .collect();
    extract_cascades(log, CascadeOptions::default())
        .into_iter()
        .filter(|c| failed[c.root.as_str()])
        .collect()
}

/// Intervention rate (CI failure or rework share), rules in force, and
/// capability per window. `None` when the context lacks rules or capability.
pub fn feedback_series(
    log: &EventLog,
    series: &StateSeries,
    ctx: &WindowContext,
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (rules, capability) = (ctx.rules.as_ref()?, ctx.capability.as_ref()?);
    let n = series.len();
    let origin = series.windows[0].micro.t - series.dt;
    let mut hits = vec![(0.0, 0.0); n];
    for e in log.events() {
        if let Some(w) = window_index(e.timestamp, origin, series.dt, n) {
            hits[w].1 += 1.0;
            if !e.ci_passed || e.required_rework {
                hits[w].0 += 1.0;
            }
        }
    }
    let rows: Vec<(f64, f64, f64)> = hits
        .into_iter()
        .zip(rules.iter().zip(capability))
        .filter(|((_, total), (r, c))| *total > 0.0 && r.is_finite() && c.is_finite())
        .map(|((k, total), (&r, &c))| (k / total, r, c))
        .collect();
    Some((
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
    ))
}

/// One observation per failure cascade: whether it spread beyond its root,
/// against the topology at the start of its window (the end of the previous
/// one). Cascades in the first window are dropped.
pub fn cascade_topology(log: &EventLog, series: &StateSeries) -> (Vec<bool>, Vec<f64>, Vec<f64>) {
    let n = series.len();
    let origin = series.windows[0].micro.t - series.dt;
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for c in failure_cascades(log) {
        if let Some(w) = window_index(c.start_ts, origin, series.dt, n).filter(|&w| w > 0) {
            out.0.push(c.size >= 2);
            out.1.push(series.windows[w - 1].clustering);
            out.2.push(series.windows[w - 1].link_density);
        }
    }
    out
}

/// Logs and sidecars feeding one battery.
#[derive(Debug, Clone, Copy, Default)]
pub struct BundleView<'a> {
    pub high: &'a [EventLog],
    pub low: &'a [EventLog],
    /// Longitudinal log, with the simulator's truth when there is one.
    pub ramp: Option<(&'a EventLog, Option<&'a [StepTruth]>)>,
    pub ensemble: &'a [EventLog],
}

/// Measure every proposition input available from the given logs.
pub fn measure_inputs(view: BundleView<'_>, dt: i64, proxy: LegibilityProxy) -> Result<PropositionInputs> {
    let mut inputs = PropositionInputs::default();
    if !view.high.is_empty() && !view.low.is_empty() {
        let traj = |logs: &[EventLog]| -> Result<Vec<Vec<f64>>> {
            logs.par_iter()
                .map(|l| series_for(l, None, dt).map(|s| entropy_trajectory(&s)))
                .collect()
        };
        inputs.p1 = Some((traj(view.high)?, traj(view.low)?));
    }
    if let Some((log, truth)) = view.ramp {
        let series = series_for(log, truth, dt)?;
        let ctx = match truth {
            Some(t) => WindowContext::from_truth(t, &series),
            None => WindowContext::from_roster(log, &series),
        };
        inputs.p2 = Some(reliability_vs_ratio(&series, &ctx));
        inputs.p3 = Some(SeriesTable::from_series(&series));
        inputs.p4 = Some((change_rates(log, &series, &ctx), failure_cascade_sizes(log)));
        inputs.p5 = feedback_series(log, &series, &ctx);
        if let Ok((fractions, theta)) = legibility_fractions(log, proxy, dt) {
            inputs.p6 = Some((fractions, theta, proxy.rho));
        }
        if view.ensemble.is_empty() {
            inputs.p7 = Some(cascade_topology(log, &series));
        }
    }
    if !view.ensemble.is_empty() {
        let parts: Vec<(Vec<bool>, Vec<f64>, Vec<f64>)> = view
            .ensemble
            .par_iter()
            .map(|l| series_for(l, None, dt).map(|s| cascade_topology(l, &s)))
            .collect::<Result<_>>()?;
        let mut pooled = (Vec::new(), Vec::new(), Vec::new());
        for (o, c, d) in parts {
            pooled.0.extend(o);
            pooled.1.extend(c);
            pooled.2.extend(d);
        }
        inputs.p7 = Some(pooled);
    }
    Ok(inputs)
}

impl Bundle {
    pub fn inputs(&self, dt: i64, proxy: LegibilityProxy) -> Result<PropositionInputs> {
        let logs = |runs: &[SimRun]| -> Vec<EventLog> { runs.iter().map(|r| r.log.clone()).collect() };
        let (high, low, ensemble) = (logs(&self.high), logs(&self.low), logs(&self.ensemble));
        measure_inputs(
            BundleView {
                high: &high,
                low: &low,
                ramp: Some((&self.ramp.log, Some(&self.ramp.truth))),
                ensemble: &ensemble,
            },
            dt,
            proxy,
        )
    }
}

/// Default window length for simulated logs.
pub const SIM_DT: i64 = STEP_SECONDS;
