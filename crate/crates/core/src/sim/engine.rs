use std::collections::{BTreeSet, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{Offspring, SimConfig};
use crate::graph::{clustering_coefficient, link_density};
use crate::rng::{self, Rng};
use crate::state::{validate_event_log, AgentId, CommitEvent, DependencyGraph, EventLog, Review};

/// Timestamp of the start of step 0 (2024-01-01T00:00:00Z).
pub const ORIGIN: i64 = 1_704_067_200;
const MAX_TOPOLOGY_BRANCHING: f64 = 0.95;

pub const STEP_SECONDS: i64 = 86_400;

const INITIAL_LOC: f64 = 200.0;
const MODULES_PER_DIR: usize = 4;
const SYNTACTIC_CATCH: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleState {
    pub name: String,
    pub dir: usize,
    pub loc: f64,
    pub friction: f64,
    pub gated: bool,
    /// Boundary violations originating here since the run started.
    pub violations: usize,
}

/// Everything the simulation carries from one step to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub step: usize,
    pub modules: Vec<ModuleState>,
    pub edges: BTreeSet<(usize, usize)>,
    pub in_degree: Vec<usize>,
    /// Predicted success probability per AI agent per module.
    pub models: Vec<Vec<f64>>,
    /// Static module preference per AI agent.
    pub affinity: Vec<Vec<f64>>,
    /// Gated modules in the order the gates were added.
    pub gates: Vec<usize>,
    pub cumulative_drift: f64,
    pub n_dirs: usize,
    next_commit: u64,
    next_reviewer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub commit: String,
    pub agent: String,
    pub module: String,
    pub predicted: f64,
    pub outcome: bool,
}

/// Ground truth for one step, kept out of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTruth {
    pub step: usize,
    pub r: f64,
    pub n_ai: usize,
    pub n_human: usize,
    /// Number of governance rules in force at the end of the step.
    pub epoch: usize,
    pub gates: Vec<String>,
    /// Base success probability before drift.
    pub capability: f64,
    pub success_prob: f64,
    pub cumulative_drift: f64,
    pub pending: usize,
    pub review_depth: f64,
    pub semantic_review: bool,
    pub branching: f64,
    pub violations: usize,
    pub true_cascade_edges: Vec<(String, String)>,
    pub predictions: Vec<PredictionRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub config: SimConfig,
    pub log: EventLog,
    pub truth: Vec<StepTruth>,
}

impl SimRun {
    /// Ground truth as JSON lines.
    pub fn truth_jsonl(&self) -> String {
        self.truth
            .iter()
            .map(|t| serde_json::to_string(t).expect("truth serializes") + "\n")
            .collect()
    }
}

pub fn parse_truth_jsonl(text: &str) -> crate::Result<Vec<StepTruth>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| crate::Error::MalformedLine {
                line: i + 1,
                detail: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Actor {
    Ai(usize),
    Human(usize),
}

impl Actor {
    fn id(self) -> AgentId {
        match self {
            Actor::Ai(i) => AgentId::ai(format!("ai-{i:02}")),
            Actor::Human(i) => AgentId::human(format!("human-{i:02}")),
        }
    }
}

impl SimState {
    pub fn new(cfg: &SimConfig, rng: &mut Rng) -> Self {
        let n_dirs = cfg.modules_init.div_ceil(MODULES_PER_DIR).max(1);
        let modules: Vec<ModuleState> = (0..cfg.modules_init)
            .map(|i| ModuleState {
                name: format!("d{}/m{i:03}", i % n_dirs),
                dir: i % n_dirs,
                loc: 0.0,
                friction: 0.0,
                gated: false,
                violations: 0,
            })
            .collect();
        let mut edges = BTreeSet::new();
        for i in n_dirs..cfg.modules_init {
            edges.insert((i, i - n_dirs));
        }
        let mut in_degree = vec![0; modules.len()];
        for &(_, b) in &edges {
            in_degree[b] += 1;
        }
        let n_ai = cfg.n_ai_max();
        let affinity = (0..n_ai)
            .map(|_| (0..modules.len()).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        Self {
            step: 0,
            models: vec![vec![cfg.base_success; modules.len()]; n_ai],
            affinity,
            modules,
            edges,
            in_degree,
            gates: Vec::new(),
            cumulative_drift: 0.0,
            n_dirs,
            next_commit: 0,
            next_reviewer: 0,
        }
    }

    fn graph(&self) -> DependencyGraph {
        DependencyGraph::from_parts(
            0,
            self.modules.iter().map(|m| (m.name.clone(), m.loc)),
            self.edges
                .iter()
                .map(|&(a, b)| (self.modules[a].name.clone(), self.modules[b].name.clone())),
        )
        .expect("simulated edges join known modules")
    }

    fn commit_id(&mut self) -> String {
        let id = format!("c{:07}", self.next_commit);
        self.next_commit += 1;
        id
    }

    fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a != b && self.edges.insert((a, b)) {
            self.in_degree[b] += 1;
            true
        } else {
            false
        }
    }

    fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        if self.edges.remove(&(a, b)) {
            self.in_degree[b] -= 1;
            true
        } else {
            false
        }
    }

    fn create_module(&mut self, cfg: &SimConfig, rng: &mut Rng) -> usize {
        let dir = if rng.random::<f64>() < 0.8 {
            rng.random_range(0..self.n_dirs)
        } else {
            self.n_dirs += 1;
            self.n_dirs - 1
        };
        let idx = self.modules.len();
        self.modules.push(ModuleState {
            name: format!("d{dir}/m{idx:03}"),
            dir,
            loc: 0.0,
            friction: 0.0,
            gated: false,
            violations: 0,
        });
        self.in_degree.push(0);
        for (model, aff) in self.models.iter_mut().zip(self.affinity.iter_mut()) {
            model.push(cfg.base_success);
            aff.push(rng.sample(StandardNormal));
        }
        idx
    }

    /// Preferential-attachment pick among `candidates`.
    fn attach(&self, candidates: &[usize], gamma: f64, rng: &mut Rng) -> Option<usize> {
        let weights: Vec<f64> = candidates
            .iter()
            .map(|&c| (self.in_degree[c] as f64 + 1.0).powf(gamma))
            .collect();
        weighted_pick(&weights, rng).map(|i| candidates[i])
    }

    /// Target for a new dependency out of `m`: a triangle-closing module with
    /// probability `closure`, otherwise preferential attachment across
    /// directory boundaries (or anywhere, if there is only one directory).
    fn violation_target(&self, m: usize, cfg: &SimConfig, rng: &mut Rng) -> Option<usize> {
        let linked = |x: usize| x == m || self.edges.contains(&(m, x));
        if rng.random::<f64>() < cfg.closure {
            let nbrs: BTreeSet<usize> = self
                .edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == m {
                        Some(b)
                    } else if b == m {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            let closing: Vec<usize> = self
                .edges
                .iter()
                .filter_map(|&(a, b)| {
                    if nbrs.contains(&a) {
                        Some(b)
                    } else if nbrs.contains(&b) {
                        Some(a)
                    } else {
                        None
                    }
                })
                .filter(|&x| !linked(x))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if let Some(&x) = closing.choose(rng) {
                return Some(x);
            }
        }
        let dir = self.modules[m].dir;
        let mut cands: Vec<usize> = (0..self.modules.len())
            .filter(|&x| !linked(x) && self.modules[x].dir != dir)
            .collect();
        if cands.is_empty() {
            cands = (0..self.modules.len()).filter(|&x| !linked(x)).collect();
        }
        self.attach(&cands, cfg.pref_attach, rng)
    }
}

fn weighted_pick(weights: &[f64], rng: &mut Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 || !total.is_finite() {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return Some(i);
        }
        u -= w;
    }
    Some(weights.len() - 1)
}

fn poisson(mean: f64, rng: &mut Rng) -> usize {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    }
}

fn exp1(rng: &mut Rng) -> f64 {
    Exp1.sample(rng)
}

/// `E[X]` for the rounded inverse-CDF power law with `x_min = 1`:
/// `Σ_k P(X ≥ k) = Σ_k (2k − 1)^(1−α)`.
fn power_law_mean(tail: f64) -> f64 {
    const K: usize = 100_000;
    let head: f64 = (1..=K).map(|k| ((2 * k - 1) as f64).powf(1.0 - tail)).sum();
    head + ((2 * K + 1) as f64).powf(2.0 - tail) / (2.0 * (tail - 2.0))
}

fn offspring_count(cfg: &SimConfig, mean: f64, pl_mean: f64, rng: &mut Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    match cfg.offspring {
        Offspring::Geometric => {
            // P(k) = (1 − q) q^k has mean q / (1 − q) = `mean`
            let q = mean / (1.0 + mean);
            let u: f64 = 1.0 - rng.random::<f64>();
            (u.ln() / q.ln()).floor() as usize
        }
        Offspring::PowerLaw => {
            if rng.random::<f64>() >= (mean / pl_mean).min(1.0) {
                return 0;
            }
            let u: f64 = rng.random();
            (0.5 * (1.0 - u).powf(-1.0 / (cfg.offspring_tail - 1.0)) + 0.5).floor() as usize
        }
    }
}

/// Per-step context shared by every commit made during the step.
struct StepCtx {
    t: usize,
    depth: f64,
    semantic: bool,
    success_prob: f64,
    seq: i64,
    violations: usize,
    predictions: Vec<PredictionRecord>,
}

fn choose_module(state: &mut SimState, cfg: &SimConfig, actor: Actor, rng: &mut Rng) -> (usize, bool) {
    let eps = cfg.ambiguity;
    let novelty = match actor {
        Actor::Ai(_) => cfg.novelty_base + cfg.novelty_rate * eps,
        Actor::Human(_) => cfg.novelty_base,
    };
    if rng.random::<f64>() < novelty {
        return (state.create_module(cfg, rng), true);
    }
    let weights: Vec<f64> = match actor {
        Actor::Ai(a) => {
            let util: Vec<f64> = state
                .modules
                .iter()
                .enumerate()
                .map(|(m, ms)| {
                    (ms.loc + 1.0).ln() + eps * state.affinity[a][m] - cfg.adaptivity * ms.friction
                })
                .collect();
            let top = util.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            util.iter().map(|u| (u - top).exp()).collect()
        }
        Actor::Human(_) => state.modules.iter().map(|m| m.loc + 1.0).collect(),
    };
    (weighted_pick(&weights, rng).expect("at least one module"), false)
}

fn make_commit(
    state: &mut SimState,
    cfg: &SimConfig,
    ctx: &mut StepCtx,
    actor: Actor,
    parent: Option<(&str, usize)>,
    pool: &[Actor],
    rng: &mut Rng,
) -> (CommitEvent, usize) {
    let eps = cfg.ambiguity;
    let is_ai = matches!(actor, Actor::Ai(_));
    let mut deps_added = Vec::new();
    let mut deps_removed = Vec::new();

    let m = match parent {
        Some((_, m)) => m,
        None => {
            let (m, fresh) = choose_module(state, cfg, actor, rng);
            if fresh {
                let dir = state.modules[m].dir;
                let peers: Vec<usize> = (0..m).filter(|&x| state.modules[x].dir == dir).collect();
                if let Some(target) = state.attach(&peers, cfg.pref_attach, rng) {
                    state.add_edge(m, target);
                    deps_added.push((m, target));
                }
            }
            m
        }
    };

    let scale = if is_ai { 1.0 + eps } else { 1.0 };
    let loc = 1 + (exp1(rng) * cfg.loc_mean * scale).round() as i64;
    state.modules[m].loc += loc as f64;

    let defect = is_ai && rng.random::<f64>() < cfg.defect_rate * eps;
    let catch_prob = if ctx.semantic {
        ctx.depth
    } else {
        SYNTACTIC_CATCH * ctx.depth
    };
    let caught = defect && rng.random::<f64>() < catch_prob;
    let success = rng.random::<f64>() < ctx.success_prob;
    let ci_passed = success && !(defect && !caught);
    // each rule is a policy check over its module's directory
    let dir = state.modules[m].dir;
    let checks = state
        .gates
        .iter()
        .filter(|&&g| state.modules[g].dir == dir)
        .count();
    let flagged = rng.random::<f64>() < 1.0 - (1.0 - cfg.gate_rework).powi(checks as i32);
    let rework = caught || flagged;

    let shortfall = if cfg.review_floor > 0.0 {
        ((cfg.review_floor - ctx.depth) / cfg.review_floor).max(0.0)
    } else {
        0.0
    };
    let violation = rng.random::<f64>() < cfg.violation_base + cfg.violation_slope * shortfall;
    if violation {
        if let Some(target) = state.violation_target(m, cfg, rng) {
            state.add_edge(m, target);
            deps_added.push((m, target));
        }
        state.modules[m].violations += 1;
        ctx.violations += 1;
    }
    if !is_ai && rng.random::<f64>() < cfg.refactor_rate {
        let outs: Vec<usize> = state
            .edges
            .range((m, 0)..(m + 1, 0))
            .map(|&(_, b)| b)
            .filter(|b| !deps_added.contains(&(m, *b)))
            .collect();
        if let Some(&b) = outs.choose(rng) {
            state.remove_edge(m, b);
            deps_removed.push((m, b));
        }
    }

    let quality = (cfg.quality_base
        - cfg.quality_penalty * f64::from(u8::from(!ctx.semantic))
        - cfg.quality_penalty * f64::from(u8::from(violation)))
    .clamp(0.0, 1.0);
    let complexity = exp1(rng) * scale + f64::from(u8::from(violation));

    let id = state.commit_id();
    if let Actor::Ai(a) = actor {
        let predicted = state.models[a][m];
        ctx.predictions.push(PredictionRecord {
            commit: id.clone(),
            agent: actor.id().id,
            module: state.modules[m].name.clone(),
            predicted,
            outcome: ci_passed,
        });
        state.models[a][m] += cfg.learning_rate * (f64::from(u8::from(ci_passed)) - predicted);
    }

    let reviewer = Actor::Human(state.next_reviewer % cfg.n_human);
    state.next_reviewer += 1;
    let mut messages_to = Vec::new();
    if rng.random::<f64>() < cfg.message_rate {
        let others: Vec<&Actor> = pool.iter().filter(|&&x| x != actor).collect();
        if let Some(&&target) = others.choose(rng) {
            messages_to.push(target.id());
        }
    }

    let name = |i: usize| state.modules[i].name.clone();
    let ts = ORIGIN + ctx.t as i64 * STEP_SECONDS + ctx.seq;
    ctx.seq += 1;
    let mut ev = CommitEvent::new(id, ts, actor.id()).with_modules([name(m)]);
    ev.deps_added = deps_added.iter().map(|&(a, b)| (name(a), name(b))).collect();
    ev.deps_removed = deps_removed.iter().map(|&(a, b)| (name(a), name(b))).collect();
    if let Some((p, _)) = parent {
        ev.parent_triggers = [p.to_string()].into_iter().collect();
    }
    ev.ci_passed = ci_passed;
    ev.required_rework = rework;
    ev.review = Some(Review {
        reviewer: reviewer.id(),
        depth: ctx.depth,
    });
    ev.quality_score = Some(quality);
    ev.complexity_delta = Some(complexity);
    ev.loc_delta = loc;
    ev.messages_to = messages_to;
    (ev, m)
}

/// The initial codebase as a single human commit at the origin.
fn seed_commit(state: &mut SimState) -> CommitEvent {
    for m in &mut state.modules {
        m.loc = INITIAL_LOC;
    }
    let id = state.commit_id();
    let mut ev = CommitEvent::new(id, ORIGIN, Actor::Human(0).id())
        .with_modules(state.modules.iter().map(|m| m.name.clone()));
    ev.loc_delta = (INITIAL_LOC as i64) * state.modules.len() as i64;
    ev.deps_added = state
        .edges
        .iter()
        .map(|&(a, b)| (state.modules[a].name.clone(), state.modules[b].name.clone()))
        .collect();
    ev
}

/// Advance one step, returning the commits made and the step's ground truth.
pub fn step(state: &mut SimState, cfg: &SimConfig, rng: &mut Rng) -> (Vec<CommitEvent>, StepTruth) {
    let t = state.step;
    let n_ai = cfg.n_ai_at(t);
    let eps = cfg.ambiguity;
    let capability = cfg.base_success + cfg.capability_growth * t as f64;
    let success_prob = (capability - state.cumulative_drift).clamp(0.01, 0.999);

    let mut events = Vec::new();
    let mut ctx = StepCtx {
        t,
        depth: 1.0,
        semantic: true,
        success_prob,
        seq: 0,
        violations: 0,
        predictions: Vec::new(),
    };
    if t == 0 {
        events.push(seed_commit(state));
        ctx.seq = 1;
    }

    let pool: Vec<Actor> = (0..n_ai)
        .map(Actor::Ai)
        .chain((0..cfg.n_human).map(Actor::Human))
        .collect();
    let mut authors = Vec::new();
    for a in 0..n_ai {
        let extra = poisson(eps * cfg.integration_rate * (n_ai - 1) as f64, rng);
        authors.extend(std::iter::repeat_n(Actor::Ai(a), 1 + extra));
    }
    for h in 0..cfg.n_human {
        authors.extend(std::iter::repeat_n(Actor::Human(h), poisson(cfg.human_rate, rng)));
    }
    authors.shuffle(rng);

    let pending = authors.len();
    let capacity = cfg.review_capacity * cfg.n_human as f64;
    ctx.depth = if pending == 0 {
        1.0
    } else {
        (capacity / pending as f64).min(1.0)
    };
    ctx.semantic = ctx.depth >= cfg.review_floor;

    let graph = state.graph();
    let topology = clustering_coefficient(&graph) / cfg.clustering_ref
        + link_density(&graph).unwrap_or(0.0) / cfg.density_ref;
    // topology alone never tips the process past criticality
    let boosted = cfg.branching_ratio * (1.0 + cfg.topology_coupling * topology);
    let branching = boosted.min(cfg.branching_ratio.max(MAX_TOPOLOGY_BRANCHING));
    let pl_mean = match cfg.offspring {
        Offspring::PowerLaw => power_law_mean(cfg.offspring_tail),
        Offspring::Geometric => 1.0,
    };
    let seq_limit = STEP_SECONDS - 1;

    let mut true_edges = Vec::new();
    for actor in authors {
        if ctx.seq >= seq_limit {
            break;
        }
        let (root, m) = make_commit(state, cfg, &mut ctx, actor, None, &pool, rng);
        let failed = !root.ci_passed;
        let root_id = root.commit_id.clone();
        events.push(root);
        if !failed {
            continue;
        }
        let mut size = 1usize;
        let mut queue = VecDeque::from([(root_id, m, actor)]);
        while let Some((pid, pm, pa)) = queue.pop_front() {
            let kids = offspring_count(cfg, branching, pl_mean, rng);
            for _ in 0..kids {
                if size >= cfg.max_cascade || ctx.seq >= seq_limit {
                    break;
                }
                let child_actor = if rng.random::<f64>() < 0.5 {
                    pa
                } else {
                    *pool.choose(rng).expect("at least one human")
                };
                let (child, _) = make_commit(state, cfg, &mut ctx, child_actor, Some((&pid, pm)), &pool, rng);
                true_edges.push((pid.clone(), child.commit_id.clone()));
                queue.push_back((child.commit_id.clone(), pm, child_actor));
                events.push(child);
                size += 1;
            }
        }
    }

    if cfg.governance_period > 0 && (t + 1).is_multiple_of(cfg.governance_period) {
        let worst = state
            .modules
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.gated && m.violations > 0)
            .max_by(|a, b| a.1.violations.cmp(&b.1.violations).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        if let Some(g) = worst {
            state.modules[g].gated = true;
            state.modules[g].friction += cfg.gate_friction;
            state.gates.push(g);
        }
    }

    let truth = StepTruth {
        step: t,
        r: n_ai as f64 / cfg.n_human as f64,
        n_ai,
        n_human: cfg.n_human,
        epoch: state.gates.len(),
        gates: state
            .gates
            .iter()
            .map(|&g| state.modules[g].name.clone())
            .collect(),
        capability,
        success_prob,
        cumulative_drift: state.cumulative_drift,
        pending,
        review_depth: ctx.depth,
        semantic_review: ctx.semantic,
        branching,
        violations: ctx.violations,
        true_cascade_edges: true_edges,
        predictions: ctx.predictions,
    };
    state.cumulative_drift += cfg.drift;
    state.step += 1;
    (events, truth)
}

/// Simulate `cfg.steps` steps from the configured seed.
pub fn run(cfg: &SimConfig) -> SimRun {
    let mut rng = rng::substream(cfg.seed, "sim");
    let mut state = SimState::new(cfg, &mut rng);
    let mut events = Vec::new();
    let mut truth = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let (ev, tr) = step(&mut state, cfg, &mut rng);
        events.extend(ev);
        truth.push(tr);
    }
    let log = validate_event_log(events).expect("simulated logs satisfy the schema");
    SimRun {
        config: cfg.clone(),
        log,
        truth,
    }
}

/// Per step with AI predictions: `(cumulative drift, mean squared
/// prediction error)`.
pub fn calibration_series(truth: &[StepTruth]) -> Vec<(f64, f64)> {
    truth
        .iter()
        .filter(|t| !t.predictions.is_empty())
        .map(|t| {
            let err = t
                .predictions
                .iter()
                .map(|p| (p.predicted - f64::from(u8::from(p.outcome))).powi(2))
                .sum::<f64>()
                / t.predictions.len() as f64;
            (t.cumulative_drift, err)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SimConfig {
        SimConfig {
            seed,
            steps: 30,
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_steps_is_empty() {
        let run = run(&SimConfig {
            steps: 0,
            ..SimConfig::default()
        });
        assert!(run.log.is_empty());
        assert!(run.truth.is_empty());
    }

    #[test]
    fn same_seed_same_log() {
        assert_eq!(run(&small(5)).log, run(&small(5)).log);
        assert_ne!(run(&small(5)).log, run(&small(6)).log);
    }

    #[test]
    fn no_ai_agents_means_human_log() {
        let r = run(&SimConfig { n_ai: 0, ..small(1) });
        assert_eq!(r.log.ai_share(), 0.0);
        assert!(r.truth.iter().all(|t| t.predictions.is_empty()));
    }

    #[test]
    fn zero_branching_gives_no_children() {
        let r = run(&SimConfig {
            branching_ratio: 0.0,
            ..small(2)
        });
        assert!(r.log.events().iter().all(|e| e.parent_triggers.is_empty()));
    }

    #[test]
    fn truth_round_trips() {
        let r = run(&small(3));
        assert_eq!(parse_truth_jsonl(&r.truth_jsonl()).unwrap(), r.truth);
    }

    #[test]
    fn power_law_mean_matches_sampling() {
        let mut rng = rng::substream(9, "t");
        let n = 200_000;
        let tail = 3.0;
        let s: f64 = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                (0.5 * (1.0 - u).powf(-1.0 / (tail - 1.0)) + 0.5).floor()
            })
            .sum();
        assert!((s / n as f64 - power_law_mean(tail)).abs() < 0.02);
    }
}
