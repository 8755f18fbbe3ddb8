//! The proposition battery. Each test takes plain series or logs and returns
//! a [`PropositionVerdict`] stating whether its confirmation or refutation
//! condition holds at the declared significance level.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coarse::{build_series, SeriesTable};
use crate::ei::{emergence_from_table, Classification, PipelineOptions};
use crate::error::{Error, Result};
use crate::state::EventLog;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Confirmed => "CONFIRMED",
            Verdict::Refuted => "REFUTED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Proposition {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

impl Proposition {
    pub const ALL: [Proposition; 7] = [
        Proposition::P1,
        Proposition::P2,
        Proposition::P3,
        Proposition::P4,
        Proposition::P5,
        Proposition::P6,
        Proposition::P7,
    ];
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Proposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Proposition::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown proposition {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionVerdict {
    pub id: Proposition,
    pub verdict: Verdict,
    pub statistics: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub effect: BTreeMap<String, f64>,
    pub inputs: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

impl PropositionVerdict {
    fn new(id: Proposition) -> Self {
        Self {
            id,
            verdict: Verdict::Inconclusive,
            statistics: BTreeMap::new(),
            p_values: BTreeMap::new(),
            effect: BTreeMap::new(),
            inputs: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn stat(&mut self, k: &str, v: f64) -> &mut Self {
        self.statistics.insert(k.into(), v);
        self
    }

    fn p(&mut self, k: &str, v: f64) -> &mut Self {
        self.p_values.insert(k.into(), v);
        self
    }

    fn effect(&mut self, k: &str, v: f64) -> &mut Self {
        self.effect.insert(k.into(), v);
        self
    }

    fn input(&mut self, k: &str, v: impl Into<Value>) -> &mut Self {
        self.inputs.insert(k.into(), v.into());
        self
    }

    fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub alpha: f64,
    pub seed: u64,
    /// Label permutations for the entropy-slope test.
    pub permutations: usize,
    /// Residual-block shuffles for the change-point null.
    pub break_shuffles: usize,
    /// Bootstrap replicates for exponent and coefficient intervals.
    pub bootstrap: usize,
    /// Divide `alpha` by the number of propositions.
    pub bonferroni: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            seed: 0,
            permutations: 10_000,
            break_shuffles: 5_000,
            bootstrap: 1_000,
            bonferroni: false,
        }
    }
}

impl HarnessConfig {
    /// Significance level actually applied.
    pub fn level(&self) -> f64 {
        if self.bonferroni {
            self.alpha / Proposition::ALL.len() as f64
        } else {
            self.alpha
        }
    }

    fn seed_for(&self, p: Proposition) -> u64 {
        self.seed ^ ((p as u64 + 1) << 32)
    }
}

// ---------------------------------------------------------------------------
// P1
// ---------------------------------------------------------------------------

/// Entropy trajectories: are slopes steeper in high-agent projects?
pub fn p1_entropy_slopes(
    high: &[Vec<f64>],
    low: &[Vec<f64>],
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    for group in [high, low] {
        if group.len() < 2 {
            return Err(Error::TooFewSeries {
                needed: 2,
                got: group.len(),
            });
        }
        if let Some(s) = group.iter().find(|s| s.len() < 10) {
            return Err(Error::TooShort {
                needed: 10,
                got: s.len(),
            });
        }
    }
    let slopes = |g: &[Vec<f64>]| -> Result<Vec<f64>> { g.iter().map(|s| stats::trend_slope(s)).collect() };
    let (hs, ls) = (slopes(high)?, slopes(low)?);
    let test = stats::permutation_mean_diff(&hs, &ls, cfg.permutations, cfg.seed_for(Proposition::P1))?;
    let alpha = cfg.level();

    let mut v = PropositionVerdict::new(Proposition::P1);
    v.stat("mean_slope_high", stats::mean(&hs))
        .stat("mean_slope_low", stats::mean(&ls))
        .p("permutation_two_sided", test.p_two_sided)
        .p("permutation_greater", test.p_greater)
        .effect("slope_difference", test.diff)
        .input("n_high", high.len())
        .input("n_low", low.len())
        .input("permutations", cfg.permutations);
    v.verdict = if test.diff > 0.0 && test.p_two_sided < alpha {
        Verdict::Confirmed
    } else {
        if test.diff < 0.0 && test.p_two_sided < alpha {
            v.note("high-agent slopes are significantly shallower (inverted)");
        }
        Verdict::Refuted
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// P2
// ---------------------------------------------------------------------------

/// Reliability against agent-to-human ratio: a significant single drop with
/// its threshold inside `[1, 3]`.
pub fn p2_changepoint(reliability: &[f64], r: &[f64], cfg: &HarnessConfig) -> Result<PropositionVerdict> {
    if reliability.len() != r.len() {
        return Err(Error::MisalignedSeries(format!(
            "{} reliability values vs {} ratios",
            reliability.len(),
            r.len()
        )));
    }
    if reliability.len() < 30 {
        return Err(Error::TooShort {
            needed: 30,
            got: reliability.len(),
        });
    }
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&a, &b| r[a].total_cmp(&r[b]));
    let y: Vec<f64> = order.iter().map(|&i| reliability[i]).collect();
    let rs: Vec<f64> = order.iter().map(|&i| r[i]).collect();

    let brk = stats::structural_break(&y, cfg.break_shuffles, cfg.seed_for(Proposition::P2))?;
    let r_star = rs[brk.index];
    let alpha = cfg.level();

    let mut v = PropositionVerdict::new(Proposition::P2);
    v.stat("sup_f", brk.sup_f)
        .stat("break_index", brk.index as f64)
        .p("sup_f_permutation", brk.p_value)
        .effect("r_star", r_star)
        .effect("mean_before", brk.mean_before)
        .effect("mean_after", brk.mean_after)
        .effect("shift", brk.mean_after - brk.mean_before)
        .input("n", y.len())
        .input("r_min", rs[0])
        .input("r_max", rs[rs.len() - 1])
        .input("shuffles", cfg.break_shuffles);
    v.verdict = if brk.p_value >= alpha {
        Verdict::Refuted
    } else if !(1.0..=3.0).contains(&r_star) {
        v.note(format!("significant break at r = {r_star:.3}, outside [1, 3]"));
        Verdict::Inconclusive
    } else if brk.mean_after >= brk.mean_before {
        v.note("significant break, but reliability rises after it");
        Verdict::Inconclusive
    } else {
        Verdict::Confirmed
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// P3
// ---------------------------------------------------------------------------

/// Causal emergence on an already-built series table.
pub fn p3_from_table(
    table: &SeriesTable,
    opts: &PipelineOptions,
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    if table.len() < 100 {
        return Err(Error::TooShort {
            needed: 100,
            got: table.len(),
        });
    }
    let mut o = *opts;
    o.ce.alpha = cfg.level();
    o.ce.seed = cfg.seed_for(Proposition::P3);
    let res = emergence_from_table(table, &o)?;

    let mut v = PropositionVerdict::new(Proposition::P3);
    v.stat("ei_micro", res.ei_micro)
        .stat("ei_macro", res.ei_macro)
        .stat("n_micro_states", res.n_micro_states as f64)
        .stat("n_macro_states", res.n_macro_states as f64)
        .stat("ce_bias", res.ce_bias)
        .p("bootstrap_top_heavy", res.p_value)
        .p("bootstrap_bottom_heavy", res.p_value_bottom)
        .effect("ce", res.ce)
        .effect("ce_adjusted", res.ce_adjusted)
        .input("windows", table.len())
        .input("bins", o.bins)
        .input("budget", o.budget)
        .input("bootstrap", o.ce.bootstrap);
    v.verdict = match res.classification {
        Classification::TopHeavy => Verdict::Confirmed,
        Classification::BottomHeavy => Verdict::Refuted,
        Classification::Neutral if res.ce_adjusted <= 0.0 => Verdict::Refuted,
        Classification::Neutral => Verdict::Inconclusive,
    };
    Ok(v)
}

/// Causal emergence from an event log windowed at `dt` seconds.
pub fn p3_emergence(
    log: &EventLog,
    dt: i64,
    opts: &PipelineOptions,
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    let series = build_series(log, &[], dt)?;
    p3_from_table(&SeriesTable::from_series(&series), opts, cfg)
}

// ---------------------------------------------------------------------------
// P4
// ---------------------------------------------------------------------------

/// Superlinear change rate in agent count. `rates` holds `(n, rate)`
/// replicate observations; `cascade_sizes` feeds a secondary tail fit.
pub fn p4_powerlaw(
    rates: &[(f64, f64)],
    cascade_sizes: &[u64],
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    let mut levels: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    let mut dropped = 0usize;
    for &(n, rate) in rates {
        if n > 0.0 && rate > 0.0 && n.is_finite() && rate.is_finite() {
            levels.entry(n.to_bits()).or_insert((n, Vec::new())).1.push(rate);
        } else {
            dropped += 1;
        }
    }
    let levels: Vec<(f64, Vec<f64>)> = levels.into_values().filter(|(_, r)| r.len() >= 3).collect();
    if levels.len() < 4 {
        return Err(Error::TooFewLevels {
            needed: 4,
            got: levels.len(),
        });
    }
    let fit = |lv: &[(f64, Vec<f64>)]| -> Result<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = lv
            .iter()
            .flat_map(|(n, rs)| rs.iter().map(move |r| (n.ln(), r.ln())))
            .unzip();
        Ok(stats::ols(&x, &y)?.slope)
    };
    let alpha_hat = fit(&levels)?;
    let seed = cfg.seed_for(Proposition::P4);
    let mut boots: Vec<f64> = {
        use rand::Rng as _;
        use rayon::prelude::*;
        (0..cfg.bootstrap)
            .into_par_iter()
            .map(|i| {
                let mut r = crate::rng::replicate(seed, "rate-boot", i as u64);
                let resampled: Vec<(f64, Vec<f64>)> = levels
                    .iter()
                    .map(|(n, rs)| {
                        (
                            *n,
                            (0..rs.len()).map(|_| rs[r.random_range(0..rs.len())]).collect(),
                        )
                    })
                    .collect();
                fit(&resampled).unwrap_or(f64::NAN)
            })
            .collect()
    };
    boots.retain(|b| b.is_finite());
    let level = cfg.level();
    let (lo, hi) = if boots.is_empty() {
        (alpha_hat, alpha_hat)
    } else {
        stats::percentile_interval(&mut boots, level)
    };

    let mut v = PropositionVerdict::new(Proposition::P4);
    v.stat("alpha_hat", alpha_hat)
        .stat("ci_low", lo)
        .stat("ci_high", hi)
        .effect("exponent_excess", alpha_hat - 1.0)
        .input("levels", levels.len())
        .input("observations", levels.iter().map(|(_, r)| r.len()).sum::<usize>())
        .input("bootstrap", cfg.bootstrap);
    if dropped > 0 {
        v.note(format!(
            "{dropped} non-positive observations excluded from the log-log fit"
        ));
    }
    match stats::fit_power_law_auto(cascade_sizes, 10) {
        Ok(pl) => {
            let gof = stats::power_law_gof(&pl, 200, seed);
            v.stat("cascade_alpha", pl.alpha)
                .stat("cascade_x_min", pl.x_min as f64)
                .stat("cascade_ks", pl.ks)
                .p("cascade_gof", gof)
                .input("cascade_tail", pl.n_tail);
        }
        Err(_) => {
            v.note("too few cascades for a tail fit");
        }
    }
    v.verdict = if alpha_hat > 1.0 && lo > 1.0 {
        Verdict::Confirmed
    } else {
        Verdict::Refuted
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// P5
// ---------------------------------------------------------------------------

/// Governance feedback: intervention rate, rule count and capability all
/// trend upward, with rule changes leading or coinciding.
pub fn p5_feedback(
    intervention: &[f64],
    rules: &[f64],
    capability: &[f64],
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    let n = intervention.len();
    if rules.len() != n || capability.len() != n {
        return Err(Error::MisalignedSeries(format!(
            "lengths {n}, {}, {}",
            rules.len(),
            capability.len()
        )));
    }
    if n < 12 {
        return Err(Error::TooShort { needed: 12, got: n });
    }
    let mk_i = stats::mann_kendall(intervention)?;
    let mk_r = stats::mann_kendall(rules)?;
    let mk_c = stats::mann_kendall(capability)?;
    let (lag, xcorr) = stats::peak_cross_correlation(intervention, rules, (n / 4).max(1));
    let alpha = cfg.level();
    // rules that precede or move together with interventions both count
    let together = match stats::spearman(rules, intervention) {
        Ok(c) => Some(c),
        Err(Error::NoVariation(_)) => None,
        Err(e) => return Err(e),
    };
    let coupled = lag <= 0 || together.is_some_and(|c| c.rho > 0.0 && c.p_positive < alpha);

    let mut v = PropositionVerdict::new(Proposition::P5);
    v.stat("mk_s_intervention", mk_i.s as f64)
        .stat("mk_z_intervention", mk_i.z)
        .stat("mk_s_rules", mk_r.s as f64)
        .stat("mk_s_capability", mk_c.s as f64)
        .stat("peak_lag", lag as f64)
        .stat("peak_cross_correlation", xcorr)
        .p("mk_intervention", mk_i.p_increasing)
        .p("mk_rules", mk_r.p_increasing)
        .p("mk_capability", mk_c.p_increasing)
        .effect("intervention_slope", stats::trend_slope(intervention)?)
        .effect("rules_slope", stats::trend_slope(rules)?)
        .effect("capability_slope", stats::trend_slope(capability)?)
        .input("windows", n);
    if let Some(c) = together {
        v.stat("spearman_rules_intervention", c.rho)
            .p("spearman_rules_intervention", c.p_positive);
    }
    let rising = |p: f64| p < alpha;
    v.verdict =
        if rising(mk_i.p_increasing) && rising(mk_r.p_increasing) && rising(mk_c.p_increasing) && coupled {
            Verdict::Confirmed
        } else if !rising(mk_i.p_increasing) && rising(mk_c.p_increasing) {
            Verdict::Refuted
        } else {
            if !coupled {
                v.note("intervention rate moves before rule count and not with it");
            }
            Verdict::Inconclusive
        };
    Ok(v)
}

// ---------------------------------------------------------------------------
// P6
// ---------------------------------------------------------------------------

/// Legibility proxy thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegibilityProxy {
    /// Complexity threshold; `None` means the 75th percentile over the log.
    pub theta: Option<f64>,
    /// Review-depth threshold.
    pub rho: f64,
}

impl Default for LegibilityProxy {
    fn default() -> Self {
        Self {
            theta: None,
            rho: 0.5,
        }
    }
}

/// Per-window share of commits with `complexity_delta > θ` and review depth
/// below `ρ`. Commits without a complexity value are skipped; an unreviewed
/// commit counts as depth 0. Empty windows are dropped. Returns the
/// fractions and the θ used.
pub fn legibility_fractions(log: &EventLog, proxy: LegibilityProxy, dt: i64) -> Result<(Vec<f64>, f64)> {
    let mut cx: Vec<f64> = log.events().iter().filter_map(|e| e.complexity_delta).collect();
    if cx.is_empty() {
        return Err(Error::MissingFields("no commit carries complexity_delta".into()));
    }
    let theta = match proxy.theta {
        Some(t) => t,
        None => {
            cx.sort_by(f64::total_cmp);
            let pos = 0.75 * (cx.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            cx[lo] + (cx[hi] - cx[lo]) * (pos - lo as f64)
        }
    };
    if dt <= 0 {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let (first, _) = log.span().ok_or(Error::EmptyLog)?;
    let mut windows: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for e in log.events() {
        let Some(c) = e.complexity_delta else { continue };
        let depth = e.review.as_ref().map_or(0.0, |r| r.depth);
        let slot = windows.entry((e.timestamp - first) / dt).or_default();
        slot.1 += 1;
        if c > theta && depth < proxy.rho {
            slot.0 += 1;
        }
    }
    Ok((
        windows.values().map(|&(k, n)| k as f64 / n as f64).collect(),
        theta,
    ))
}

/// Comprehension debt from precomputed per-window fractions.
pub fn p6_from_fractions(fractions: &[f64], cfg: &HarnessConfig) -> Result<PropositionVerdict> {
    let mk = stats::mann_kendall(fractions)?;
    let alpha = cfg.level();
    let mut v = PropositionVerdict::new(Proposition::P6);
    v.stat("mk_s", mk.s as f64)
        .stat("mk_z", mk.z)
        .p("mk_increasing", mk.p_increasing)
        .p("mk_decreasing", mk.p_decreasing)
        .effect("mean_fraction", stats::mean(fractions))
        .effect("fraction_slope", stats::trend_slope(fractions)?)
        .input("windows", fractions.len())
        .input("exact", mk.exact);
    v.verdict = if mk.p_increasing < alpha {
        Verdict::Confirmed
    } else if mk.p_decreasing < alpha || mk.var_s == 0.0 || fractions.iter().all(|&f| f == fractions[0]) {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    };
    Ok(v)
}

/// Comprehension debt from an event log.
pub fn p6_comprehension(
    log: &EventLog,
    proxy: LegibilityProxy,
    dt: i64,
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    let (fractions, theta) = legibility_fractions(log, proxy, dt)?;
    let mut v = p6_from_fractions(&fractions, cfg)?;
    v.input("theta", theta).input("rho", proxy.rho);
    v.note("legibility is a declared proxy (complexity above θ, review depth below ρ)");
    Ok(v)
}

// ---------------------------------------------------------------------------
// P7
// ---------------------------------------------------------------------------

/// Cascade occurrence against topology via logistic regression.
pub fn p7_cascade_topology(
    occurrence: &[bool],
    clustering: &[f64],
    density: &[f64],
    cfg: &HarnessConfig,
) -> Result<PropositionVerdict> {
    let n = occurrence.len();
    if clustering.len() != n || density.len() != n {
        return Err(Error::MisalignedSeries(format!(
            "lengths {n}, {}, {}",
            clustering.len(),
            density.len()
        )));
    }
    if n < 50 {
        return Err(Error::TooShort { needed: 50, got: n });
    }
    let y: Vec<f64> = occurrence.iter().map(|&o| f64::from(u8::from(o))).collect();
    let cols: [&[f64]; 2] = [clustering, density];
    let fit = stats::logistic_regression(&cols, &y)?;
    let p_clust = stats::logit_lr_pvalue(&cols, &y, &fit, 0)?;
    let p_dens = stats::logit_lr_pvalue(&cols, &y, &fit, 1)?;
    let ci = stats::logistic_bootstrap(
        &cols,
        &y,
        cfg.bootstrap.min(400),
        0.05,
        cfg.seed_for(Proposition::P7),
    );
    let alpha = cfg.level();
    let events = y.iter().filter(|&&v| v == 1.0).count();
    let minority = events.min(n - events);
    // rule-of-thumb: ten minority outcomes per estimated parameter
    let adequate = minority >= 10 * 3;

    let mut v = PropositionVerdict::new(Proposition::P7);
    v.stat("intercept", fit.coef[0])
        .stat("log_likelihood", fit.log_likelihood)
        .stat("iterations", fit.iterations as f64)
        .p("lr_clustering", p_clust)
        .p("lr_density", p_dens)
        .effect("coef_clustering", fit.coef[1])
        .effect("coef_density", fit.coef[2])
        .effect("ci_clustering_low", ci[1].0)
        .effect("ci_clustering_high", ci[1].1)
        .effect("ci_density_low", ci[2].0)
        .effect("ci_density_high", ci[2].1)
        .input("observations", n)
        .input("occurrences", events)
        .input("adequate_power", adequate)
        .input("separation", fit.separation);
    if fit.separation {
        v.note("outcomes are separable by topology; coefficients are ridge-stabilized");
    }
    let sig_pos = |c: f64, p: f64| c > 0.0 && p < alpha;
    v.verdict = if sig_pos(fit.coef[1], p_clust) && sig_pos(fit.coef[2], p_dens) {
        Verdict::Confirmed
    } else if p_clust >= alpha && p_dens >= alpha {
        if adequate {
            Verdict::Refuted
        } else {
            v.note("too few minority outcomes to call independence");
            Verdict::Inconclusive
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// Battery
// ---------------------------------------------------------------------------

/// Per-run trajectories of the high and low arms.
type ArmTrajectories = (Vec<Vec<f64>>, Vec<Vec<f64>>);
type RateInputs = (Vec<(f64, f64)>, Vec<u64>);
type Triple<T> = (Vec<T>, Vec<f64>, Vec<f64>);

/// Inputs for any subset of the propositions.
#[derive(Debug, Clone, Default)]
pub struct PropositionInputs {
    pub p1: Option<ArmTrajectories>,
    /// `(reliability, r)`
    pub p2: Option<(Vec<f64>, Vec<f64>)>,
    pub p3: Option<SeriesTable>,
    /// `((n, rate) pairs, cascade sizes)`
    pub p4: Option<RateInputs>,
    /// `(intervention, rules, capability)`
    pub p5: Option<Triple<f64>>,
    /// Legibility fractions and the `(θ, ρ)` that produced them.
    pub p6: Option<(Vec<f64>, f64, f64)>,
    /// `(occurrence, clustering, density)`
    pub p7: Option<Triple<bool>>,
}

/// Run the selected propositions. A requested proposition without inputs is
/// a [`Error::MissingFields`] error. Inputs that carry no variation at all
/// yield an INCONCLUSIVE verdict rather than an error, since nothing can be
/// concluded from them.
pub fn run_battery(
    inputs: &PropositionInputs,
    selected: &[Proposition],
    pipeline: &PipelineOptions,
    cfg: &HarnessConfig,
) -> Result<Vec<PropositionVerdict>> {
    let missing = |p: Proposition| Error::MissingFields(format!("no inputs for {p}"));
    selected
        .iter()
        .map(|&p| {
            let res = match p {
                Proposition::P1 => {
                    let (h, l) = inputs.p1.as_ref().ok_or_else(|| missing(p))?;
                    p1_entropy_slopes(h, l, cfg)
                }
                Proposition::P2 => {
                    let (y, r) = inputs.p2.as_ref().ok_or_else(|| missing(p))?;
                    p2_changepoint(y, r, cfg)
                }
                Proposition::P3 => {
                    let t = inputs.p3.as_ref().ok_or_else(|| missing(p))?;
                    p3_from_table(t, pipeline, cfg)
                }
                Proposition::P4 => {
                    let (r, c) = inputs.p4.as_ref().ok_or_else(|| missing(p))?;
                    p4_powerlaw(r, c, cfg)
                }
                Proposition::P5 => {
                    let (i, r, c) = inputs.p5.as_ref().ok_or_else(|| missing(p))?;
                    p5_feedback(i, r, c, cfg)
                }
                Proposition::P6 => {
                    let (f, theta, rho) = inputs.p6.as_ref().ok_or_else(|| missing(p))?;
                    p6_from_fractions(f, cfg).map(|mut v| {
                        v.input("theta", *theta).input("rho", *rho);
                        v.note("legibility is a declared proxy (complexity above θ, review depth below ρ)");
                        v
                    })
                }
                Proposition::P7 => {
                    let (o, c, d) = inputs.p7.as_ref().ok_or_else(|| missing(p))?;
                    p7_cascade_topology(o, c, d, cfg)
                }
            };
            match res {
                Err(Error::NoVariation(what)) => {
                    let mut v = PropositionVerdict::new(p);
                    v.note(format!("no variation in {what}"));
                    Ok(v)
                }
                other => other,
            }
        })
        .collect()
}

/// Verdict report: one object per proposition, each embedding the run
/// configuration.
pub fn report_json(
    verdicts: &[PropositionVerdict],
    cfg: &HarnessConfig,
    pipeline: &PipelineOptions,
    proxies: &LegibilityProxy,
) -> Value {
    let config = json!({
        "alpha": cfg.alpha,
        "alpha_applied": cfg.level(),
        "bonferroni": cfg.bonferroni,
        "seeds": { "base": cfg.seed },
        "permutations": cfg.permutations,
        "break_shuffles": cfg.break_shuffles,
        "bootstrap": cfg.bootstrap,
        "pipeline": pipeline,
        "proxies": proxies,
    });
    Value::Array(
        verdicts
            .iter()
            .map(|v| {
                let mut o = serde_json::to_value(v).expect("verdicts serialize");
                o["config"] = config.clone();
                o
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> HarnessConfig {
        HarnessConfig {
            permutations: 2000,
            break_shuffles: 500,
            bootstrap: 200,
            ..HarnessConfig::default()
        }
    }

    #[test]
    fn proposition_names_round_trip() {
        for p in Proposition::ALL {
            assert_eq!(p.to_string().to_lowercase().parse::<Proposition>().unwrap(), p);
        }
        assert!("p8".parse::<Proposition>().is_err());
    }

    #[test]
    fn p1_inverted_slopes_are_refuted() {
        let line = |s: f64| (0..20).map(|i| s * i as f64).collect::<Vec<_>>();
        let high: Vec<_> = (0..5).map(|k| line(-0.01 - 0.001 * k as f64)).collect();
        let low: Vec<_> = (0..5).map(|k| line(0.01 + 0.001 * k as f64)).collect();
        let v = p1_entropy_slopes(&high, &low, &cfg()).unwrap();
        assert_eq!(v.verdict, Verdict::Refuted);
        assert!(v.notes.iter().any(|n| n.contains("inverted")));
    }

    #[test]
    fn p1_needs_two_series() {
        let s = vec![vec![0.0; 12]];
        assert!(matches!(
            p1_entropy_slopes(&s, &s, &cfg()),
            Err(Error::TooFewSeries { .. })
        ));
    }

    #[test]
    fn p2_noiseless_step_at_two() {
        let r: Vec<f64> = (0..60).map(|i| i as f64 / 15.0).collect();
        let y: Vec<f64> = r.iter().map(|&x| if x < 2.0 { 0.9 } else { 0.7 }).collect();
        let v = p2_changepoint(&y, &r, &cfg()).unwrap();
        assert_eq!(v.effect["r_star"], 2.0);
        assert_eq!(v.verdict, Verdict::Confirmed);
    }

    #[test]
    fn p4_linear_rates_refuted() {
        let rates: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .flat_map(|&n| (0..3).map(move |_| (n, 5.0 * n)))
            .collect();
        let v = p4_powerlaw(&rates, &[], &cfg()).unwrap();
        assert!((v.statistics["alpha_hat"] - 1.0).abs() < 1e-12);
        assert_eq!(v.verdict, Verdict::Refuted);
    }

    #[test]
    fn p4_two_levels_is_an_error() {
        let rates = [
            (1.0, 1.0),
            (1.0, 1.1),
            (1.0, 0.9),
            (2.0, 2.0),
            (2.0, 2.1),
            (2.0, 1.9),
        ];
        assert!(matches!(
            p4_powerlaw(&rates, &[], &cfg()),
            Err(Error::TooFewLevels { needed: 4, got: 2 })
        ));
    }

    #[test]
    fn p5_constant_intervention_with_rising_capability_is_refuted() {
        let flat = vec![0.1; 15];
        let up: Vec<f64> = (0..15).map(f64::from).collect();
        let v = p5_feedback(&flat, &up, &up, &cfg()).unwrap();
        assert_eq!(v.verdict, Verdict::Refuted);
        assert!(matches!(
            p5_feedback(&flat, &up[..14], &up, &cfg()),
            Err(Error::MisalignedSeries(_))
        ));
    }

    #[test]
    fn p6_rising_and_flat_fractions() {
        let rising: Vec<f64> = (0..12).map(|i| 0.1 + 0.05 * i as f64).collect();
        assert_eq!(
            p6_from_fractions(&rising, &cfg()).unwrap().verdict,
            Verdict::Confirmed
        );
        assert_eq!(
            p6_from_fractions(&[0.0; 12], &cfg()).unwrap().verdict,
            Verdict::Refuted
        );
    }

    #[test]
    fn battery_turns_no_variation_into_inconclusive() {
        let inputs = PropositionInputs {
            p7: Some((vec![false; 60], (0..60).map(f64::from).collect(), vec![0.5; 60])),
            ..PropositionInputs::default()
        };
        let v = run_battery(&inputs, &[Proposition::P7], &PipelineOptions::default(), &cfg()).unwrap();
        assert_eq!(v[0].verdict, Verdict::Inconclusive);
        assert!(matches!(
            run_battery(&inputs, &[Proposition::P1], &PipelineOptions::default(), &cfg()),
            Err(Error::MissingFields(_))
        ));
    }
}
