//! Effective Information and causal emergence.
//!
//! Continuous state series are discretized into finite state sequences,
//! transition matrices are estimated from them, and EI is evaluated as the
//! mutual information between a state and its successor when the current
//! state is set by a uniform intervention:
//!
//! ```text
//! EI(T) = (1/n) Σ_i KL( T[i, ·] ‖ T̄ ),   T̄ = (1/n) Σ_i T[i, ·]
//! ```
//!
//! Causal emergence is `EI(macro) − EI(micro)` with a moving-block bootstrap
//! for significance.

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::SeriesTable;
use crate::error::{Error, Result};
use crate::rng;
use crate::state::{MacroState, MicroState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinScheme {
    #[default]
    Quantile,
    EqualWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discretized {
    pub states: Vec<usize>,
    pub n_states: usize,
    /// Bins actually used per input dimension (1 for constant dimensions).
    pub bins: Vec<usize>,
    /// Dimensions that were constant and collapsed to a single bin.
    pub constant_dims: Vec<usize>,
}

/// Bin index for each value, dense from 0. Dimensions with at most `k`
/// distinct values give every value its own bin.
fn bin_values(values: &[f64], k: usize, scheme: BinScheme) -> Vec<usize> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return vec![0; values.len()];
    }
    let mut distinct = sorted.clone();
    distinct.dedup();
    let raw: Vec<usize> = if distinct.len() <= k {
        values
            .iter()
            .map(|v| distinct.partition_point(|d| d < v))
            .collect()
    } else {
        match scheme {
            BinScheme::Quantile => {
                let n = sorted.len();
                let cuts: Vec<f64> = (1..k).map(|j| sorted[(j * n).div_ceil(k) - 1]).collect();
                values
                    .iter()
                    .map(|v| cuts.iter().filter(|&&c| *v > c).count())
                    .collect()
            }
            BinScheme::EqualWidth => values
                .iter()
                .map(|v| (((v - lo) / (hi - lo) * k as f64) as usize).min(k - 1))
                .collect(),
        }
    };
    densify(&raw)
}

fn densify(raw: &[usize]) -> Vec<usize> {
    let mut used: Vec<usize> = raw.to_vec();
    used.sort_unstable();
    used.dedup();
    raw.iter()
        .map(|r| used.binary_search(r).expect("value comes from raw"))
        .collect()
}

/// Dense joint-state ids, ordered lexicographically by bin tuple.
fn joint_states(columns: &[Vec<usize>], len: usize) -> (Vec<usize>, usize) {
    let tuples: Vec<Vec<usize>> = (0..len).map(|t| columns.iter().map(|c| c[t]).collect()).collect();
    let ids: BTreeMap<&Vec<usize>, usize> = {
        let mut m: BTreeMap<&Vec<usize>, usize> = tuples.iter().map(|t| (t, 0)).collect();
        for (i, v) in m.values_mut().enumerate() {
            *v = i;
        }
        m
    };
    let states = tuples.iter().map(|t| ids[t]).collect();
    (states, ids.len())
}

/// Discretize a series of real vectors (one vector per time point) into a
/// joint state sequence with `k` bins per dimension.
pub fn discretize(series: &[Vec<f64>], k: usize, scheme: BinScheme) -> Result<Discretized> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {k}")));
    }
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let dims = series[0].len();
    if series.iter().any(|v| v.len() != dims) {
        return Err(Error::MisalignedSeries("vectors differ in length".into()));
    }
    if series.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "series contains non-finite values".into(),
        ));
    }
    let columns: Vec<Vec<usize>> = (0..dims)
        .map(|d| {
            let col: Vec<f64> = series.iter().map(|v| v[d]).collect();
            bin_values(&col, k, scheme)
        })
        .collect();
    let bins: Vec<usize> = columns
        .iter()
        .map(|c| c.iter().max().map_or(1, |m| m + 1))
        .collect();
    let constant_dims = bins
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(d, _)| d)
        .collect();
    let (states, n_states) = joint_states(&columns, series.len());
    Ok(Discretized {
        states,
        n_states,
        bins,
        constant_dims,
    })
}

/// Per-agent micro features: activity (commits + reviews), then outgoing
/// and incoming interaction totals.
pub fn micro_features(micro: &[MicroState]) -> Vec<Vec<f64>> {
    micro
        .iter()
        .map(|m| {
            let mut v: Vec<f64> = m
                .commit_counts
                .iter()
                .zip(&m.review_counts)
                .map(|(c, r)| f64::from(c + r))
                .collect();
            v.extend(m.comm.row_sums().into_iter().map(f64::from));
            v.extend(m.comm.col_sums().into_iter().map(f64::from));
            v
        })
        .collect()
}

fn shannon_bits(col: &[usize]) -> f64 {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &c in col {
        *counts.entry(c).or_default() += 1;
    }
    let n = col.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Discretize raw micro feature vectors under a state budget.
///
/// Each dimension starts with `k` quantile bins. While the number of
/// distinct joint states exceeds `budget`, the least informative dimension
/// (lowest binned entropy) loses one bin; a dimension reduced to one bin
/// drops out.
pub fn compress_features(features: &[Vec<f64>], k: usize, budget: usize) -> Result<Discretized> {
    if budget < 2 {
        return Err(Error::InvalidParameter(format!(
            "budget must be ≥ 2, got {budget}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {k}")));
    }
    if features.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: features.len(),
        });
    }
    let len = features.len();
    let dims = features[0].len();
    let raw: Vec<Vec<f64>> = (0..dims)
        .map(|d| features.iter().map(|v| v[d]).collect())
        .collect();
    let mut target: Vec<usize> = vec![k; dims];
    let mut columns: Vec<Vec<usize>> = raw
        .iter()
        .map(|c| bin_values(c, k, BinScheme::Quantile))
        .collect();
    let constant_dims: Vec<usize> = columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().all(|&b| b == 0))
        .map(|(d, _)| d)
        .collect();

    loop {
        let active: Vec<Vec<usize>> = columns
            .iter()
            .filter(|c| c.iter().any(|&b| b > 0))
            .cloned()
            .collect();
        let (states, n_states) = joint_states(&active, len);
        if n_states <= budget {
            let bins = columns
                .iter()
                .map(|c| c.iter().max().map_or(1, |m| m + 1))
                .collect();
            return Ok(Discretized {
                states,
                n_states,
                bins,
                constant_dims,
            });
        }
        let victim = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|&b| b > 0))
            .map(|(d, c)| (d, shannon_bits(c)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(d, _)| d)
            .expect("more than one joint state implies an active dimension");
        let used = columns[victim].iter().max().map_or(1, |m| m + 1);
        target[victim] = used - 1;
        columns[victim] = if target[victim] < 2 {
            vec![0; len]
        } else {
            bin_values(&raw[victim], target[victim], BinScheme::Quantile)
        };
    }
}

/// Reduce a micro-state series to at most `budget` discrete states using
/// per-agent activity and tensor marginals. See [`compress_features`].
pub fn compress_micro(micro: &[MicroState], k: usize, budget: usize) -> Result<Discretized> {
    if micro.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: micro.len(),
        });
    }
    compress_features(&micro_features(micro), k, budget)
}

/// Row-stochastic transition matrix with the raw counts it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    n: usize,
    probs: Vec<f64>,
    counts: Vec<u64>,
}

impl TransitionMatrix {
    /// Build from explicit rows; each must be non-negative and sum to 1.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries",
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("row {i} is not a distribution")));
            }
        }
        Ok(Self {
            n,
            probs: rows.concat(),
            counts: vec![0; n * n],
        })
    }

    fn from_counts(n: usize, counts: Vec<u64>, alpha: f64) -> Self {
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            let row = &counts[i * n..(i + 1) * n];
            let total: u64 = row.iter().sum();
            let denom = total as f64 + n as f64 * alpha;
            for j in 0..n {
                probs[i * n + j] = if denom > 0.0 {
                    (row[j] as f64 + alpha) / denom
                } else {
                    1.0 / n as f64
                };
            }
        }
        Self { n, probs, counts }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.probs[from * self.n + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.probs[from * self.n..(from + 1) * self.n]
    }

    pub fn count(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.n + to]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.n)
    }

    /// Macro chain under a deterministic state map: each macro row is the
    /// uniform average of its micro rows, summed over macro targets.
    pub fn lump(&self, map: &[usize]) -> Result<Self> {
        if map.len() != self.n {
            return Err(Error::MisalignedSeries(format!(
                "map covers {} states, matrix has {}",
                map.len(),
                self.n
            )));
        }
        let m = map.iter().max().map_or(0, |x| x + 1);
        let mut members = vec![0usize; m];
        for &b in map {
            members[b] += 1;
        }
        if members.contains(&0) {
            return Err(Error::InvalidParameter("macro map leaves a state empty".into()));
        }
        let mut rows = vec![vec![0.0; m]; m];
        for i in 0..self.n {
            for j in 0..self.n {
                rows[map[i]][map[j]] += self.get(i, j) / members[map[i]] as f64;
            }
        }
        Self::from_rows(&rows)
    }
}

fn count_transitions(seq: &[usize], n: usize, pairs: impl Iterator<Item = usize>) -> Vec<u64> {
    let mut counts = vec![0u64; n * n];
    for t in pairs {
        counts[seq[t] * n + seq[t + 1]] += 1;
    }
    counts
}

/// Estimate a transition matrix with additive smoothing `alpha`:
/// `(count(i→j) + α) / (Σ_j count(i→j) + nα)`. Rows never visited as a
/// source are uniform.
pub fn estimate_transitions(seq: &[usize], n_states: usize, alpha: f64) -> Result<TransitionMatrix> {
    if seq.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: seq.len(),
        });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothing must be ≥ 0, got {alpha}"
        )));
    }
    let n = n_states.max(seq.iter().max().map_or(0, |m| m + 1));
    let counts = count_transitions(seq, n, 0..seq.len() - 1);
    Ok(TransitionMatrix::from_counts(n, counts, alpha))
}

/// Estimate a transition matrix from independent `(from, to)` observations,
/// such as the outcomes of interventions that set the source state.
pub fn estimate_transitions_pairs(
    pairs: &[(usize, usize)],
    n_states: usize,
    alpha: f64,
) -> Result<TransitionMatrix> {
    if pairs.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothing must be ≥ 0, got {alpha}"
        )));
    }
    let n = n_states.max(pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    let mut counts = vec![0u64; n * n];
    for &(a, b) in pairs {
        counts[a * n + b] += 1;
    }
    Ok(TransitionMatrix::from_counts(n, counts, alpha))
}

fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).log2())
        .sum()
}

/// Effective Information in bits under a uniform intervention distribution.
pub fn effective_information(t: &TransitionMatrix) -> f64 {
    let w = vec![1.0 / t.n as f64; t.n];
    weighted_ei(t, &w)
}

/// Mutual information between the current state, drawn from `weights`, and
/// the next state. With uniform weights this is [`effective_information`].
pub fn weighted_ei(t: &TransitionMatrix, weights: &[f64]) -> f64 {
    let n = t.n;
    let total: f64 = weights.iter().sum();
    let mut effect = vec![0.0; n];
    for (i, row) in t.rows().enumerate() {
        for (e, p) in effect.iter_mut().zip(row) {
            *e += weights[i] / total * p;
        }
    }
    let ei: f64 = t
        .rows()
        .enumerate()
        .filter(|(i, _)| weights[*i] > 0.0)
        .map(|(i, row)| weights[i] / total * kl_bits(row, &effect))
        .sum();
    ei.max(0.0)
}

/// Alternative reading of EI: mean KL divergence of each row from the
/// uniform output distribution, `log2 n − mean_i H(T[i, ·])`.
pub fn kl_to_uniform(t: &TransitionMatrix) -> f64 {
    let uniform = vec![1.0 / t.n as f64; t.n];
    let total: f64 = t.rows().map(|row| kl_bits(row, &uniform)).sum();
    (total / t.n as f64).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EiMetric {
    #[default]
    Canonical,
    KlToUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intervention {
    #[default]
    Uniform,
    /// Weight each state by its empirical frequency as a transition source.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    TopHeavy,
    BottomHeavy,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeConfig {
    pub smoothing: f64,
    pub bootstrap: usize,
    pub seed: u64,
    pub alpha: f64,
    pub metric: EiMetric,
    pub intervention: Intervention,
    /// Subtract the CE of temporally shuffled sequences before testing.
    pub bias_correction: bool,
    pub shuffles: usize,
}

impl Default for CeConfig {
    fn default() -> Self {
        Self {
            smoothing: 0.5,
            bootstrap: 1000,
            seed: 0,
            alpha: 0.05,
            metric: EiMetric::Canonical,
            intervention: Intervention::Uniform,
            bias_correction: true,
            shuffles: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiResult {
    pub ei_micro: f64,
    pub ei_macro: f64,
    pub ce: f64,
    /// Bootstrap p-value for `ce > 0`.
    pub p_value: f64,
    /// Bootstrap p-value for `ce < 0`.
    pub p_value_bottom: f64,
    pub classification: Classification,
    pub n_micro_states: usize,
    pub n_macro_states: usize,
    /// Mean CE of temporally shuffled sequences (0 without bias correction).
    pub ce_bias: f64,
    pub ce_adjusted: f64,
    pub block_len: usize,
}

/// Relabel states by order of first appearance.
fn canonical(seq: &[usize]) -> (Vec<usize>, usize) {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let out = seq
        .iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(*s).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

struct Level<'a> {
    seq: &'a [usize],
    n: usize,
}

impl Level<'_> {
    fn ei_over(&self, pairs: &[usize], cfg: &CeConfig) -> f64 {
        let counts = count_transitions(self.seq, self.n, pairs.iter().copied());
        let t = TransitionMatrix::from_counts(self.n, counts, cfg.smoothing);
        match (cfg.metric, cfg.intervention) {
            (EiMetric::KlToUniform, _) => kl_to_uniform(&t),
            (EiMetric::Canonical, Intervention::Uniform) => effective_information(&t),
            (EiMetric::Canonical, Intervention::Empirical) => {
                let mut w = vec![0.0; self.n];
                for &p in pairs {
                    w[self.seq[p]] += 1.0;
                }
                weighted_ei(&t, &w)
            }
        }
    }
}

fn ce_over(micro: &Level, macro_: &Level, pairs: &[usize], cfg: &CeConfig) -> (f64, f64) {
    (micro.ei_over(pairs, cfg), macro_.ei_over(pairs, cfg))
}

/// Compare EI at two aligned levels of description.
///
/// Significance comes from a moving-block bootstrap over transitions with
/// block length `⌈T^(1/3)⌉`, resampling both levels jointly. With bias
/// correction on, the mean CE of jointly shuffled sequences is subtracted
/// from the observed and resampled values before testing.
pub fn causal_emergence(micro: &[usize], macro_: &[usize], cfg: &CeConfig) -> Result<EiResult> {
    if micro.len() != macro_.len() {
        return Err(Error::MisalignedSeries(format!(
            "micro has {} windows, macro has {}",
            micro.len(),
            macro_.len()
        )));
    }
    if micro.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: micro.len(),
        });
    }
    let (mi_seq, n_micro) = canonical(micro);
    let (ma_seq, n_macro) = canonical(macro_);
    let micro_level = Level {
        seq: &mi_seq,
        n: n_micro,
    };
    let macro_level = Level {
        seq: &ma_seq,
        n: n_macro,
    };
    let transitions = micro.len() - 1;
    let all: Vec<usize> = (0..transitions).collect();
    let (ei_micro, ei_macro) = ce_over(&micro_level, &macro_level, &all, cfg);
    let ce = ei_macro - ei_micro;

    let ce_bias = if cfg.bias_correction && cfg.shuffles > 0 {
        let total: f64 = (0..cfg.shuffles)
            .into_par_iter()
            .map(|s| {
                let mut r = rng::replicate(cfg.seed, "ce-shuffle", s as u64);
                let mut order: Vec<usize> = (0..micro.len()).collect();
                for i in (1..order.len()).rev() {
                    order.swap(i, r.random_range(0..=i));
                }
                let sm: Vec<usize> = order.iter().map(|&i| mi_seq[i]).collect();
                let sa: Vec<usize> = order.iter().map(|&i| ma_seq[i]).collect();
                let (a, b) = ce_over(
                    &Level { seq: &sm, n: n_micro },
                    &Level { seq: &sa, n: n_macro },
                    &all,
                    cfg,
                );
                b - a
            })
            .sum();
        total / cfg.shuffles as f64
    } else {
        0.0
    };
    let ce_adjusted = ce - ce_bias;

    let block_len = ((micro.len() as f64).cbrt().ceil() as usize).clamp(1, transitions);
    let resampled: Vec<f64> = (0..cfg.bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::replicate(cfg.seed, "ce-bootstrap", b as u64);
            let mut pairs = Vec::with_capacity(transitions);
            while pairs.len() < transitions {
                let start = r.random_range(0..=transitions - block_len);
                pairs.extend(start..start + block_len);
            }
            pairs.truncate(transitions);
            let (a, b) = ce_over(&micro_level, &macro_level, &pairs, cfg);
            b - a - ce_bias
        })
        .collect();

    let b = resampled.len() as f64;
    let (p_value, p_value_bottom) = if resampled.is_empty() {
        (1.0, 1.0)
    } else {
        let below = resampled.iter().filter(|&&c| c <= 0.0).count() as f64;
        let above = resampled.iter().filter(|&&c| c >= 0.0).count() as f64;
        ((below + 1.0) / (b + 1.0), (above + 1.0) / (b + 1.0))
    };
    let classification = if ce_adjusted > 0.0 && p_value < cfg.alpha {
        Classification::TopHeavy
    } else if ce_adjusted < 0.0 && p_value_bottom < cfg.alpha {
        Classification::BottomHeavy
    } else {
        Classification::Neutral
    };
    Ok(EiResult {
        ei_micro,
        ei_macro,
        ce,
        p_value,
        p_value_bottom,
        classification,
        n_micro_states: n_micro,
        n_macro_states: n_macro,
        ce_bias,
        ce_adjusted,
        block_len,
    })
}

/// Macro feature vectors `[Q, C, A, E, D]` per window. With `difference`,
/// the stock variables `C, A, E` enter as changes from the previous window
/// and the first window is dropped. Missing `Q`/`D` count as 0.
pub fn macro_features(macro_states: &[MacroState], difference: bool) -> Vec<Vec<f64>> {
    let row = |m: &MacroState| vec![m.q.unwrap_or(0.0), m.c, m.a, m.e, m.d.unwrap_or(0.0)];
    if !difference {
        return macro_states.iter().map(row).collect();
    }
    macro_states
        .windows(2)
        .map(|w| {
            let (prev, cur) = (row(&w[0]), row(&w[1]));
            vec![
                cur[0],
                cur[1] - prev[1],
                cur[2] - prev[2],
                cur[3] - prev[3],
                cur[4],
            ]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Quantile bins per dimension before compression.
    pub bins: usize,
    /// Maximum number of joint states per level.
    pub budget: usize,
    /// Difference the stock macro variables before discretizing.
    pub difference_stocks: bool,
    pub ce: CeConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            bins: 3,
            budget: 16,
            difference_stocks: true,
            ce: CeConfig::default(),
        }
    }
}

/// Discretize both levels of a series table and compare their EI.
pub fn emergence_from_table(table: &SeriesTable, opts: &PipelineOptions) -> Result<EiResult> {
    if opts.bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bins, got {}",
            opts.bins
        )));
    }
    let macro_raw = macro_features(&table.macro_states, opts.difference_stocks);
    let skip = table.len() - macro_raw.len();
    let micro_raw = &table.micro_features[skip..];
    if macro_raw.len() < 2 {
        return Err(Error::TooShort {
            needed: 2 + skip,
            got: table.len(),
        });
    }
    let micro = compress_features(micro_raw, opts.bins, opts.budget)?;
    let macro_ = compress_features(&macro_raw, opts.bins, opts.budget)?;
    causal_emergence(&micro.states, &macro_.states, &opts.ce)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_split() {
        let d = discretize(
            &[vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            2,
            BinScheme::Quantile,
        )
        .unwrap();
        assert_eq!(d.states, [0, 0, 1, 1]);
        assert_eq!(d.n_states, 2);
    }

    #[test]
    fn constant_series_is_one_state() {
        let d = discretize(&vec![vec![3.0]; 5], 4, BinScheme::Quantile).unwrap();
        assert_eq!(d.n_states, 1);
        assert_eq!(d.constant_dims, [0]);
    }

    #[test]
    fn two_dims_give_at_most_four_states() {
        let s: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        for scheme in [BinScheme::Quantile, BinScheme::EqualWidth] {
            assert!(discretize(&s, 2, scheme).unwrap().n_states <= 4);
        }
    }

    #[test]
    fn discretize_rejects_bad_input() {
        assert!(matches!(
            discretize(&[vec![1.0]], 2, BinScheme::Quantile),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            discretize(&[vec![1.0], vec![2.0]], 1, BinScheme::Quantile),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn heavy_ties_keep_variation() {
        let d = discretize(
            &[vec![0.0], vec![1.0], vec![1.0], vec![1.0], vec![5.0]],
            2,
            BinScheme::Quantile,
        )
        .unwrap();
        assert!(d.n_states == 2);
    }

    #[test]
    fn counting_and_smoothing() {
        let seq = [0, 1, 0, 1, 0];
        let t = estimate_transitions(&seq, 2, 0.0).unwrap();
        assert_eq!(t.row(0), [0.0, 1.0]);
        assert_eq!(t.row(1), [1.0, 0.0]);
        // A→A never, A→B twice: (0+1)/(2+2), (2+1)/(2+2)
        let t = estimate_transitions(&seq, 2, 1.0).unwrap();
        assert_eq!(t.row(0), [0.25, 0.75]);
        let one = estimate_transitions(&[0, 0, 0], 1, 0.5).unwrap();
        assert_eq!(one.row(0), [1.0]);
    }

    #[test]
    fn unvisited_rows_are_uniform() {
        let t = estimate_transitions(&[0, 0, 1], 3, 0.0).unwrap();
        assert_eq!(t.row(2), [1.0 / 3.0; 3]);
        assert_eq!(t.row(1), [1.0 / 3.0; 3]);
    }

    #[test]
    fn ei_extremes() {
        let id = TransitionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((effective_information(&id) - 1.0).abs() < 1e-12);
        let flat = TransitionMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(effective_information(&flat), 0.0);
        assert_eq!(kl_to_uniform(&id), 1.0);
    }

    #[test]
    fn misaligned_sequences() {
        assert!(matches!(
            causal_emergence(&[0, 1, 0], &[0, 1], &CeConfig::default()),
            Err(Error::MisalignedSeries(_))
        ));
    }

    #[test]
    fn identity_map_gives_zero_ce() {
        let seq: Vec<usize> = (0..300).map(|i| (i * i + 3 * i) % 5).collect();
        let relabeled: Vec<usize> = seq.iter().map(|s| 4 - s).collect();
        let cfg = CeConfig {
            bootstrap: 50,
            ..CeConfig::default()
        };
        let r = causal_emergence(&seq, &relabeled, &cfg).unwrap();
        assert_eq!(r.ce, 0.0);
        assert_eq!(r.classification, Classification::Neutral);
    }

    #[test]
    fn budget_is_respected() {
        let feats: Vec<Vec<f64>> = (0..200)
            .map(|t| (0..30).map(|a| ((t * (a + 3) + a * a) % 7) as f64).collect())
            .collect();
        let d = compress_features(&feats, 3, 16).unwrap();
        assert!(d.n_states <= 16);
    }

    #[test]
    fn lumping_rejects_bad_maps() {
        let id = TransitionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(id.lump(&[0]).is_err());
        assert!(id.lump(&[0, 2]).is_err());
    }
}
