//! Statistical primitives behind the proposition tests: least squares,
//! permutation tests, Mann–Kendall, discrete power-law fitting, logistic
//! regression and single structural-break detection.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::rng;

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `NaN` with fewer than 3 points.
    pub stderr: f64,
}

/// Simple linear regression of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(Error::MisalignedSeries(format!("{} x vs {} y", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NoVariation("regressor".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let sse: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(OlsFit {
        slope,
        intercept,
        stderr,
    })
}

/// Slope of `y` against its index `0, 1, 2, …`.
pub fn trend_slope(y: &[f64]) -> Result<f64> {
    let x: Vec<f64> = (0..y.len()).map(|i| i as f64).collect();
    Ok(ols(&x, y)?.slope)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

// ---------------------------------------------------------------------------
// Permutation tests
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationResult {
    /// `mean(a) − mean(b)`.
    pub diff: f64,
    /// Two-sided p-value on `|diff|`.
    pub p_two_sided: f64,
    /// One-sided p-value for `mean(a) > mean(b)`.
    pub p_greater: f64,
}

/// Two-sample permutation test on the difference in means, relabelling
/// groups `permutations` times.
pub fn permutation_mean_diff(
    a: &[f64],
    b: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<PermutationResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSeries {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let observed = mean(a) - mean(b);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let na = a.len();
    let total: f64 = pooled.iter().sum();
    let eps = 1e-12 * (1.0 + observed.abs());
    let (extreme, greater) = (0..permutations)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::replicate(seed, "perm-mean", i as u64);
            let mut v = pooled.clone();
            v.shuffle(&mut r);
            let sa: f64 = v[..na].iter().sum();
            let d = sa / na as f64 - (total - sa) / (v.len() - na) as f64;
            (
                usize::from(d.abs() >= observed.abs() - eps),
                usize::from(d >= observed - eps),
            )
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let denom = permutations as f64 + 1.0;
    Ok(PermutationResult {
        diff: observed,
        p_two_sided: (extreme as f64 + 1.0) / denom,
        p_greater: (greater as f64 + 1.0) / denom,
    })
}

// ---------------------------------------------------------------------------
// Mann–Kendall
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannKendall {
    pub n: usize,
    pub s: i64,
    /// Tie-corrected variance of `S`.
    pub var_s: f64,
    /// Continuity-corrected normal score.
    pub z: f64,
    /// One-sided p-value for an increasing trend.
    pub p_increasing: f64,
    /// One-sided p-value for a decreasing trend.
    pub p_decreasing: f64,
    /// Whether the p-values come from the exact permutation distribution.
    pub exact: bool,
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `S = Σ_{i<j} sgn(x_j − x_i)`.
pub fn mk_statistic(x: &[f64]) -> i64 {
    let mut s = 0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += sign(x[j] - x[i]);
        }
    }
    s
}

fn tie_groups(x: &[f64]) -> Vec<usize> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            groups.push(run);
            run = 1;
        }
    }
    if !sorted.is_empty() {
        groups.push(run);
    }
    groups
}

/// Exact null distribution of `S` over all orderings of a multiset with the
/// given group sizes, as a map from `S` to the number of orderings.
///
/// Dynamic programming over how many copies of each value have been placed:
/// appending a value adds `#placed below − #placed above` to `S`.
fn exact_s_distribution(groups: &[usize]) -> BTreeMap<i64, f64> {
    let k = groups.len();
    let mut layer: BTreeMap<Vec<usize>, BTreeMap<i64, f64>> = BTreeMap::new();
    layer.insert(vec![0; k], BTreeMap::from([(0, 1.0)]));
    let n: usize = groups.iter().sum();
    for _ in 0..n {
        let mut next: BTreeMap<Vec<usize>, BTreeMap<i64, f64>> = BTreeMap::new();
        for (placed, dist) in &layer {
            for v in 0..k {
                if placed[v] == groups[v] {
                    continue;
                }
                let below: usize = placed[..v].iter().sum();
                let above: usize = placed[v + 1..].iter().sum();
                let delta = below as i64 - above as i64;
                let mut key = placed.clone();
                key[v] += 1;
                let slot = next.entry(key).or_default();
                for (&s, &c) in dist {
                    *slot.entry(s + delta).or_default() += c;
                }
            }
        }
        layer = next;
    }
    layer.into_values().next().unwrap_or_default()
}

/// Mann–Kendall trend test. Exact permutation p-values for `n ≤ 10`,
/// normal approximation above that.
pub fn mann_kendall(x: &[f64]) -> Result<MannKendall> {
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let s = mk_statistic(x);
    let groups = tie_groups(x);
    let tie_term: f64 = groups
        .iter()
        .map(|&t| (t * (t.saturating_sub(1)) * (2 * t + 5)) as f64)
        .sum();
    let nf = n as f64;
    let var_s = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;
    let z = if var_s <= 0.0 {
        0.0
    } else {
        (s - s.signum()) as f64 / var_s.sqrt()
    };
    if var_s <= 0.0 {
        return Ok(MannKendall {
            n,
            s,
            var_s,
            z,
            p_increasing: 0.5,
            p_decreasing: 0.5,
            exact: false,
        });
    }
    let (p_increasing, p_decreasing, exact) = if n <= 10 {
        let dist = exact_s_distribution(&groups);
        let total: f64 = dist.values().sum();
        let ge: f64 = dist.range(s..).map(|(_, c)| c).sum();
        let le: f64 = dist.range(..=s).map(|(_, c)| c).sum();
        (ge / total, le / total, true)
    } else {
        let nd = std_normal();
        (1.0 - nd.cdf(z), nd.cdf(z), false)
    };
    Ok(MannKendall {
        n,
        s,
        var_s,
        z,
        p_increasing,
        p_decreasing,
        exact,
    })
}

// ---------------------------------------------------------------------------
// Rank correlation, contingency tables, cross-correlation
// ---------------------------------------------------------------------------

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub rho: f64,
    /// One-sided p-value for `rho > 0` (Student-t approximation).
    pub p_positive: f64,
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::MisalignedSeries(format!("{} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    let rho = pearson(&ranks(x), &ranks(y)).clamp(-1.0, 1.0);
    let df = n as f64 - 2.0;
    let p_positive = if rho >= 1.0 {
        0.0
    } else if rho <= -1.0 {
        1.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        1.0 - StudentsT::new(0.0, 1.0, df).expect("df > 0").cdf(t)
    };
    Ok(Correlation { rho, p_positive })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of independence on an `r × c` table. Empty rows
/// and columns are dropped.
pub fn chi_square_independence(table: &[Vec<f64>]) -> Result<ChiSquareResult> {
    let rows: Vec<&Vec<f64>> = table.iter().filter(|r| r.iter().sum::<f64>() > 0.0).collect();
    let ncol = rows.first().map_or(0, |r| r.len());
    let col_tot: Vec<f64> = (0..ncol).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let cols: Vec<usize> = (0..ncol).filter(|&j| col_tot[j] > 0.0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return Err(Error::NoVariation("contingency table".into()));
    }
    let total: f64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rt: f64 = r.iter().sum();
        for &j in &cols {
            let e = rt * col_tot[j] / total;
            stat += (r[j] - e).powi(2) / e;
        }
    }
    let df = (rows.len() - 1) * (cols.len() - 1);
    let p_value = 1.0 - ChiSquared::new(df as f64).expect("df > 0").cdf(stat);
    Ok(ChiSquareResult {
        statistic: stat,
        df,
        p_value,
    })
}

/// Lag in `-max_lag..=max_lag` maximizing `corr(a_t, b_{t+lag})`, with the
/// correlation there. A negative lag means `b` moves first.
pub fn peak_cross_correlation(a: &[f64], b: &[f64], max_lag: usize) -> (i64, f64) {
    let n = a.len().min(b.len()) as i64;
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -(max_lag as i64)..=max_lag as i64 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n)
            .filter_map(|t| {
                let u = t + lag;
                (u >= 0 && u < n).then(|| (a[t as usize], b[u as usize]))
            })
            .unzip();
        if xs.len() < 3 {
            continue;
        }
        let c = pearson(&xs, &ys);
        // prefer the smallest |lag| on ties
        if c > best.1 + 1e-12 || ((c - best.1).abs() <= 1e-12 && lag.abs() < best.0.abs()) {
            best = (lag, c);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Discrete power law
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: u64,
    /// Observations at or above `x_min`.
    pub n_tail: usize,
    /// Kolmogorov–Smirnov distance between the tail and the fitted law.
    pub ks: f64,
}

/// `α̂ = 1 + m · [Σ ln(x_i / (x_min − ½))]⁻¹` over the `m` observations with
/// `x_i ≥ x_min`.
pub fn power_law_alpha(data: &[u64], x_min: u64) -> Result<f64> {
    if x_min < 1 {
        return Err(Error::InvalidParameter("x_min must be ≥ 1".into()));
    }
    let shift = x_min as f64 - 0.5;
    let (m, sum) = data
        .iter()
        .filter(|&&x| x >= x_min)
        .fold((0usize, 0.0), |(m, s), &x| (m + 1, s + (x as f64 / shift).ln()));
    if m < 2 || sum <= 0.0 {
        return Err(Error::TooShort { needed: 2, got: m });
    }
    Ok(1.0 + m as f64 / sum)
}

/// Survival function `P(X ≥ x)` of the continuous approximation used by the
/// estimator.
fn power_law_sf(x: u64, alpha: f64, x_min: u64) -> f64 {
    ((x as f64 - 0.5) / (x_min as f64 - 0.5)).powf(1.0 - alpha)
}

fn ks_distance(tail: &[u64], alpha: f64, x_min: u64) -> f64 {
    let mut sorted = tail.to_vec();
    sorted.sort_unstable();
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        // empirical and model CDF just below and at x
        let model_below = 1.0 - power_law_sf(x, alpha, x_min);
        let model_at = 1.0 - power_law_sf(x + 1, alpha, x_min);
        d = d
            .max((i as f64 / m - model_below).abs())
            .max((j as f64 / m - model_at).abs());
        i = j;
    }
    d
}

pub fn fit_power_law(data: &[u64], x_min: u64) -> Result<PowerLawFit> {
    let alpha = power_law_alpha(data, x_min)?;
    let tail: Vec<u64> = data.iter().copied().filter(|&x| x >= x_min).collect();
    Ok(PowerLawFit {
        alpha,
        x_min,
        n_tail: tail.len(),
        ks: ks_distance(&tail, alpha, x_min),
    })
}

/// Choose `x_min` by minimizing the KS distance over candidate values that
/// leave at least `min_tail` observations in the tail.
pub fn fit_power_law_auto(data: &[u64], min_tail: usize) -> Result<PowerLawFit> {
    let mut candidates: Vec<u64> = data.iter().copied().filter(|&x| x >= 1).collect();
    candidates.sort_unstable();
    candidates.dedup();
    candidates
        .into_iter()
        .filter(|&c| data.iter().filter(|&&x| x >= c).count() >= min_tail.max(2))
        .filter_map(|c| fit_power_law(data, c).ok())
        .min_by(|a, b| a.ks.total_cmp(&b.ks))
        .ok_or(Error::TooShort {
            needed: min_tail.max(2),
            got: data.len(),
        })
}

/// Draw from the discrete power law by rounding the continuous inverse CDF:
/// `x = ⌊(x_min − ½)(1 − u)^(−1/(α−1)) + ½⌋`.
pub fn sample_power_law(rng: &mut impl rand::Rng, alpha: f64, x_min: u64, m: usize) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let u: f64 = rng.random();
            ((x_min as f64 - 0.5) * (1.0 - u).powf(-1.0 / (alpha - 1.0)) + 0.5).floor() as u64
        })
        .collect()
}

/// Parametric-bootstrap goodness-of-fit p-value: the share of synthetic
/// samples from the fitted law whose KS distance is at least the observed.
pub fn power_law_gof(fit: &PowerLawFit, replicates: usize, seed: u64) -> f64 {
    let worse = (0..replicates)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng::replicate(seed, "powerlaw-gof", i as u64);
            let sample = sample_power_law(&mut r, fit.alpha, fit.x_min, fit.n_tail);
            power_law_alpha(&sample, fit.x_min)
                .map(|a| ks_distance(&sample, a, fit.x_min) >= fit.ks)
                .unwrap_or(true)
        })
        .count();
    (worse as f64 + 1.0) / (replicates as f64 + 1.0)
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogitFit {
    /// Intercept first, then one coefficient per regressor.
    pub coef: Vec<f64>,
    pub stderr: Vec<f64>,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted iteration, starting from β = 0.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Data were (quasi-)separable; the fit used a ridge penalty.
    pub separation: bool,
    pub ridge: f64,
}

const LOGIT_MAX_ITER: usize = 100;
const LOGIT_TOL: f64 = 1e-8;
const SEPARATION_RIDGE: f64 = 0.1;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn penalized_loglik(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, ridge: f64) -> f64 {
    let eta = x * beta;
    let ll: f64 = eta.iter().zip(y).map(|(&e, &yi)| yi * e - log1pexp(e)).sum();
    let pen: f64 = beta.iter().skip(1).map(|b| b * b).sum();
    ll - 0.5 * ridge * pen
}

fn irls(x: &DMatrix<f64>, y: &[f64], ridge: f64) -> Result<LogitFit> {
    let (n, p) = x.shape();
    let mut beta = DVector::zeros(p);
    let mut ll = penalized_loglik(x, y, &beta, ridge);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut penalty = DMatrix::identity(p, p) * ridge;
    penalty[(0, 0)] = 0.0;
    let yv = DVector::from_column_slice(y);

    for _ in 0..LOGIT_MAX_ITER {
        iterations += 1;
        let eta = x * &beta;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| (m * (1.0 - m)).max(1e-12));
        let grad = x.transpose() * (&yv - &mu) - &penalty * &beta;
        let mut info = &penalty + DMatrix::zeros(p, p);
        for i in 0..n {
            let row = x.row(i);
            info += row.transpose() * row * w[i];
        }
        let step = info
            .clone()
            .cholesky()
            .map(|c| c.solve(&grad))
            .or_else(|| info.lu().solve(&grad))
            .ok_or_else(|| Error::NoVariation("logistic design matrix is singular".into()))?;

        // step halving keeps the log-likelihood non-decreasing
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = &beta + &step * scale;
            let cand_ll = penalized_loglik(x, y, &candidate, ridge);
            if cand_ll >= ll - 1e-12 {
                accepted = Some((candidate, cand_ll));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, next_ll)) = accepted else {
            converged = true;
            break;
        };
        let delta = (next_ll - ll).abs();
        let moved = (&next - &beta).amax();
        beta = next;
        ll = next_ll.max(ll);
        trace.push(ll);
        if delta < LOGIT_TOL * (ll.abs() + LOGIT_TOL) || moved < LOGIT_TOL {
            converged = true;
            break;
        }
    }

    let mu = (x * &beta).map(sigmoid);
    let mut info = penalty.clone();
    for i in 0..n {
        let row = x.row(i);
        info += row.transpose() * row * (mu[i] * (1.0 - mu[i])).max(1e-12);
    }
    let stderr = info
        .try_inverse()
        .map(|inv| (0..p).map(|j| inv[(j, j)].max(0.0).sqrt()).collect())
        .unwrap_or_else(|| vec![f64::NAN; p]);
    Ok(LogitFit {
        coef: beta.iter().copied().collect(),
        stderr,
        log_likelihood: ll,
        trace,
        iterations,
        converged,
        separation: false,
        ridge,
    })
}

fn design(columns: &[&[f64]], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(
        n,
        columns.len() + 1,
        |i, j| {
            if j == 0 {
                1.0
            } else {
                columns[j - 1][i]
            }
        },
    )
}

fn looks_separated(fit: &LogitFit, n: usize) -> bool {
    !fit.converged || fit.coef.iter().skip(1).any(|c| c.abs() > 25.0) || fit.log_likelihood > -1e-6 * n as f64
}

/// Logistic regression of binary `y` on the given regressor columns via
/// iteratively reweighted least squares (at most 100 iterations, tolerance
/// 1e−8). Separable data are refit with a small ridge penalty and flagged.
pub fn logistic_regression(columns: &[&[f64]], y: &[f64]) -> Result<LogitFit> {
    let n = y.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::MisalignedSeries(
            "regressor length differs from response".into(),
        ));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidParameter("response must be 0/1".into()));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(Error::NoVariation("response".into()));
    }
    for (k, c) in columns.iter().enumerate() {
        if c.iter().all(|&v| v == c[0]) {
            return Err(Error::NoVariation(format!("regressor {k}")));
        }
    }
    let x = design(columns, n);
    let fit = irls(&x, y, 0.0)?;
    if looks_separated(&fit, n) {
        let mut ridge = irls(&x, y, SEPARATION_RIDGE)?;
        ridge.separation = true;
        return Ok(ridge);
    }
    Ok(fit)
}

/// Likelihood-ratio p-value for dropping regressor `k` (0-based, excluding
/// the intercept) from the full model.
pub fn logit_lr_pvalue(columns: &[&[f64]], y: &[f64], full: &LogitFit, k: usize) -> Result<f64> {
    let reduced_cols: Vec<&[f64]> = columns
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, c)| *c)
        .collect();
    let x = design(&reduced_cols, y.len());
    let reduced = irls(&x, y, full.ridge)?;
    let stat = (2.0 * (full.log_likelihood - reduced.log_likelihood)).max(0.0);
    Ok(1.0 - ChiSquared::new(1.0).expect("df = 1").cdf(stat))
}

// ---------------------------------------------------------------------------
// Structural break
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakResult {
    /// Index of the first observation after the break.
    pub index: usize,
    pub sup_f: f64,
    pub p_value: f64,
    pub mean_before: f64,
    pub mean_after: f64,
}

/// `(sup-F, argmax)` over breakpoints in `[trim, n − trim]`.
fn sup_f(y: &[f64], trim: usize) -> (f64, usize) {
    let n = y.len();
    let total: f64 = y.iter().sum();
    let total_sq: f64 = y.iter().map(|v| v * v).sum();
    let sse0 = (total_sq - total * total / n as f64).max(0.0);
    let mut prefix = 0.0;
    let mut prefix_sq = 0.0;
    let mut best = (f64::NEG_INFINITY, trim);
    for (k, &v) in y.iter().enumerate().take(n - trim) {
        if k >= trim {
            let (n1, n2) = (k as f64, (n - k) as f64);
            let s2 = total - prefix;
            let sse =
                (prefix_sq - prefix * prefix / n1).max(0.0) + (total_sq - prefix_sq - s2 * s2 / n2).max(0.0);
            let f = if sse0 <= 1e-12 * (1.0 + total_sq) {
                0.0
            } else if sse <= 1e-10 * sse0 {
                f64::INFINITY
            } else {
                (sse0 - sse) / (sse / (n as f64 - 2.0))
            };
            if f > best.0 {
                best = (f, k);
            }
        }
        prefix += v;
        prefix_sq += v * v;
    }
    best
}

/// Single mean-shift break located by SSE minimization (10% trimmed at each
/// end), with a permutation p-value from shuffling blocks of the no-break
/// residuals `shuffles` times.
pub fn structural_break(y: &[f64], shuffles: usize, seed: u64) -> Result<BreakResult> {
    let n = y.len();
    if n < 10 {
        return Err(Error::TooShort { needed: 10, got: n });
    }
    let trim = (n / 10).max(1);
    let (stat, index) = sup_f(y, trim);
    let mu = mean(y);
    let resid: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let block = ((n as f64).cbrt().ceil() as usize).max(1);
    let blocks: Vec<&[f64]> = resid.chunks(block).collect();
    let exceed = (0..shuffles)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng::replicate(seed, "break-perm", i as u64);
            let mut order: Vec<usize> = (0..blocks.len()).collect();
            order.shuffle(&mut r);
            let shuffled: Vec<f64> = order.iter().flat_map(|&b| blocks[b].iter().copied()).collect();
            sup_f(&shuffled, trim).0 >= stat
        })
        .count();
    let p_value = if stat <= 0.0 {
        1.0
    } else {
        (exceed as f64 + 1.0) / (shuffles as f64 + 1.0)
    };
    Ok(BreakResult {
        index,
        sup_f: stat,
        p_value,
        mean_before: mean(&y[..index]),
        mean_after: mean(&y[index..]),
    })
}

// ---------------------------------------------------------------------------
// Bootstrap helpers
// ---------------------------------------------------------------------------

/// Percentile interval of `samples` at coverage `1 − alpha`.
pub fn percentile_interval(samples: &mut [f64], alpha: f64) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (samples.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        samples[lo] + (samples[hi] - samples[lo]) * (pos - lo as f64)
    };
    (q(alpha / 2.0), q(1.0 - alpha / 2.0))
}

/// Percentile intervals at coverage `1 − alpha` for each logistic
/// coefficient from a case-resampling bootstrap. Replicates that fail to
/// fit (no variation after resampling) are skipped.
pub fn logistic_bootstrap(
    columns: &[&[f64]],
    y: &[f64],
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let n = y.len();
    let fits: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .filter_map(|i| {
            let mut r = rng::replicate(seed, "logit-boot", i as u64);
            let idx: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
            let cols: Vec<Vec<f64>> = columns
                .iter()
                .map(|c| idx.iter().map(|&j| c[j]).collect())
                .collect();
            let ys: Vec<f64> = idx.iter().map(|&j| y[j]).collect();
            let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            logistic_regression(&refs, &ys).ok().map(|f| f.coef)
        })
        .collect();
    let p = columns.len() + 1;
    (0..p)
        .map(|j| {
            let mut v: Vec<f64> = fits.iter().map(|c| c[j]).collect();
            if v.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                percentile_interval(&mut v, alpha)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_exact_line() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mk_strictly_increasing_ten() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let mk = mann_kendall(&x).unwrap();
        assert_eq!(mk.s, 45);
        assert_eq!(mk.var_s, 125.0);
        assert!((mk.z - 3.935).abs() < 1e-3);
        assert!(mk.p_increasing < 1e-4);
        assert!(mk.exact);
    }

    #[test]
    fn mk_constant_has_no_trend() {
        let mk = mann_kendall(&[2.0; 12]).unwrap();
        assert_eq!(mk.s, 0);
        assert_eq!(mk.p_increasing, 0.5);
    }

    #[test]
    fn exact_distribution_counts_orderings() {
        // three distinct values: 3! orderings, S ∈ {−3, −1, 1, 3}
        let d = exact_s_distribution(&[1, 1, 1]);
        assert_eq!(d, BTreeMap::from([(-3, 1.0), (-1, 2.0), (1, 2.0), (3, 1.0)]));
        // multiset {a, a, b}: 3 orderings
        assert_eq!(exact_s_distribution(&[2, 1]).values().sum::<f64>(), 3.0);
    }

    #[test]
    fn spearman_monotone() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let c = spearman(&x, &y).unwrap();
        assert!((c.rho - 1.0).abs() < 1e-12);
        assert_eq!(c.p_positive, 0.0);
    }

    #[test]
    fn chi_square_uniform_table() {
        let r = chi_square_independence(&[vec![10.0, 10.0], vec![10.0, 10.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_correlation_finds_shift() {
        let a: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let mut b = vec![0.0; 2];
        b.extend(&a[..48]);
        assert_eq!(peak_cross_correlation(&a, &b, 4).0, 2);
    }

    #[test]
    fn separable_logit_is_flagged() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 / 40.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| f64::from(u8::from(v > 0.5))).collect();
        let fit = logistic_regression(&[&x], &y).unwrap();
        assert!(fit.separation);
        assert!(fit.coef[1] > 0.0);
    }

    #[test]
    fn noiseless_step_break() {
        let y: Vec<f64> = (0..40).map(|i| if i < 25 { 0.9 } else { 0.7 }).collect();
        let b = structural_break(&y, 200, 1).unwrap();
        assert_eq!(b.index, 25);
        assert!(b.sup_f.is_infinite());
        let flat = structural_break(&[0.8; 40], 200, 1).unwrap();
        assert_eq!(flat.p_value, 1.0);
    }
}
