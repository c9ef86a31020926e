//! Empirical gap statistics over an ordinate table.
//!
//! Thresholds are given in mean-spacing units `c` and converted to absolute
//! heights as `2πc / log T`. Comparisons follow the definitions they come
//! from: runs use `≥`, failure classes use `<`, pair correlation uses the
//! open interval `0 < γ_n − γ_m < threshold`, and the neighbor-spacing and
//! joint events use `≤`.
//!
//! Every index `n` with `γ_n ≤ T` must have its lookahead ordinates in the
//! table; statistics never drop boundary indices silently.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_finite, Error, Result};
use crate::zeros::{rvm_main_term, OrdinateTable};

/// `2πc / log T`, the absolute size of a gap of `c` mean spacings at height `T`.
pub fn moderate_threshold(t: f64, c: f64) -> Result<f64> {
    require_finite("T", t)?;
    require_finite("c", c)?;
    if t <= 1.0 {
        return Err(Error::domain(format!("T must exceed 1, got {t}")));
    }
    if c <= 0.0 {
        return Err(Error::domain(format!("c must be positive, got {c}")));
    }
    Ok(threshold_unchecked(t, c))
}

fn threshold_unchecked(t: f64, c: f64) -> f64 {
    2.0 * PI * c / t.ln()
}

fn checked_threshold(t: f64, c: f64, allow_zero: bool) -> Result<f64> {
    if allow_zero && c == 0.0 {
        require_finite("T", t)?;
        if t <= 1.0 {
            return Err(Error::domain(format!("T must exceed 1, got {t}")));
        }
        return Ok(0.0);
    }
    if c.is_infinite() && c > 0.0 {
        require_finite("T", t)?;
        if t <= 1.0 {
            return Err(Error::domain(format!("T must exceed 1, got {t}")));
        }
        return Ok(f64::INFINITY);
    }
    if c < 0.0 {
        return Err(Error::domain(format!("c must be nonnegative, got {c}")));
    }
    moderate_threshold(t, c)
}

/// Refuses thresholds finer than the table's recorded decimal precision.
pub fn check_resolution(table: &OrdinateTable, threshold: f64) -> Result<()> {
    let res = table.resolution();
    if threshold > 0.0 && threshold < res {
        return Err(Error::argument(format!(
            "threshold {threshold} is below the table resolution {res}"
        )));
    }
    Ok(())
}

/// `N(T)` together with a check that `lookahead` ordinates follow index `N(T)`.
fn counted_with_lookahead(table: &OrdinateTable, t: f64, lookahead: usize) -> Result<usize> {
    let n = table.count_upto(t)?;
    if n + lookahead > table.len() {
        return Err(Error::coverage(format!(
            "N(T) = {n} with lookahead {lookahead} needs γ_{} but the table ends at γ_{}",
            n + lookahead,
            table.len()
        )));
    }
    Ok(n)
}

fn normalized_fraction(count: usize, n_total: usize) -> f64 {
    if n_total == 0 {
        0.0
    } else {
        count as f64 / n_total as f64
    }
}

/// Moderate-gap run counts at height `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub r: usize,
    pub c: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// Absolute threshold `2πc / log T`.
    pub threshold: f64,
    /// `N(T)`.
    pub n_total: usize,
    /// `N_r(T, c)`.
    pub n_runs: usize,
    /// `|S_1|, …, |S_r|` under the first-failure convention.
    pub s_sizes: Vec<usize>,
    /// `N(T) − N_r − Σ|S_j|`; zero by construction.
    pub partition_residual: i64,
}

/// Length of the run of passing gaps starting at each index, capped at `r`.
///
/// Entry `i` (0-based, i.e. `γ_{i+1}`) holds the number of consecutive gaps
/// `g_{i+1}, g_{i+2}, …` that are `≥ threshold`, up to `r`.
fn capped_run_lengths(ords: &[f64], n_total: usize, r: usize, threshold: f64) -> Vec<usize> {
    // Gaps needed: g_1 .. g_{n_total + r - 1}.
    let last_gap = n_total + r - 1;
    let mut run = vec![0usize; last_gap + 1];
    for i in (0..last_gap).rev() {
        let gap = ords[i + 1] - ords[i];
        run[i] = if gap >= threshold {
            (run[i + 1] + 1).min(r)
        } else {
            0
        };
    }
    run.truncate(n_total);
    run
}

/// Counts `N_r(T, c)` and the failure partition `S_1, …, S_r`.
///
/// `S_j` holds the indices whose first sub-threshold gap among
/// `g_n, …, g_{n+r−1}` is `g_{n+j−1}`, which makes the classes disjoint and
/// exhaustive: `N(T) = N_r(T, c) + Σ_j |S_j|` holds exactly.
pub fn count_runs(table: &OrdinateTable, r: usize, c: f64, t: f64) -> Result<RunReport> {
    if r < 1 {
        return Err(Error::argument("r must be at least 1"));
    }
    let threshold = checked_threshold(t, c, false)?;
    let n_total = counted_with_lookahead(table, t, r)?;
    let runs = capped_run_lengths(table.ordinates(), n_total, r, threshold);
    let mut s_sizes = vec![0usize; r];
    let mut n_runs = 0usize;
    for len in runs {
        if len == r {
            n_runs += 1;
        } else {
            s_sizes[len] += 1;
        }
    }
    let residual = n_total as i64 - n_runs as i64 - s_sizes.iter().sum::<usize>() as i64;
    Ok(RunReport {
        r,
        c,
        t,
        threshold,
        n_total,
        n_runs,
        s_sizes,
        partition_residual: residual,
    })
}

/// `|S_1|, …, |S_r|` under the first-failure convention.
pub fn partition_sj(table: &OrdinateTable, r: usize, c: f64, t: f64) -> Result<Vec<usize>> {
    Ok(count_runs(table, r, c, t)?.s_sizes)
}

/// `|S_j|` for `j = 1..=r` read literally: `g_n, …, g_{n+j−1} ≥` threshold and
/// `g_{n+j} <` threshold.
///
/// These classes omit indices whose very first gap fails, so they do not
/// partition the complement of the run set. Exposed for comparison only.
pub fn partition_sj_literal(table: &OrdinateTable, r: usize, c: f64, t: f64) -> Result<Vec<usize>> {
    if r < 1 {
        return Err(Error::argument("r must be at least 1"));
    }
    let threshold = checked_threshold(t, c, false)?;
    let n_total = counted_with_lookahead(table, t, r + 1)?;
    let runs = capped_run_lengths(table.ordinates(), n_total, r + 1, threshold);
    let mut sizes = vec![0usize; r];
    for len in runs {
        if (1..=r).contains(&len) {
            sizes[len - 1] += 1;
        }
    }
    Ok(sizes)
}

/// Pair-correlation count `#{(m, n) : 0 < γ_n − γ_m < 2πc/log T}` over
/// ordinates in `(0, T]`, divided by `N(T)`.
pub fn empirical_pair_correlation(table: &OrdinateTable, c: f64, t: f64) -> Result<f64> {
    let threshold = checked_threshold(t, c, false)?;
    let n_total = table.count_upto(t)?;
    let pairs = pair_count(&table.ordinates()[..n_total], threshold);
    Ok(normalized_fraction(pairs as usize, n_total))
}

/// Ordinates mapped through the smooth counting function.
fn unfolded(ords: &[f64]) -> Result<Vec<f64>> {
    ords.iter().map(|&g| rvm_main_term(g)).collect()
}

/// Pair-correlation count `#{(m, n) : 0 < u_n − u_m < c}` on unfolded
/// ordinates `u = (γ/2π) log(γ/2π) − γ/2π + 7/8`, over `γ ≤ T`, divided by `N(T)`.
pub fn unfolded_pair_correlation(table: &OrdinateTable, c: f64, t: f64) -> Result<f64> {
    checked_threshold(t, c, false)?;
    let n_total = table.count_upto(t)?;
    let u = unfolded(&table.ordinates()[..n_total])?;
    Ok(normalized_fraction(pair_count(&u, c) as usize, n_total))
}

/// [`joint_run_probability`] with thresholds applied to unfolded differences.
pub fn unfolded_joint_run_probability(
    table: &OrdinateTable,
    thresholds: &[f64],
    t: f64,
) -> Result<f64> {
    validate_sorted_thresholds(thresholds)?;
    checked_threshold(t, thresholds[0], true)?;
    let r = thresholds.len();
    let n_total = counted_with_lookahead(table, t, r)?;
    let u = unfolded(&table.ordinates()[..n_total + r])?;
    let hits = (0..n_total)
        .filter(|&i| {
            thresholds
                .iter()
                .enumerate()
                .all(|(k, &c)| u[i + k + 1] - u[i] <= c)
        })
        .count();
    Ok(normalized_fraction(hits, n_total))
}

const SWEEP_CHUNK: usize = 8192;

/// Number of ordered pairs `i < j` with `0 < x_j − x_i < threshold` in a
/// sorted slice.
///
/// The sweep is split into fixed index blocks; each block counts the pairs
/// whose smaller element it owns, so the total does not depend on how the
/// blocks are scheduled.
pub fn pair_count(xs: &[f64], threshold: f64) -> u64 {
    if xs.len() < 2 || !(threshold > 0.0) {
        return 0;
    }
    let starts: Vec<usize> = (0..xs.len()).step_by(SWEEP_CHUNK).collect();
    starts
        .par_iter()
        .map(|&start| {
            let end = (start + SWEEP_CHUNK).min(xs.len());
            let mut lo = xs.partition_point(|&y| y <= xs[start]);
            let mut hi = lo;
            let mut count = 0u64;
            for i in start..end {
                let x = xs[i];
                while lo < xs.len() && xs[lo] <= x {
                    lo += 1;
                }
                if hi < lo {
                    hi = lo;
                }
                while hi < xs.len() && xs[hi] - x < threshold {
                    hi += 1;
                }
                count += (hi - lo) as u64;
            }
            count
        })
        .sum()
}

/// Fraction of `γ_n ≤ T` with `γ_{n+ℓ} − γ_n ≤ 2πc/log T`.
pub fn neighbor_spacing_cdf(table: &OrdinateTable, ell: usize, c: f64, t: f64) -> Result<f64> {
    if ell < 1 {
        return Err(Error::argument("ell must be at least 1"));
    }
    let threshold = checked_threshold(t, c, true)?;
    let n_total = counted_with_lookahead(table, t, ell)?;
    let ords = table.ordinates();
    let hits = (0..n_total)
        .filter(|&i| ords[i + ell] - ords[i] <= threshold)
        .count();
    Ok(normalized_fraction(hits, n_total))
}

pub(crate) fn validate_sorted_thresholds(cs: &[f64]) -> Result<()> {
    if cs.is_empty() {
        return Err(Error::argument("at least one threshold is required"));
    }
    for &c in cs {
        if c.is_nan() || c < 0.0 {
            return Err(Error::argument(format!(
                "threshold {c} must be nonnegative"
            )));
        }
    }
    if cs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::argument(
            "thresholds must be nondecreasing (c_1 ≤ c_2 ≤ … ≤ c_r)",
        ));
    }
    Ok(())
}

/// Fraction of `γ_n ≤ T` with `γ_{n+ℓ} − γ_n ≤ 2πc_ℓ/log T` for every
/// `ℓ = 1..=r`, where `r = thresholds.len()`.
pub fn joint_run_probability(table: &OrdinateTable, thresholds: &[f64], t: f64) -> Result<f64> {
    validate_sorted_thresholds(thresholds)?;
    let abs: Vec<f64> = thresholds
        .iter()
        .map(|&c| checked_threshold(t, c, true))
        .collect::<Result<_>>()?;
    let r = abs.len();
    let n_total = counted_with_lookahead(table, t, r)?;
    let ords = table.ordinates();
    let hits = (0..n_total)
        .filter(|&i| {
            abs.iter()
                .enumerate()
                .all(|(k, &thr)| ords[i + k + 1] - ords[i] <= thr)
        })
        .count();
    Ok(normalized_fraction(hits, n_total))
}

/// `(γ_{n+1} log γ_{n+1} − γ_n log γ_n) / 2π`.
pub fn ah_rescaled_difference(table: &OrdinateTable, n: usize) -> Result<f64> {
    let a = table.ordinate(n)?;
    let b = table.ordinate(n + 1)?;
    if a <= 1.0 {
        return Err(Error::domain(format!("γ_{n} = {a} must exceed 1")));
    }
    Ok(rescaled(a, b))
}

fn rescaled(a: f64, b: f64) -> f64 {
    (b * b.ln() - a * a.ln()) / (2.0 * PI)
}

/// Half-integer bin `k` with `max{k/2 − 1/4, 0} ≤ d < k/2 + 1/4`.
pub fn ah_bin(d: f64) -> Result<u64> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::domain(format!(
            "rescaled difference must be finite and nonnegative, got {d}"
        )));
    }
    Ok((2.0 * d + 0.5).floor() as u64)
}

/// Occupancy of the half-integer bins at height `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhHistogram {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_total: usize,
    /// Bin index `k` (bin centre `k/2`) to count.
    pub bin_counts: BTreeMap<u64, usize>,
    /// `p_{k/2}(T)`.
    pub p_values: BTreeMap<u64, f64>,
}

/// Assigns each `γ_n ≤ T` to its half-integer bin.
pub fn ah_binning(table: &OrdinateTable, t: f64) -> Result<AhHistogram> {
    require_finite("T", t)?;
    let n_total = counted_with_lookahead(table, t, 1)?;
    let ords = table.ordinates();
    let mut bin_counts = BTreeMap::new();
    for i in 0..n_total {
        if ords[i] <= 1.0 {
            return Err(Error::domain(format!(
                "γ_{} = {} must exceed 1",
                i + 1,
                ords[i]
            )));
        }
        let k = ah_bin(rescaled(ords[i], ords[i + 1]))?;
        *bin_counts.entry(k).or_insert(0) += 1;
    }
    let p_values = bin_counts
        .iter()
        .map(|(&k, &v)| (k, normalized_fraction(v, n_total)))
        .collect();
    Ok(AhHistogram {
        t,
        n_total,
        bin_counts,
        p_values,
    })
}

/// How gaps are scaled to mean-spacing units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Multiply by `(log T)/2π` for a fixed height `T`.
    Global,
    /// Multiply by `(log γ_n)/2π` at each gap's own height.
    Local,
    /// Difference of the smooth counting function
    /// `(t/2π) log(t/2π) − t/2π + 7/8` at both ends, so the mean spacing is 1
    /// at every height.
    Unfolded,
}

/// Histogram of normalized `ℓ`-th neighbor differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingDistribution {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub n_samples: usize,
    pub normalization: Normalization,
}

impl SpacingDistribution {
    /// Empirical CDF at each right bin edge.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0usize;
        self.counts
            .iter()
            .map(|&c| {
                acc += c;
                normalized_fraction(acc, self.n_samples)
            })
            .collect()
    }
}

pub fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::argument(
            "bin edges must be strictly increasing, at least two",
        ));
    }
    Ok(())
}

/// Bins `values` into `[e_i, e_{i+1})`; values outside all bins are dropped
/// from the counts but still included in `n_samples`.
pub fn histogram(
    values: &[f64],
    edges: &[f64],
    normalization: Normalization,
) -> Result<SpacingDistribution> {
    validate_edges(edges)?;
    let mut counts = vec![0usize; edges.len() - 1];
    for &v in values {
        let k = edges.partition_point(|&e| e <= v);
        if k >= 1 && k < edges.len() {
            counts[k - 1] += 1;
        }
    }
    Ok(SpacingDistribution {
        bin_edges: edges.to_vec(),
        counts,
        n_samples: values.len(),
        normalization,
    })
}

/// Normalized `γ_{n+ℓ} − γ_n` for all `γ_n ≤ T`.
pub fn normalized_spacings(
    table: &OrdinateTable,
    ell: usize,
    t: f64,
    normalization: Normalization,
) -> Result<Vec<f64>> {
    if ell < 1 {
        return Err(Error::argument("ell must be at least 1"));
    }
    require_finite("T", t)?;
    if t <= 1.0 {
        return Err(Error::domain(format!("T must exceed 1, got {t}")));
    }
    let n_total = counted_with_lookahead(table, t, ell)?;
    let ords = table.ordinates();
    let global = t.ln() / (2.0 * PI);
    (0..n_total)
        .map(|i| {
            let d = ords[i + ell] - ords[i];
            match normalization {
                Normalization::Global => Ok(d * global),
                Normalization::Local => {
                    if ords[i] <= 1.0 {
                        return Err(Error::domain("local normalization needs γ_n > 1"));
                    }
                    Ok(d * ords[i].ln() / (2.0 * PI))
                }
                Normalization::Unfolded => {
                    Ok(rvm_main_term(ords[i + ell])? - rvm_main_term(ords[i])?)
                }
            }
        })
        .collect()
}

/// Histogram of normalized `ℓ`-th neighbor spacings below height `T`.
pub fn spacing_distribution(
    table: &OrdinateTable,
    ell: usize,
    t: f64,
    edges: &[f64],
    normalization: Normalization,
) -> Result<SpacingDistribution> {
    let values = normalized_spacings(table, ell, t, normalization)?;
    histogram(&values, edges, normalization)
}
