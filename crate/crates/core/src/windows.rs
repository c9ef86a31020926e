//! Window counts `N(t + jh) − N(t + (j−1)h)` with `h = 2πm / log T`, the exact
//! variance integral of those counts, and gap detection inside windows.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_finite, Error, Result};
use crate::zeros::OrdinateTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowConfig {
    /// Base height `T`.
    #[serde(rename = "T")]
    pub t: f64,
    /// Expected number of ordinates per window.
    pub m: u32,
    /// Windows per site.
    pub r: u32,
    pub epsilon: f64,
    /// Exponent `C` used when coupling sites to evaluation heights.
    pub c_exponent: f64,
}

impl WindowConfig {
    pub fn new(t: f64, m: u32, r: u32) -> Result<Self> {
        let cfg = Self {
            t,
            m,
            r,
            epsilon: 0.1,
            c_exponent: 3.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("T", self.t)?;
        if self.t <= 1.0 {
            return Err(Error::domain(format!("T must exceed 1, got {}", self.t)));
        }
        if self.m < 1 || self.r < 1 {
            return Err(Error::argument("m and r must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::argument(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Window length `h = 2πm / log T`.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.m as f64 / self.t.ln()
    }

    /// Gap size `4π / (3 log T)` that every compliant window must contain.
    pub fn gap_threshold(&self) -> f64 {
        4.0 * PI / (3.0 * self.t.ln())
    }

    /// Whether a window count lies strictly inside `(m/2, 3m/2)`.
    pub fn count_in_bounds(&self, count: usize) -> bool {
        let c = 2 * count as u64;
        let m = self.m as u64;
        c > m && c < 3 * m
    }
}

/// How the largest gap inside a window is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapConvention {
    /// Consecutive interior ordinates plus the two segments joining the
    /// window edges to the outermost interior ordinates. The `M + 1` segments
    /// sum to `h`, so the largest is at least `h/(M + 1)`.
    BoundaryInclusive,
    /// Differences between consecutive interior ordinates only; 0 when the
    /// window holds fewer than two ordinates.
    InteriorOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport {
    pub t: f64,
    pub counts: Vec<usize>,
    pub all_within_bounds: bool,
    pub max_gaps: Vec<f64>,
    pub has_moderate_gap: Vec<bool>,
}

fn require_window_coverage(table: &OrdinateTable, t: f64, cfg: &WindowConfig) -> Result<f64> {
    cfg.validate()?;
    require_finite("t", t)?;
    let h = cfg.h();
    table.require_covers(t, t + cfg.r as f64 * h)?;
    Ok(h)
}

/// Ordinate counts in `(t + (j−1)h, t + jh]` for `j = 1..=r`.
pub fn window_counts(table: &OrdinateTable, t: f64, cfg: &WindowConfig) -> Result<Vec<usize>> {
    let h = require_window_coverage(table, t, cfg)?;
    Ok(counts_unchecked(table, t, h, cfg.r))
}

fn counts_unchecked(table: &OrdinateTable, t: f64, h: f64, r: u32) -> Vec<usize> {
    let mut prev = table.count_le(t);
    (1..=r)
        .map(|j| {
            let next = table.count_le(t + j as f64 * h);
            let c = next - prev;
            prev = next;
            c
        })
        .collect()
}

/// `∫_T^{2T} (N(t + h) − N(t) − m)² dt`, computed exactly.
///
/// The integrand is a step function of `t` that changes only where an
/// ordinate enters the window (`t = γ − h`) or leaves it (`t = γ`), so the
/// integral is a finite sum over the segments between those events.
pub fn variance_integral(table: &OrdinateTable, t: f64, h: f64, m: f64) -> Result<f64> {
    require_finite("T", t)?;
    require_finite("h", h)?;
    require_finite("m", m)?;
    if t <= 0.0 || h <= 0.0 {
        return Err(Error::domain("T and h must be positive"));
    }
    let end = 2.0 * t;
    table.require_covers(t, end + h)?;
    let ords = table.ordinates();

    // At t: window (t, t+h] holds indices [leave, enter).
    let mut leave = table.count_le(t);
    let mut enter = table.count_le(t + h);
    let mut pos = t;
    let mut total = 0.0;
    loop {
        let next_leave = ords.get(leave).copied().unwrap_or(f64::INFINITY);
        let next_enter = ords.get(enter).map(|g| g - h).unwrap_or(f64::INFINITY);
        let next = next_leave.min(next_enter).min(end);
        let dev = (enter - leave) as f64 - m;
        total += (next - pos) * dev * dev;
        if next >= end {
            break;
        }
        pos = next;
        if next_leave <= next {
            leave += 1;
        }
        if next_enter <= next {
            enter += 1;
        }
    }
    Ok(total)
}

/// Fraction of grid sites `t ∈ (T, 2T]` (spacing `grid_step`) at which all
/// `r` windows hold strictly between `m/2` and `3m/2` ordinates.
pub fn good_set_measure(table: &OrdinateTable, cfg: &WindowConfig, grid_step: f64) -> Result<f64> {
    Ok(good_sites(table, cfg, grid_step)?.fraction())
}

/// Grid evaluation of the good set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodSetScan {
    pub grid_step: f64,
    pub sites: Vec<f64>,
    pub good: Vec<bool>,
}

impl GoodSetScan {
    pub fn fraction(&self) -> f64 {
        if self.sites.is_empty() {
            return 0.0;
        }
        self.good.iter().filter(|&&g| g).count() as f64 / self.sites.len() as f64
    }

    pub fn good_sites(&self) -> impl Iterator<Item = f64> + '_ {
        self.sites
            .iter()
            .zip(&self.good)
            .filter(|(_, &g)| g)
            .map(|(&s, _)| s)
    }
}

pub fn good_sites(
    table: &OrdinateTable,
    cfg: &WindowConfig,
    grid_step: f64,
) -> Result<GoodSetScan> {
    cfg.validate()?;
    require_finite("grid_step", grid_step)?;
    if grid_step <= 0.0 {
        return Err(Error::argument(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let h = cfg.h();
    let base = cfg.t;
    table.require_covers(base, 2.0 * base + cfg.r as f64 * h)?;
    let n_sites = (base / grid_step).floor() as usize;
    let sites: Vec<f64> = (1..=n_sites).map(|i| base + i as f64 * grid_step).collect();
    let good = sites
        .par_iter()
        .map(|&s| {
            counts_unchecked(table, s, h, cfg.r)
                .into_iter()
                .all(|c| cfg.count_in_bounds(c))
        })
        .collect();
    Ok(GoodSetScan {
        grid_step,
        sites,
        good,
    })
}

/// Exact measure of `{t ∈ (T, 2T] : m/2 < N(t + h) − N(t) < 3m/2}` divided by `T`
/// (the single-window case), by the same event sweep as [`variance_integral`].
pub fn good_set_measure_exact(table: &OrdinateTable, t: f64, m: u32) -> Result<f64> {
    let cfg = WindowConfig::new(t, m, 1)?;
    let h = cfg.h();
    let end = 2.0 * t;
    table.require_covers(t, end + h)?;
    let ords = table.ordinates();
    let mut leave = table.count_le(t);
    let mut enter = table.count_le(t + h);
    let mut pos = t;
    let mut measure = 0.0;
    loop {
        let next_leave = ords.get(leave).copied().unwrap_or(f64::INFINITY);
        let next_enter = ords.get(enter).map(|g| g - h).unwrap_or(f64::INFINITY);
        let next = next_leave.min(next_enter).min(end);
        if cfg.count_in_bounds(enter - leave) {
            measure += next - pos;
        }
        if next >= end {
            break;
        }
        pos = next;
        if next_leave <= next {
            leave += 1;
        }
        if next_enter <= next {
            enter += 1;
        }
    }
    Ok(measure / t)
}

/// Largest gap in each window and whether it reaches `4π/(3 log T)`.
pub fn window_moderate_gap(
    table: &OrdinateTable,
    t: f64,
    cfg: &WindowConfig,
    convention: GapConvention,
) -> Result<Vec<(f64, bool)>> {
    let h = require_window_coverage(table, t, cfg)?;
    let thr = cfg.gap_threshold();
    let ords = table.ordinates();
    Ok((1..=cfg.r)
        .map(|j| {
            let lo = t + (j - 1) as f64 * h;
            let hi = t + j as f64 * h;
            let a = table.count_le(lo);
            let b = table.count_le(hi);
            let inside = &ords[a..b];
            let max_gap = max_gap_in(inside, lo, hi, convention);
            (max_gap, max_gap >= thr)
        })
        .collect())
}

fn max_gap_in(inside: &[f64], lo: f64, hi: f64, convention: GapConvention) -> f64 {
    let interior = inside
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    match convention {
        GapConvention::InteriorOnly => interior,
        GapConvention::BoundaryInclusive => match (inside.first(), inside.last()) {
            (Some(&first), Some(&last)) => interior.max(first - lo).max(hi - last),
            _ => hi - lo,
        },
    }
}

/// Counts, bound check and per-window gaps at one site.
pub fn window_report(table: &OrdinateTable, t: f64, cfg: &WindowConfig) -> Result<WindowReport> {
    let counts = window_counts(table, t, cfg)?;
    let gaps = window_moderate_gap(table, t, cfg, GapConvention::BoundaryInclusive)?;
    Ok(WindowReport {
        t,
        all_within_bounds: counts.iter().all(|&c| cfg.count_in_bounds(c)),
        counts,
        max_gaps: gaps.iter().map(|g| g.0).collect(),
        has_moderate_gap: gaps.iter().map(|g| g.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn table(xs: Vec<f64>, hi: f64) -> OrdinateTable {
        OrdinateTable::new(xs, 0.0, hi, "t", 9).unwrap()
    }

    #[test]
    fn config_h_and_bounds() {
        let cfg = WindowConfig::new((2.0 * PI).exp(), 4, 2).unwrap();
        assert_abs_diff_eq!(cfg.h(), 4.0, epsilon = 1e-12);
        assert!(!cfg.count_in_bounds(2));
        assert!(cfg.count_in_bounds(3));
        assert!(cfg.count_in_bounds(5));
        assert!(!cfg.count_in_bounds(6));
        let one = WindowConfig::new(100.0, 1, 1).unwrap();
        assert!(one.count_in_bounds(1));
        assert!(!one.count_in_bounds(0));
        assert!(!one.count_in_bounds(2));
        assert!(WindowConfig::new(1.0, 1, 1).is_err());
        assert!(WindowConfig::new(10.0, 0, 1).is_err());
    }

    #[test]
    fn empty_window_counts_zero() {
        let t = table(vec![1.0, 50.0], 100.0);
        let cfg = WindowConfig::new((2.0 * PI).exp(), 1, 3).unwrap();
        assert_eq!(window_counts(&t, 10.0, &cfg).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn windows_telescope() {
        let xs: Vec<f64> = (1..200)
            .map(|k| k as f64 * 0.37 + (k as f64).sin() * 0.1)
            .collect();
        let t = table(xs, 80.0);
        let cfg = WindowConfig::new(500.0, 3, 5).unwrap();
        let c = window_counts(&t, 10.0, &cfg).unwrap();
        let end = 10.0 + 5.0 * cfg.h();
        assert_eq!(c.iter().sum::<usize>(), t.count_le(end) - t.count_le(10.0));
    }

    #[test]
    fn window_coverage_error() {
        let t = table(vec![1.0, 2.0], 3.0);
        let cfg = WindowConfig::new(100.0, 10, 3).unwrap();
        assert!(matches!(
            window_counts(&t, 1.0, &cfg),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn variance_empty_region() {
        let t = table(vec![1.0, 500.0], 500.0);
        let v = variance_integral(&t, 100.0, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(v, 9.0 * 100.0, epsilon = 1e-9);
    }

    #[test]
    fn variance_single_ordinate() {
        let t = table(vec![150.0], 300.0);
        let v = variance_integral(&t, 100.0, 2.5, 0.0).unwrap();
        assert_abs_diff_eq!(v, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn variance_needs_coverage() {
        let t = table(vec![150.0], 201.0);
        assert!(matches!(
            variance_integral(&t, 100.0, 2.5, 0.0),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn good_set_empty_region() {
        let t = table(vec![1.0, 1000.0], 1000.0);
        let cfg = WindowConfig::new(100.0, 2, 2).unwrap();
        assert_eq!(good_set_measure(&t, &cfg, 0.5).unwrap(), 0.0);
        assert!(matches!(
            good_set_measure(&t, &cfg, 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn empty_window_gap_is_whole_window() {
        let t = table(vec![1.0, 100.0], 100.0);
        for m in [1, 2, 5] {
            let cfg = WindowConfig::new(50.0, m, 2).unwrap();
            let g = window_moderate_gap(&t, 10.0, &cfg, GapConvention::BoundaryInclusive).unwrap();
            for (gap, ok) in g {
                assert_abs_diff_eq!(gap, cfg.h(), epsilon = 1e-12);
                assert!(ok);
            }
        }
    }

    #[test]
    fn thirds_construction() {
        let cfg = WindowConfig::new(100.0, 3, 1).unwrap();
        let h = cfg.h();
        let t0 = 10.0;
        let t = table(vec![t0 + h / 3.0, t0 + 2.0 * h / 3.0, 60.0], 60.0);
        assert!(h / 3.0 >= cfg.gap_threshold());
        let g = window_moderate_gap(&t, t0, &cfg, GapConvention::BoundaryInclusive).unwrap();
        assert_abs_diff_eq!(g[0].0, h / 3.0, epsilon = 1e-12);
        assert!(g[0].1);
        let interior = window_moderate_gap(&t, t0, &cfg, GapConvention::InteriorOnly).unwrap();
        assert_abs_diff_eq!(interior[0].0, h / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn interior_convention_can_miss_edges() {
        let cfg = WindowConfig::new(100.0, 3, 1).unwrap();
        let h = cfg.h();
        let t = table(vec![10.0 + 0.9 * h, 10.0 + 0.95 * h, 60.0], 60.0);
        let inc = window_moderate_gap(&t, 10.0, &cfg, GapConvention::BoundaryInclusive).unwrap();
        let int = window_moderate_gap(&t, 10.0, &cfg, GapConvention::InteriorOnly).unwrap();
        assert_abs_diff_eq!(inc[0].0, 0.9 * h, epsilon = 1e-12);
        assert!(int[0].0 < 0.06 * h);
    }

    fn riemann_oracle(xs: &[f64], t: f64, h: f64, m: f64, steps: usize) -> f64 {
        let dt = t / steps as f64;
        let count = |x: f64| xs.partition_point(|&g| g <= x) as f64;
        (0..steps)
            .map(|i| {
                let s = t + (i as f64 + 0.5) * dt;
                let d = count(s + h) - count(s) - m;
                d * d * dt
            })
            .sum()
    }

    #[test]
    fn variance_matches_riemann_sum_on_lattice() {
        // ordinates on a dyadic lattice aligned with the Riemann grid make the
        // midpoint sum exact
        let t0 = 64.0;
        let step = 1.0 / 64.0;
        let mut xs = Vec::new();
        let mut state = 7u64;
        let mut k = (t0 / step) as u64;
        while (k as f64) * step < 2.0 * t0 + 4.0 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            k += 1 + (state >> 58);
            xs.push(k as f64 * step);
        }
        let h = 2.0;
        let tab = table(xs.clone(), 200.0);
        let exact = variance_integral(&tab, t0, h, 3.0).unwrap();
        let oracle = riemann_oracle(&xs, t0, h, 3.0, (t0 / step) as usize);
        assert!((exact - oracle).abs() <= 1e-12 * oracle);
    }

    proptest! {
        #[test]
        fn variance_independent_of_nothing_but_inputs(
            xs in proptest::collection::vec(10.0f64..45.0, 0..60),
            h in 0.1f64..3.0,
            m in 0.0f64..5.0,
        ) {
            let mut xs = xs;
            xs.push(49.0);
            xs.sort_by(f64::total_cmp);
            let t = table(xs.clone(), 50.0);
            let v = variance_integral(&t, 15.0, h, m).unwrap();
            prop_assert!(v >= 0.0);
            let oracle = riemann_oracle(&xs, 15.0, h, m, 200_000);
            // midpoint error: at most one step per event, each jump ≤ (count + m + 1)²
            let bound = 2.0 * xs.len() as f64 * 15.0 / 200_000.0 * (xs.len() as f64 + m + 1.0).powi(2);
            prop_assert!((v - oracle).abs() <= bound);
        }

        #[test]
        fn pigeonhole_inclusive(
            xs in proptest::collection::vec(10.0f64..40.0, 1..80),
            t0 in 10.0f64..20.0,
            m in 1u32..8,
        ) {
            let mut xs = xs;
            xs.push(50.0);
            xs.sort_by(f64::total_cmp);
            let t = table(xs, 50.0);
            let cfg = WindowConfig::new(1000.0, m, 2).unwrap();
            let counts = window_counts(&t, t0, &cfg).unwrap();
            let gaps = window_moderate_gap(&t, t0, &cfg, GapConvention::BoundaryInclusive).unwrap();
            for (c, (g, _)) in counts.iter().zip(gaps) {
                prop_assert!(g >= cfg.h() / (*c as f64 + 1.0) * (1.0 - 1e-12));
            }
        }

        #[test]
        fn exact_good_set_matches_fine_grid(
            xs in proptest::collection::vec(20.0f64..45.0, 5..80),
            m in 1u32..4,
        ) {
            let mut xs = xs;
            xs.push(50.0);
            xs.sort_by(f64::total_cmp);
            let t = table(xs.clone(), 50.0);
            let exact = good_set_measure_exact(&t, 20.0, m).unwrap();
            let cfg = WindowConfig::new(20.0, m, 1).unwrap();
            let grid = good_set_measure(&t, &cfg, 20.0 / 100_000.0).unwrap();
            // each event can misclassify at most one grid cell
            prop_assert!((exact - grid).abs() <= 2.0 * xs.len() as f64 / 100_000.0 + 1e-9);
        }
    }
}
