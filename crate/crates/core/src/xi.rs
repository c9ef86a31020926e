//! Critical points of ξ between consecutive ordinates, located with a
//! truncated zero sum standing in for `i·ξ′/ξ(1/2 + it)`.

use serde::Serialize;

use crate::error::{require_finite, Error, Result};
use crate::zeros::OrdinateTable;

/// Distance below which `t` is treated as sitting on an ordinate.
pub const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroSumConfig {
    /// Truncation radius in `t`.
    pub delta: f64,
    /// Also sum over the mirrored ordinates `−γ`.
    pub include_conjugates: bool,
}

impl Default for ZeroSumConfig {
    fn default() -> Self {
        Self {
            delta: 50.0,
            include_conjugates: false,
        }
    }
}

impl ZeroSumConfig {
    pub fn new(delta: f64, include_conjugates: bool) -> Result<Self> {
        let cfg = Self {
            delta,
            include_conjugates,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("delta", self.delta)?;
        if self.delta < 1.0 {
            return Err(Error::argument(format!(
                "window radius must be at least 1, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// `Σ_{|γ − t| ≤ Δ} 1/(t − γ)`, plus `1/(t + γ)` for each such `γ` when
/// conjugates are included.
pub fn xi_surrogate(table: &OrdinateTable, t: f64, cfg: &ZeroSumConfig) -> Result<f64> {
    xi_surrogate_anchored(table, t, t, cfg)
}

/// The surrogate at `t` summed over the ordinates within `Δ` of `anchor`.
///
/// With a fixed anchor the ordinate set does not change with `t`, so the sum
/// is continuous and strictly decreasing between consecutive poles. Letting
/// the window follow `t` makes it jump by up to `1/Δ` whenever an ordinate
/// enters or leaves.
pub fn xi_surrogate_anchored(
    table: &OrdinateTable,
    t: f64,
    anchor: f64,
    cfg: &ZeroSumConfig,
) -> Result<f64> {
    cfg.validate()?;
    require_finite("t", t)?;
    require_finite("anchor", anchor)?;
    let lo = anchor - cfg.delta;
    let hi = anchor + cfg.delta;
    table.require_covers(lo.max(0.0).min(hi), hi)?;
    let ords = table.ordinates();
    let a = ords.partition_point(|&g| g < lo);
    let b = ords.partition_point(|&g| g <= hi);
    let window = &ords[a..b];
    let nearest = window.partition_point(|&g| g < t);
    for &g in window[nearest.saturating_sub(1)..(nearest + 1).min(window.len())].iter() {
        if (t - g).abs() <= POLE_EPS {
            return Err(Error::Pole { t, ordinate: g });
        }
    }
    let mut sum: f64 = window.iter().map(|&g| 1.0 / (t - g)).sum();
    if cfg.include_conjugates {
        sum += window.iter().map(|&g| 1.0 / (t + g)).sum::<f64>();
    }
    Ok(sum)
}

/// The critical point between `γ_n` and `γ_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub n: usize,
    pub gamma_star: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
    /// `γ* − γ_n`.
    pub left_distance: f64,
    /// `γ_{n+1} − γ*`.
    pub right_distance: f64,
}

/// Bisection for the zero of the surrogate inside `(γ_n, γ_{n+1})`, with the
/// window anchored at the midpoint of the gap.
///
/// The surrogate runs from `+∞` just right of `γ_n` to `−∞` just left of
/// `γ_{n+1}`; bisection stops once `|residual| ≤ tol` or the bracket can no
/// longer be split in floating point.
pub fn find_gamma_star(
    table: &OrdinateTable,
    n: usize,
    cfg: &ZeroSumConfig,
    tol: f64,
) -> Result<CriticalPoint> {
    if !(tol > 0.0) {
        return Err(Error::argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let left = table.ordinate(n)?;
    let right = table.ordinate(n + 1)?;
    if left == right {
        return Err(Error::DegenerateInterval(n));
    }
    let anchor = 0.5 * (left + right);
    let (mut lo, mut hi) = (left, right);
    let mut best = (0.5 * (lo + hi), f64::INFINITY);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = xi_surrogate_anchored(table, mid, anchor, cfg)?;
        if v.abs() < best.1.abs() {
            best = (mid, v);
        }
        if v.abs() <= tol {
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (gamma_star, residual) = best;
    Ok(CriticalPoint {
        n,
        gamma_star,
        bracket: (left, right),
        residual,
        left_distance: gamma_star - left,
        right_distance: right - gamma_star,
    })
}

/// Number of sign changes of the surrogate over `steps − 1` equally spaced
/// interior points of `(γ_n, γ_{n+1})`, with the same anchored window as
/// [`find_gamma_star`].
pub fn count_sign_changes(
    table: &OrdinateTable,
    n: usize,
    cfg: &ZeroSumConfig,
    steps: usize,
) -> Result<usize> {
    let left = table.ordinate(n)?;
    let right = table.ordinate(n + 1)?;
    if left == right {
        return Err(Error::DegenerateInterval(n));
    }
    let width = right - left;
    let anchor = 0.5 * (left + right);
    let mut changes = 0;
    let mut prev: Option<bool> = None;
    for k in 1..steps {
        let t = left + width * k as f64 / steps as f64;
        let v = xi_surrogate_anchored(table, t, anchor, cfg)?;
        if v == 0.0 {
            continue;
        }
        let pos = v > 0.0;
        if prev.is_some_and(|p| p != pos) {
            changes += 1;
        }
        prev = Some(pos);
    }
    Ok(changes)
}

/// The evaluation height `γ_n + (log γ_n)^{−C}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationHeight {
    pub n: usize,
    pub gamma_n: f64,
    pub c: f64,
    pub offset: f64,
    pub t_j: f64,
    /// Whether `t_j < γ_{n+1}`.
    pub below_next: bool,
}

pub fn construct_tj(table: &OrdinateTable, n: usize, c: f64) -> Result<EvaluationHeight> {
    if !(c > 2.0) || !c.is_finite() {
        return Err(Error::argument(format!(
            "C must be a finite number above 2, got {c}"
        )));
    }
    let gamma_n = table.ordinate(n)?;
    if gamma_n <= std::f64::consts::E {
        return Err(Error::domain(format!("γ_{n} = {gamma_n} must exceed e")));
    }
    let next = table.ordinate(n + 1)?;
    let offset = gamma_n.ln().powf(-c);
    let t_j = gamma_n + offset;
    Ok(EvaluationHeight {
        n,
        gamma_n,
        c,
        offset,
        t_j,
        below_next: t_j < next,
    })
}
