//! Montgomery's pair-correlation integral and the conditional lower bounds for
//! runs of moderate gaps.
//!
//! `f(α) = ∫₀^α (1 − (sin πu / πu)²) du` is evaluated by panel-adaptive
//! Gauss–Legendre quadrature, split at the integers where the oscillating
//! factor of the integrand changes shape.

use std::f64::consts::{FRAC_1_PI, PI};

use serde::Serialize;

use crate::error::{require_finite, Error, Result};
use crate::quadrature::{integrate_adaptive, PanelRule};

pub use crate::quadrature::QuadratureResult;

/// Panel order of the Gauss–Legendre rule used by [`f`].
pub const PANEL_ORDER: usize = 12;

const MAX_EVALUATIONS: usize = 2_000_000;

/// Parameters of the Pair-Correlation and Well-Spacing lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    /// Number of consecutive gaps.
    pub r: u32,
    /// Gap threshold in mean-spacing units.
    pub c: f64,
    /// Well-Spacing constant.
    pub m: f64,
    /// Well-Spacing exponent.
    pub delta: f64,
}

impl BoundParams {
    pub fn new(r: u32, c: f64, m: f64, delta: f64) -> Result<Self> {
        let p = Self { r, c, m, delta };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for the pair-correlation bound only; `m` and `delta` take
    /// the values implied by the cubic bound (`(π/3)²`, 3).
    pub fn pair_correlation(r: u32, c: f64) -> Result<Self> {
        Self::new(r, c, (PI / 3.0).powi(2), 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::argument("r must be at least 1"));
        }
        for (name, v) in [("c", self.c), ("M", self.m), ("delta", self.delta)] {
            require_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `1 − (sin πu / πu)²`, with the removable singularity at 0 filled in.
pub fn pc_integrand(u: f64) -> Result<f64> {
    require_finite("u", u)?;
    if u < 0.0 {
        return Err(Error::domain(format!("u must be nonnegative, got {u}")));
    }
    Ok(pc_integrand_unchecked(u))
}

#[inline]
pub(crate) fn pc_integrand_unchecked(u: f64) -> f64 {
    let x = PI * u;
    if x < 1e-3 {
        let x2 = x * x;
        // 1 − sinc² = x²/3 − 2x⁴/45 + x⁶/315 − …
        return x2 / 3.0 - 2.0 * x2 * x2 / 45.0 + x2 * x2 * x2 / 315.0;
    }
    let s = x.sin() / x;
    (1.0 - s * s).clamp(0.0, 1.0)
}

/// The pair-correlation integral `f(α)` to absolute accuracy `tol`.
pub fn f(alpha: f64, tol: f64) -> Result<QuadratureResult> {
    require_finite("alpha", alpha)?;
    if alpha < 0.0 {
        return Err(Error::domain(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if alpha == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }
    let rule = PanelRule::new(PANEL_ORDER)?;
    let cuts: Vec<f64> = (1..=alpha.floor() as u64).map(|k| k as f64).collect();
    let mut r = integrate_adaptive(
        pc_integrand_unchecked,
        0.0,
        alpha,
        &cuts,
        &rule,
        tol,
        MAX_EVALUATIONS,
    )?;
    r.value = r.value.clamp(0.0, alpha);
    Ok(r)
}

/// The threshold `c_r > 0` with `f(c_r) = 1/r`, so that the pair-correlation
/// bound `1 − r f(c)` vanishes.
pub fn solve_cr(r: u32, tol: f64) -> Result<f64> {
    if r < 1 {
        return Err(Error::argument("r must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let target = 1.0 / r as f64;
    // Converge on r·f(c) − 1 so the residual does not grow with r.
    let tol = tol * target;
    let quad_tol = (tol * 1e-2).clamp(1e-15, 1e-12);
    let g = |c: f64| -> Result<f64> { Ok(f(c, quad_tol)?.value - target) };

    // The cubic bound gives f(c) ≤ 1/r at (9/(π² r))^{1/3} whenever that point
    // lies in (0, 1/π].
    let mut lo = (9.0 / (PI * PI * r as f64)).cbrt().min(FRAC_1_PI);
    let mut g_lo = g(lo)?;
    while g_lo > 0.0 {
        lo *= 0.5;
        g_lo = g(lo)?;
    }
    let mut hi = 2.0f64;
    let mut g_hi = g(hi)?;
    while g_hi < 0.0 {
        hi *= 2.0;
        g_hi = g(hi)?;
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }

    // Bisection until the bracket is tight enough for the secant iteration.
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid.abs() <= tol {
            return Ok(mid);
        }
        if g_mid < 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }

    // Secant steps, falling back to bisection if a step leaves the bracket.
    for _ in 0..200 {
        let mut x = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x)?;
        if gx.abs() <= tol || hi - lo <= f64::EPSILON * hi {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
    }
    Err(Error::Convergence(format!(
        "c_r root search for r = {r} did not converge"
    )))
}

/// `1 − r·f(c)`; positive values mean a positive proportion of `r`-runs.
pub fn pcc_lower_bound(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let fc = f(p.c, 1e-12)?.value;
    Ok(1.0 - p.r as f64 * fc)
}

/// `1 − r·M·c^δ`.
pub fn wellspacing_lower_bound(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    Ok(1.0 - p.r as f64 * p.m * p.c.powf(p.delta))
}

/// `(π/3)² c³`, an upper bound for `f(c)` on `0 ≤ c ≤ 1/π`.
pub fn cubic_bound(c: f64) -> Result<f64> {
    require_finite("c", c)?;
    if c < 0.0 {
        return Err(Error::domain(format!("c must be nonnegative, got {c}")));
    }
    if c > FRAC_1_PI {
        return Err(Error::domain(format!(
            "the cubic bound only holds for c ≤ 1/π, got {c}"
        )));
    }
    Ok(PI * PI * c * c * c / 9.0)
}

/// Largest `c` for which the cubic bound guarantees `1 − r f(c) > 0`:
/// `min(1/π, (3/π)^{2/3} r^{−1/3})`.
pub fn corollary_threshold(r: u32) -> Result<f64> {
    if r < 1 {
        return Err(Error::argument("r must be at least 1"));
    }
    let scaled = (3.0 / PI).powf(2.0 / 3.0) * (r as f64).powf(-1.0 / 3.0);
    Ok(scaled.min(FRAC_1_PI))
}

/// Largest `r` at which `(3/π)^{2/3} r^{−1/3}` still reaches `1/π`.
pub fn corollary_crossover() -> u32 {
    let mut r = 1u32;
    while (3.0 / PI).powf(2.0 / 3.0) * ((r + 1) as f64).powf(-1.0 / 3.0) >= FRAC_1_PI {
        r += 1;
    }
    r
}

/// The thirteen rows of the published `c_r` table.
pub const PUBLISHED_CR: [(u32, f64); 13] = [
    (1, 1.46389),
    (2, 0.951371),
    (3, 0.780111),
    (4, 0.68697),
    (5, 0.625737),
    (6, 0.581289),
    (7, 0.546994),
    (8, 0.519411),
    (9, 0.496551),
    (10, 0.477168),
    (20, 0.370163),
    (100, 0.21138),
    (1000, 0.0972135),
];
