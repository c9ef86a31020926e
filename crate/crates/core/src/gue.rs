//! Sine-kernel gap probabilities by Nyström discretization, and a
//! Monte-Carlo GUE sampler used as an independent oracle.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_finite, Error, Result};
use crate::gaps::validate_sorted_thresholds;
use crate::quadrature::{gauss_legendre, PanelRule};

pub const DEFAULT_QUAD_ORDER: usize = 40;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Below this length `p₂` is taken from its Taylor series.
const SERIES_CUTOFF: f64 = 0.02;

/// `p₂` is entire and smooth, so fixed Gauss–Legendre panels integrate it to
/// well below the finite-difference noise; adaptive refinement would only
/// chase that noise.
const CDF_PANEL_ORDER: usize = 10;
const CDF_PANEL_WIDTH: f64 = 0.1;

/// Discretized sine-kernel operator on an interval of `t` mean spacings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SineKernelModel {
    pub quad_order: usize,
    pub t: f64,
    /// Eigenvalues of the symmetrized Nyström matrix, descending.
    pub eigenvalues: Vec<f64>,
}

impl SineKernelModel {
    pub fn new(t: f64, quad_order: usize) -> Result<Self> {
        require_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::domain(format!(
                "interval length must be nonnegative, got {t}"
            )));
        }
        let (nodes, weights) = gauss_legendre(quad_order)?;
        if t == 0.0 {
            return Ok(Self {
                quad_order,
                t,
                eigenvalues: vec![0.0; quad_order],
            });
        }
        let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let half = 0.5 * t;
        let m = DMatrix::from_fn(quad_order, quad_order, |i, j| {
            let z = PI * half * (nodes[i] - nodes[j]);
            let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
            sw[i] * half * sinc * sw[j]
        });
        let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            quad_order,
            t,
            eigenvalues,
        })
    }

    /// `det(I − Q)` as `∏(1 − λ_i)`.
    pub fn det(&self) -> f64 {
        self.eigenvalues.iter().map(|l| 1.0 - l).product()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Coefficients of `det(I − (1 − x)Q) = ∏(1 − λ_i + λ_i x)`, whose
    /// `k`-th coefficient is `E(k; t)`.
    fn generating_coefficients(&self) -> Vec<f64> {
        let mut coeffs = vec![1.0];
        for &l in &self.eigenvalues {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k] += a * (1.0 - l);
                next[k + 1] += a * l;
            }
            coeffs = next;
        }
        coeffs
    }

    pub fn level_probabilities(&self, k_max: usize) -> Result<LevelProbabilities> {
        if k_max > self.quad_order {
            return Err(Error::argument(format!(
                "k_max = {k_max} exceeds the quadrature order {}",
                self.quad_order
            )));
        }
        let mut probs = self.generating_coefficients();
        probs.truncate(k_max + 1);
        Ok(LevelProbabilities { s: self.t, probs })
    }
}

/// `E(k; s)` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelProbabilities {
    pub s: f64,
    pub probs: Vec<f64>,
}

impl LevelProbabilities {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }
}

/// Probability `E(0; t)` that `t` mean spacings hold no sine-kernel point.
pub fn fredholm_det(t: f64, quad_order: usize) -> Result<f64> {
    Ok(SineKernelModel::new(t, quad_order)?.det())
}

pub fn level_probabilities(s: f64, k_max: usize, quad_order: usize) -> Result<LevelProbabilities> {
    SineKernelModel::new(s, quad_order)?.level_probabilities(k_max)
}

/// A second-derivative estimate together with the size of its Richardson
/// correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P2Estimate {
    pub value: f64,
    pub richardson_correction: f64,
}

/// Richardson corrections larger than this (relative) trigger an accuracy
/// warning.
const FD_WARN_RATIO: f64 = 1e-3;

/// Nearest-neighbour spacing density `p₂(0, t) = d²/dt² E(0; t)`.
pub fn p2_density(t: f64, quad_order: usize, fd_step: f64) -> Result<f64> {
    Ok(p2_estimate(t, quad_order, fd_step)?.value)
}

pub fn p2_estimate(t: f64, quad_order: usize, fd_step: f64) -> Result<P2Estimate> {
    require_finite("t", t)?;
    require_finite("fd_step", fd_step)?;
    if !(fd_step > 0.0) {
        return Err(Error::argument(format!(
            "finite-difference step must be positive, got {fd_step}"
        )));
    }
    if t <= fd_step {
        return Err(Error::domain(format!(
            "t = {t} must exceed the finite-difference step {fd_step}"
        )));
    }
    let e = |x: f64| fredholm_det(x, quad_order);
    let centre = e(t)?;
    let d = |h: f64| -> Result<f64> { Ok((e(t + h)? - 2.0 * centre + e(t - h)?) / (h * h)) };
    let coarse = d(fd_step)?;
    let fine = d(0.5 * fd_step)?;
    let value = (4.0 * fine - coarse) / 3.0;
    let correction = value - fine;
    if correction.abs() > FD_WARN_RATIO * value.abs().max(1e-3) {
        log::warn!(
            "p2 at t = {t}: Richardson correction {correction:.3e} is large for step {fd_step}; \
             reduce fd_step"
        );
    }
    Ok(P2Estimate {
        value,
        richardson_correction: correction,
    })
}

/// `π²t²/3 − 2π⁴t⁴/45`, the leading terms of `p₂` at small `t`.
pub fn p2_series(t: f64) -> f64 {
    let pt2 = (PI * t).powi(2);
    pt2 / 3.0 - 2.0 * pt2 * pt2 / 45.0
}

fn p2_anywhere(t: f64, quad_order: usize, fd_step: f64) -> Result<f64> {
    if t < SERIES_CUTOFF.max(2.0 * fd_step) {
        Ok(p2_series(t))
    } else {
        p2_density(t, quad_order, fd_step)
    }
}

/// `∫₀^c p₂(0, t) dt` with the default discretization.
pub fn nn_cdf(c: f64) -> Result<f64> {
    nn_cdf_with(c, DEFAULT_QUAD_ORDER, DEFAULT_FD_STEP)
}

pub fn nn_cdf_with(c: f64, quad_order: usize, fd_step: f64) -> Result<f64> {
    require_finite("c", c)?;
    if c < 0.0 {
        return Err(Error::domain(format!("c must be nonnegative, got {c}")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let rule = PanelRule::new(CDF_PANEL_ORDER)?;
    let cut = SERIES_CUTOFF.max(2.0 * fd_step).min(c);
    let mut total = rule.integrate(0.0, cut, p2_series);
    let panels = ((c - cut) / CDF_PANEL_WIDTH).ceil() as usize;
    let width = (c - cut) / panels.max(1) as f64;
    for k in 0..panels {
        let (a, b) = (cut + k as f64 * width, cut + (k + 1) as f64 * width);
        total += integrate_checked(&rule, a, b, quad_order, fd_step)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

fn integrate_checked(
    rule: &PanelRule,
    a: f64,
    b: f64,
    quad_order: usize,
    fd_step: f64,
) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let v = rule.integrate(a, b, |t| match p2_anywhere(t, quad_order, fd_step) {
        Ok(v) => v,
        Err(e) => {
            *err.borrow_mut() = Some(e);
            0.0
        }
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `nn_cdf` tabulated on a uniform grid, with the density at each node so the
/// table can be interpolated by cubic Hermite polynomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingCdfTable {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub density: Vec<f64>,
}

impl SpacingCdfTable {
    pub fn new(c_max: f64, step: f64, quad_order: usize, fd_step: f64) -> Result<Self> {
        require_finite("c_max", c_max)?;
        if !(step > 0.0) || !(c_max > 0.0) {
            return Err(Error::argument("c_max and step must be positive"));
        }
        let n = (c_max / step).ceil() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let density = grid
            .par_iter()
            .map(|&t| {
                if t == 0.0 {
                    Ok(0.0)
                } else {
                    p2_anywhere(t, quad_order, fd_step)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let rule = PanelRule::new(8)?;
        let pieces = grid
            .par_windows(2)
            .map(|w| integrate_checked(&rule, w[0], w[1], quad_order, fd_step))
            .collect::<Result<Vec<_>>>()?;
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for p in pieces {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { grid, cdf, density })
    }

    /// Interpolated CDF; 0 below the grid and the last tabulated value above it.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        if x >= self.grid[last] {
            return self.cdf[last];
        }
        let step = self.grid[1] - self.grid[0];
        let i = ((x / step) as usize).min(last - 1);
        let (x0, h) = (self.grid[i], step);
        let s = (x - x0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.cdf[i]
            + h10 * h * self.density[i]
            + h01 * self.cdf[i + 1]
            + h11 * h * self.density[i + 1]
    }

    /// Kolmogorov–Smirnov distance between the table and the empirical CDF of
    /// `sorted` (ascending).
    pub fn ks_distance(&self, sorted: &[f64]) -> f64 {
        let n = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = self.eval(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }
}

/// Parameters of the Monte-Carlo GUE sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GueSampleConfig {
    pub dim: usize,
    pub n_matrices: usize,
    pub seed: u64,
    pub bulk_fraction: f64,
}

impl GueSampleConfig {
    pub fn new(dim: usize, n_matrices: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            dim,
            n_matrices,
            seed,
            bulk_fraction: 0.8,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 16 {
            return Err(Error::argument(format!(
                "matrix dimension must be at least 16, got {}",
                self.dim
            )));
        }
        if self.n_matrices == 0 {
            return Err(Error::argument("at least one matrix is required"));
        }
        if !(self.bulk_fraction > 0.0 && self.bulk_fraction <= 1.0) {
            return Err(Error::argument(format!(
                "bulk fraction must lie in (0, 1], got {}",
                self.bulk_fraction
            )));
        }
        Ok(())
    }
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() + 1 == diag.len()`), by implicit
/// QL iteration.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::argument(
            "off-diagonal must be one shorter than the diagonal",
        ));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence(format!(
                    "tridiagonal QL did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Expected number of eigenvalues below `x` for the semicircle of radius
/// `2√n` carrying `n` eigenvalues.
pub fn unfold_semicircle(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    let radius = 2.0 * nf.sqrt();
    let y = (x / radius).clamp(-1.0, 1.0);
    nf * (0.5 + (y * (1.0 - y * y).sqrt() + y.asin()) / PI)
}

fn sample_one(cfg: &GueSampleConfig, index: usize) -> Result<Vec<f64>> {
    let n = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let diag: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let off = (1..n)
        .map(|i| {
            let chi2 = ChiSquared::new(2.0 * (n - i) as f64)
                .map_err(|e| Error::Numeric(format!("matrix {index}: {e}")))?;
            Ok((chi2.sample(&mut rng) / 2.0).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let eig = tridiagonal_eigenvalues(&diag, &off).map_err(|e| match e {
        Error::Convergence(msg) => Error::Numeric(format!("matrix {index}: {msg}")),
        other => other,
    })?;
    let lo = 0.5 * (1.0 - cfg.bulk_fraction) * n as f64;
    let hi = n as f64 - lo;
    Ok(eig
        .into_iter()
        .map(|x| unfold_semicircle(x, n))
        .filter(|&u| u >= lo && u <= hi)
        .collect())
}

/// Unfolded bulk eigenvalues of `cfg.n_matrices` independent GUE matrices.
///
/// Matrix `i` draws from stream `i` of a ChaCha8 generator seeded with
/// `cfg.seed`, so the output does not depend on the thread count.
pub fn sample_gue(cfg: &GueSampleConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    (0..cfg.n_matrices)
        .into_par_iter()
        .map(|i| sample_one(cfg, i))
        .collect()
}

/// Consecutive spacings of all sampled sequences, sorted ascending.
pub fn mc_spacings(samples: &[Vec<f64>]) -> Vec<f64> {
    let mut s: Vec<f64> = samples
        .iter()
        .flat_map(|xs| xs.windows(2).map(|w| w[1] - w[0]))
        .collect();
    s.sort_by(f64::total_cmp);
    s
}

/// A Monte-Carlo proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Ratio estimate over per-matrix batches; the standard error treats the
/// matrices as independent batches.
fn batch_estimate(batches: &[(usize, usize)]) -> McEstimate {
    let hits: usize = batches.iter().map(|b| b.0).sum();
    let total: usize = batches.iter().map(|b| b.1).sum();
    if total == 0 {
        return McEstimate {
            value: 0.0,
            std_error: 0.0,
            n_samples: 0,
        };
    }
    let p = hits as f64 / total as f64;
    let k = batches.len() as f64;
    let ss: f64 = batches
        .iter()
        .map(|&(h, n)| (h as f64 - p * n as f64).powi(2))
        .sum();
    let std_error = if k > 1.0 {
        (ss * k / (k - 1.0)).sqrt() / total as f64
    } else {
        0.0
    };
    McEstimate {
        value: p,
        std_error,
        n_samples: total,
    }
}

/// Fraction of indices `i` with `x_{i+k} − x_i ≤ c_k` for every `k = 1..=r`.
pub fn mc_joint_from_samples(samples: &[Vec<f64>], thresholds: &[f64]) -> Result<McEstimate> {
    validate_sorted_thresholds(thresholds)?;
    let r = thresholds.len();
    let batches: Vec<(usize, usize)> = samples
        .iter()
        .map(|xs| {
            let n = xs.len().saturating_sub(r);
            let hits = (0..n)
                .filter(|&i| {
                    thresholds
                        .iter()
                        .enumerate()
                        .all(|(k, &c)| xs[i + k + 1] - xs[i] <= c)
                })
                .count();
            (hits, n)
        })
        .collect();
    Ok(batch_estimate(&batches))
}

pub fn mc_joint_run_probability(cfg: &GueSampleConfig, thresholds: &[f64]) -> Result<McEstimate> {
    validate_sorted_thresholds(thresholds)?;
    mc_joint_from_samples(&sample_gue(cfg)?, thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_length_is_exact() {
        assert_eq!(fredholm_det(0.0, 20).unwrap(), 1.0);
        let lp = level_probabilities(0.0, 5, 20).unwrap();
        assert_eq!(lp.probs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn negative_length_rejected() {
        assert!(matches!(fredholm_det(-1.0, 20), Err(Error::Domain(_))));
        assert!(matches!(fredholm_det(1.0, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn small_interval_series() {
        let s: f64 = 0.1;
        let series = 1.0 - s + PI.powi(2) * s.powi(4) / 36.0 - PI.powi(4) * s.powi(6) / 675.0;
        assert_abs_diff_eq!(fredholm_det(s, 40).unwrap(), series, epsilon = 1e-9);
        assert_abs_diff_eq!(fredholm_det(s, 100).unwrap(), 0.9000274, epsilon = 1e-5);
    }

    #[test]
    fn spectral_convergence() {
        for t in [0.5, 2.0, 4.0, 6.0] {
            let a = fredholm_det(t, 40).unwrap();
            let b = fredholm_det(t, 80).unwrap();
            assert!((a - b).abs() <= 1e-10, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn eigenvalues_in_unit_interval() {
        for t in [0.3, 1.0, 3.0, 6.0] {
            let m = SineKernelModel::new(t, 40).unwrap();
            assert_eq!(m.eigenvalues.len(), 40);
            assert!(m.eigenvalues.iter().all(|&l| (-1e-10..1.0).contains(&l)));
            assert!(m.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            assert_abs_diff_eq!(m.trace(), t, epsilon = 1e-12);
        }
    }

    #[test]
    fn level_sums() {
        for s in [0.5, 1.0, 2.0, 4.0] {
            let lp = level_probabilities(s, 30, 40).unwrap();
            assert_abs_diff_eq!(lp.total(), 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(lp.mean(), s, epsilon = 1e-6);
            assert!(lp
                .probs
                .iter()
                .all(|&p| (-1e-10..=1.0 + 1e-12).contains(&p)));
        }
        assert!(matches!(
            level_probabilities(1.0, 41, 40),
            Err(Error::Argument(_))
        ));
    }

    // Reference values from an independent numpy Nyström computation.
    #[test]
    fn unit_interval_level_probabilities() {
        let lp = level_probabilities(1.0, 3, 40).unwrap();
        for (p, want) in lp
            .probs
            .iter()
            .zip([0.17021742, 0.66142864, 0.16649086, 0.00186268])
        {
            assert_abs_diff_eq!(*p, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn p2_near_origin_follows_series() {
        for t in [0.01, 0.05] {
            let p = p2_density(t, 40, 1e-3).unwrap();
            assert_abs_diff_eq!(p, p2_series(t), epsilon = 1e-6);
        }
        assert!(matches!(p2_density(1e-3, 40, 1e-3), Err(Error::Domain(_))));
    }

    #[test]
    fn p2_is_normalized_with_unit_mean() {
        let rule = PanelRule::new(10).unwrap();
        let (mut mass, mut mean) = (0.0, 0.0);
        for k in 0..60 {
            let (a, b) = (k as f64 * 0.1, (k + 1) as f64 * 0.1);
            mass += rule.integrate(a, b, |t| p2_anywhere(t, 40, 1e-3).unwrap());
            mean += rule.integrate(a, b, |t| t * p2_anywhere(t, 40, 1e-3).unwrap());
        }
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn nn_cdf_endpoints_and_derivative_identity() {
        assert_eq!(nn_cdf(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(nn_cdf(6.0).unwrap(), 1.0, epsilon = 1e-3);
        // ∫₀^c p₂ = 1 + E'(c)
        for c in [0.5, 1.0, 1.5] {
            let h = 1e-4;
            let de =
                (fredholm_det(c + h, 40).unwrap() - fredholm_det(c - h, 40).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(nn_cdf(c).unwrap(), 1.0 + de, epsilon = 1e-6);
        }
    }

    #[test]
    fn nn_cdf_below_pair_correlation() {
        for k in 1..=15 {
            let c = k as f64 * 0.1;
            let f = crate::analytic::f(c, 1e-12).unwrap().value;
            assert!(nn_cdf(c).unwrap() <= f + 0.02);
        }
    }

    #[test]
    fn cdf_table_matches_direct_quadrature() {
        let table = SpacingCdfTable::new(3.0, 0.01, 40, 1e-3).unwrap();
        for c in [0.23, 0.5, 1.0, 1.77, 2.5] {
            assert_abs_diff_eq!(table.eval(c), nn_cdf(c).unwrap(), epsilon = 1e-7);
        }
        assert_eq!(table.eval(-1.0), 0.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let table = SpacingCdfTable::new(5.0, 0.05, 40, 1e-3).unwrap();
        // invert the table on a fine grid to get evenly spaced quantiles
        let mut xs = Vec::new();
        let n = 200;
        let mut x = 0.0;
        for i in 0..n {
            let target = (i as f64 + 0.5) / n as f64;
            while table.eval(x) < target {
                x += 1e-4;
            }
            xs.push(x);
        }
        assert!(table.ks_distance(&xs) <= 0.5 / n as f64 + 1e-3);
    }

    #[test]
    fn ql_matches_known_spectrum() {
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let eig = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for (k, l) in eig.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*l, exact, epsilon = 1e-12);
        }
        assert!(tridiagonal_eigenvalues(&[1.0, 2.0], &[]).is_err());
        assert_eq!(tridiagonal_eigenvalues(&[3.0], &[]).unwrap(), vec![3.0]);
    }

    #[test]
    fn unfolding_endpoints() {
        let n = 100;
        assert_abs_diff_eq!(unfold_semicircle(-20.0, n), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unfold_semicircle(0.0, n), 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unfold_semicircle(20.0, n), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(unfold_semicircle(1e3, n), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn sampler_is_deterministic() {
        let cfg = GueSampleConfig::new(32, 8, 42).unwrap();
        let a = sample_gue(&cfg).unwrap();
        let b = sample_gue(&cfg).unwrap();
        let bits =
            |s: &Vec<Vec<f64>>| -> Vec<u64> { s.iter().flatten().map(|x| x.to_bits()).collect() };
        assert_eq!(bits(&a), bits(&b));
        let other = sample_gue(&GueSampleConfig::new(32, 8, 43).unwrap()).unwrap();
        assert_ne!(bits(&a), bits(&other));
    }

    #[test]
    fn sampler_rejects_bad_config() {
        assert!(GueSampleConfig::new(8, 10, 0).is_err());
        let mut cfg = GueSampleConfig::new(16, 10, 0).unwrap();
        cfg.bulk_fraction = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mean_unfolded_spacing_is_one() {
        let cfg = GueSampleConfig::new(200, 200, 1).unwrap();
        let s = mc_spacings(&sample_gue(&cfg).unwrap());
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 0.02);
    }

    #[test]
    fn joint_probability_limits() {
        let cfg = GueSampleConfig::new(64, 50, 3).unwrap();
        let samples = sample_gue(&cfg).unwrap();
        let all = mc_joint_from_samples(&samples, &[1e9, 1e9]).unwrap();
        assert_eq!(all.value, 1.0);
        let single = mc_joint_from_samples(&samples, &[0.5]).unwrap();
        let s = mc_spacings(&samples);
        let direct = s.iter().filter(|&&x| x <= 0.5).count() as f64 / s.len() as f64;
        assert_abs_diff_eq!(single.value, direct, epsilon = 1e-15);
        assert!(mc_joint_from_samples(&samples, &[1.0, 0.5]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn det_nonincreasing(a in 0.0f64..6.0, d in 0.0f64..1.0) {
            let lo = fredholm_det(a, 40).unwrap();
            let hi = fredholm_det(a + d, 40).unwrap();
            prop_assert!(hi <= lo + 1e-14);
            prop_assert!(lo > 0.0 && lo <= 1.0);
        }

        #[test]
        fn ql_agrees_with_dense_solver(
            diag in proptest::collection::vec(-5.0f64..5.0, 2..40),
            seed in 0u64..1000,
        ) {
            let n = diag.len();
            let off: Vec<f64> = (0..n - 1).map(|i| ((i as u64 * 7919 + seed) % 97) as f64 / 13.0 - 3.5).collect();
            let eig = tridiagonal_eigenvalues(&diag, &off).unwrap();
            let m = DMatrix::from_fn(n, n, |i, j| {
                if i == j { diag[i] } else if i + 1 == j { off[i] } else if j + 1 == i { off[j] } else { 0.0 }
            });
            let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            dense.sort_by(f64::total_cmp);
            for (a, b) in eig.iter().zip(&dense) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }
    }
}
