//! Energy-truncation survival curves and Maxwell-Boltzmann temperature fits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::BOLTZMANN;
use crate::stats::wilson_interval;

/// Sup-residual above which a fitted curve is flagged non-thermal.
pub const NON_THERMAL_THRESHOLD: f64 = 0.08;
/// Number of cut-off energies in the default grid.
pub const DEFAULT_GRID_POINTS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermometryError {
    #[error("no energy samples")]
    NoSamples,
    #[error("need at least {min} cut-off points with non-zero energy, got {got}")]
    InsufficientData { min: usize, got: usize },
    #[error("temperature fit did not converge after {iterations} iterations")]
    FitFailure { iterations: usize },
}

/// Cumulative Maxwell-Boltzmann probability of an energy below `e_c` in a 3D harmonic trap.
pub fn mb_cdf(e_c: f64, temperature: f64) -> f64 {
    let eta = e_c / (BOLTZMANN * temperature);
    if eta <= 0.0 {
        return 0.0;
    }
    1.0 - (1.0 + eta + 0.5 * eta * eta) * (-eta).exp()
}

/// `dP/dT` at fixed cut-off.
fn mb_cdf_dt(e_c: f64, temperature: f64) -> f64 {
    let eta = e_c / (BOLTZMANN * temperature);
    if eta <= 0.0 {
        return 0.0;
    }
    -eta.powi(3) * (-eta).exp() / (2.0 * temperature)
}

/// `E_c = k_B T η` with `η` the inverse CDF at `p`, for drawing synthetic samples.
pub fn mb_quantile(p: f64, temperature: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    // Bracket then bisect; the CDF is smooth and monotone in η.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while mb_cdf(hi * BOLTZMANN * temperature, temperature) < p && hi < 1e3 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mb_cdf(mid * BOLTZMANN * temperature, temperature) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi) * BOLTZMANN * temperature
}

/// `n` evenly spaced cut-offs on `[0, 1.2·depth]`.
pub fn default_cutoffs(depth: f64) -> Vec<f64> {
    cutoff_grid(depth, DEFAULT_GRID_POINTS)
}

pub fn cutoff_grid(depth: f64, n: usize) -> Vec<f64> {
    let top = 1.2 * depth;
    (0..n).map(|i| top * i as f64 / (n - 1).max(1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub cutoffs: Vec<f64>,
    pub survival: Vec<f64>,
    pub counts: Vec<usize>,
    /// Number of atoms the survival fractions are normalised by.
    pub total: usize,
}

impl SurvivalCurve {
    /// 95% Wilson interval at each cut-off.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.counts.iter().map(|&k| wilson_interval(k, self.total)).collect()
    }

    /// Cut-offs divided by a reference depth.
    pub fn scaled_cutoffs(&self, depth: f64) -> Vec<f64> {
        self.cutoffs.iter().map(|e| e / depth).collect()
    }

    /// The same curve with cut-offs expressed in another energy unit.
    pub fn rescaled(&self, unit: f64) -> Self {
        Self {
            cutoffs: self.cutoffs.iter().map(|e| e / unit).collect(),
            ..self.clone()
        }
    }

    /// Largest `|survival - f(E_c)|` over the grid, optionally only up to `max_cutoff`.
    pub fn sup_distance(&self, f: impl Fn(f64) -> f64, max_cutoff: f64) -> f64 {
        self.cutoffs
            .iter()
            .zip(&self.survival)
            .filter(|(e, _)| **e <= max_cutoff)
            .map(|(e, p)| (p - f(*e)).abs())
            .fold(0.0, f64::max)
    }
}

/// Fraction of samples strictly below each cut-off.
pub fn survival_curve(energies: &[f64], cutoffs: &[f64]) -> Result<SurvivalCurve, ThermometryError> {
    survival_curve_with_losses(energies, energies.len(), cutoffs)
}

/// As [`survival_curve`] but normalised by `total`, which also counts atoms
/// lost before the energy measurement.
pub fn survival_curve_with_losses(
    energies: &[f64],
    total: usize,
    cutoffs: &[f64],
) -> Result<SurvivalCurve, ThermometryError> {
    if total == 0 || energies.len() > total {
        return Err(ThermometryError::NoSamples);
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let counts: Vec<usize> = cutoffs.iter().map(|&c| sorted.partition_point(|&e| e < c)).collect();
    let survival = counts.iter().map(|&k| k as f64 / total as f64).collect();
    Ok(SurvivalCurve {
        cutoffs: cutoffs.to_vec(),
        survival,
        counts,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureFit {
    pub temperature: f64,
    pub stderr: f64,
    pub residual_norm: f64,
    pub sup_residual: f64,
    pub thermal: bool,
    pub iterations: usize,
}

/// Weighted least-squares fit of [`mb_cdf`] to a survival curve.
pub fn fit_temperature(curve: &SurvivalCurve) -> Result<TemperatureFit, ThermometryError> {
    fit_temperature_with(curve, NON_THERMAL_THRESHOLD)
}

pub fn fit_temperature_with(curve: &SurvivalCurve, threshold: f64) -> Result<TemperatureFit, ThermometryError> {
    let points: Vec<(f64, f64)> = curve
        .cutoffs
        .iter()
        .zip(&curve.survival)
        .filter(|(e, _)| **e > 0.0)
        .map(|(e, p)| (*e, *p))
        .collect();
    if points.len() < 5 {
        return Err(ThermometryError::InsufficientData {
            min: 5,
            got: points.len(),
        });
    }
    let n = curve.total as f64;
    let weights: Vec<f64> = points.iter().map(|(_, p)| n / (p * (1.0 - p) + 1.0 / n)).collect();
    let cost = |t: f64| -> f64 {
        points
            .iter()
            .zip(&weights)
            .map(|((e, p), w)| w * (p - mb_cdf(*e, t)).powi(2))
            .sum()
    };

    // Coarse scan in log T across the grid's energy span seeds the refinement.
    let e_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let e_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let (t_lo, t_hi) = (e_min / (50.0 * BOLTZMANN), e_max / (0.05 * BOLTZMANN));
    let mut log_t = t_lo.ln();
    let mut best = f64::INFINITY;
    for i in 0..=200 {
        let lt = t_lo.ln() + (t_hi / t_lo).ln() * i as f64 / 200.0;
        let c = cost(lt.exp());
        if c < best {
            best = c;
            log_t = lt;
        }
    }

    // Levenberg-Marquardt in log T.
    let max_iter = 100;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let t = log_t.exp();
        let (mut g, mut h) = (0.0, 0.0);
        for ((e, p), w) in points.iter().zip(&weights) {
            let r = p - mb_cdf(*e, t);
            let j = mb_cdf_dt(*e, t) * t;
            g += w * j * r;
            h += w * j * j;
        }
        if h == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let step = g / (h * (1.0 + lambda));
            let c = cost((log_t + step).exp());
            if c <= best {
                best = c;
                log_t += step;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if step.abs() < 1e-10 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ThermometryError::FitFailure { iterations });
    }

    let t = log_t.exp();
    let model: Vec<f64> = points.iter().map(|(e, _)| mb_cdf(*e, t)).collect();
    let jac: Vec<f64> = points.iter().map(|(e, _)| mb_cdf_dt(*e, t)).collect();
    // Sandwich variance with the multinomial covariance of a cumulative curve.
    let bread: f64 = jac.iter().zip(&weights).map(|(j, w)| w * j * j).sum();
    let mut meat = 0.0;
    for i in 0..points.len() {
        for k in 0..points.len() {
            let cov = (model[i].min(model[k]) - model[i] * model[k]) / n;
            meat += weights[i] * jac[i] * cov * weights[k] * jac[k];
        }
    }
    let stderr = if bread > 0.0 { meat.sqrt() / bread } else { f64::INFINITY };
    let residuals: Vec<f64> = points.iter().zip(&model).map(|((_, p), m)| p - m).collect();
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    let sup_residual = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    Ok(TemperatureFit {
        temperature: t,
        stderr,
        residual_norm,
        sup_residual,
        thermal: sup_residual <= threshold,
        iterations,
    })
}

/// Zero below `start`, `slope·x + intercept` up to `end`, `plateau` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    pub intercept: f64,
    pub plateau: f64,
}

impl PiecewiseLinear {
    /// The form observed for a diabatically transported, non-thermal atom.
    pub const REFERENCE: PiecewiseLinear = PiecewiseLinear {
        start: 0.165,
        end: 0.931,
        slope: 1.03,
        intercept: -0.17,
        plateau: 0.79,
    };

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.start {
            0.0
        } else if x <= self.end {
            self.slope * x + self.intercept
        } else {
            self.plateau
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseComparison {
    pub fit: PiecewiseLinear,
    pub rms_residual: f64,
    /// Largest gap between fit and reference on grid points with `x ≤ 1`.
    pub sup_distance: f64,
}

/// Least-squares three-piece fit of a survival curve in units of `depth`,
/// compared against [`PiecewiseLinear::REFERENCE`].
pub fn piecewise_linear_compare(curve: &SurvivalCurve, depth: f64) -> PiecewiseComparison {
    let xs = curve.scaled_cutoffs(depth);
    let ys = &curve.survival;
    let n = xs.len();
    let mut best: Option<(f64, PiecewiseLinear)> = None;
    // Pieces: [0, i) zero, [i, j) linear, [j, n) plateau. The objective only
    // changes at grid points, so the split search is exhaustive.
    for i in 0..n {
        for j in (i + 2)..=n {
            let (slope, intercept) = line_fit(&xs[i..j], &ys[i..j]);
            let plateau = if j < n {
                ys[j..].iter().sum::<f64>() / (n - j) as f64
            } else {
                slope * xs[n - 1] + intercept
            };
            let mut sse: f64 = ys[..i].iter().map(|y| y * y).sum();
            sse += xs[i..j]
                .iter()
                .zip(&ys[i..j])
                .map(|(x, y)| (y - slope * x - intercept).powi(2))
                .sum::<f64>();
            sse += ys[j..].iter().map(|y| (y - plateau).powi(2)).sum::<f64>();
            if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-15) {
                let gap_lo = if i > 0 { xs[i - 1] } else { f64::NEG_INFINITY };
                let start = if slope != 0.0 {
                    (-intercept / slope).clamp(gap_lo, xs[i])
                } else {
                    xs[i]
                };
                let end_hi = if j < n { xs[j] } else { f64::INFINITY };
                let end = if slope != 0.0 {
                    ((plateau - intercept) / slope).clamp(xs[j - 1], end_hi)
                } else {
                    xs[j - 1]
                };
                best = Some((
                    sse,
                    PiecewiseLinear {
                        start,
                        end,
                        slope,
                        intercept,
                        plateau,
                    },
                ));
            }
        }
    }
    let (sse, fit) = best.expect("a curve has at least two points");
    let reference = PiecewiseLinear::REFERENCE;
    let sup_distance = xs
        .iter()
        .filter(|x| **x <= 1.0)
        .map(|&x| (fit.eval(x) - reference.eval(x)).abs())
        .fold(0.0, f64::max);
    PiecewiseComparison {
        fit,
        rms_residual: (sse / n as f64).sqrt(),
        sup_distance,
    }
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
