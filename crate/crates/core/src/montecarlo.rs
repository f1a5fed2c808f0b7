//! Thermal ensembles with per-run depth fluctuations, success maps over
//! `(t_f, l)`, boundary-coefficient extraction and shuttle sequences.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{integrate, AtomState, DynamicsError, IntegratorConfig, Loss};
use crate::model::{TrapModel, TrapParams, BOLTZMANN};
use crate::stats::wilson_interval;
use crate::thermometry::{default_cutoffs, fit_temperature, survival_curve_with_losses, SurvivalCurve, TemperatureFit};
use crate::trajectory::{BoundaryConditions, CompositePath, DesignedPath, PathSegment, TrajectoryError, TweezerPath};
use crate::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("axis {0} must be non-empty and strictly increasing")]
    InvalidAxis(&'static str),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("boundary fit failed: {0}")]
    FitFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_samples: usize,
    /// Initial temperature (K).
    pub temperature: f64,
    /// Largest per-run depth reduction (J).
    pub depth_fluctuation: f64,
    pub seed: u64,
    /// Add a thermal energy for the unsimulated axial direction to the
    /// recorded final energies.
    pub axial_energy: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_samples: 200,
            temperature: 0.0,
            depth_fluctuation: BOLTZMANN * 0.15e-3,
            seed: 0,
            axial_energy: true,
        }
    }
}

impl EnsembleConfig {
    pub fn new(n_samples: usize, temperature: f64, depth_fluctuation: f64, seed: u64) -> Self {
        Self {
            n_samples,
            temperature,
            depth_fluctuation,
            seed,
            ..Self::default()
        }
    }

    /// Zero temperature, no fluctuation, one sample.
    pub fn deterministic() -> Self {
        Self::new(1, 0.0, 0.0, 0)
    }

    pub fn validate(&self, depth: f64) -> Result<(), MonteCarloError> {
        if self.n_samples == 0 {
            return Err(MonteCarloError::InvalidConfig("n_samples must be at least 1".into()));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(MonteCarloError::InvalidConfig(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.depth_fluctuation >= 0.0 && self.depth_fluctuation < depth) {
            return Err(MonteCarloError::InvalidConfig(format!(
                "depth fluctuation {} J must lie in [0, {depth})",
                self.depth_fluctuation
            )));
        }
        Ok(())
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Independent 64-bit seed for sub-experiment `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index);
    rng.next_u64()
}

fn thermal_offsets(rng: &mut ChaCha8Rng, temperature: f64, omega: f64, mass: f64) -> AtomState {
    let kt = BOLTZMANN * temperature;
    let sigma_x = (kt / (mass * omega * omega)).sqrt();
    let sigma_v = (kt / mass).sqrt();
    let mut n = [0.0; 4];
    for v in n.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    AtomState::new(Vec2::new(n[0], n[1]) * sigma_x, Vec2::new(n[2], n[3]) * sigma_v)
}

/// Thermal position and velocity offsets for sample `index`, deterministic in `(seed, index)`.
pub fn sample_initial_state(temperature: f64, omega: f64, mass: f64, seed: u64, index: u64) -> AtomState {
    thermal_offsets(&mut stream(seed, index), temperature, omega, mass)
}

/// Everything drawn for one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDraw {
    pub offsets: AtomState,
    pub depth_reduction: f64,
    pub axial_energy: f64,
}

fn draw(rng: &mut ChaCha8Rng, cfg: &EnsembleConfig, model: &TrapModel) -> SampleDraw {
    let offsets = thermal_offsets(rng, cfg.temperature, model.omega(), model.mass());
    let u: f64 = rng.random();
    let e: f64 = rng.sample(Exp1);
    SampleDraw {
        offsets,
        depth_reduction: u * cfg.depth_fluctuation,
        axial_energy: e * BOLTZMANN * cfg.temperature,
    }
}

pub fn sample_draw(cfg: &EnsembleConfig, model: &TrapModel, index: u64) -> SampleDraw {
    draw(&mut stream(cfg.seed, index), cfg, model)
}

#[derive(Debug, Clone, PartialEq)]
enum SampleOutcome {
    Survived(f64),
    Lost(Loss),
    Error(DynamicsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_samples: usize,
    pub n_success: usize,
    pub n_escaped: usize,
    pub n_unbound: usize,
    pub n_errors: usize,
    pub p_success: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Final energies of surviving atoms (J).
    pub final_energies: Vec<f64>,
    pub mean_energy: Option<f64>,
    /// Survival against energy cut-off, normalised by all samples.
    pub survival: SurvivalCurve,
    pub temperature: Option<TemperatureFit>,
    pub first_error: Option<String>,
}

/// Runs `cfg.n_samples` independent atoms through the same path.
pub fn run_ensemble<P: TweezerPath + ?Sized>(
    path: &P,
    model: &TrapModel,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult, MonteCarloError> {
    cfg.validate(model.depth())?;
    let (start, v0) = path.atom_start();
    let icfg = IntegratorConfig::for_duration(path.duration(), model.omega());
    let outcomes: Vec<SampleOutcome> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let d = sample_draw(cfg, model, i);
            let m = model.with_depth(model.depth() - d.depth_reduction);
            let initial = AtomState::new(start + d.offsets.position, v0 + d.offsets.velocity);
            match integrate(&m, path, initial, &icfg) {
                Ok(out) => match (out.final_energy, out.loss) {
                    (Some(e), _) => {
                        SampleOutcome::Survived(if cfg.axial_energy { e + d.axial_energy } else { e })
                    }
                    (None, Some(loss)) => SampleOutcome::Lost(loss),
                    (None, None) => unreachable!("a failed run always records its loss"),
                },
                Err(e) => SampleOutcome::Error(e),
            }
        })
        .collect();
    Ok(aggregate(&outcomes, model.depth()))
}

fn aggregate(outcomes: &[SampleOutcome], depth: f64) -> EnsembleResult {
    let n = outcomes.len();
    let mut energies = Vec::new();
    let (mut escaped, mut unbound, mut errors) = (0, 0, 0);
    let mut first_error = None;
    for o in outcomes {
        match o {
            SampleOutcome::Survived(e) => energies.push(*e),
            SampleOutcome::Lost(Loss::Escaped { .. }) => escaped += 1,
            SampleOutcome::Lost(Loss::Unbound { .. }) => unbound += 1,
            SampleOutcome::Error(e) => {
                errors += 1;
                first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let k = energies.len();
    let (ci_low, ci_high) = wilson_interval(k, n);
    let survival =
        survival_curve_with_losses(&energies, n, &default_cutoffs(depth)).expect("ensemble has at least one sample");
    let temperature = if k > 0 { fit_temperature(&survival).ok() } else { None };
    EnsembleResult {
        n_samples: n,
        n_success: k,
        n_escaped: escaped,
        n_unbound: unbound,
        n_errors: errors,
        p_success: k as f64 / n as f64,
        ci_low,
        ci_high,
        mean_energy: (k > 0).then(|| energies.iter().sum::<f64>() / k as f64),
        final_energies: energies,
        survival,
        temperature,
        first_error,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub t_f: f64,
    pub l: f64,
    pub p_success: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_errors: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub t_f: Vec<f64>,
    pub l: Vec<f64>,
    /// Row-major in `t_f`: cell `(i, j)` is at `i * l.len() + j`.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, i_t: usize, j_l: usize) -> &SweepCell {
        &self.cells[i_t * self.l.len() + j_l]
    }

    /// `p[i][j]` for duration `i` and distance `j`.
    pub fn p_matrix(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(self.l.len()).map(|row| row.iter().map(|c| c.p_success).collect()).collect()
    }

    pub const HEADER: [&'static str; 5] = ["t_f", "l", "p", "ci_low", "ci_high"];

    pub fn rows(&self) -> impl Iterator<Item = [f64; 5]> + '_ {
        self.cells.iter().map(|c| [c.t_f, c.l, c.p_success, c.ci_low, c.ci_high])
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

/// Rest-to-rest STA leg of length `l` in time `t_f`, designed for the model's frequency.
pub fn sta_template(model: &TrapModel) -> impl Fn(f64, f64) -> Result<DesignedPath, TrajectoryError> + Sync + '_ {
    move |t_f, l| {
        let seg = PathSegment::sta_linear(BoundaryConditions::rest_to_rest(l, t_f))?;
        Ok(CompositePath::single(seg).designed(model.omega()))
    }
}

/// Ensemble success over every `(t_f, l)` pair. Cell seeds derive from
/// `cfg.seed` and the cell index.
pub fn sweep<F>(
    template: F,
    model: &TrapModel,
    t_axis: &[f64],
    l_axis: &[f64],
    cfg: &EnsembleConfig,
) -> Result<SweepGrid, MonteCarloError>
where
    F: Fn(f64, f64) -> Result<DesignedPath, TrajectoryError> + Sync,
{
    if !strictly_increasing(t_axis) {
        return Err(MonteCarloError::InvalidAxis("t_f"));
    }
    if !strictly_increasing(l_axis) {
        return Err(MonteCarloError::InvalidAxis("l"));
    }
    cfg.validate(model.depth())?;
    let nl = l_axis.len();
    let cells = (0..t_axis.len() * nl)
        .into_par_iter()
        .map(|idx| {
            let (t_f, l) = (t_axis[idx / nl], l_axis[idx % nl]);
            let cell_cfg = EnsembleConfig {
                seed: derive_seed(cfg.seed, idx as u64),
                ..*cfg
            };
            let result = template(t_f, l)
                .map_err(MonteCarloError::from)
                .and_then(|p| run_ensemble(&p, model, &cell_cfg));
            match result {
                Ok(r) => SweepCell {
                    t_f,
                    l,
                    p_success: r.p_success,
                    ci_low: r.ci_low,
                    ci_high: r.ci_high,
                    n_errors: r.n_errors,
                    error: r.first_error,
                },
                Err(e) => SweepCell {
                    t_f,
                    l,
                    p_success: 0.0,
                    ci_low: 0.0,
                    ci_high: 1.0,
                    n_errors: cfg.n_samples,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepGrid {
        t_f: t_axis.to_vec(),
        l: l_axis.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Truncated harmonic trap, analytic.
    One,
    /// Gaussian trap, zero temperature, fixed depth.
    Two,
    /// Gaussian trap with thermal atoms and depth fluctuations.
    Three,
}

/// Largest STA distance in the truncated harmonic trap, `(√3/5)(U0/md)t_f²`.
pub fn model_i_boundary(params: &TrapParams, t_f: f64) -> f64 {
    3f64.sqrt() / 5.0 * params.max_acceleration() * t_f * t_f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub durations: Vec<f64>,
    pub threshold: f64,
    pub ensemble: EnsembleConfig,
    /// Bisection stops once the bracket is this fraction of its upper end.
    pub relative_tolerance: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            durations: vec![40e-6, 55e-6, 70e-6, 85e-6, 100e-6],
            threshold: 0.5,
            ensemble: EnsembleConfig {
                temperature: 27e-6,
                ..EnsembleConfig::default()
            },
            relative_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    pub variant: ModelVariant,
    pub coefficient: f64,
    pub durations: Vec<f64>,
    pub l_star: Vec<f64>,
    /// `l*/(c·l_I) − 1` per duration.
    pub residuals: Vec<f64>,
}

/// Fits `l*(t_f) = c · (√3/5)(U0/md) t_f²` to bisected success boundaries.
pub fn boundary_coefficient(
    variant: ModelVariant,
    params: &TrapParams,
    cfg: &BoundaryConfig,
) -> Result<BoundaryFit, MonteCarloError> {
    if !strictly_increasing(&cfg.durations) || cfg.durations[0] <= 0.0 {
        return Err(MonteCarloError::InvalidAxis("durations"));
    }
    let reference: Vec<f64> = cfg.durations.iter().map(|&t| model_i_boundary(params, t)).collect();
    if variant == ModelVariant::One {
        return Ok(BoundaryFit {
            variant,
            coefficient: 1.0,
            durations: cfg.durations.clone(),
            l_star: reference,
            residuals: vec![0.0; cfg.durations.len()],
        });
    }
    let model = TrapModel::gaussian(*params);
    let template = sta_template(&model);
    let passes = |t_f: f64, l: f64| -> Result<bool, MonteCarloError> {
        let path = template(t_f, l)?;
        match variant {
            ModelVariant::Two => {
                let (start, v0) = path.atom_start();
                let icfg = IntegratorConfig::for_duration(t_f, model.omega());
                Ok(integrate(&model, &path, AtomState::new(start, v0), &icfg)?.success)
            }
            _ => Ok(run_ensemble(&path, &model, &cfg.ensemble)?.p_success >= cfg.threshold),
        }
    };
    let l_star = cfg
        .durations
        .par_iter()
        .zip(&reference)
        .map(|(&t_f, &l_ref)| -> Result<f64, MonteCarloError> {
            if !passes(t_f, 0.0)? {
                return Err(MonteCarloError::FitFailure(format!("no success even at l = 0 for t_f = {t_f}")));
            }
            let mut hi = l_ref;
            let mut grow = 0;
            while passes(t_f, hi)? {
                hi *= 2.0;
                grow += 1;
                if grow > 8 {
                    return Err(MonteCarloError::FitFailure(format!("no failure found for t_f = {t_f}")));
                }
            }
            let mut lo = 0.0;
            while hi - lo > cfg.relative_tolerance * hi {
                let mid = 0.5 * (lo + hi);
                if passes(t_f, mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let num: f64 = l_star.iter().zip(&reference).map(|(a, b)| a * b).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    let coefficient = num / den;
    let residuals: Vec<f64> = l_star.iter().zip(&reference).map(|(a, b)| a / (coefficient * b) - 1.0).collect();
    let worst = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    if worst > 0.1 {
        return Err(MonteCarloError::FitFailure(format!(
            "boundary deviates from the t_f^2 law by {:.1}%",
            100.0 * worst
        )));
    }
    Ok(BoundaryFit {
        variant,
        coefficient,
        durations: cfg.durations.clone(),
        l_star,
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuttleConfig {
    pub ensemble: EnsembleConfig,
    pub n_legs: usize,
    /// Re-draw a thermal state before every leg instead of carrying the
    /// end state of the previous one.
    pub independent_legs: bool,
    /// Optional trap lifetime (s), applied as `exp(−t/τ)` after the fact.
    pub trap_lifetime: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuttleResult {
    pub n_samples: usize,
    pub n_errors: usize,
    /// `survival[k]` is the probability of surviving `k + 1` legs.
    pub survival: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// `r` of the log-linear fit `P_s(n) = rⁿ`.
    pub per_leg_rate: f64,
}

impl ShuttleResult {
    pub const HEADER: [&'static str; 5] = ["n", "survival", "ci_low", "ci_high", "power_law"];

    pub fn rows(&self) -> impl Iterator<Item = [f64; 5]> + '_ {
        (0..self.survival.len()).map(move |k| {
            let n = (k + 1) as f64;
            [n, self.survival[k], self.ci_low[k], self.ci_high[k], self.per_leg_rate.powf(n)]
        })
    }
}

/// Drives each atom back and forth along `path`, alternating direction.
pub fn shuttle(path: &DesignedPath, model: &TrapModel, cfg: &ShuttleConfig) -> Result<ShuttleResult, MonteCarloError> {
    let ens = &cfg.ensemble;
    ens.validate(model.depth())?;
    if cfg.n_legs == 0 {
        return Err(MonteCarloError::InvalidConfig("n_legs must be at least 1".into()));
    }
    let legs = [path.clone(), path.reversed()];
    let icfg = IntegratorConfig::for_duration(path.duration(), model.omega());
    let results: Vec<(usize, bool)> = (0..ens.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(ens.seed, i);
            let mut d = draw(&mut rng, ens, model);
            let (start, v0) = legs[0].atom_start();
            let mut state = AtomState::new(start + d.offsets.position, v0 + d.offsets.velocity);
            for k in 0..cfg.n_legs {
                let leg = &legs[k % 2];
                let m = model.with_depth(model.depth() - d.depth_reduction);
                let out = match integrate(&m, leg, state, &icfg) {
                    Ok(out) => out,
                    Err(_) => return (k, true),
                };
                if !out.success {
                    return (k, false);
                }
                d = draw(&mut rng, ens, model);
                let (start, v0) = legs[(k + 1) % 2].atom_start();
                state = if cfg.independent_legs {
                    AtomState::new(start + d.offsets.position, v0 + d.offsets.velocity)
                } else {
                    AtomState::new(start + out.final_relative.position, v0 + out.final_relative.velocity)
                };
            }
            (cfg.n_legs, false)
        })
        .collect();
    let n = ens.n_samples;
    let n_errors = results.iter().filter(|r| r.1).count();
    let mut survival = Vec::with_capacity(cfg.n_legs);
    let mut ci_low = Vec::with_capacity(cfg.n_legs);
    let mut ci_high = Vec::with_capacity(cfg.n_legs);
    for legs_done in 1..=cfg.n_legs {
        let k = results.iter().filter(|r| r.0 >= legs_done).count();
        let decay = cfg
            .trap_lifetime
            .map_or(1.0, |tau| (-(legs_done as f64) * path.duration() / tau).exp());
        let (lo, hi) = wilson_interval(k, n);
        survival.push(k as f64 / n as f64 * decay);
        ci_low.push(lo * decay);
        ci_high.push(hi * decay);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (k, p) in survival.iter().enumerate() {
        if *p > 0.0 {
            let x = (k + 1) as f64;
            num += x * p.ln();
            den += x * x;
        }
    }
    let per_leg_rate = if den > 0.0 { (num / den).exp() } else { 0.0 };
    Ok(ShuttleResult {
        n_samples: n,
        n_errors,
        survival,
        ci_low,
        ci_high,
        per_leg_rate,
    })
}
