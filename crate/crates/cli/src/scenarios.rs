//! Figure scenarios as typed pipelines, plus the files each one writes.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;
use tweezer_sta::heating::{scaling_table, ScalingRow};
use tweezer_sta::model::TrapModel;
use tweezer_sta::montecarlo::{
    boundary_coefficient, derive_seed, run_ensemble, shuttle, sta_template, sweep, BoundaryConfig, BoundaryFit,
    EnsembleResult, ModelVariant, ShuttleConfig, ShuttleResult, SweepGrid,
};
use tweezer_sta::thermometry::{piecewise_linear_compare, PiecewiseComparison, PiecewiseLinear, SurvivalCurve, TemperatureFit};
use tweezer_sta::trajectory::{BoundaryConditions, CompositePath, Orientation, PathSegment, SampledPath};

use crate::config::{Config, Scenario};
use crate::error::CliError;
use crate::output::{csv_bytes, json_bytes, OutputFile};
use crate::pathfile::{build_path, load_path};
use crate::validate::{validate_path, ValidationReport};

/// Ensemble headline numbers without the per-atom energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n_samples: usize,
    pub n_success: usize,
    pub n_escaped: usize,
    pub n_unbound: usize,
    pub n_errors: usize,
    pub p_success: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_energy: Option<f64>,
    pub temperature: Option<TemperatureFit>,
    pub first_error: Option<String>,
}

impl From<&EnsembleResult> for EnsembleSummary {
    fn from(r: &EnsembleResult) -> Self {
        Self {
            n_samples: r.n_samples,
            n_success: r.n_success,
            n_escaped: r.n_escaped,
            n_unbound: r.n_unbound,
            n_errors: r.n_errors,
            p_success: r.p_success,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            mean_energy: r.mean_energy,
            temperature: r.temperature,
            first_error: r.first_error.clone(),
        }
    }
}

fn survival_csv(curve: &SurvivalCurve, depth: f64) -> Result<Vec<u8>, CliError> {
    let ci = curve.intervals();
    csv_bytes(
        &["e_c_over_u", "e_c", "survival", "ci_low", "ci_high"],
        curve
            .cutoffs
            .iter()
            .zip(&curve.survival)
            .zip(&ci)
            .map(|((e, p), (lo, hi))| vec![e / depth, *e, *p, *lo, *hi]),
    )
}

#[derive(Debug, Clone)]
pub struct Fig1Result {
    pub depth: f64,
    pub sta: EnsembleResult,
    pub cv: EnsembleResult,
    pub cv_piecewise: PiecewiseComparison,
}

pub fn fig1(cfg: &Config) -> Result<Fig1Result, CliError> {
    let model = cfg.trap.model()?;
    let f = &cfg.fig1;
    let bc = BoundaryConditions::rest_to_rest(f.l.0, f.t_f.0);
    let ens = cfg.ensemble.at(f.temperature, cfg.seed);
    let sta = CompositePath::single(PathSegment::sta_linear(bc)?).designed(model.omega());
    let cv = CompositePath::single(PathSegment::cv_path(bc)?).designed(model.omega());
    let sta = run_ensemble(&sta, &model, &ens)?;
    let cv = run_ensemble(&cv, &model, &ens)?;
    let cv_piecewise = piecewise_linear_compare(&cv.survival, model.depth());
    Ok(Fig1Result {
        depth: model.depth(),
        sta,
        cv,
        cv_piecewise,
    })
}

impl Fig1Result {
    pub fn files(&self) -> Result<Vec<OutputFile>, CliError> {
        let fits = json!({
            "depth": self.depth,
            "sta": EnsembleSummary::from(&self.sta),
            "cv": EnsembleSummary::from(&self.cv),
            "cv_piecewise": self.cv_piecewise,
            "reference_piecewise": PiecewiseLinear::REFERENCE,
        });
        Ok(vec![
            OutputFile::new("survival_sta.csv", survival_csv(&self.sta.survival, self.depth)?),
            OutputFile::new("survival_cv.csv", survival_csv(&self.cv.survival, self.depth)?),
            OutputFile::new("fits.json", json_bytes(&fits)?),
        ])
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Cut {
    pub l: f64,
    pub grid: SweepGrid,
}

#[derive(Debug, Clone)]
pub struct Fig2Result {
    pub grid: SweepGrid,
    pub cuts: Vec<Cut>,
    pub boundaries: Vec<BoundaryFit>,
}

pub fn fig2_grid(cfg: &Config) -> Result<SweepGrid, CliError> {
    let model = cfg.trap.model()?;
    let f = &cfg.fig2;
    let t_axis = linspace(f.t_min.0, f.t_max.0, f.t_points);
    let l_axis = linspace(f.l_min.0, f.l_max.0, f.l_points);
    let ens = cfg.ensemble.at(f.temperature, cfg.seed);
    Ok(sweep(sta_template(&model), &model, &t_axis, &l_axis, &ens)?)
}

pub fn fig2(cfg: &Config) -> Result<Fig2Result, CliError> {
    let grid = fig2_grid(cfg)?;
    let model = cfg.trap.model()?;
    let f = &cfg.fig2;
    let t_axis = linspace(f.t_min.0, f.t_max.0, f.cut_points);
    let mut cuts = Vec::with_capacity(f.cuts.len());
    for (k, l) in f.cuts.iter().enumerate() {
        let ens = cfg.ensemble.at(f.temperature, derive_seed(cfg.seed, 1 + k as u64));
        cuts.push(Cut {
            l: l.0,
            grid: sweep(sta_template(&model), &model, &t_axis, &[l.0], &ens)?,
        });
    }
    let mut boundaries = Vec::new();
    if f.boundary {
        let params = cfg.trap.params()?;
        let bcfg = BoundaryConfig {
            durations: f.boundary_durations.iter().map(|t| t.0).collect(),
            threshold: f.threshold,
            ensemble: cfg.ensemble.at(f.temperature, derive_seed(cfg.seed, 100)),
            ..BoundaryConfig::default()
        };
        for v in [ModelVariant::One, ModelVariant::Two, ModelVariant::Three] {
            boundaries.push(boundary_coefficient(v, &params, &bcfg)?);
        }
    }
    Ok(Fig2Result { grid, cuts, boundaries })
}

pub fn sweep_files(grid: &SweepGrid) -> Result<Vec<OutputFile>, CliError> {
    let map = json!({ "t_f": grid.t_f, "l": grid.l, "p": grid.p_matrix() });
    Ok(vec![
        OutputFile::new("sweep.csv", csv_bytes(&SweepGrid::HEADER, grid.rows().map(|r| r.to_vec()))?),
        OutputFile::new("sweep.json", json_bytes(&map)?),
    ])
}

impl Fig2Result {
    pub fn files(&self) -> Result<Vec<OutputFile>, CliError> {
        let mut files = sweep_files(&self.grid)?;
        let rows = self
            .cuts
            .iter()
            .flat_map(|c| c.grid.rows().map(move |r| vec![c.l, r[0], r[2], r[3], r[4]]));
        files.push(OutputFile::new(
            "cuts.csv",
            csv_bytes(&["cut_l", "t_f", "p", "ci_low", "ci_high"], rows)?,
        ));
        if !self.boundaries.is_empty() {
            files.push(OutputFile::new("boundary.json", json_bytes(&self.boundaries)?));
        }
        Ok(files)
    }
}

#[derive(Debug, Clone)]
pub struct Fig3Result {
    pub validation: ValidationReport,
    pub ensemble: EnsembleResult,
    pub sampled: SampledPath,
    pub depth: f64,
}

pub fn fig3(cfg: &Config) -> Result<Fig3Result, CliError> {
    let model = cfg.trap.model()?;
    let specs = match &cfg.fig3.path {
        Some(p) => load_path(p)?,
        None => cfg.fig3.segment.clone(),
    };
    let validation = validate_path(&specs, model.params(), model.omega())?;
    let path = build_path(&specs)?;
    let sampled = path.sample(256, model.omega())?;
    let ens = cfg.ensemble.at(cfg.fig3.temperature, cfg.seed);
    let ensemble = run_ensemble(&path.designed(model.omega()), &model, &ens)?;
    Ok(Fig3Result {
        validation,
        ensemble,
        sampled,
        depth: model.depth(),
    })
}

impl Fig3Result {
    pub fn files(&self) -> Result<Vec<OutputFile>, CliError> {
        Ok(vec![
            OutputFile::new("path_report.json", json_bytes(&self.validation)?),
            OutputFile::new("result.json", json_bytes(&EnsembleSummary::from(&self.ensemble))?),
            OutputFile::new("survival.csv", survival_csv(&self.ensemble.survival, self.depth)?),
            OutputFile::new(
                "path.csv",
                csv_bytes(&SampledPath::HEADER, self.sampled.rows().map(|r| r.to_vec()))?,
            ),
        ])
    }
}

/// STA transport against its constant-angular-velocity counterpart.
#[derive(Debug, Clone)]
pub struct CurvedResult {
    pub depth: f64,
    pub sta: EnsembleResult,
    pub constant_angular: EnsembleResult,
}

impl CurvedResult {
    pub fn files(&self) -> Result<Vec<OutputFile>, CliError> {
        let result = json!({
            "sta": EnsembleSummary::from(&self.sta),
            "constant_angular": EnsembleSummary::from(&self.constant_angular),
        });
        Ok(vec![
            OutputFile::new("result.json", json_bytes(&result)?),
            OutputFile::new("survival_sta.csv", survival_csv(&self.sta.survival, self.depth)?),
            OutputFile::new(
                "survival_const.csv",
                survival_csv(&self.constant_angular.survival, self.depth)?,
            ),
        ])
    }
}

fn curved(cfg: &Config, sta: CompositePath, ca: CompositePath, temperature: crate::units::Temperature) -> Result<CurvedResult, CliError> {
    let model = cfg.trap.model()?;
    let ens = cfg.ensemble.at(temperature, cfg.seed);
    Ok(CurvedResult {
        depth: model.depth(),
        sta: run_ensemble(&sta.designed(model.omega()), &model, &ens)?,
        constant_angular: run_ensemble(&ca.designed(model.omega()), &model, &ens)?,
    })
}

pub fn fig4a(cfg: &Config) -> Result<CurvedResult, CliError> {
    let f = &cfg.fig4a;
    let sta = CompositePath::single(PathSegment::sta_arc(f.radius.0, f.angle.0, f.t_f.0, 0.0, 0.0)?);
    let ca = CompositePath::single(PathSegment::const_angular_path(f.radius.0, f.angle.0, f.t_f.0)?);
    curved(cfg, sta, ca, f.temperature)
}

/// Two opposite semicircles, both as STA arcs and at constant angular speed.
pub fn s_shape_paths(cfg: &Config) -> Result<(CompositePath, CompositePath), CliError> {
    let f = &cfg.fig4b;
    let (r, t, v) = (f.radius.0, f.t_f.0, f.v_inter.0);
    let sta = CompositePath::chain(vec![
        PathSegment::sta_arc(r, PI, t, 0.0, v)?,
        PathSegment::sta_arc(r, PI, t, v, 0.0)?.turning(Orientation::Clockwise),
    ])?;
    let ca = CompositePath::chain(vec![
        PathSegment::const_angular_path(r, PI, t)?,
        PathSegment::const_angular_path(r, PI, t)?.turning(Orientation::Clockwise),
    ])?;
    Ok((sta, ca))
}

pub fn fig4b(cfg: &Config) -> Result<CurvedResult, CliError> {
    let (sta, ca) = s_shape_paths(cfg)?;
    curved(cfg, sta, ca, cfg.fig4b.temperature)
}

pub fn fig5(cfg: &Config) -> Result<ShuttleResult, CliError> {
    let model = cfg.trap.model()?;
    let f = &cfg.fig5;
    let path = CompositePath::single(PathSegment::sta_linear(BoundaryConditions::rest_to_rest(f.l.0, f.t_f.0))?)
        .designed(model.omega());
    let scfg = ShuttleConfig {
        ensemble: cfg.ensemble.at(f.temperature, cfg.seed),
        n_legs: f.legs,
        independent_legs: f.independent_legs,
        trap_lifetime: f.trap_lifetime.map(|t| t.0),
    };
    Ok(shuttle(&path, &model, &scfg)?)
}

pub fn fig5_files(r: &ShuttleResult) -> Result<Vec<OutputFile>, CliError> {
    Ok(vec![
        OutputFile::new("shuttle.csv", csv_bytes(&ShuttleResult::HEADER, r.rows().map(|x| x.to_vec()))?),
        OutputFile::new("shuttle.json", json_bytes(r)?),
    ])
}

pub fn scaling(cfg: &Config) -> Result<Vec<ScalingRow>, CliError> {
    let params = cfg.trap.params()?;
    let excitation = if cfg.scaling.consistent_excitation {
        params.frequency_consistent()
    } else {
        params
    };
    let durations: Vec<f64> = cfg.scaling.durations.iter().map(|t| t.0).collect();
    Ok(scaling_table(&durations, &params, &excitation))
}

pub fn scaling_files(rows: &[ScalingRow]) -> Result<Vec<OutputFile>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_f", "kind", "l_max", "delta_n_final", "delta_n_max"])?;
    for r in rows {
        w.write_record([
            r.t_f.to_string(),
            r.kind.label().to_string(),
            r.l_max.to_string(),
            r.delta_n_final.to_string(),
            r.delta_n_max.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(vec![
        OutputFile::new("scaling_table.csv", bytes),
        OutputFile::new("scaling_table.json", json_bytes(rows)?),
    ])
}

/// Runs one scenario and returns its files in a fixed order.
pub fn run_files(cfg: &Config, scenario: Scenario) -> Result<Vec<OutputFile>, CliError> {
    match scenario {
        Scenario::Fig1 => fig1(cfg)?.files(),
        Scenario::Fig2 => fig2(cfg)?.files(),
        Scenario::Fig3 => fig3(cfg)?.files(),
        Scenario::Fig4a => fig4a(cfg)?.files(),
        Scenario::Fig4b => fig4b(cfg)?.files(),
        Scenario::Fig5 => fig5_files(&fig5(cfg)?),
        Scenario::ScalingTable => scaling_files(&scaling(cfg)?),
    }
}

/// Model handle shared by callers that need ω or the depth.
pub fn model(cfg: &Config) -> Result<TrapModel, CliError> {
    cfg.trap.model()
}
