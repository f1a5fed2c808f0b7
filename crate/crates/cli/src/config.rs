//! Scenario configuration: one TOML file, sections per scenario, units on
//! every physical value. Unknown keys are errors.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tweezer_sta::model::{PhysicalConstants, TrapModel, TrapParams};
use tweezer_sta::montecarlo::EnsembleConfig;

use crate::error::CliError;
use crate::pathfile::SegmentSpec;
use crate::units::{Angle, Energy, Frequency, Length, Speed, Temperature, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fig1,
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Fig5,
    ScalingTable,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4a => "fig4a",
            Scenario::Fig4b => "fig4b",
            Scenario::Fig5 => "fig5",
            Scenario::ScalingTable => "scaling-table",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Gaussian,
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub trap: TrapSection,
    pub ensemble: EnsembleSection,
    pub fig1: Fig1,
    pub fig2: Fig2,
    pub fig3: Fig3,
    pub fig4a: Fig4a,
    pub fig4b: Fig4b,
    pub fig5: Fig5,
    pub scaling: Scaling,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: None,
            seed: 1,
            out: None,
            trap: TrapSection::default(),
            ensemble: EnsembleSection::default(),
            fig1: Fig1::default(),
            fig2: Fig2::default(),
            fig3: Fig3::default(),
            fig4a: Fig4a::default(),
            fig4b: Fig4b::default(),
            fig5: Fig5::default(),
            scaling: Scaling::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapSection {
    pub depth: Energy,
    pub width: Length,
    /// Gaussian waist; `√2·width` when absent.
    pub waist: Option<Length>,
    pub frequency: Frequency,
    pub model: ModelChoice,
}

impl Default for TrapSection {
    fn default() -> Self {
        let p = TrapParams::nominal();
        Self {
            depth: Energy(p.depth()),
            width: Length(p.width()),
            waist: None,
            frequency: Frequency(p.omega0()),
            model: ModelChoice::Gaussian,
        }
    }
}

impl TrapSection {
    pub fn params(&self) -> Result<TrapParams, CliError> {
        let waist = self.waist.map_or(SQRT_2 * self.width.0, |w| w.0);
        TrapParams::new(
            PhysicalConstants::rubidium87(),
            self.depth.0,
            self.width.0,
            waist,
            self.frequency.0,
        )
        .map_err(|e| CliError::config("trap", e.to_string()))
    }

    pub fn model(&self) -> Result<TrapModel, CliError> {
        let p = self.params()?;
        Ok(match self.model {
            ModelChoice::Gaussian => TrapModel::gaussian(p),
            ModelChoice::Harmonic => TrapModel::harmonic(p),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub samples: usize,
    pub depth_fluctuation: Energy,
    pub axial_energy: bool,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        let e = EnsembleConfig::default();
        Self {
            samples: e.n_samples,
            depth_fluctuation: Energy(e.depth_fluctuation),
            axial_energy: e.axial_energy,
        }
    }
}

impl EnsembleSection {
    pub fn at(&self, temperature: Temperature, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            n_samples: self.samples,
            temperature: temperature.0,
            depth_fluctuation: self.depth_fluctuation.0,
            seed,
            axial_energy: self.axial_energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig1 {
    pub l: Length,
    pub t_f: Time,
    pub temperature: Temperature,
}

impl Default for Fig1 {
    fn default() -> Self {
        Self {
            l: Length(12.6e-6),
            t_f: Time(58.5e-6),
            temperature: Temperature(27e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2 {
    pub t_min: Time,
    pub t_max: Time,
    pub t_points: usize,
    pub l_min: Length,
    pub l_max: Length,
    pub l_points: usize,
    pub temperature: Temperature,
    /// Distances of the success-vs-duration cuts.
    pub cuts: Vec<Length>,
    pub cut_points: usize,
    /// Also extract the Model II and III boundary coefficients.
    pub boundary: bool,
    pub boundary_durations: Vec<Time>,
    pub threshold: f64,
}

impl Default for Fig2 {
    fn default() -> Self {
        Self {
            t_min: Time(20e-6),
            t_max: Time(150e-6),
            t_points: 12,
            l_min: Length(5e-6),
            l_max: Length(100e-6),
            l_points: 12,
            temperature: Temperature(27e-6),
            cuts: vec![Length(77.5e-6), Length(51.7e-6), Length(25.2e-6)],
            cut_points: 24,
            boundary: true,
            boundary_durations: [40e-6, 55e-6, 70e-6, 85e-6, 100e-6].map(Time).to_vec(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3 {
    /// Path description file; takes precedence over `segment`.
    pub path: Option<PathBuf>,
    pub segment: Vec<SegmentSpec>,
    pub temperature: Temperature,
}

impl Default for Fig3 {
    fn default() -> Self {
        let v = [0.0, 0.3, 0.1, 0.0];
        Self {
            path: None,
            segment: (0..3)
                .map(|k| SegmentSpec::sta_line(Length(12.6e-6), Time(31.5e-6), Speed(v[k]), Speed(v[k + 1])))
                .collect(),
            temperature: Temperature(12e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig4a {
    pub radius: Length,
    pub angle: Angle,
    pub t_f: Time,
    pub temperature: Temperature,
}

impl Default for Fig4a {
    fn default() -> Self {
        Self {
            radius: Length(25.2e-6),
            angle: Angle(FRAC_PI_2),
            t_f: Time(93.7e-6),
            temperature: Temperature(10e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig4b {
    pub radius: Length,
    /// Duration of each semicircle.
    pub t_f: Time,
    pub v_inter: Speed,
    pub temperature: Temperature,
}

impl Default for Fig4b {
    fn default() -> Self {
        Self {
            radius: Length(12.6e-6),
            t_f: Time(128.8e-6),
            v_inter: Speed(0.3),
            temperature: Temperature(10e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig5 {
    pub l: Length,
    pub t_f: Time,
    pub legs: usize,
    pub temperature: Temperature,
    pub independent_legs: bool,
    pub trap_lifetime: Option<Time>,
}

impl Default for Fig5 {
    fn default() -> Self {
        Self {
            l: Length(51.7e-6),
            t_f: Time(129.0e-6),
            legs: 25,
            temperature: Temperature(27e-6),
            independent_legs: false,
            trap_lifetime: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scaling {
    pub durations: Vec<Time>,
    /// Evaluate Δn with the width re-derived from the quoted frequency, so
    /// that ħω·max Δn = U0 holds exactly at l_max.
    pub consistent_excitation: bool,
}

impl Default for Scaling {
    fn default() -> Self {
        Self {
            durations: vec![Time(100e-6), Time(1e-3)],
            consistent_excitation: true,
        }
    }
}

/// Parses a config document. Errors carry the offending key path and the
/// line/column of the problem.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| toml_error(text, "", e))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        toml_error(text, if key == "." { "" } else { &key }, e.into_inner())
    })
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    // Relative path files are resolved against the config file's directory.
    if let (Some(p), Some(dir)) = (cfg.fig3.path.as_mut(), path.parent()) {
        if p.is_relative() {
            *p = dir.join(&*p);
        }
    }
    Ok(cfg)
}

pub(crate) fn toml_error(text: &str, key: &str, e: toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((None, None), |s| {
        let (l, c) = line_column(text, s.start);
        (Some(l), Some(c))
    });
    CliError::Config {
        key: key.to_string(),
        message: e.message().trim().to_string(),
        line,
        column,
    }
}

/// One-based line and column of a byte offset.
pub(crate) fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
