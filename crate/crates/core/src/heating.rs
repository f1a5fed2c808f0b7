//! Vibrational excitation from the acceleration spectrum at the trap
//! frequency, closed-form asymptotics and maximum transport distances.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TrapParams;

/// Minimum samples per trap period for the spectral integral.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 32.0;
/// Points in the running scan used for `max |Δn(t)|`.
pub const RUNNING_SCAN_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[serde(rename = "cv")]
    ConstantVelocity,
    #[serde(rename = "cj")]
    ConstantJerk,
    Sta,
}

impl TransportKind {
    pub const ALL: [TransportKind; 3] = [
        TransportKind::ConstantVelocity,
        TransportKind::ConstantJerk,
        TransportKind::Sta,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TransportKind::ConstantVelocity => "CV",
            TransportKind::ConstantJerk => "CJ",
            TransportKind::Sta => "STA",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatingError {
    #[error("sampling step {dt} s gives fewer than {MIN_SAMPLES_PER_PERIOD} points per trap period")]
    Resolution { dt: f64 },
    #[error("acceleration series needs at least two samples")]
    TooShort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "warning")]
pub enum RegimeWarning {
    /// `ω t_f` is not large; the asymptotic forms do not apply.
    ShortDuration { omega_t: f64 },
    /// The constant-velocity end pulses last longer than a trap period/2π.
    LongAccelerationPulse { omega_tau: f64 },
    /// Below `ω t_f = √216` the STA final value exceeds its maximum bound.
    StaBoundsInverted { omega_t: f64 },
}

/// Largest distance for which the peak excitation stays below the depth.
pub fn l_max(kind: TransportKind, t_f: f64, params: &TrapParams) -> f64 {
    let a = params.max_acceleration();
    match kind {
        TransportKind::ConstantVelocity => (2.0 * params.depth() / params.mass()).sqrt() * t_f,
        TransportKind::ConstantJerk => a * t_f * t_f / (3.0 * 3f64.sqrt()),
        TransportKind::Sta => 3f64.sqrt() / 5.0 * a * t_f * t_f,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub final_: f64,
    pub max: f64,
    pub warnings: Vec<RegimeWarning>,
}

/// Asymptotic final and maximum `Δn` at the quoted trap frequency.
pub fn delta_n_closed_form(kind: TransportKind, l: f64, t_f: f64, params: &TrapParams) -> ClosedForm {
    let m = params.mass();
    let hbar = params.constants().hbar();
    let w = params.omega0();
    let ml2 = m * l * l;
    let omega_t = w * t_f;
    let mut warnings = Vec::new();
    let (final_, max) = match kind {
        TransportKind::ConstantVelocity => {
            let v = l / t_f;
            let omega_tau = w * params.width() / v;
            if omega_tau >= 1.0 {
                warnings.push(RegimeWarning::LongAccelerationPulse { omega_tau });
            }
            let d = ml2 / (2.0 * hbar * w * t_f * t_f);
            (d, d)
        }
        TransportKind::ConstantJerk => {
            if omega_t <= 1.0 {
                warnings.push(RegimeWarning::ShortDuration { omega_t });
            }
            let base = ml2 / (hbar * w.powi(3) * t_f.powi(4));
            (36.0 * base, 54.0 * base)
        }
        TransportKind::Sta => {
            if omega_t <= 1.0 {
                warnings.push(RegimeWarning::ShortDuration { omega_t });
            }
            if omega_t < 216f64.sqrt() {
                warnings.push(RegimeWarning::StaBoundsInverted { omega_t });
            }
            let max = 50.0 * ml2 / (3.0 * hbar * w.powi(3) * t_f.powi(4));
            let final_ = 3600.0 * ml2 / (hbar * w.powi(5) * t_f.powi(6));
            (final_, max)
        }
    };
    ClosedForm { final_, max, warnings }
}

/// `m |a(ω)|² / (2ħω)` with `a(ω) = ∫ a(τ) e^{iωτ} dτ` by the trapezoid rule.
pub fn delta_n_spectral(accel: &[f64], dt: f64, omega: f64, mass: f64, hbar: f64) -> Result<f64, HeatingError> {
    check_series(accel, dt, omega)?;
    let rot = Complex64::from_polar(1.0, omega * dt);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let last = accel.len() - 1;
    for (i, a) in accel.iter().enumerate() {
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        sum += phase * (a * w);
        phase *= rot;
    }
    let amp = sum * dt;
    Ok(mass * amp.norm_sqr() / (2.0 * hbar * omega))
}

fn check_series(accel: &[f64], dt: f64, omega: f64) -> Result<(), HeatingError> {
    if accel.len() < 2 {
        return Err(HeatingError::TooShort);
    }
    if !(dt > 0.0) || dt > 2.0 * PI / (MIN_SAMPLES_PER_PERIOD * omega) {
        return Err(HeatingError::Resolution { dt });
    }
    Ok(())
}

/// `Δn(t)` with the integral truncated at `t`, on `points` evenly spread upper limits.
pub fn delta_n_running(
    accel: &[f64],
    dt: f64,
    omega: f64,
    mass: f64,
    hbar: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>, HeatingError> {
    check_series(accel, dt, omega)?;
    let n = accel.len();
    let last = n - 1;
    let scale = mass / (2.0 * hbar * omega);
    let mut targets: Vec<usize> = (1..=points).map(|k| (k * last).div_ceil(points)).collect();
    targets.dedup();
    let mut out = Vec::with_capacity(targets.len());
    let mut next = 0;
    // Running trapezoid: full-weight sum so far plus the half-weight end terms.
    let mut inner = Complex64::new(0.0, 0.0);
    let first = Complex64::new(accel[0], 0.0);
    for i in 1..n {
        let term = Complex64::from_polar(accel[i], omega * dt * i as f64);
        if next < targets.len() && targets[next] == i {
            let amp = (first * 0.5 + inner + term * 0.5) * dt;
            out.push((dt * i as f64, scale * amp.norm_sqr()));
            next += 1;
        }
        inner += term;
    }
    Ok(out)
}

/// Nominal acceleration profile of each kind sampled on `n` points over `[0, t_f]`.
///
/// STA and CJ use the analytic polynomial. CV uses rectangular pulses of
/// `v²/d` lasting `d/v` at either end.
pub fn profile_acceleration(kind: TransportKind, l: f64, t_f: f64, width: f64, n: usize) -> Vec<f64> {
    let dt = t_f / (n - 1) as f64;
    let scale = l / (t_f * t_f);
    (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let u = t / t_f;
            match kind {
                TransportKind::Sta => scale * (60.0 * u - 180.0 * u * u + 120.0 * u * u * u),
                TransportKind::ConstantJerk => scale * (6.0 - 12.0 * u),
                TransportKind::ConstantVelocity => {
                    let v = l / t_f;
                    let tau = width / v;
                    let a = v * v / width;
                    if t < tau {
                        a
                    } else if t > t_f - tau {
                        -a
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingReport {
    pub kind: TransportKind,
    pub l: f64,
    pub t_f: f64,
    pub l_max: f64,
    pub delta_n_final: f64,
    pub delta_n_max: f64,
    pub warnings: Vec<RegimeWarning>,
}

pub fn report(kind: TransportKind, l: f64, t_f: f64, params: &TrapParams) -> HeatingReport {
    let cf = delta_n_closed_form(kind, l, t_f, params);
    HeatingReport {
        kind,
        l,
        t_f,
        l_max: l_max(kind, t_f, params),
        delta_n_final: cf.final_,
        delta_n_max: cf.max,
        warnings: cf.warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub t_f: f64,
    pub kind: TransportKind,
    pub l_max: f64,
    pub delta_n_final: f64,
    pub delta_n_max: f64,
}

/// For each duration and kind, `l_max` from `distance_params` and the
/// closed-form `Δn` at that distance from `excitation_params`.
pub fn scaling_table(durations: &[f64], distance_params: &TrapParams, excitation_params: &TrapParams) -> Vec<ScalingRow> {
    let mut rows = Vec::with_capacity(durations.len() * 3);
    for &t_f in durations {
        for kind in TransportKind::ALL {
            let l_dist = l_max(kind, t_f, distance_params);
            let l_exc = l_max(kind, t_f, excitation_params);
            let cf = delta_n_closed_form(kind, l_exc, t_f, excitation_params);
            rows.push(ScalingRow {
                t_f,
                kind,
                l_max: l_dist,
                delta_n_final: cf.final_,
                delta_n_max: cf.max,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_acceleration_gives_no_excitation() {
        let p = TrapParams::nominal();
        let d = delta_n_spectral(&[0.0; 100], 1e-8, p.omega0(), p.mass(), p.constants().hbar()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn coarse_sampling_is_rejected() {
        let p = TrapParams::nominal();
        let dt = 2.0 * PI / (16.0 * p.omega0());
        let r = delta_n_spectral(&[1.0; 100], dt, p.omega0(), p.mass(), p.constants().hbar());
        assert!(matches!(r, Err(HeatingError::Resolution { .. })));
    }

    #[test]
    fn l_max_vanishes_with_duration() {
        let p = TrapParams::nominal();
        for k in TransportKind::ALL {
            assert_eq!(l_max(k, 0.0, &p), 0.0);
        }
    }

    #[test]
    fn running_scan_ends_at_full_value() {
        let p = TrapParams::nominal();
        let (w, m, h) = (p.omega0(), p.mass(), p.constants().hbar());
        let a = profile_acceleration(TransportKind::ConstantJerk, 10e-6, 100e-6, p.width(), 20001);
        let dt = 100e-6 / 20000.0;
        let run = delta_n_running(&a, dt, w, m, h, RUNNING_SCAN_POINTS).unwrap();
        assert_eq!(run.len(), RUNNING_SCAN_POINTS);
        let full = delta_n_spectral(&a, dt, w, m, h).unwrap();
        let last = run.last().unwrap();
        assert!((last.0 - 100e-6).abs() < 1e-15);
        assert!((last.1 - full).abs() < 1e-9 * full);
    }
}
