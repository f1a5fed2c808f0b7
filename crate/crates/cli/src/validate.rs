//! Static checks on a path description: junction continuity, per-segment
//! distance margins against the known boundaries, and the deflector slew limit.

use serde::Serialize;
use tweezer_sta::model::TrapParams;
use tweezer_sta::montecarlo::model_i_boundary;
use tweezer_sta::trajectory::{CompositePath, PathKind, PathSegment, TrajectoryError};

use crate::error::CliError;
use crate::pathfile::{place, SegmentSpec};

/// Boundary coefficient of the thermal, fluctuating-depth model.
pub const THERMAL_COEFFICIENT: f64 = 0.336;
/// Largest tweezer speed the deflector can follow (m/s).
pub const SLEW_LIMIT: f64 = 66.0;
const SPEED_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub index: usize,
    pub kind: PathKind,
    pub travel: f64,
    pub duration: f64,
    pub v_initial: f64,
    pub v_final: f64,
    /// `(√3/5)(U0/md)t_f²`, STA segments only.
    pub harmonic_limit: Option<f64>,
    /// `1 − travel/limit`; negative means outside.
    pub harmonic_margin: Option<f64>,
    pub thermal_limit: Option<f64>,
    pub thermal_margin: Option<f64>,
    pub max_tweezer_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JunctionReport {
    /// Junction between segment `index` and `index + 1`.
    pub index: usize,
    pub position_gap: f64,
    pub speed_before: f64,
    pub speed_after: f64,
    /// Angle between outgoing and incoming directions (rad).
    pub tangent_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub error: Option<String>,
    pub error_junction: Option<usize>,
    pub duration: f64,
    pub length: f64,
    pub max_tweezer_speed: f64,
    pub slew_limit: f64,
    pub segments: Vec<SegmentReport>,
    pub junctions: Vec<JunctionReport>,
    pub warnings: Vec<String>,
}

fn max_speed(seg: &PathSegment, omega: f64) -> f64 {
    (0..=SPEED_SAMPLES)
        .map(|j| seg.tweezer(seg.duration() * j as f64 / SPEED_SAMPLES as f64, omega).velocity.norm())
        .fold(0.0, f64::max)
}

fn segment_report(index: usize, seg: &PathSegment, params: &TrapParams, omega: f64) -> SegmentReport {
    let travel = seg.length();
    let sta = seg.kind().is_sta();
    let limit = sta.then(|| model_i_boundary(params, seg.duration()));
    let thermal = limit.map(|l| THERMAL_COEFFICIENT * l);
    SegmentReport {
        index,
        kind: seg.kind(),
        travel,
        duration: seg.duration(),
        v_initial: seg.v_initial(),
        v_final: seg.v_final(),
        harmonic_limit: limit,
        harmonic_margin: limit.map(|l| 1.0 - travel / l),
        thermal_limit: thermal,
        thermal_margin: thermal.map(|l| 1.0 - travel / l),
        max_tweezer_speed: max_speed(seg, omega),
    }
}

fn junction_report(index: usize, a: &PathSegment, b: &PathSegment) -> JunctionReport {
    let (ta, tb) = (a.end_tangent(), b.start_tangent());
    JunctionReport {
        index,
        position_gap: (a.end_position() - b.start_position()).norm(),
        speed_before: a.end_velocity().norm(),
        speed_after: b.start_velocity().norm(),
        tangent_angle: (ta.x * tb.y - ta.y * tb.x).atan2(ta.dot(&tb)),
    }
}

/// Builds, places and checks a path. Junction defects are recorded in the
/// report rather than returned as errors; malformed segments are errors.
pub fn validate_path(specs: &[SegmentSpec], params: &TrapParams, omega: f64) -> Result<ValidationReport, CliError> {
    let placed = place(specs)?;
    let segments: Vec<SegmentReport> = placed
        .iter()
        .enumerate()
        .map(|(i, s)| segment_report(i, s, params, omega))
        .collect();
    let junctions: Vec<JunctionReport> = placed
        .windows(2)
        .enumerate()
        .map(|(i, w)| junction_report(i, &w[0], &w[1]))
        .collect();
    let mut warnings = Vec::new();
    for s in &segments {
        if let (Some(limit), Some(m)) = (s.harmonic_limit, s.harmonic_margin) {
            if m < 0.0 {
                warnings.push(format!(
                    "segment {}: travel {:.4e} m exceeds the harmonic-trap boundary (√3/5)(U0/md)t_f² = {:.4e} m",
                    s.index, s.travel, limit
                ));
            }
        }
        if let (Some(limit), Some(m)) = (s.thermal_limit, s.thermal_margin) {
            if m < 0.0 {
                warnings.push(format!(
                    "segment {}: travel {:.4e} m exceeds the thermal-ensemble boundary {THERMAL_COEFFICIENT}·(√3/5)(U0/md)t_f² = {:.4e} m",
                    s.index, s.travel, limit
                ));
            }
        }
    }
    let max_tweezer_speed = segments.iter().map(|s| s.max_tweezer_speed).fold(0.0, f64::max);
    if max_tweezer_speed > SLEW_LIMIT {
        warnings.push(format!(
            "tweezer speed {max_tweezer_speed:.3} m/s exceeds the deflector slew limit {SLEW_LIMIT} m/s"
        ));
    }
    let duration = placed.iter().map(|s| s.duration()).sum();
    let length = placed.iter().map(|s| s.length()).sum();
    let (error, error_junction) = match CompositePath::concatenate(placed) {
        Ok(_) => (None, None),
        Err(e) => {
            let j = match e {
                TrajectoryError::JunctionMismatch { index, .. } => Some(index),
                _ => None,
            };
            (Some(e.to_string()), j)
        }
    };
    Ok(ValidationReport {
        valid: error.is_none(),
        error,
        error_junction,
        duration,
        length,
        max_tweezer_speed,
        slew_limit: SLEW_LIMIT,
        segments,
        junctions,
        warnings,
    })
}
