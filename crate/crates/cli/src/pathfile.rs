//! Path description files: a list of `[[segment]]` tables chained end to end.
//!
//! ```toml
//! [[segment]]
//! kind = "sta"
//! length = "12.6 um"
//! t_f = "31.5 us"
//! v_f = "0.3 m/s"
//!
//! [[segment]]
//! kind = "sta"
//! shape = "arc"
//! radius = "12.6 um"
//! angle = "180 deg"
//! turn = "cw"
//! t_f = "128.8 us"
//! v_i = "0.3 m/s"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use tweezer_sta::trajectory::{BoundaryConditions, CompositePath, Orientation, PathSegment};

use crate::config::line_column;
use crate::error::CliError;
use crate::units::{Angle, Length, Speed, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Sta,
    Cv,
    Cj,
    ConstAngular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Line,
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turn {
    #[default]
    Ccw,
    Cw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub kind: SegmentKind,
    #[serde(default)]
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn: Option<Turn>,
    pub t_f: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_i: Option<Speed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_f: Option<Speed>,
}

impl SegmentSpec {
    pub fn sta_line(length: Length, t_f: Time, v_i: Speed, v_f: Speed) -> Self {
        Self {
            kind: SegmentKind::Sta,
            shape: Shape::Line,
            length: Some(length),
            radius: None,
            angle: None,
            turn: None,
            t_f,
            v_i: Some(v_i),
            v_f: Some(v_f),
        }
    }

    /// The analytic segment, still at its default placement.
    pub fn build(&self) -> Result<PathSegment, String> {
        let vi = self.v_i.map_or(0.0, |v| v.0);
        let vf = self.v_f.map_or(0.0, |v| v.0);
        let t_f = self.t_f.0;
        let rest = vi == 0.0 && vf == 0.0;
        match self.shape {
            Shape::Line => {
                if self.radius.is_some() || self.angle.is_some() || self.turn.is_some() {
                    return Err("`radius`, `angle` and `turn` only apply to arcs".into());
                }
                let l = self.length.ok_or("a line segment needs `length`")?.0;
                let bc = BoundaryConditions {
                    distance: l,
                    duration: t_f,
                    v_initial: vi,
                    v_final: vf,
                };
                let seg = match self.kind {
                    SegmentKind::Sta => PathSegment::sta_linear(bc),
                    SegmentKind::Cv if rest => PathSegment::cv_path(bc),
                    SegmentKind::Cj if rest => PathSegment::cj_path(bc),
                    SegmentKind::Cv | SegmentKind::Cj => return Err("cv and cj segments run rest to rest".into()),
                    SegmentKind::ConstAngular => return Err("const_angular needs `shape = \"arc\"`".into()),
                };
                seg.map_err(|e| e.to_string())
            }
            Shape::Arc => {
                if self.length.is_some() {
                    return Err("arcs take `radius` and `angle`, not `length`".into());
                }
                let r = self.radius.ok_or("an arc needs `radius`")?.0;
                let angle = self.angle.ok_or("an arc needs `angle`")?.0;
                let seg = match self.kind {
                    SegmentKind::Sta => PathSegment::sta_arc(r, angle, t_f, vi, vf),
                    SegmentKind::ConstAngular if rest => PathSegment::const_angular_path(r, angle, t_f),
                    SegmentKind::ConstAngular => return Err("const_angular segments take no `v_i`/`v_f`".into()),
                    SegmentKind::Cv | SegmentKind::Cj => return Err("cv and cj segments are straight".into()),
                }
                .map_err(|e| e.to_string())?;
                Ok(match self.turn.unwrap_or_default() {
                    Turn::Ccw => seg,
                    Turn::Cw => seg.turning(Orientation::Clockwise),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub segment: Vec<SegmentSpec>,
}

pub fn parse_path(text: &str, file: &str) -> Result<Vec<SegmentSpec>, CliError> {
    let pf: PathFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((None, None), |s| {
            let (l, c) = line_column(text, s.start);
            (Some(l), Some(c))
        });
        CliError::PathFile {
            file: file.to_string(),
            message: e.message().trim().to_string(),
            line,
            column,
        }
    })?;
    if pf.segment.is_empty() {
        return Err(CliError::PathFile {
            file: file.to_string(),
            message: "no [[segment]] entries".into(),
            line: None,
            column: None,
        });
    }
    Ok(pf.segment)
}

pub fn load_path(path: &Path) -> Result<Vec<SegmentSpec>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_path(&text, &path.display().to_string())
}

/// Builds every segment and places each at the end point and heading of the
/// previous one, without checking junctions.
pub fn place(specs: &[SegmentSpec]) -> Result<Vec<PathSegment>, CliError> {
    let mut placed: Vec<PathSegment> = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let seg = spec
            .build()
            .map_err(|m| CliError::config(&format!("segment[{i}]"), m))?;
        let seg = match placed.last() {
            Some(prev) => seg.at(prev.end_position(), prev.end_tangent()),
            None => seg,
        };
        placed.push(seg);
    }
    Ok(placed)
}

pub fn build_path(specs: &[SegmentSpec]) -> Result<CompositePath, CliError> {
    Ok(CompositePath::concatenate(place(specs)?)?)
}
