use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Kinematics, PathSegment, SampledPath, TrajectoryError, TweezerPath};
use crate::Vec2;

const JUNCTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JunctionKind {
    Position,
    Speed,
    Tangent,
}

impl fmt::Display for JunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JunctionKind::Position => "position",
            JunctionKind::Speed => "speed",
            JunctionKind::Tangent => "tangent",
        })
    }
}

/// Ordered, junction-checked list of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositePath {
    segments: Vec<PathSegment>,
    starts: Vec<f64>,
    duration: f64,
}

impl CompositePath {
    pub fn single(segment: PathSegment) -> Self {
        Self::concatenate(vec![segment]).expect("one segment has no junctions")
    }

    /// Validates position, speed and tangent continuity at every junction.
    pub fn concatenate(segments: Vec<PathSegment>) -> Result<Self, TrajectoryError> {
        if segments.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        for (index, pair) in segments.windows(2).enumerate() {
            if let Some(kind) = junction_defect(&pair[0], &pair[1]) {
                return Err(TrajectoryError::JunctionMismatch { index, kind });
            }
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut t = 0.0;
        for s in &segments {
            starts.push(t);
            t += s.duration();
        }
        Ok(Self {
            segments,
            starts,
            duration: t,
        })
    }

    /// Places each segment at the end point and heading of its predecessor,
    /// then concatenates. The first segment keeps its own placement.
    pub fn chain(segments: Vec<PathSegment>) -> Result<Self, TrajectoryError> {
        let mut placed: Vec<PathSegment> = Vec::with_capacity(segments.len());
        for s in segments {
            let next = match placed.last() {
                Some(prev) => s.at(prev.end_position(), prev.end_tangent()),
                None => s,
            };
            placed.push(next);
        }
        Self::concatenate(placed)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(PathSegment::length).sum()
    }

    /// Segment index and local time for a global time, clamped to the path.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        if t <= 0.0 {
            return (0, 0.0);
        }
        let idx = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        let seg = &self.segments[idx];
        (idx, (t - self.starts[idx]).min(seg.duration()))
    }

    pub fn atom(&self, t: f64) -> Kinematics {
        let (i, local) = self.locate(t);
        self.segments[i].atom(local)
    }

    pub fn start_position(&self) -> Vec2 {
        self.segments[0].start_position()
    }

    pub fn end_position(&self) -> Vec2 {
        self.segments[self.segments.len() - 1].end_position()
    }

    /// The same route driven from its end back to its start.
    pub fn reversed(&self) -> Self {
        let segments = self.segments.iter().rev().map(PathSegment::reversed).collect();
        Self::concatenate(segments).expect("reversal preserves junction continuity")
    }

    /// Attaches a trap frequency, producing the tweezer motion.
    pub fn designed(&self, omega: f64) -> DesignedPath {
        DesignedPath {
            path: self.clone(),
            omega,
        }
    }

    /// Uniform samples of every segment with analytic derivatives.
    /// Junction points appear once.
    pub fn sample(&self, n_per_segment: usize, omega: f64) -> Result<SampledPath, TrajectoryError> {
        if n_per_segment < 2 {
            return Err(TrajectoryError::TooFewSamples {
                min: 2,
                got: n_per_segment,
            });
        }
        let mut out = SampledPath::with_capacity(self.segments.len() * n_per_segment);
        for (k, seg) in self.segments.iter().enumerate() {
            let first = if k == 0 { 0 } else { 1 };
            for j in first..n_per_segment {
                let local = seg.duration() * j as f64 / (n_per_segment - 1) as f64;
                out.push(
                    self.starts[k] + local,
                    seg.tweezer(local, omega),
                    seg.atom_derivatives(local)[0],
                );
            }
        }
        out.set_terminal(self.segments[self.segments.len() - 1].terminal_velocity());
        out.set_atom_start(
            self.start_position(),
            self.segments[0].designed_initial_velocity(),
        );
        Ok(out)
    }
}

fn junction_defect(a: &PathSegment, b: &PathSegment) -> Option<JunctionKind> {
    let pa = a.end_position();
    let pb = b.start_position();
    let scale = a.length().max(b.length()).max(pa.norm()).max(f64::MIN_POSITIVE);
    if (pa - pb).norm() > JUNCTION_TOLERANCE * scale {
        return Some(JunctionKind::Position);
    }
    let va = a.end_velocity().norm();
    let vb = b.start_velocity().norm();
    let vmax = va.max(vb);
    if (va - vb).abs() > JUNCTION_TOLERANCE * vmax {
        return Some(JunctionKind::Speed);
    }
    if vmax > 0.0 {
        let ta = a.end_tangent();
        let tb = b.start_tangent();
        let angle = (ta.x * tb.y - ta.y * tb.x).atan2(ta.dot(&tb));
        if angle.abs() > JUNCTION_TOLERANCE {
            return Some(JunctionKind::Tangent);
        }
    }
    None
}

/// A composite path together with the trap frequency used to turn atom
/// paths into tweezer paths.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedPath {
    path: CompositePath,
    omega: f64,
}

impl DesignedPath {
    pub fn path(&self) -> &CompositePath {
        &self.path
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn reversed(&self) -> Self {
        self.path.reversed().designed(self.omega)
    }
}

impl TweezerPath for DesignedPath {
    fn duration(&self) -> f64 {
        self.path.duration
    }

    fn tweezer(&self, t: f64) -> Kinematics {
        let (i, local) = self.path.locate(t);
        self.path.segments[i].tweezer(local, self.omega)
    }

    fn terminal_velocity(&self) -> Vec2 {
        self.path.segments[self.path.segments.len() - 1].terminal_velocity()
    }

    fn atom_start(&self) -> (Vec2, Vec2) {
        let first = &self.path.segments[0];
        (first.start_position(), first.designed_initial_velocity())
    }
}
