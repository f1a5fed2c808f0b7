use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Kinematics, ScaledPolynomial, TrajectoryError};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Sta,
    ConstantVelocity,
    ConstantJerk,
    ConstantAngularVelocity,
}

impl PathKind {
    /// Whether the tweezer is offset by `ẍ/ω²` from the atom path.
    pub fn is_sta(self) -> bool {
        matches!(self, PathKind::Sta)
    }
}

/// Sense of rotation along an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::CounterClockwise => 1.0,
            Orientation::Clockwise => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::CounterClockwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Geometry {
    Linear {
        origin: [f64; 2],
        direction: [f64; 2],
    },
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        orientation: Orientation,
    },
}

/// Scalar boundary data for one transport leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub distance: f64,
    pub duration: f64,
    pub v_initial: f64,
    pub v_final: f64,
}

impl BoundaryConditions {
    pub fn rest_to_rest(distance: f64, duration: f64) -> Self {
        Self {
            distance,
            duration,
            v_initial: 0.0,
            v_final: 0.0,
        }
    }

    fn validate(&self) -> Result<(), TrajectoryError> {
        finite("distance", self.distance)?;
        finite("v_initial", self.v_initial)?;
        finite("v_final", self.v_final)?;
        positive("duration", self.duration)?;
        if self.distance < 0.0 {
            return Err(TrajectoryError::Negative {
                name: "distance",
                value: self.distance,
            });
        }
        Ok(())
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64, TrajectoryError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(TrajectoryError::NonFinite { name })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, TrajectoryError> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(TrajectoryError::NotPositive { name, value })
    }
}

/// One analytic leg of a transport: a scalar profile laid along a line or arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    geometry: Geometry,
    profile: ScaledPolynomial,
    kind: PathKind,
    duration: f64,
    v_initial: f64,
    v_final: f64,
}

impl PathSegment {
    /// Straight STA leg from the origin along +x.
    pub fn sta_linear(bc: BoundaryConditions) -> Result<Self, TrajectoryError> {
        bc.validate()?;
        Ok(Self {
            geometry: Geometry::Linear {
                origin: [0.0, 0.0],
                direction: [1.0, 0.0],
            },
            profile: ScaledPolynomial::sta(bc.distance, bc.duration, bc.v_initial, bc.v_final),
            kind: PathKind::Sta,
            duration: bc.duration,
            v_initial: bc.v_initial,
            v_final: bc.v_final,
        })
    }

    /// Counter-clockwise STA rotation about the origin starting on +x.
    pub fn sta_arc(
        radius: f64,
        theta_f: f64,
        duration: f64,
        v_initial: f64,
        v_final: f64,
    ) -> Result<Self, TrajectoryError> {
        positive("radius", radius)?;
        finite("theta_f", theta_f)?;
        BoundaryConditions {
            distance: theta_f.abs() * radius,
            duration,
            v_initial,
            v_final,
        }
        .validate()?;
        Ok(Self {
            geometry: Geometry::Arc {
                center: [0.0, 0.0],
                radius,
                start_angle: 0.0,
                orientation: Orientation::CounterClockwise,
            },
            profile: ScaledPolynomial::sta_angle(radius, theta_f, duration, v_initial, v_final),
            kind: PathKind::Sta,
            duration,
            v_initial,
            v_final,
        })
    }

    /// Tweezer moving at `l / t_f` from start to stop.
    pub fn cv_path(bc: BoundaryConditions) -> Result<Self, TrajectoryError> {
        Self::rest_to_rest_linear(bc, PathKind::ConstantVelocity, ScaledPolynomial::constant_velocity(bc.distance))
    }

    /// Tweezer following `3u² - 2u³`.
    pub fn cj_path(bc: BoundaryConditions) -> Result<Self, TrajectoryError> {
        Self::rest_to_rest_linear(bc, PathKind::ConstantJerk, ScaledPolynomial::constant_jerk(bc.distance))
    }

    fn rest_to_rest_linear(
        bc: BoundaryConditions,
        kind: PathKind,
        profile: ScaledPolynomial,
    ) -> Result<Self, TrajectoryError> {
        bc.validate()?;
        Ok(Self {
            geometry: Geometry::Linear {
                origin: [0.0, 0.0],
                direction: [1.0, 0.0],
            },
            profile,
            kind,
            duration: bc.duration,
            v_initial: 0.0,
            v_final: 0.0,
        })
    }

    /// Tweezer at fixed radius with `θ(t) = θ_f t / t_f`.
    pub fn const_angular_path(radius: f64, theta_f: f64, duration: f64) -> Result<Self, TrajectoryError> {
        positive("radius", radius)?;
        finite("theta_f", theta_f)?;
        positive("duration", duration)?;
        Ok(Self {
            geometry: Geometry::Arc {
                center: [0.0, 0.0],
                radius,
                start_angle: 0.0,
                orientation: Orientation::CounterClockwise,
            },
            profile: ScaledPolynomial::constant_velocity(theta_f),
            kind: PathKind::ConstantAngularVelocity,
            duration,
            v_initial: 0.0,
            v_final: 0.0,
        })
    }

    /// Reflects an arc's sense of rotation about its start tangent line.
    pub fn turning(mut self, orientation: Orientation) -> Self {
        let start = self.start_position();
        let heading = self.start_tangent();
        match &mut self.geometry {
            Geometry::Arc { orientation: o, .. } if *o != orientation => {
                *o = orientation;
                self.at(start, heading)
            }
            _ => self,
        }
    }

    /// Moves the segment rigidly so that it starts at `start` heading along `heading`.
    pub fn at(mut self, start: Vec2, heading: Vec2) -> Self {
        let heading = heading.normalize();
        match &mut self.geometry {
            Geometry::Linear { origin, direction } => {
                *origin = [start.x, start.y];
                *direction = [heading.x, heading.y];
            }
            Geometry::Arc {
                center,
                radius,
                start_angle,
                orientation,
            } => {
                // Centre lies to the left of the heading for counter-clockwise motion.
                let left = Vec2::new(-heading.y, heading.x);
                let c = start + left * (*radius * orientation.sign());
                *center = [c.x, c.y];
                let r = start - c;
                *start_angle = r.y.atan2(r.x);
            }
        }
        self
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn profile(&self) -> &ScaledPolynomial {
        &self.profile
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Designed atom speed at the start.
    pub fn v_initial(&self) -> f64 {
        self.v_initial
    }

    /// Designed atom speed at the end; the tweezer keeps this speed afterwards.
    pub fn v_final(&self) -> f64 {
        self.v_final
    }

    /// Travel along the profile: metres for lines, radians for arcs.
    pub fn travel(&self) -> f64 {
        self.profile.value(1.0)
    }

    /// Arc length of the designed path.
    pub fn length(&self) -> f64 {
        match self.geometry {
            Geometry::Linear { .. } => self.travel().abs(),
            Geometry::Arc { radius, .. } => radius * self.travel().abs(),
        }
    }

    /// Position and its first four time derivatives of the designed atom path.
    pub fn atom_derivatives(&self, t: f64) -> [Vec2; 5] {
        let s = self.profile.time_derivatives(t, self.duration);
        match self.geometry {
            Geometry::Linear { origin, direction } => {
                let dir = Vec2::from(direction);
                let mut out = [Vec2::zeros(); 5];
                out[0] = Vec2::from(origin) + dir * s[0];
                for k in 1..5 {
                    out[k] = dir * s[k];
                }
                out
            }
            Geometry::Arc {
                center,
                radius,
                start_angle,
                orientation,
            } => arc_derivatives(Vec2::from(center), radius, start_angle + orientation.sign() * s[0], orientation.sign(), &s),
        }
    }

    pub fn atom(&self, t: f64) -> Kinematics {
        let d = self.atom_derivatives(t);
        Kinematics {
            position: d[0],
            velocity: d[1],
            acceleration: d[2],
        }
    }

    /// Tweezer kinematics realising this segment in a harmonic trap of frequency `omega`.
    pub fn tweezer(&self, t: f64, omega: f64) -> Kinematics {
        let d = self.atom_derivatives(t);
        if self.kind.is_sta() {
            let inv = 1.0 / (omega * omega);
            Kinematics {
                position: d[0] + d[2] * inv,
                velocity: d[1] + d[3] * inv,
                acceleration: d[2] + d[4] * inv,
            }
        } else {
            Kinematics {
                position: d[0],
                velocity: d[1],
                acceleration: d[2],
            }
        }
    }

    pub fn start_position(&self) -> Vec2 {
        self.atom_derivatives(0.0)[0]
    }

    pub fn end_position(&self) -> Vec2 {
        self.atom_derivatives(self.duration)[0]
    }

    /// Profile velocity at the start (left-open for abrupt profiles).
    pub fn start_velocity(&self) -> Vec2 {
        self.atom_derivatives(0.0)[1]
    }

    pub fn end_velocity(&self) -> Vec2 {
        self.atom_derivatives(self.duration)[1]
    }

    /// Unit direction of travel at the start, defined even at zero speed.
    pub fn start_tangent(&self) -> Vec2 {
        self.tangent_at(0.0)
    }

    pub fn end_tangent(&self) -> Vec2 {
        self.tangent_at(1.0)
    }

    fn tangent_at(&self, u: f64) -> Vec2 {
        let travel_sign = if self.travel() < 0.0 { -1.0 } else { 1.0 };
        match self.geometry {
            Geometry::Linear { direction, .. } => Vec2::from(direction) * travel_sign,
            Geometry::Arc {
                start_angle,
                orientation,
                ..
            } => {
                let phi = start_angle + orientation.sign() * self.profile.value(u);
                Vec2::new(-phi.sin(), phi.cos()) * (orientation.sign() * travel_sign)
            }
        }
    }

    /// Designed atom velocity vector at the start.
    pub fn designed_initial_velocity(&self) -> Vec2 {
        self.start_tangent() * self.v_initial
    }

    /// Tweezer velocity once the segment is over.
    pub fn terminal_velocity(&self) -> Vec2 {
        self.end_tangent() * self.v_final
    }

    /// The same motion run backwards from the end point.
    pub fn reversed(&self) -> Self {
        let travel = self.travel();
        let geometry = match self.geometry {
            Geometry::Linear { direction, .. } => {
                let end = self.end_position();
                Geometry::Linear {
                    origin: [end.x, end.y],
                    direction: [-direction[0], -direction[1]],
                }
            }
            Geometry::Arc {
                center,
                radius,
                start_angle,
                orientation,
            } => Geometry::Arc {
                center,
                radius,
                start_angle: start_angle + orientation.sign() * travel,
                orientation: orientation.flipped(),
            },
        };
        Self {
            geometry,
            profile: self.profile.reversed(),
            kind: self.kind,
            duration: self.duration,
            v_initial: self.v_final,
            v_final: self.v_initial,
        }
    }
}

/// Derivatives of `c + R exp(iφ(t))` from the time derivatives of the profile.
///
/// Uses the Taylor recurrence for the exponential of a power series:
/// with `g = iφ` and `E = exp(g)`, `e_k = (1/k) Σ_{j=1..k} j g_j e_{k-j}`.
fn arc_derivatives(center: Vec2, radius: f64, phi: f64, sign: f64, s: &[f64; 5]) -> [Vec2; 5] {
    let mut g = [Complex64::new(0.0, 0.0); 5];
    let mut factorial = 1.0;
    for k in 1..5 {
        factorial *= k as f64;
        g[k] = Complex64::new(0.0, sign * s[k] / factorial);
    }
    let mut e = [Complex64::new(0.0, 0.0); 5];
    e[0] = Complex64::from_polar(1.0, phi);
    for k in 1..5 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            acc += g[j] * e[k - j] * j as f64;
        }
        e[k] = acc / k as f64;
    }
    let mut out = [Vec2::zeros(); 5];
    let mut factorial = 1.0;
    for k in 0..5 {
        if k > 0 {
            factorial *= k as f64;
        }
        let z = e[k] * (radius * factorial);
        out[k] = Vec2::new(z.re, z.im);
    }
    out[0] += center;
    out
}
