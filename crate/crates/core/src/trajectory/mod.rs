//! Atom and tweezer paths: quintic STA legs along lines and arcs, the
//! constant-velocity, constant-jerk and constant-angular baselines, and
//! their concatenation.

mod composite;
mod polynomial;
mod sampled;
mod segment;

use thiserror::Error;

use crate::Vec2;

pub use composite::{CompositePath, DesignedPath, JunctionKind};
pub use polynomial::ScaledPolynomial;
pub use sampled::{SampledPath, StaticTrap};
pub use segment::{BoundaryConditions, Geometry, Orientation, PathKind, PathSegment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must not be negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("a path needs at least one segment")]
    Empty,
    #[error("junction {index} has a {kind} discontinuity")]
    JunctionMismatch { index: usize, kind: JunctionKind },
    #[error("at least {min} samples per segment are required, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

/// Position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub position: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

impl Kinematics {
    pub fn at_rest(position: Vec2) -> Self {
        Self {
            position,
            velocity: Vec2::zeros(),
            acceleration: Vec2::zeros(),
        }
    }
}

/// Anything that moves the trap centre over a finite time window.
pub trait TweezerPath: Sync {
    fn duration(&self) -> f64;

    /// Trap-centre kinematics at time `t` in `[0, duration]`.
    fn tweezer(&self, t: f64) -> Kinematics;

    /// Trap velocity after the path ends, used for the co-moving energy.
    fn terminal_velocity(&self) -> Vec2;

    /// Designed atom position and velocity at `t = 0`.
    fn atom_start(&self) -> (Vec2, Vec2);
}
