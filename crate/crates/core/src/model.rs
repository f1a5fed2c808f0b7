//! Physical constants, tweezer parameters and the trap potentials.
//!
//! Energies are stored in joules and lengths in metres. Helpers convert
//! to and from the millikelvin scale used by most tweezer experiments.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec2;

/// Mass of a ⁸⁷Rb atom (kg).
pub const RB87_MASS: f64 = 1.443_16e-25;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Relative slack allowed between a quoted trap frequency and the one
/// implied by depth and width.
pub const FREQUENCY_CONSISTENCY: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("gaussian waist {waist} m must exceed harmonic width {width} m")]
    WaistTooNarrow { waist: f64, width: f64 },
    #[error(
        "trap frequency {given:.4e} rad/s differs from sqrt(2 U0 / m d^2) = {derived:.4e} rad/s by more than 15%"
    )]
    InconsistentFrequency { given: f64, derived: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::NotPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    atom_mass: f64,
    hbar: f64,
    k_b: f64,
}

impl PhysicalConstants {
    pub fn new(atom_mass: f64, hbar: f64, k_b: f64) -> Result<Self, ModelError> {
        Ok(Self {
            atom_mass: positive("atom_mass", atom_mass)?,
            hbar: positive("hbar", hbar)?,
            k_b: positive("k_B", k_b)?,
        })
    }

    pub fn rubidium87() -> Self {
        Self {
            atom_mass: RB87_MASS,
            hbar: HBAR,
            k_b: BOLTZMANN,
        }
    }

    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    pub fn millikelvin_to_joule(&self, mk: f64) -> f64 {
        mk * 1e-3 * self.k_b
    }

    pub fn joule_to_millikelvin(&self, joule: f64) -> f64 {
        joule / self.k_b * 1e3
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::rubidium87()
    }
}

/// Depth, widths and frequency of one tweezer.
///
/// `omega0` is the quoted trap frequency. It is only required to agree with
/// `sqrt(2 U0 / m d^2)` to within [`FREQUENCY_CONSISTENCY`]; the dynamics use
/// the curvature of the potential itself (see [`TrapModel::omega`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    constants: PhysicalConstants,
    depth: f64,
    width: f64,
    waist: f64,
    omega0: f64,
}

impl TrapParams {
    pub fn new(
        constants: PhysicalConstants,
        depth: f64,
        width: f64,
        waist: f64,
        omega0: f64,
    ) -> Result<Self, ModelError> {
        let params = Self {
            constants,
            depth: positive("depth", depth)?,
            width: positive("width", width)?,
            waist: positive("waist", waist)?,
            omega0: positive("omega0", omega0)?,
        };
        if waist <= width {
            return Err(ModelError::WaistTooNarrow { waist, width });
        }
        let derived = params.derived_frequency();
        if ((omega0 - derived) / derived).abs() > FREQUENCY_CONSISTENCY {
            return Err(ModelError::InconsistentFrequency { given: omega0, derived });
        }
        Ok(params)
    }

    /// Parameters with `omega0 = sqrt(2 U0 / m d^2)` and `d_G = sqrt(2) d`.
    pub fn from_depth_and_width(
        constants: PhysicalConstants,
        depth: f64,
        width: f64,
    ) -> Result<Self, ModelError> {
        let depth = positive("depth", depth)?;
        let width = positive("width", width)?;
        let omega0 = (2.0 * depth / (constants.atom_mass * width * width)).sqrt();
        Self::new(constants, depth, width, SQRT_2 * width, omega0)
    }

    /// U0 = 0.8 mK, d = 0.73 μm, ω0 = 2π·90 kHz, d_G = √2·d, ⁸⁷Rb.
    pub fn nominal() -> Self {
        let constants = PhysicalConstants::rubidium87();
        let width = 0.73e-6;
        Self::new(
            constants,
            constants.millikelvin_to_joule(0.8),
            width,
            SQRT_2 * width,
            2.0 * PI * 90e3,
        )
        .expect("default tweezer parameters are consistent")
    }

    /// Keeps depth and quoted frequency, and re-derives the widths so that
    /// `omega0 = sqrt(2 U0 / m d^2)` holds exactly.
    pub fn frequency_consistent(&self) -> Self {
        let width = (2.0 * self.depth / (self.constants.atom_mass * self.omega0 * self.omega0)).sqrt();
        let ratio = self.waist / self.width;
        Self {
            width,
            waist: ratio * width,
            ..*self
        }
    }

    /// Same geometry with a different depth. The quoted frequency follows
    /// the `sqrt(depth)` scaling of a fixed-shape potential.
    pub fn with_depth(&self, depth: f64) -> Self {
        let scale = (depth / self.depth).sqrt();
        Self {
            depth,
            omega0: self.omega0 * scale,
            ..*self
        }
    }

    pub fn with_waist(&self, waist: f64) -> Result<Self, ModelError> {
        Self::new(self.constants, self.depth, self.width, waist, self.omega0)
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn mass(&self) -> f64 {
        self.constants.atom_mass
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn depth_mk(&self) -> f64 {
        self.constants.joule_to_millikelvin(self.depth)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// `sqrt(2 U0 / (m d^2))`.
    pub fn derived_frequency(&self) -> f64 {
        (2.0 * self.depth / (self.mass() * self.width * self.width)).sqrt()
    }

    /// Small-displacement frequency of the Gaussian profile, `sqrt(4 U0 / (m d_G^2))`.
    pub fn gaussian_frequency(&self) -> f64 {
        (4.0 * self.depth / (self.mass() * self.waist * self.waist)).sqrt()
    }

    /// Largest restoring acceleration of the truncated harmonic trap, `U0 / (m d)`.
    pub fn max_acceleration(&self) -> f64 {
        self.depth / (self.mass() * self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapKind {
    TruncatedHarmonic,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapModel {
    kind: TrapKind,
    params: TrapParams,
}

impl TrapModel {
    pub fn new(kind: TrapKind, params: TrapParams) -> Self {
        Self { kind, params }
    }

    pub fn harmonic(params: TrapParams) -> Self {
        Self::new(TrapKind::TruncatedHarmonic, params)
    }

    pub fn gaussian(params: TrapParams) -> Self {
        Self::new(TrapKind::Gaussian, params)
    }

    pub fn kind(&self) -> TrapKind {
        self.kind
    }

    pub fn params(&self) -> &TrapParams {
        &self.params
    }

    pub fn depth(&self) -> f64 {
        self.params.depth
    }

    pub fn mass(&self) -> f64 {
        self.params.mass()
    }

    /// The same potential shape at a different depth.
    pub fn with_depth(&self, depth: f64) -> Self {
        Self {
            params: self.params.with_depth(depth),
            ..*self
        }
    }

    /// Potential energy at displacement `xi` from the trap centre.
    pub fn potential(&self, xi: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            TrapKind::TruncatedHarmonic => {
                let a = xi.abs();
                if a < p.width {
                    p.depth * (a - p.width) * (a + p.width) / (p.width * p.width)
                } else {
                    0.0
                }
            }
            TrapKind::Gaussian => -p.depth * (-2.0 * xi * xi / (p.waist * p.waist)).exp(),
        }
    }

    /// Force along a one-dimensional displacement, `-dU/dξ`.
    pub fn force(&self, xi: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            TrapKind::TruncatedHarmonic => {
                if xi.abs() < p.width {
                    -2.0 * p.depth * xi / (p.width * p.width)
                } else {
                    0.0
                }
            }
            TrapKind::Gaussian => {
                let w2 = p.waist * p.waist;
                -(4.0 * p.depth / w2) * xi * (-2.0 * xi * xi / w2).exp()
            }
        }
    }

    /// Radially symmetric potential in the transport plane.
    pub fn potential_at(&self, xi: &Vec2) -> f64 {
        self.potential(xi.norm())
    }

    /// Radially symmetric force in the transport plane.
    pub fn force_at(&self, xi: &Vec2) -> Vec2 {
        let p = &self.params;
        let r2 = xi.norm_squared();
        match self.kind {
            TrapKind::TruncatedHarmonic => {
                if r2 < p.width * p.width {
                    xi * (-2.0 * p.depth / (p.width * p.width))
                } else {
                    Vec2::zeros()
                }
            }
            TrapKind::Gaussian => {
                let w2 = p.waist * p.waist;
                xi * (-(4.0 * p.depth / w2) * (-2.0 * r2 / w2).exp())
            }
        }
    }

    /// Displacement beyond which the atom counts as lost.
    pub fn escape_radius(&self) -> f64 {
        match self.kind {
            TrapKind::TruncatedHarmonic => self.params.width,
            TrapKind::Gaussian => self.params.waist,
        }
    }

    /// Harmonic frequency set by the curvature at the trap bottom.
    pub fn omega(&self) -> f64 {
        match self.kind {
            TrapKind::TruncatedHarmonic => self.params.derived_frequency(),
            TrapKind::Gaussian => self.params.gaussian_frequency(),
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }
}
