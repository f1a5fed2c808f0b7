//! Shortcut-to-adiabaticity transport of single atoms in optical tweezers.
//!
//! The crate synthesises quintic atom paths and the tweezer motion that
//! realises them, integrates classical atom dynamics in harmonic and
//! Gaussian traps, runs thermal Monte Carlo ensembles, estimates
//! vibrational heating and fits release-recapture style temperatures.

pub mod dynamics;
pub mod heating;
pub mod model;
pub mod montecarlo;
pub mod stats;
pub mod thermometry;
pub mod trajectory;

/// Vector in the transport plane.
pub type Vec2 = nalgebra::Vector2<f64>;
