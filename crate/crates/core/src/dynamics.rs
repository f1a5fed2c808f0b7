//! Classical motion of one atom in a moving tweezer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TrapModel;
use crate::trajectory::TweezerPath;
use crate::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step {dt} s exceeds the limit {limit} s")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("path duration must be positive, got {0}")]
    EmptyPath(f64),
    #[error("state became non-finite at t = {time} s")]
    NonFinite { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl AtomState {
    pub fn new(position: Vec2, velocity: Vec2) -> Self {
        Self { position, velocity }
    }

    pub fn at_rest(position: Vec2) -> Self {
        Self::new(position, Vec2::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Keep every `decimation`-th step in the recorded trajectory; 0 disables recording.
    pub decimation: usize,
}

impl IntegratorConfig {
    /// Largest allowed step for a run of `duration` in a trap of frequency `omega`.
    pub fn max_step(duration: f64, omega: f64) -> f64 {
        (duration / 4096.0).min(2.0 * PI / (256.0 * omega))
    }

    /// Largest allowed step, without recording.
    pub fn for_duration(duration: f64, omega: f64) -> Self {
        Self {
            dt: Self::max_step(duration, omega),
            decimation: 0,
        }
    }

    pub fn recording(mut self, decimation: usize) -> Self {
        self.decimation = decimation;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Loss {
    /// Displacement passed the escape radius during transport.
    Escaped { time: f64 },
    /// Stayed within the escape radius but ended with energy above the depth.
    Unbound { energy: f64 },
}

/// One recorded integrator step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub atom: Vec2,
    pub tweezer: Vec2,
    pub xi: f64,
    /// Co-moving energy relative to the trap bottom.
    pub energy: f64,
}

impl TrajectoryPoint {
    pub const HEADER: [&'static str; 7] = ["t", "x", "y", "x_o", "y_o", "xi", "energy"];

    pub fn row(&self) -> [f64; 7] {
        [self.t, self.atom.x, self.atom.y, self.tweezer.x, self.tweezer.y, self.xi, self.energy]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportOutcome {
    pub success: bool,
    pub loss: Option<Loss>,
    pub xi_max: f64,
    /// Co-moving energy offset by the depth, in `[0, U)` when trapped.
    pub final_energy: Option<f64>,
    /// Position and velocity relative to the trap at the end.
    pub final_relative: AtomState,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl TransportOutcome {
    pub fn escape_time(&self) -> Option<f64> {
        match self.loss {
            Some(Loss::Escaped { time }) => Some(time),
            _ => None,
        }
    }
}

/// One classical fourth-order Runge-Kutta step of `m ẍ = F(x − x_o(t))`.
pub fn rk4_step<P: TweezerPath + ?Sized>(model: &TrapModel, path: &P, t: f64, s: &AtomState, dt: f64) -> AtomState {
    let inv_m = 1.0 / model.mass();
    let acc = |time: f64, x: &Vec2| model.force_at(&(x - path.tweezer(time).position)) * inv_m;
    let h = 0.5 * dt;
    let k1x = s.velocity;
    let k1v = acc(t, &s.position);
    let k2x = s.velocity + k1v * h;
    let k2v = acc(t + h, &(s.position + k1x * h));
    let k3x = s.velocity + k2v * h;
    let k3v = acc(t + h, &(s.position + k2x * h));
    let k4x = s.velocity + k3v * dt;
    let k4v = acc(t + dt, &(s.position + k3x * dt));
    AtomState {
        position: s.position + (k1x + (k2x + k3x) * 2.0 + k4x) * (dt / 6.0),
        velocity: s.velocity + (k1v + (k2v + k3v) * 2.0 + k4v) * (dt / 6.0),
    }
}

/// Runs the atom over `[0, T]` with `n` equal steps, no checks.
pub fn propagate<P: TweezerPath + ?Sized>(model: &TrapModel, path: &P, initial: AtomState, steps: usize) -> AtomState {
    let dt = path.duration() / steps as f64;
    let mut s = initial;
    for k in 0..steps {
        s = rk4_step(model, path, k as f64 * dt, &s, dt);
    }
    s
}

fn co_moving_energy(model: &TrapModel, xi: &Vec2, relative_velocity: &Vec2) -> f64 {
    0.5 * model.mass() * relative_velocity.norm_squared() + model.potential_at(xi) + model.depth()
}

/// Integrates the atom along the path, stopping at the first escape.
pub fn integrate<P: TweezerPath + ?Sized>(
    model: &TrapModel,
    path: &P,
    initial: AtomState,
    cfg: &IntegratorConfig,
) -> Result<TransportOutcome, DynamicsError> {
    let duration = path.duration();
    if !(duration > 0.0) {
        return Err(DynamicsError::EmptyPath(duration));
    }
    let limit = IntegratorConfig::max_step(duration, model.omega());
    if !(cfg.dt > 0.0) || cfg.dt > limit * (1.0 + 1e-12) {
        return Err(DynamicsError::StepTooLarge { dt: cfg.dt, limit });
    }
    let steps = (duration / cfg.dt).ceil() as usize;
    let dt = duration / steps as f64;
    let radius = model.escape_radius();

    let mut s = initial;
    let mut trajectory = Vec::new();
    let record = |t: f64, s: &AtomState, out: &mut Vec<TrajectoryPoint>| {
        let k = path.tweezer(t);
        let xi = s.position - k.position;
        out.push(TrajectoryPoint {
            t,
            atom: s.position,
            tweezer: k.position,
            xi: xi.norm(),
            energy: co_moving_energy(model, &xi, &(s.velocity - k.velocity)),
        });
    };
    if cfg.decimation > 0 {
        record(0.0, &s, &mut trajectory);
    }

    let mut xi_max = (s.position - path.tweezer(0.0).position).norm();
    if xi_max > radius {
        return Ok(lost(Loss::Escaped { time: 0.0 }, xi_max, &s, path, 0.0, trajectory));
    }
    for k in 0..steps {
        let t = k as f64 * dt;
        s = rk4_step(model, path, t, &s, dt);
        let t_next = (k + 1) as f64 * dt;
        if !s.is_finite() {
            return Err(DynamicsError::NonFinite { time: t_next });
        }
        let xi = (s.position - path.tweezer(t_next).position).norm();
        xi_max = xi_max.max(xi);
        if cfg.decimation > 0 && ((k + 1) % cfg.decimation == 0 || k + 1 == steps) {
            record(t_next, &s, &mut trajectory);
        }
        if xi > radius {
            if cfg.decimation > 0 && (k + 1) % cfg.decimation != 0 && k + 1 != steps {
                record(t_next, &s, &mut trajectory);
            }
            return Ok(lost(Loss::Escaped { time: t_next }, xi_max, &s, path, t_next, trajectory));
        }
    }

    let end = path.tweezer(duration).position;
    let xi = s.position - end;
    let rel_v = s.velocity - path.terminal_velocity();
    let energy = co_moving_energy(model, &xi, &rel_v);
    let final_relative = AtomState::new(xi, rel_v);
    if energy >= model.depth() {
        return Ok(TransportOutcome {
            success: false,
            loss: Some(Loss::Unbound { energy }),
            xi_max,
            final_energy: None,
            final_relative,
            trajectory,
        });
    }
    Ok(TransportOutcome {
        success: true,
        loss: None,
        xi_max,
        final_energy: Some(energy),
        final_relative,
        trajectory,
    })
}

fn lost<P: TweezerPath + ?Sized>(
    loss: Loss,
    xi_max: f64,
    s: &AtomState,
    path: &P,
    t: f64,
    trajectory: Vec<TrajectoryPoint>,
) -> TransportOutcome {
    let k = path.tweezer(t);
    TransportOutcome {
        success: false,
        loss: Some(loss),
        xi_max,
        final_energy: None,
        final_relative: AtomState::new(s.position - k.position, s.velocity - k.velocity),
        trajectory,
    }
}

/// Per-sample displacement `|x − x_o|` of a recorded run.
pub fn displacement_series(outcome: &TransportOutcome) -> Vec<(f64, f64)> {
    outcome.trajectory.iter().map(|p| (p.t, p.xi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TrapParams;
    use crate::trajectory::StaticTrap;

    #[test]
    fn atom_at_rest_in_static_trap_stays_put() {
        let model = TrapModel::gaussian(TrapParams::nominal());
        let path = StaticTrap::new(Vec2::new(1e-6, -2e-6), 20e-6);
        let cfg = IntegratorConfig::for_duration(path.duration, model.omega());
        let out = integrate(&model, &path, AtomState::at_rest(path.position), &cfg).unwrap();
        assert!(out.success);
        assert_eq!(out.xi_max, 0.0);
        assert_eq!(out.final_energy, Some(0.0));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let model = TrapModel::harmonic(TrapParams::nominal());
        let path = StaticTrap::new(Vec2::zeros(), 1e-4);
        let cfg = IntegratorConfig {
            dt: 1e-7,
            decimation: 0,
        };
        assert!(matches!(
            integrate(&model, &path, AtomState::at_rest(Vec2::zeros()), &cfg),
            Err(DynamicsError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn fast_atom_escapes_and_reports_time() {
        let model = TrapModel::harmonic(TrapParams::nominal());
        let path = StaticTrap::new(Vec2::zeros(), 10e-6);
        let cfg = IntegratorConfig::for_duration(path.duration, model.omega()).recording(10);
        let out = integrate(&model, &path, AtomState::new(Vec2::zeros(), Vec2::new(1.0, 0.0)), &cfg).unwrap();
        assert!(!out.success);
        let t = out.escape_time().unwrap();
        // Beyond the harmonic edge the atom drifts at ~0.78 m/s.
        assert!(t > 0.0 && t < 2e-6, "{t}");
        assert!(out.xi_max > model.escape_radius());
        assert!(out.trajectory.last().unwrap().xi > model.escape_radius());
    }
}
