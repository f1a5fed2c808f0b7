use super::{Kinematics, TweezerPath};
use crate::Vec2;

/// Tabulated tweezer motion, for export and for driving the integrator
/// from externally supplied waveforms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledPath {
    pub times: Vec<f64>,
    pub tweezer_position: Vec<Vec2>,
    pub tweezer_velocity: Vec<Vec2>,
    pub tweezer_acceleration: Vec<Vec2>,
    pub atom_design_position: Vec<Vec2>,
    terminal: Vec2,
    atom_start: (Vec2, Vec2),
}

impl SampledPath {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            tweezer_position: Vec::with_capacity(n),
            tweezer_velocity: Vec::with_capacity(n),
            tweezer_acceleration: Vec::with_capacity(n),
            atom_design_position: Vec::with_capacity(n),
            terminal: Vec2::zeros(),
            atom_start: (Vec2::zeros(), Vec2::zeros()),
        }
    }

    pub(crate) fn push(&mut self, t: f64, k: Kinematics, atom: Vec2) {
        self.times.push(t);
        self.tweezer_position.push(k.position);
        self.tweezer_velocity.push(k.velocity);
        self.tweezer_acceleration.push(k.acceleration);
        self.atom_design_position.push(atom);
    }

    pub(crate) fn set_terminal(&mut self, v: Vec2) {
        self.terminal = v;
    }

    pub(crate) fn set_atom_start(&mut self, position: Vec2, velocity: Vec2) {
        self.atom_start = (position, velocity);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column header matching [`SampledPath::rows`].
    pub const HEADER: [&'static str; 7] = ["t", "x_o", "y_o", "vx_o", "vy_o", "ax_o", "ay_o"];

    pub fn rows(&self) -> impl Iterator<Item = [f64; 7]> + '_ {
        (0..self.len()).map(move |i| {
            let p = self.tweezer_position[i];
            let v = self.tweezer_velocity[i];
            let a = self.tweezer_acceleration[i];
            [self.times[i], p.x, p.y, v.x, v.y, a.x, a.y]
        })
    }

    /// Quintic Hermite interpolation through position, velocity and
    /// acceleration samples.
    fn interpolate(&self, t: f64) -> Kinematics {
        let n = self.len();
        if t <= self.times[0] || n == 1 {
            return self.kinematics(0);
        }
        if t >= self.times[n - 1] {
            return self.kinematics(n - 1);
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let h = self.times[i + 1] - self.times[i];
        if h <= 0.0 {
            return self.kinematics(i);
        }
        let s = (t - self.times[i]) / h;
        let (p0, p1) = (self.tweezer_position[i], self.tweezer_position[i + 1]);
        let (v0, v1) = (self.tweezer_velocity[i] * h, self.tweezer_velocity[i + 1] * h);
        let (a0, a1) = (
            self.tweezer_acceleration[i] * (h * h),
            self.tweezer_acceleration[i + 1] * (h * h),
        );
        let [b, db, ddb] = hermite5(s);
        let pos = p0 * b[0] + v0 * b[1] + a0 * b[2] + a1 * b[3] + v1 * b[4] + p1 * b[5];
        let vel = (p0 * db[0] + v0 * db[1] + a0 * db[2] + a1 * db[3] + v1 * db[4] + p1 * db[5]) / h;
        let acc = (p0 * ddb[0] + v0 * ddb[1] + a0 * ddb[2] + a1 * ddb[3] + v1 * ddb[4] + p1 * ddb[5]) / (h * h);
        Kinematics {
            position: pos,
            velocity: vel,
            acceleration: acc,
        }
    }

    fn kinematics(&self, i: usize) -> Kinematics {
        Kinematics {
            position: self.tweezer_position[i],
            velocity: self.tweezer_velocity[i],
            acceleration: self.tweezer_acceleration[i],
        }
    }
}

/// Quintic Hermite basis on `[0, 1]` and its first two derivatives, ordered
/// as (p0, v0, a0, a1, v1, p1).
fn hermite5(s: f64) -> [[f64; 6]; 3] {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let b = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
    ];
    let db = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
    ];
    let ddb = [
        -60.0 * s + 180.0 * s2 - 120.0 * s3,
        -36.0 * s + 96.0 * s2 - 60.0 * s3,
        1.0 - 9.0 * s + 18.0 * s2 - 10.0 * s3,
        3.0 * s - 12.0 * s2 + 10.0 * s3,
        -24.0 * s + 84.0 * s2 - 60.0 * s3,
        60.0 * s - 180.0 * s2 + 120.0 * s3,
    ];
    [b, db, ddb]
}

impl TweezerPath for SampledPath {
    fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }

    fn tweezer(&self, t: f64) -> Kinematics {
        self.interpolate(t + self.times[0])
    }

    fn terminal_velocity(&self) -> Vec2 {
        self.terminal
    }

    fn atom_start(&self) -> (Vec2, Vec2) {
        self.atom_start
    }
}

/// Trap held at a fixed point for a while.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticTrap {
    pub position: Vec2,
    pub duration: f64,
}

impl StaticTrap {
    pub fn new(position: Vec2, duration: f64) -> Self {
        Self { position, duration }
    }
}

impl TweezerPath for StaticTrap {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn tweezer(&self, _t: f64) -> Kinematics {
        Kinematics::at_rest(self.position)
    }

    fn terminal_velocity(&self) -> Vec2 {
        Vec2::zeros()
    }

    fn atom_start(&self) -> (Vec2, Vec2) {
        (self.position, Vec2::zeros())
    }
}
