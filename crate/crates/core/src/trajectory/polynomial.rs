use serde::{Deserialize, Serialize};

/// Quintic `p(u) = Σ c_k u^k` in scaled time `u = t / t_f`.
///
/// The value carries the unit of the travelled coordinate (metres along a
/// line, radians along an arc). Time derivatives follow from
/// `d^k p / dt^k = t_f^-k · d^k p / du^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPolynomial {
    coeffs: [f64; 6],
}

impl ScaledPolynomial {
    pub fn new(coeffs: [f64; 6]) -> Self {
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[f64; 6] {
        &self.coeffs
    }

    /// Inverse-engineered transport profile with zero end accelerations.
    pub fn sta(distance: f64, duration: f64, v_initial: f64, v_final: f64) -> Self {
        let vi = v_initial * duration;
        let vf = v_final * duration;
        Self::new([
            0.0,
            vi,
            0.0,
            10.0 * distance - 6.0 * vi - 4.0 * vf,
            -(15.0 * distance - 8.0 * vi - 7.0 * vf),
            6.0 * distance - 3.0 * vi - 3.0 * vf,
        ])
    }

    /// Rotation angle of an arc transport at fixed radius, written directly
    /// in terms of the angular boundary conditions.
    pub fn sta_angle(radius: f64, theta_f: f64, duration: f64, v_initial: f64, v_final: f64) -> Self {
        let a = v_initial * duration / radius;
        let b = v_final * duration / radius;
        Self::new([
            0.0,
            a,
            0.0,
            -(6.0 * a + 4.0 * b - 10.0 * theta_f),
            8.0 * a + 7.0 * b - 15.0 * theta_f,
            -(3.0 * a + 3.0 * b - 6.0 * theta_f),
        ])
    }

    pub fn constant_velocity(distance: f64) -> Self {
        Self::new([0.0, distance, 0.0, 0.0, 0.0, 0.0])
    }

    pub fn constant_jerk(distance: f64) -> Self {
        Self::new([0.0, 0.0, 3.0 * distance, -2.0 * distance, 0.0, 0.0])
    }

    pub fn value(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// All six derivatives with respect to `u`, from order 0 to 5.
    pub fn derivatives(&self, u: f64) -> [f64; 6] {
        let mut out = [0.0; 6];
        let mut c = self.coeffs;
        for slot in out.iter_mut() {
            *slot = c.iter().rev().fold(0.0, |acc, k| acc * u + k);
            for k in 1..6 {
                c[k - 1] = c[k] * k as f64;
            }
            c[5] = 0.0;
        }
        out
    }

    /// Time derivatives of order 0 through 4 for a segment of length `duration`.
    pub fn time_derivatives(&self, t: f64, duration: f64) -> [f64; 5] {
        let d = self.derivatives(t / duration);
        let mut out = [0.0; 5];
        let mut scale = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = d[k] * scale;
            scale /= duration;
        }
        out
    }

    /// `q(u) = p(1) - p(1 - u)`, the same motion traversed backwards.
    pub fn reversed(&self) -> Self {
        let d = self.derivatives(1.0);
        let mut coeffs = [0.0; 6];
        let mut factorial = 1.0;
        for k in 1..6 {
            factorial *= k as f64;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            coeffs[k] = sign * d[k] / factorial;
        }
        Self::new(coeffs)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}
