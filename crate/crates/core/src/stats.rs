//! Small statistics helpers shared by the ensemble and thermometry code.

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp so that rounding never excludes the point estimate.
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}
