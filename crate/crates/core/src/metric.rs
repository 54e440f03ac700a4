//! Reductions mod 1 and the distances used throughout.

/// Representative of `x` mod 1 in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Integer part and fractional part with `x = k + u`, `u ∈ [0, 1)`.
#[inline]
pub fn split(x: f64) -> (i64, f64) {
    let k = x.floor();
    let u = x - k;
    if u >= 1.0 {
        (k as i64 + 1, 0.0)
    } else {
        (k as i64, u)
    }
}

/// Representative of `x` mod 1 in `[-1/2, 1/2)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    frac(x + 0.5) - 0.5
}

/// Distance on the circle `ℝ/ℤ`.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

/// Euclidean distance on `𝕋²` between nearest representatives.
#[inline]
pub fn torus_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    wrap(a[0] - b[0]).hypot(wrap(a[1] - b[1]))
}

/// Distance on the annulus `𝕋 × ℝ`.
#[inline]
pub fn annulus_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    wrap(a[0] - b[0]).hypot(a[1] - b[1])
}

#[inline]
pub fn reduce_torus(z: [f64; 2]) -> [f64; 2] {
    [frac(z[0]), frac(z[1])]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_stays_in_unit_interval() {
        assert_eq!(frac(-1e-20), 0.0);
        assert_eq!(frac(3.25), 0.25);
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(split(-2.5), (-3, 0.5));
    }

    #[test]
    fn wrap_and_distances() {
        assert!((wrap(0.75) + 0.25).abs() < 1e-15);
        assert_eq!(wrap(0.5), -0.5);
        assert!((circle_dist(0.95, 0.05) - 0.1).abs() < 1e-15);
        assert!((torus_dist([0.95, 0.0], [0.05, 0.0]) - 0.1).abs() < 1e-15);
        assert!((annulus_dist([0.95, 3.0], [0.05, 3.0]) - 0.1).abs() < 1e-15);
    }
}
