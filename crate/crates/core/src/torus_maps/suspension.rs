use std::f64::consts::TAU;

use crate::circle_maps::CircleLift;
use crate::error::{Error, Result};
use crate::metric::{frac, split};

/// Time-`g̃₁` map of the suspension flow of `g₂`, written in a global chart.
///
/// The suspension is `ℝ × 𝕋` modulo `(s + 1, x) ~ (s, g₂(x))`. The chart
/// `(s, x) ↦ (s, H_s(x))` with `H_s = (1 − σ(s))·id + σ(s)·g̃₂` identifies it
/// with `𝕋²`; `σ(s) = s − (a/2π)·sin(2πs)` is a warped time profile that
/// keeps the rigid/rigid case from collapsing to a translation.
#[derive(Clone, Debug)]
pub struct Suspension {
    base: CircleLift,
    fiber: CircleLift,
    warp: f64,
}

impl Suspension {
    pub const DEFAULT_WARP: f64 = 0.5;

    pub fn new(base: CircleLift, fiber: CircleLift, warp: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&warp) {
            return Err(Error::InvalidTorusMap(format!("warp {warp} must lie in [0, 1)")));
        }
        Ok(Self { base, fiber, warp })
    }

    pub fn base(&self) -> &CircleLift {
        &self.base
    }

    pub fn fiber(&self) -> &CircleLift {
        &self.fiber
    }

    pub fn warp(&self) -> f64 {
        self.warp
    }

    fn profile(&self, s: f64) -> f64 {
        s - self.warp / TAU * (TAU * s).sin()
    }

    /// Chart from quotient coordinates `(s, x)`, `s ∈ [0,1)`, to the torus.
    pub fn chart(&self, s: f64, x: f64) -> [f64; 2] {
        [s, self.fiber.interpolate(self.profile(s), x)]
    }

    /// Inverse chart on the lift: `(t, y) ↦ (t, x)` with `H_{frac t}(x) = y`.
    pub fn chart_inverse(&self, t: f64, y: f64) -> [f64; 2] {
        [t, self.fiber.interpolate_inverse(self.profile(frac(t)), y)]
    }

    /// The map in quotient coordinates on the fundamental domain:
    /// `(u, x) ↦ (frac(g̃₁(u)), g₂^{⌊g̃₁(u)⌋}(x))`.
    pub fn eval_quotient(&self, u: f64, x: f64) -> [f64; 2] {
        let (m, s) = split(self.base.eval(u));
        [s, self.fiber.iterate(x, m)]
    }

    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        let (i, u) = split(z[0]);
        let x = self.fiber.interpolate_inverse(self.profile(u), z[1]);
        let s = self.base.eval(u);
        let (m, r) = split(s);
        let x = self.fiber.iterate(x, m);
        [i as f64 + s, self.fiber.interpolate(self.profile(r), x)]
    }

    pub fn eval_inverse(&self, z: [f64; 2]) -> [f64; 2] {
        let (i, u) = split(z[0]);
        let x = self.fiber.interpolate_inverse(self.profile(u), z[1]);
        let s = self.base.eval_inverse(u);
        let (m, r) = split(s);
        let x = self.fiber.iterate(x, m);
        [i as f64 + s, self.fiber.interpolate(self.profile(r), x)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_maps::GeometricSchedule;
    use crate::metric::circle_dist;
    use crate::{GOLDEN, SILVER};

    fn examples() -> Vec<Suspension> {
        let denjoy = || CircleLift::denjoy(SILVER, &GeometricSchedule::default(), 12).unwrap();
        vec![
            Suspension::new(CircleLift::rigid(GOLDEN).unwrap(), CircleLift::rigid(SILVER).unwrap(), 0.5)
                .unwrap(),
            Suspension::new(CircleLift::rigid(GOLDEN).unwrap(), denjoy(), 0.5).unwrap(),
            Suspension::new(
                CircleLift::denjoy(GOLDEN, &GeometricSchedule::default(), 12).unwrap(),
                denjoy(),
                0.3,
            )
            .unwrap(),
        ]
    }

    #[test]
    fn chart_conjugates_quotient_formula() {
        for map in examples() {
            for i in 0..500 {
                let u = (i as f64 * GOLDEN).fract();
                let x = (i as f64 * 0.754_877_666).fract();
                let z = map.eval(map.chart(u, x));
                let back = map.chart_inverse(z[0], z[1]);
                let q = map.eval_quotient(u, x);
                assert!(circle_dist(back[0], q[0]) < 1e-10);
                assert!(circle_dist(back[1], q[1]) < 1e-10);
            }
        }
    }

    #[test]
    fn quotient_matches_relation_unwinding() {
        for map in examples() {
            for i in 0..1000 {
                let u = (i as f64 * 0.377_123_456).fract();
                let x = (i as f64 * GOLDEN).fract();
                // Walk the flow coordinate back into [0,1) one identification at a time.
                let mut s = map.base.eval(u);
                let mut y = x;
                while s >= 1.0 {
                    s -= 1.0;
                    y = map.fiber.eval(y);
                }
                while s < 0.0 {
                    s += 1.0;
                    y = map.fiber.eval_inverse(y);
                }
                let q = map.eval_quotient(u, x);
                assert!(circle_dist(q[0], s) < 1e-10 && circle_dist(q[1], y) < 1e-10);
            }
        }
    }

    #[test]
    fn lift_is_continuous_and_invertible() {
        for map in examples() {
            for i in 0..1000 {
                let z = [-3.0 + i as f64 * 0.00731, -2.0 + i as f64 * 0.0129];
                let w = map.eval(z);
                let back = map.eval_inverse(w);
                assert!((back[0] - z[0]).abs() < 1e-8 && (back[1] - z[1]).abs() < 1e-8);
                let h = 1e-9;
                let wt = map.eval([z[0] + h, z[1]]);
                assert!((wt[0] - w[0]).abs() < 1e-5 && (wt[1] - w[1]).abs() < 1e-5);
            }
            // Across the seam t ∈ ℤ.
            for y in [0.1, 0.55, 0.9] {
                let a = map.eval([1.0 - 1e-12, y]);
                let b = map.eval([1.0, y]);
                assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
            }
        }
    }
}
