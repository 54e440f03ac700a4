use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{frac, torus_dist, wrap};

/// Fiber geometry of the blow-up along the orbit of a short segment of
/// irrational slope under a rigid rotation.
#[derive(Clone, Debug, Serialize)]
pub struct SurgeryGeometry {
    pub alpha: [f64; 2],
    pub slope: f64,
    /// Euclidean half-length of the segment.
    pub delta: f64,
    pub n_scan: usize,
    /// Smallest slack `distance − needed` seen by the disjointness scan.
    pub scan_margin: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiameterRow {
    pub n: i64,
    pub fiber_half_width: f64,
    pub diameter: f64,
}

impl SurgeryGeometry {
    /// Unit vector along the segment.
    pub fn direction(&self) -> [f64; 2] {
        let norm = self.slope.hypot(1.0);
        [1.0 / norm, self.slope / norm]
    }

    /// `T_αⁿ(0)`.
    pub fn orbit_point(&self, n: i64) -> [f64; 2] {
        [frac(n as f64 * self.alpha[0]), frac(n as f64 * self.alpha[1])]
    }

    /// Point at signed arclength `t` along the `n`-th translate.
    pub fn segment_point(&self, n: i64, t: f64) -> [f64; 2] {
        let c = self.orbit_point(n);
        let e = self.direction();
        [frac(c[0] + t * e[0]), frac(c[1] + t * e[1])]
    }

    /// `δ_n(z) = 2^{−|n|−10}(δ − d(z, T_αⁿ(0)))`, clamped at 0 off the segment.
    pub fn fiber_half_width(&self, n: i64, z: [f64; 2]) -> f64 {
        scale(n) * (self.delta - torus_dist(z, self.orbit_point(n))).max(0.0)
    }

    /// Largest Euclidean half-width of the `n`-th blown-up domain; its fibers
    /// run along `(−γ, 1)`, so parameter `t` has length `t·√(1+γ²)`.
    pub fn max_fiber_extent(&self, n: i64) -> f64 {
        scale(n) * self.delta * self.slope.hypot(1.0)
    }

    /// The `n`-th domain is the open rhombus with tips at the segment ends
    /// and width `2·max_fiber_extent(n)` across the middle; its diameter is
    /// the longer diagonal.
    pub fn diameter(&self, n: i64) -> f64 {
        let half = self.max_fiber_extent(n);
        (2.0 * self.delta).max(2.0 * half)
    }

    pub fn diameter_table(&self, n_max: i64) -> Vec<DiameterRow> {
        (-n_max..=n_max)
            .map(|n| DiameterRow {
                n,
                fiber_half_width: self.fiber_half_width(n, self.orbit_point(n)),
                diameter: self.diameter(n),
            })
            .collect()
    }
}

fn scale(n: i64) -> f64 {
    2f64.powi(-(n.unsigned_abs().min(1000) as i32) - 10)
}

/// Distance on the torus between the segment and its `n`-th translate.
fn segment_distance(alpha: [f64; 2], e: [f64; 2], delta: f64, n: i64) -> f64 {
    let c = [wrap(n as f64 * alpha[0]), wrap(n as f64 * alpha[1])];
    let mut best = f64::INFINITY;
    for kx in -1..=1 {
        for ky in -1..=1 {
            let d = [c[0] + kx as f64, c[1] + ky as f64];
            let along = d[0] * e[0] + d[1] * e[1];
            let across = (d[0] * e[1] - d[1] * e[0]).abs();
            let gap = (along.abs() - 2.0 * delta).max(0.0);
            best = best.min(across.hypot(gap));
        }
    }
    best
}

/// Builds the geometry after checking that the segment's translates for
/// `0 < |n| ≤ n_scan` stay farther from it than the two blown-up half-widths.
pub fn surgery_geometry(alpha: [f64; 2], slope: f64, delta: f64, n_scan: usize) -> Result<SurgeryGeometry> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::InvalidParameter(format!("segment half-length {delta} not in (0, 1/4)")));
    }
    if !slope.is_finite() {
        return Err(Error::InvalidParameter("slope must be finite".into()));
    }
    let mut geometry = SurgeryGeometry { alpha, slope, delta, n_scan, scan_margin: f64::INFINITY };
    let e = geometry.direction();
    for n in 1..=n_scan as i64 {
        for m in [n, -n] {
            let needed = geometry.max_fiber_extent(0) + geometry.max_fiber_extent(m);
            let margin = segment_distance(alpha, e, delta, m) - needed;
            if margin <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "δ = {delta} too large: translate n = {m} meets the segment"
                )));
            }
            geometry.scan_margin = geometry.scan_margin.min(margin);
        }
    }
    Ok(geometry)
}

/// Largest `δ` (to relative precision 1e-6) passing the disjointness scan.
pub fn max_disjoint_delta(alpha: [f64; 2], slope: f64, n_scan: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.25);
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if surgery_geometry(alpha, slope, mid, n_scan).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GOLDEN, SILVER};

    fn sample() -> SurgeryGeometry {
        surgery_geometry([GOLDEN, SILVER], 3f64.sqrt(), 0.01, 200).unwrap()
    }

    #[test]
    fn fiber_width_at_orbit_points_is_exact() {
        let g = sample();
        for n in -50..=50 {
            let w = g.fiber_half_width(n, g.orbit_point(n));
            assert_eq!(w, 0.01 * 2f64.powi(-(n.abs() as i32) - 10));
        }
    }

    #[test]
    fn fiber_width_vanishes_at_segment_ends_and_is_bounded() {
        let g = sample();
        for n in [-7, 0, 3, 40] {
            for sign in [-1.0, 1.0] {
                let end = g.segment_point(n, sign * g.delta);
                assert!(g.fiber_half_width(n, end) <= 1e-15 * scale(n));
            }
            for k in 0..=100 {
                let t = g.delta * (k as f64 / 50.0 - 1.0);
                let w = g.fiber_half_width(n, g.segment_point(n, t));
                assert!(w >= 0.0 && w <= scale(n) * g.delta);
            }
        }
    }

    #[test]
    fn diameters_are_constant() {
        let g = sample();
        assert!(g.diameter_table(50).iter().all(|row| row.diameter == 2.0 * g.delta));
    }

    #[test]
    fn oversized_segment_is_rejected() {
        let d0 = max_disjoint_delta([GOLDEN, SILVER], 3f64.sqrt(), 1000);
        assert!(d0 > 0.01 && d0 < 0.2);
        let err = surgery_geometry([GOLDEN, SILVER], 3f64.sqrt(), 1.01 * d0, 1000).unwrap_err();
        assert!(err.to_string().contains("too large"));
        assert!(surgery_geometry([GOLDEN, SILVER], 3f64.sqrt(), 0.99 * d0, 1000).is_ok());
    }

    #[test]
    fn segment_distance_of_parallel_translate() {
        // A translate straight across the segment direction.
        let e = [1.0, 0.0];
        assert!((segment_distance([0.0, 0.3], e, 0.1, 1) - 0.3).abs() < 1e-15);
        assert!((segment_distance([0.5, 0.0], e, 0.1, 1) - 0.3).abs() < 1e-15);
    }
}
