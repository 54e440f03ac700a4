use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::split;

/// Piecewise-affine degree-1 lift given by knots `xs[i] ∈ [0,1)` (strictly
/// increasing) and values `vs[i]` (strictly increasing, `vs[last] < vs[0] + 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLift {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLift {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != vs.len() {
            return Err(Error::InvalidCircleMap(
                "breakpoint table must be non-empty with matching lengths".into(),
            ));
        }
        if !xs.iter().chain(vs.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidCircleMap("non-finite breakpoint".into()));
        }
        if xs[0] < 0.0 || *xs.last().unwrap() >= 1.0 {
            return Err(Error::InvalidCircleMap("breakpoints must lie in [0,1)".into()));
        }
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidCircleMap("breakpoints must be strictly increasing".into()));
            }
        }
        for w in vs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidCircleMap("values must be strictly increasing".into()));
            }
        }
        if *vs.last().unwrap() >= vs[0] + 1.0 {
            return Err(Error::InvalidCircleMap("values wrap past one period".into()));
        }
        Ok(Self { xs, vs })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    /// Segment containing `u ∈ [0,1)` as `(x0, v0, x1, v1)`, wrapping at the ends.
    fn segment(&self, u: f64) -> (f64, f64, f64, f64) {
        let m = self.xs.len();
        let i = self.xs.partition_point(|&x| x <= u);
        if i == 0 {
            (self.xs[m - 1] - 1.0, self.vs[m - 1] - 1.0, self.xs[0], self.vs[0])
        } else if i == m {
            (self.xs[m - 1], self.vs[m - 1], self.xs[0] + 1.0, self.vs[0] + 1.0)
        } else {
            (self.xs[i - 1], self.vs[i - 1], self.xs[i], self.vs[i])
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, u) = split(x);
        let (x0, v0, x1, v1) = self.segment(u);
        k as f64 + v0 + (u - x0) * (v1 - v0) / (x1 - x0)
    }

    /// The inverse lift, obtained by swapping the roles of knots and values.
    pub fn inverse(&self) -> PiecewiseLift {
        let mut pairs: Vec<(f64, f64)> = self
            .xs
            .iter()
            .zip(&self.vs)
            .map(|(&x, &v)| {
                let (k, u) = split(v);
                (u, x - k as f64)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (xs, vs) = pairs.into_iter().unzip();
        PiecewiseLift { xs, vs }
    }

    /// Evaluates `x ↦ x + σ·(eval(x) − x)`, the straight-line interpolation
    /// between the identity and this lift.
    pub fn interpolate(&self, sigma: f64, x: f64) -> f64 {
        x + sigma * (self.eval(x) - x)
    }

    /// Inverse of [`Self::interpolate`] for `σ ∈ [0, 1]`.
    pub fn interpolate_inverse(&self, sigma: f64, y: f64) -> f64 {
        let m = self.xs.len();
        let node = |j: usize| -> f64 { (1.0 - sigma) * self.xs[j] + sigma * self.vs[j] };
        // The interpolated map has the same knots; its knot values are increasing
        // and span less than one period, so locate `y` among them.
        let base = node(0);
        let (k, _) = split(y - base);
        let r = y - k as f64;
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if node(mid) <= r {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let i = lo.max(1);
        let (x0, y0, x1, y1) = if i == m {
            (self.xs[m - 1], node(m - 1), self.xs[0] + 1.0, node(0) + 1.0)
        } else {
            (self.xs[i - 1], node(i - 1), self.xs[i], node(i))
        };
        k as f64 + x0 + (r - y0) * (x1 - x0) / (y1 - y0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PiecewiseLift {
        PiecewiseLift::new(vec![0.1, 0.4, 0.8], vec![0.3, 0.5, 1.2]).unwrap()
    }

    #[test]
    fn rejects_non_monotone_values() {
        assert!(PiecewiseLift::new(vec![0.1, 0.4], vec![0.5, 0.3]).is_err());
        assert!(PiecewiseLift::new(vec![0.1, 0.4], vec![0.5, 1.6]).is_err());
        assert!(PiecewiseLift::new(vec![0.4, 0.1], vec![0.1, 0.5]).is_err());
    }

    #[test]
    fn evaluates_knots_and_wraps() {
        let g = sample();
        assert!((g.eval(0.4) - 0.5).abs() < 1e-15);
        assert!((g.eval(1.4) - 1.5).abs() < 1e-15);
        // segment from (0.8, 1.2) to (1.1, 1.3)
        assert!((g.eval(0.95) - 1.25).abs() < 1e-12);
        assert!((g.eval(0.0) - (1.2 + (0.2 / 0.3) * 0.1 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trips() {
        let g = sample();
        let h = g.inverse();
        for i in 0..200 {
            let x = -2.0 + i as f64 * 0.0237;
            assert!((h.eval(g.eval(x)) - x).abs() < 1e-12);
            assert!((g.eval(h.eval(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_inverse_round_trips() {
        let g = sample();
        for &s in &[0.0, 0.3, 0.77, 1.0] {
            for i in 0..100 {
                let x = -1.0 + i as f64 * 0.0311;
                let y = g.interpolate(s, x);
                assert!((g.interpolate_inverse(s, y) - x).abs() < 1e-12, "s={s} x={x}");
            }
        }
    }
}
