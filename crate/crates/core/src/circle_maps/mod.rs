//! Lifts of orientation-preserving circle homeomorphisms.

mod denjoy;
mod piecewise;

pub use denjoy::{DenjoyGap, DenjoyGapTable, DenjoyLift, GapSchedule, GeometricSchedule};
pub use piecewise::PiecewiseLift;

use crate::error::{Error, Result};
use crate::metric::split;

#[derive(Clone, Debug)]
pub enum CircleLift {
    Rigid { alpha: f64 },
    PiecewiseAffine { forward: PiecewiseLift, backward: PiecewiseLift },
    Denjoy(Box<DenjoyLift>),
}

/// Poincaré estimate `(g̃ⁿ(x₀) − x₀)/n` with a guaranteed error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationEstimate {
    pub estimate: f64,
    pub error_bound: f64,
}

impl CircleLift {
    pub fn rigid(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidCircleMap("non-finite rotation angle".into()));
        }
        Ok(Self::Rigid { alpha })
    }

    pub fn piecewise(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        let forward = PiecewiseLift::new(xs, vs)?;
        let backward = forward.inverse();
        Ok(Self::PiecewiseAffine { forward, backward })
    }

    pub fn denjoy(alpha: f64, schedule: &dyn GapSchedule, n_trunc: usize) -> Result<Self> {
        Ok(Self::Denjoy(Box::new(DenjoyLift::build(alpha, schedule, n_trunc)?)))
    }

    pub fn as_denjoy(&self) -> Option<&DenjoyLift> {
        match self {
            Self::Denjoy(d) => Some(d),
            _ => None,
        }
    }

    fn table(&self) -> Option<(&PiecewiseLift, &PiecewiseLift)> {
        match self {
            Self::Rigid { .. } => None,
            Self::PiecewiseAffine { forward, backward } => Some((forward, backward)),
            Self::Denjoy(d) => Some((d.forward_table(), d.backward_table())),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.table() {
            None => x + self.rigid_alpha(),
            Some((f, _)) => f.eval(x),
        }
    }

    pub fn eval_inverse(&self, x: f64) -> f64 {
        match self.table() {
            None => x - self.rigid_alpha(),
            Some((_, b)) => b.eval(x),
        }
    }

    fn rigid_alpha(&self) -> f64 {
        match self {
            Self::Rigid { alpha } => *alpha,
            _ => 0.0,
        }
    }

    /// `g̃ⁿ(x)` for any integer `n`, iterating on the fractional part only.
    pub fn iterate(&self, x: f64, n: i64) -> f64 {
        let (mut k, mut u) = split(x);
        for _ in 0..n.unsigned_abs() {
            let w = if n > 0 { self.eval(u) } else { self.eval_inverse(u) };
            let (j, r) = split(w);
            k += j;
            u = r;
        }
        k as f64 + u
    }

    /// `x + σ·(g̃(x) − x)`, the isotopy from the identity used by suspensions.
    pub fn interpolate(&self, sigma: f64, x: f64) -> f64 {
        match self.table() {
            None => x + sigma * self.rigid_alpha(),
            Some((f, _)) => f.interpolate(sigma, x),
        }
    }

    pub fn interpolate_inverse(&self, sigma: f64, y: f64) -> f64 {
        match self.table() {
            None => y - sigma * self.rigid_alpha(),
            Some((f, _)) => f.interpolate_inverse(sigma, y),
        }
    }

    pub fn rotation_number(&self, x0: f64, n: usize) -> Result<RotationEstimate> {
        if n == 0 {
            return Err(Error::InvalidParameter("orbit length must be at least 1".into()));
        }
        let (k0, u0) = split(x0);
        let (mut k, mut u) = (k0, u0);
        for _ in 0..n {
            let (j, r) = split(self.eval(u));
            k += j;
            u = r;
        }
        let nf = n as f64;
        Ok(RotationEstimate {
            estimate: ((k - k0) as f64 + (u - u0)) / nf,
            error_bound: 1.0 / nf + 8.0 * f64::EPSILON,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::frac;
    use crate::{GOLDEN, SILVER};
    use proptest::prelude::*;

    fn lifts() -> Vec<CircleLift> {
        vec![
            CircleLift::rigid(0.25).unwrap(),
            CircleLift::rigid(GOLDEN).unwrap(),
            CircleLift::piecewise(vec![0.0, 0.3, 0.6], vec![0.1, 0.2, 0.9]).unwrap(),
            CircleLift::denjoy(GOLDEN, &GeometricSchedule::default(), 20).unwrap(),
            CircleLift::denjoy(SILVER, &GeometricSchedule::default(), 40).unwrap(),
        ]
    }

    #[test]
    fn rigid_examples() {
        let g = CircleLift::rigid(0.25).unwrap();
        assert_eq!(g.eval(0.5), 0.75);
        assert_eq!(g.eval(1.5), 1.75);
        let r = g.rotation_number(0.1, 1000).unwrap();
        assert!((r.estimate - 0.25).abs() <= 1e-12);
        let id = CircleLift::rigid(0.0).unwrap();
        assert_eq!(id.rotation_number(0.3, 17).unwrap().estimate, 0.0);
        assert!(g.rotation_number(0.0, 0).is_err());
    }

    #[test]
    fn denjoy_gap_midpoints_are_transported() {
        let g = CircleLift::denjoy(GOLDEN, &GeometricSchedule::default(), 20).unwrap();
        let table = g.as_denjoy().unwrap().gap_table();
        let g0 = table.gap(0).unwrap();
        let g1 = table.gap(1).unwrap();
        let image = frac(g.eval(0.5 * (g0.start + g0.end)));
        let mid1 = frac(0.5 * (g1.start + g1.end));
        assert!((image - mid1).abs() < 1e-10);
    }

    #[test]
    fn three_gaps_at_order_one() {
        let sched = |n: i64| if n == 0 { 0.1 } else { 0.05 };
        let g = CircleLift::denjoy(GOLDEN, &sched, 1).unwrap();
        let table = g.as_denjoy().unwrap().gap_table();
        assert_eq!(table.gaps.len(), 3);
        for w in table.gaps.windows(2) {
            let a = g.eval(w[0].start);
            let b = g.eval(w[0].end);
            let k = (a - w[1].start).round();
            assert!((a - k - w[1].start).abs() < 1e-10 && (b - k - w[1].end).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_gap_limit_is_rigid() {
        let mut last = f64::INFINITY;
        for scale in [1e-2, 1e-4, 1e-6] {
            let g = CircleLift::denjoy(GOLDEN, &GeometricSchedule { scale }, 5).unwrap();
            let err = (0..200)
                .map(|i| i as f64 / 200.0)
                .map(|x| (g.eval(x) - x - GOLDEN).abs())
                .fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn rotation_number_is_cauchy_consistent() {
        for g in lifts() {
            for n in [100usize, 1000] {
                let a = g.rotation_number(0.2, n).unwrap();
                let b = g.rotation_number(0.2, 2 * n).unwrap();
                let nf = n as f64;
                assert!((a.estimate - b.estimate).abs() <= 1.0 / nf + 0.5 / nf + 1e-12);
            }
        }
    }

    #[test]
    fn denjoy_rotation_number_hits_target() {
        let g = CircleLift::denjoy(GOLDEN, &GeometricSchedule::default(), 40).unwrap();
        let tol = g.as_denjoy().unwrap().truncation_tolerance();
        let r = g.rotation_number(0.0, 100_000).unwrap();
        assert!((r.estimate - GOLDEN).abs() <= 1e-5 + tol);
    }

    #[test]
    fn denjoy_semiconjugacy_defect_is_within_tolerance() {
        let g = CircleLift::denjoy(GOLDEN, &GeometricSchedule::default(), 20).unwrap();
        let d = g.as_denjoy().unwrap();
        let tol = d.truncation_tolerance();
        let worst = (0..10_000)
            .map(|i| (i as f64 + 0.5) / 10_000.0)
            .map(|x| {
                let lhs = d.semiconjugacy(g.eval(x));
                let rhs = d.semiconjugacy(x) + GOLDEN;
                crate::metric::circle_dist(lhs, rhs)
            })
            .fold(0.0, f64::max);
        assert!(worst <= tol, "defect {worst} > {tol}");
    }

    #[test]
    fn iterate_matches_repeated_eval() {
        for g in lifts() {
            let mut x = 0.37;
            for _ in 0..25 {
                x = g.eval(x);
            }
            assert!((g.iterate(0.37, 25) - x).abs() < 1e-9);
            // Backward gap transport doubles lengths, so allow 2^25 ulps.
            assert!((g.iterate(g.iterate(0.37, 25), -25) - 0.37).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn degree_one_and_monotone(x in -50.0f64..50.0, d in 1e-6f64..0.99) {
            for g in lifts() {
                prop_assert!((g.eval(x + 1.0) - g.eval(x) - 1.0).abs() <= 1e-12);
                prop_assert!(g.eval(x + d) > g.eval(x));
                prop_assert!((g.eval_inverse(g.eval(x)) - x).abs() <= 1e-9);
            }
        }
    }
}
