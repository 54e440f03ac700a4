//! Lifts `f̃ = I_k·z + Δ(z)` of torus homeomorphisms with explicit inverses.

mod isotopy;
mod push;
mod suspension;

pub use isotopy::{normalize_isotopy_class, UnimodularMatrix};
pub use push::DiskPush;
pub use suspension::Suspension;

use crate::circle_maps::CircleLift;
use crate::error::{Error, Result};
use crate::metric::split;

#[derive(Clone, Debug)]
pub enum TorusMap {
    /// `z ↦ I_k·z + shift`; a rigid translation when `k = 0`.
    Affine { twist: i64, shift: [f64; 2] },
    /// `(x, y) ↦ (g̃₁(x), g̃₂(y))`.
    Product { first: CircleLift, second: CircleLift },
    Suspension(Box<Suspension>),
    DiskPush(DiskPush),
    /// `chain[0] ∘ chain[1] ∘ … ∘ chain[last]`.
    Composed(Vec<TorusMap>),
    /// Conjugate by the coordinate swap `(x, y) ↦ (y, x)`.
    Swapped(Box<TorusMap>),
}

/// Point of `ℝ²` kept as integer cell plus fractional part in `[0,1)²`, so
/// that long orbits of lifts do not lose precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedPoint {
    pub cell: [i64; 2],
    pub frac: [f64; 2],
}

impl LiftedPoint {
    pub fn new(z: [f64; 2]) -> Self {
        let (i, u) = split(z[0]);
        let (j, w) = split(z[1]);
        Self { cell: [i, j], frac: [u, w] }
    }

    pub fn to_real(&self) -> [f64; 2] {
        [self.cell[0] as f64 + self.frac[0], self.cell[1] as f64 + self.frac[1]]
    }

    /// `self − other` computed cell-wise first.
    pub fn delta(&self, other: &LiftedPoint) -> [f64; 2] {
        [
            (self.cell[0] - other.cell[0]) as f64 + (self.frac[0] - other.frac[0]),
            (self.cell[1] - other.cell[1]) as f64 + (self.frac[1] - other.frac[1]),
        ]
    }
}

impl TorusMap {
    pub fn rigid(alpha: f64, beta: f64) -> Self {
        Self::Affine { twist: 0, shift: [alpha, beta] }
    }

    pub fn dehn_twist(k: i64) -> Self {
        Self::Affine { twist: k, shift: [0.0, 0.0] }
    }

    pub fn identity() -> Self {
        Self::rigid(0.0, 0.0)
    }

    pub fn composed(chain: Vec<TorusMap>) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::InvalidTorusMap("empty composition".into()));
        }
        Ok(Self::Composed(chain))
    }

    pub fn swapped(inner: TorusMap) -> Result<Self> {
        if inner.twist() != 0 {
            return Err(Error::InvalidTorusMap(
                "coordinate swap of a map with nonzero twist leaves the Dehn-twist classes".into(),
            ));
        }
        Ok(Self::Swapped(Box::new(inner)))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Affine { twist: 0, .. } => "rigid",
            Self::Affine { .. } => "twist",
            Self::Product { .. } => "product",
            Self::Suspension(_) => "suspension",
            Self::DiskPush(_) => "disk-push",
            Self::Composed(_) => "composed",
            Self::Swapped(_) => "swapped",
        }
    }

    /// The `k` in the linear part `I_k`.
    pub fn twist(&self) -> i64 {
        match self {
            Self::Affine { twist, .. } => *twist,
            Self::Composed(chain) => chain.iter().map(TorusMap::twist).sum(),
            _ => 0,
        }
    }

    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        match self {
            Self::Affine { twist, shift } => {
                [z[0] + *twist as f64 * z[1] + shift[0], z[1] + shift[1]]
            }
            Self::Product { first, second } => [first.eval(z[0]), second.eval(z[1])],
            Self::Suspension(s) => s.eval(z),
            Self::DiskPush(p) => p.eval(z),
            Self::Composed(chain) => chain.iter().rev().fold(z, |w, m| m.eval(w)),
            Self::Swapped(inner) => {
                let w = inner.eval([z[1], z[0]]);
                [w[1], w[0]]
            }
        }
    }

    pub fn eval_inverse(&self, z: [f64; 2]) -> [f64; 2] {
        match self {
            Self::Affine { twist, shift } => {
                let y = z[1] - shift[1];
                [z[0] - shift[0] - *twist as f64 * y, y]
            }
            Self::Product { first, second } => [first.eval_inverse(z[0]), second.eval_inverse(z[1])],
            Self::Suspension(s) => s.eval_inverse(z),
            Self::DiskPush(p) => p.eval_inverse(z),
            Self::Composed(chain) => chain.iter().fold(z, |w, m| m.eval_inverse(w)),
            Self::Swapped(inner) => {
                let w = inner.eval_inverse([z[1], z[0]]);
                [w[1], w[0]]
            }
        }
    }

    /// `Δ(z) = f̃(z) − I_k·z`, periodic in `z`.
    pub fn displacement(&self, z: [f64; 2]) -> [f64; 2] {
        let w = self.eval(z);
        [w[0] - z[0] - self.twist() as f64 * z[1], w[1] - z[1]]
    }

    /// One step of the lift (or its inverse) on a split point.
    pub fn step(&self, p: &LiftedPoint, forward: bool) -> LiftedPoint {
        let w = if forward { self.eval(p.frac) } else { self.eval_inverse(p.frac) };
        let k = if forward { self.twist() } else { -self.twist() };
        let mut out = LiftedPoint::new(w);
        out.cell[0] += p.cell[0] + k * p.cell[1];
        out.cell[1] += p.cell[1];
        out
    }

    /// `f̃ⁿ(z)` for any integer `n`.
    pub fn iterate(&self, z: [f64; 2], n: i64) -> LiftedPoint {
        let mut p = LiftedPoint::new(z);
        for _ in 0..n.unsigned_abs() {
            p = self.step(&p, n > 0);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_maps::GeometricSchedule;
    use crate::{GOLDEN, SILVER};
    use proptest::prelude::*;

    fn gallery_like() -> Vec<TorusMap> {
        let susp = Suspension::new(
            CircleLift::rigid(GOLDEN).unwrap(),
            CircleLift::denjoy(SILVER, &GeometricSchedule::default(), 10).unwrap(),
            0.5,
        )
        .unwrap();
        let push = DiskPush::new([0.2, 0.3], [0.21, 0.31], 0.05).unwrap();
        vec![
            TorusMap::rigid(GOLDEN, SILVER),
            TorusMap::dehn_twist(1),
            TorusMap::Affine { twist: -2, shift: [0.1, 0.7] },
            TorusMap::Product {
                first: CircleLift::rigid(0.3).unwrap(),
                second: CircleLift::piecewise(vec![0.0, 0.5], vec![0.2, 0.4]).unwrap(),
            },
            TorusMap::Suspension(Box::new(susp.clone())),
            TorusMap::DiskPush(push.clone()),
            TorusMap::composed(vec![TorusMap::Suspension(Box::new(susp)), TorusMap::DiskPush(push)])
                .unwrap(),
            TorusMap::composed(vec![TorusMap::dehn_twist(1), TorusMap::rigid(0.2, 0.1)]).unwrap(),
            TorusMap::swapped(TorusMap::rigid(0.1, 0.2)).unwrap(),
        ]
    }

    #[test]
    fn basic_examples() {
        assert_eq!(TorusMap::rigid(GOLDEN, SILVER).eval([0.0, 0.0]), [GOLDEN, SILVER]);
        assert_eq!(TorusMap::dehn_twist(1).eval([0.0, 1.0]), [1.0, 1.0]);
        assert_eq!(TorusMap::dehn_twist(3).eval_inverse([3.0, 1.0]), [0.0, 1.0]);
        let r = TorusMap::rigid(0.25, 0.5);
        assert_eq!(r.eval_inverse([0.25, 0.5]), [0.0, 0.0]);
        assert!(TorusMap::swapped(TorusMap::dehn_twist(1)).is_err());
        assert!(TorusMap::composed(vec![]).is_err());
    }

    #[test]
    fn composition_matches_sequential_evaluation() {
        let maps = gallery_like();
        let (outer, inner) = (&maps[4], &maps[5]);
        let composed = &maps[6];
        for i in 0..1000 {
            let z = [(i as f64 * GOLDEN).fract(), (i as f64 * SILVER).fract()];
            let a = composed.eval(z);
            let b = outer.eval(inner.eval(z));
            assert!((a[0] - b[0]).abs() <= 1e-10 && (a[1] - b[1]).abs() <= 1e-10);
        }
    }

    #[test]
    fn lifted_iteration_matches_direct() {
        for map in gallery_like() {
            let z = [0.123, 0.456];
            let mut w = z;
            for _ in 0..20 {
                w = map.eval(w);
            }
            let p = map.iterate(z, 20).to_real();
            assert!((p[0] - w[0]).abs() < 1e-8 && (p[1] - w[1]).abs() < 1e-8, "{}", map.kind());
            let back = map.iterate(p, -20).to_real();
            assert!((back[0] - z[0]).abs() < 1e-7 && (back[1] - z[1]).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn equivariant_and_invertible(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            for map in gallery_like() {
                let k = map.twist() as f64;
                let w = map.eval([x, y]);
                let wx = map.eval([x + 1.0, y]);
                let wy = map.eval([x, y + 1.0]);
                prop_assert!((wx[0] - w[0] - 1.0).abs() <= 1e-10 && (wx[1] - w[1]).abs() <= 1e-10);
                prop_assert!((wy[0] - w[0] - k).abs() <= 1e-10 && (wy[1] - w[1] - 1.0).abs() <= 1e-10);
                let back = map.eval(map.eval_inverse([x, y]));
                prop_assert!((back[0] - x).abs() <= 1e-8 && (back[1] - y).abs() <= 1e-8);
            }
        }
    }
}
