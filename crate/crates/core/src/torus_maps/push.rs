use crate::error::{Error, Result};
use crate::metric::{frac, wrap};

/// Homeomorphism supported in a disk that slides `from` onto `to` along
/// their difference vector, scaled by a radial ramp.
///
/// The ramp is 1 up to radius `|v|/2` and falls linearly to 0 at the disk
/// radius `R`. Each chord parallel to `v` is mapped monotonically onto
/// itself as long as `|v| < 2R/3`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskPush {
    from: [f64; 2],
    to: [f64; 2],
    radius: f64,
    mid: [f64; 2],
    v: [f64; 2],
    len: f64,
}

impl DiskPush {
    pub fn new(from: [f64; 2], to: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.25) {
            return Err(Error::InvalidTorusMap(format!("push radius {radius} not in (0, 1/4)")));
        }
        let from = [frac(from[0]), frac(from[1])];
        let to = [frac(to[0]), frac(to[1])];
        let v = [wrap(to[0] - from[0]), wrap(to[1] - from[1])];
        let len = v[0].hypot(v[1]);
        if len >= 2.0 * radius / 3.0 {
            return Err(Error::InvalidTorusMap(format!(
                "centers {len} apart need a push radius above {}",
                1.5 * len
            )));
        }
        let mid = [from[0] + 0.5 * v[0], from[1] + 0.5 * v[1]];
        Ok(Self { from, to, radius, mid, v, len })
    }

    pub fn from(&self) -> [f64; 2] {
        self.from
    }

    pub fn to(&self) -> [f64; 2] {
        self.to
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Center of the supporting disk.
    pub fn center(&self) -> [f64; 2] {
        [frac(self.mid[0]), frac(self.mid[1])]
    }

    fn ramp(&self, r: f64) -> f64 {
        let inner = 0.5 * self.len;
        if r <= inner {
            1.0
        } else if r >= self.radius {
            0.0
        } else {
            (self.radius - r) / (self.radius - inner)
        }
    }

    fn offset(&self, z: [f64; 2]) -> [f64; 2] {
        [wrap(z[0] - self.mid[0]), wrap(z[1] - self.mid[1])]
    }

    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        let d = self.offset(z);
        let r = d[0].hypot(d[1]);
        if r >= self.radius || self.len == 0.0 {
            return z;
        }
        let b = self.ramp(r);
        if r <= 0.5 * self.len {
            // Exact translation on the inner disk.
            return [z[0] + self.v[0], z[1] + self.v[1]];
        }
        [z[0] + b * self.v[0], z[1] + b * self.v[1]]
    }

    pub fn eval_inverse(&self, w: [f64; 2]) -> [f64; 2] {
        let d = self.offset(w);
        if d[0].hypot(d[1]) >= self.radius || self.len == 0.0 {
            return w;
        }
        let e = [self.v[0] / self.len, self.v[1] / self.len];
        let along = d[0] * e[0] + d[1] * e[1];
        let across = -d[0] * e[1] + d[1] * e[0];
        // Solve s + |v|·ramp(√(s² + p²)) = along for s on [along − |v|, along].
        let phi = |s: f64| s + self.len * self.ramp(s.hypot(across));
        let (mut lo, mut hi) = (along - self.len, along);
        for _ in 0..200 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if phi(mid) < along {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let shift = along - 0.5 * (lo + hi);
        [w[0] - shift * e[0], w[1] - shift * e[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::torus_dist;

    #[test]
    fn equal_centers_give_identity() {
        let p = DiskPush::new([0.3, 0.3], [0.3, 0.3], 0.1).unwrap();
        assert_eq!(p.eval([0.31, 0.3]), [0.31, 0.3]);
        assert_eq!(p.eval_inverse([0.31, 0.3]), [0.31, 0.3]);
    }

    #[test]
    fn moves_center_and_fixes_outside() {
        let p = DiskPush::new([0.5, 0.5], [0.55, 0.5], 0.2).unwrap();
        let img = p.eval([0.5, 0.5]);
        assert!(torus_dist(img, [0.55, 0.5]) <= 1e-12);
        for i in 0..400 {
            let a = i as f64 * 0.0157;
            let z = [0.525 + 0.2 * a.cos(), 0.5 + 0.2 * a.sin()];
            assert_eq!(p.eval(z), z);
            let z = [0.525 + 0.3 * a.cos(), 0.5 + 0.3 * a.sin()];
            assert_eq!(p.eval(z), z);
        }
    }

    #[test]
    fn rejects_oversized_push() {
        assert!(DiskPush::new([0.5, 0.5], [0.6, 0.5], 0.1).is_err());
        assert!(DiskPush::new([0.5, 0.5], [0.5, 0.5], 0.3).is_err());
    }

    #[test]
    fn inverse_round_trips_in_disk() {
        let p = DiskPush::new([0.95, 0.02], [0.99, 0.05], 0.2).unwrap();
        let c = p.center();
        for i in 0..1000 {
            let r = 0.2 * ((i as f64 + 0.5) / 1000.0).sqrt();
            let a = i as f64 * 2.399_963;
            let z = [c[0] + r * a.cos(), c[1] + r * a.sin()];
            let back = p.eval_inverse(p.eval(z));
            assert!((back[0] - z[0]).abs() <= 1e-10 && (back[1] - z[1]).abs() <= 1e-10);
            let fwd = p.eval(p.eval_inverse(z));
            assert!((fwd[0] - z[0]).abs() <= 1e-10 && (fwd[1] - z[1]).abs() <= 1e-10);
        }
    }
}
