use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer 2×2 matrix with determinant +1, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularMatrix([[i64; 2]; 2]);

impl UnimodularMatrix {
    pub const IDENTITY: Self = Self([[1, 0], [0, 1]]);

    pub fn new(rows: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = rows.map(|r| r.map(i128::from));
        if a * d - b * c != 1 {
            return Err(Error::InvalidMatrix(format!("{rows:?} has determinant {}", a * d - b * c)));
        }
        Ok(Self(rows))
    }

    /// The Dehn twist `[[1, k], [0, 1]]`.
    pub fn twist(k: i64) -> Self {
        Self([[1, k], [0, 1]])
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        self.0
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self([[d, -b], [-c, a]])
    }

    /// Exact product; `None` on overflow.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let p = mul_wide(self.0, other.0);
        let mut out = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = i64::try_from(p[i][j]).ok()?;
            }
        }
        Some(Self(out))
    }

    pub fn trace(&self) -> i128 {
        self.0[0][0] as i128 + self.0[1][1] as i128
    }
}

type Wide = [[i128; 2]; 2];

fn widen(x: [[i64; 2]; 2]) -> Wide {
    x.map(|r| r.map(i128::from))
}

fn mul_i128(x: Wide, y: Wide) -> Wide {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn mul_wide(x: [[i64; 2]; 2], y: [[i64; 2]; 2]) -> Wide {
    mul_i128(widen(x), widen(y))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

/// Finds `B` with `B⁻¹·A·B = I_k` for a unipotent `A`.
///
/// The first column of `B` is the primitive fixed vector of `A` with a
/// positive leading nonzero entry; the second column is the Bezout
/// completion minimizing `|b| + |d|`, ties broken toward smaller `|b|`.
pub fn normalize_isotopy_class(a: &UnimodularMatrix) -> Result<(UnimodularMatrix, i64)> {
    if a.trace() != 2 {
        return Err(Error::InvalidMatrix(format!(
            "not unipotent: trace {} of {:?}",
            a.trace(),
            a.rows()
        )));
    }
    let [[p, q], [r, s]] = a.rows();
    let row = if p - 1 != 0 || q != 0 { (p as i128 - 1, q as i128) } else { (r as i128, s as i128 - 1) };
    if row == (0, 0) {
        return Ok((UnimodularMatrix::IDENTITY, 0));
    }
    // Fixed vector (u, w) solves row·(u, w) = 0.
    let (mut u, mut w) = (row.1, -row.0);
    let g = gcd(u.unsigned_abs(), w.unsigned_abs()) as i128;
    u /= g;
    w /= g;
    if u < 0 || (u == 0 && w < 0) {
        u = -u;
        w = -w;
    }
    let (u, w) = (
        i64::try_from(u).map_err(|_| Error::InvalidMatrix("entries too large".into()))?,
        i64::try_from(w).map_err(|_| Error::InvalidMatrix("entries too large".into()))?,
    );
    // u·d − b·w = 1 from Bezout u·x + w·y = 1 with d = x, b = −y.
    let (_, x, y) = ext_gcd(u, w);
    let (b0, d0) = (-(y as i128), x as i128);
    // Family (b0 + t·u, d0 + t·w).
    let cost = |t: i128| -> (i128, i128) {
        let b = b0 + t * u as i128;
        let d = d0 + t * w as i128;
        (b.abs() + d.abs(), b.abs())
    };
    let mut candidates = vec![0i128];
    for (num, den) in [(b0, u as i128), (d0, w as i128)] {
        if den != 0 {
            let c = -num.div_euclid(den);
            candidates.extend([c - 1, c, c + 1]);
            let c = (-num).div_euclid(den);
            candidates.extend([c - 1, c, c + 1]);
        }
    }
    let t = candidates.into_iter().min_by_key(|&t| (cost(t), t)).unwrap();
    let b = b0 + t * u as i128;
    let d = d0 + t * w as i128;
    let to64 = |v: i128| i64::try_from(v).map_err(|_| Error::InvalidMatrix("entries too large".into()));
    let bmat = UnimodularMatrix::new([[u, to64(b)?], [w, to64(d)?]])?;
    let conj = mul_i128(mul_wide(bmat.inverse().0, a.0), widen(bmat.0));
    if conj[0][0] != 1 || conj[1][0] != 0 || conj[1][1] != 1 {
        return Err(Error::InvalidMatrix(format!("conjugation failed for {:?}", a.rows())));
    }
    Ok((bmat, to64(conj[0][1])?))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn twist_is_its_own_normal_form() {
        let (b, k) = normalize_isotopy_class(&UnimodularMatrix::twist(3)).unwrap();
        assert_eq!((b, k), (UnimodularMatrix::IDENTITY, 3));
        let (b, k) = normalize_isotopy_class(&UnimodularMatrix::IDENTITY).unwrap();
        assert_eq!((b, k), (UnimodularMatrix::IDENTITY, 0));
    }

    #[test]
    fn known_conjugate() {
        let a = UnimodularMatrix::new([[-1, 2], [-2, 3]]).unwrap();
        let (b, k) = normalize_isotopy_class(&a).unwrap();
        assert_eq!(b.rows(), [[1, 0], [1, 1]]);
        assert_eq!(k, 2);
    }

    #[test]
    fn hyperbolic_is_rejected() {
        let a = UnimodularMatrix::new([[2, 1], [1, 1]]).unwrap();
        let err = normalize_isotopy_class(&a).unwrap_err();
        assert!(err.to_string().contains("not unipotent"));
        assert!(UnimodularMatrix::new([[2, 0], [0, 1]]).is_err());
    }

    fn completion(p: i64, r: i64) -> Option<UnimodularMatrix> {
        let (g, x, y) = ext_gcd(p, r);
        if g != 1 {
            return None;
        }
        UnimodularMatrix::new([[p, -y], [r, x]]).ok()
    }

    proptest! {
        #[test]
        fn conjugates_normalize_back(p in -1000i64..1000, r in -1000i64..1000, j in -50i64..50) {
            prop_assume!(p != 0 || r != 0);
            if let Some(b) = completion(p, r) {
                let a = b.checked_mul(&UnimodularMatrix::twist(j)).unwrap()
                    .checked_mul(&b.inverse()).unwrap();
                let (bn, k) = normalize_isotopy_class(&a).unwrap();
                prop_assert_eq!(k, j);
                let back = bn.inverse().checked_mul(&a).unwrap().checked_mul(&bn).unwrap();
                prop_assert_eq!(back, UnimodularMatrix::twist(j));
            }
        }
    }
}
