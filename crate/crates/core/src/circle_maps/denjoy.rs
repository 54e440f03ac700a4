use serde::{Deserialize, Serialize};

use super::piecewise::PiecewiseLift;
use crate::error::{Error, Result};
use crate::metric::{circle_dist, frac, split};

/// Gap lengths `ℓ_n` indexed by `n ∈ ℤ`.
pub trait GapSchedule {
    fn length(&self, n: i64) -> f64;

    /// `Σ_{|n|>N} ℓ_n`. The default sums the tail numerically.
    fn tail_mass(&self, n_trunc: usize) -> f64 {
        let mut total = 0.0;
        let mut small_run = 0;
        let mut n = n_trunc as i64 + 1;
        while small_run < 64 && n < n_trunc as i64 + 1_000_000 {
            let term = self.length(n) + self.length(-n);
            total += term;
            small_run = if term < 1e-18 { small_run + 1 } else { 0 };
            n += 1;
        }
        total
    }
}

impl<F: Fn(i64) -> f64> GapSchedule for F {
    fn length(&self, n: i64) -> f64 {
        self(n)
    }
}

/// `ℓ_n = scale·2^{−|n|}`, total mass `3·scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricSchedule {
    pub scale: f64,
}

impl GeometricSchedule {
    /// Schedule whose untruncated total mass is `mass`.
    pub fn with_mass(mass: f64) -> Self {
        Self { scale: mass / 3.0 }
    }
}

impl Default for GeometricSchedule {
    fn default() -> Self {
        Self::with_mass(0.3)
    }
}

impl GapSchedule for GeometricSchedule {
    fn length(&self, n: i64) -> f64 {
        self.scale * 0.5f64.powi(n.unsigned_abs().min(2000) as i32)
    }

    fn tail_mass(&self, n_trunc: usize) -> f64 {
        2.0 * self.scale * 0.5f64.powi(n_trunc.min(2000) as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenjoyGap {
    pub index: i64,
    /// `frac(n·α)`, the point the gap collapses to.
    pub base_angle: f64,
    pub length: f64,
    /// Gap `[start, end]` in Denjoy coordinates; `start ∈ [0,1)`, `end` may exceed 1.
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenjoyGapTable {
    pub gaps: Vec<DenjoyGap>,
    /// `1 + Σ ℓ_n` over materialized gaps.
    pub normalization: f64,
    /// Half-width of the rotation-coordinate interval each gap is blown up from.
    pub smear: f64,
}

impl DenjoyGapTable {
    pub fn gap(&self, n: i64) -> Option<&DenjoyGap> {
        let first = self.gaps.first()?.index;
        self.gaps.get(usize::try_from(n - first).ok()?)
    }

    pub fn total_length(&self) -> f64 {
        self.normalization - 1.0
    }

    /// Index of the materialized gap containing `x` (mod 1), if any.
    pub fn containing(&self, x: f64) -> Option<i64> {
        let u = frac(x);
        self.gaps
            .iter()
            .find(|g| {
                let d = frac(u - g.start);
                d <= g.end - g.start
            })
            .map(|g| g.index)
    }
}

/// Truncated Denjoy counterexample: conjugate of `R_α` by a blow-up that
/// opens the points `frac(nα)`, `|n| ≤ N`, into gaps of length `ℓ_n`.
#[derive(Clone, Debug)]
pub struct DenjoyLift {
    alpha: f64,
    n_trunc: usize,
    table: DenjoyGapTable,
    tail: f64,
    blowup: PiecewiseLift,
    collapse: PiecewiseLift,
    forward: PiecewiseLift,
    backward: PiecewiseLift,
    /// Rotation-coordinate intervals `[lo, lo + 2η]` (lo reduced mod 1), sorted by `lo`.
    zones: Vec<(f64, i64)>,
}

impl DenjoyLift {
    pub fn build(alpha: f64, schedule: &dyn GapSchedule, n_trunc: usize) -> Result<Self> {
        if n_trunc < 1 {
            return Err(Error::InvalidCircleMap("truncation order must be at least 1".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidCircleMap("non-finite rotation angle".into()));
        }
        let n = n_trunc as i64;
        let lengths: Vec<f64> = (-n..=n).map(|m| schedule.length(m)).collect();
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidCircleMap("gap lengths must be positive".into()));
        }
        let total: f64 = lengths.iter().sum();
        if total >= 1.0 {
            return Err(Error::InvalidCircleMap(format!("gap mass {total} is not below 1")));
        }
        let theta = |m: i64| frac(m as f64 * alpha);
        let thetas: Vec<f64> = (-n - 1..=n + 1).map(theta).collect();
        let mut sep = f64::INFINITY;
        for i in 0..thetas.len() {
            for j in i + 1..thetas.len() {
                sep = sep.min(circle_dist(thetas[i], thetas[j]));
            }
        }
        if !(sep > 1e-12) {
            return Err(Error::InvalidCircleMap(
                "rotation angle has a short orbit at this truncation".into(),
            ));
        }
        let eta = (sep / 4.0).min(1e-9);
        let norm = 1.0 + total;
        let ell = |m: i64| lengths[(m + n) as usize];
        let th = |m: i64| thetas[(m + n + 1) as usize];

        // Blow-up ψ̃: the distribution function of the measure whose density is
        // `1 + ℓ_m/(2η)` on the smear zone of `θ_m`, normalized.
        let zone_pieces = |m: i64| -> Vec<(f64, f64)> {
            let lo = th(m) - eta;
            let hi = th(m) + eta;
            if lo < 0.0 {
                vec![(0.0, hi), (frac(lo), 1.0)]
            } else if hi >= 1.0 {
                vec![(lo, 1.0), (0.0, hi - 1.0)]
            } else {
                vec![(lo, hi)]
            }
        };
        let pieces: Vec<(i64, Vec<(f64, f64)>)> = (-n..=n).map(|m| (m, zone_pieces(m))).collect();
        let mass_left = |y: f64| -> f64 {
            let mut acc = y;
            for (m, ps) in &pieces {
                let covered: f64 = ps.iter().map(|&(a, b)| (y.min(b) - a).max(0.0)).sum();
                acc += ell(*m) * covered / (2.0 * eta);
            }
            acc / norm
        };
        let mut knots: Vec<f64> = (-n..=n)
            .flat_map(|m| [frac(th(m) - eta), frac(th(m) + eta)])
            .collect();
        knots.sort_by(f64::total_cmp);
        let values: Vec<f64> = knots.iter().map(|&x| mass_left(x)).collect();
        let blowup = PiecewiseLift::new(knots, values)?;
        let psi = |y: f64| blowup.eval(y);

        // Knots of g̃ = ψ̃∘(· + α)∘ψ̃⁻¹ are images under ψ̃ of zone endpoints and
        // of the two endpoints of the pre-image of zone −N. Their values come
        // from the same ψ̃ evaluations, so gap transport is exact.
        let carry = |m: i64| (th(m) + alpha - th(m + 1)).round();
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(4 * n_trunc + 4);
        for m in -n..=n {
            for sign in [-1.0, 1.0] {
                let p = th(m) + sign * eta;
                let value = if m < n {
                    psi(th(m + 1) + sign * eta) + carry(m)
                } else {
                    psi(p + alpha)
                };
                pairs.push((psi(p), value));
            }
        }
        for sign in [-1.0, 1.0] {
            let p = th(-n - 1) + sign * eta;
            pairs.push((psi(p), psi(th(-n) + sign * eta) + carry(-n - 1)));
        }
        for pair in pairs.iter_mut() {
            let k = pair.0.floor();
            pair.0 -= k;
            pair.1 -= k;
            if pair.0 >= 1.0 {
                pair.0 -= 1.0;
                pair.1 -= 1.0;
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, vs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let forward = PiecewiseLift::new(xs, vs)?;
        let backward = forward.inverse();

        let gaps = (-n..=n)
            .map(|m| {
                let a = psi(th(m) - eta);
                let b = psi(th(m) + eta);
                let (k, start) = split(a);
                DenjoyGap {
                    index: m,
                    base_angle: th(m),
                    length: ell(m),
                    start,
                    end: b - k as f64,
                }
            })
            .collect();
        let mut zones: Vec<(f64, i64)> = (-n..=n).map(|m| (frac(th(m) - eta), m)).collect();
        zones.sort_by(|a, b| a.0.total_cmp(&b.0));

        Ok(Self {
            alpha,
            n_trunc,
            table: DenjoyGapTable { gaps, normalization: norm, smear: eta },
            tail: schedule.tail_mass(n_trunc),
            collapse: blowup.inverse(),
            blowup,
            forward,
            backward,
            zones,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation_order(&self) -> usize {
        self.n_trunc
    }

    pub fn gap_table(&self) -> &DenjoyGapTable {
        &self.table
    }

    /// Mass of the gaps left out by the truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    /// Distance to the untruncated construction: tail mass plus the smear width.
    pub fn truncation_tolerance(&self) -> f64 {
        self.tail + self.table.smear
    }

    pub fn forward_table(&self) -> &PiecewiseLift {
        &self.forward
    }

    pub fn backward_table(&self) -> &PiecewiseLift {
        &self.backward
    }

    /// Blow-up from rotation coordinates to Denjoy coordinates.
    pub fn blowup(&self, y: f64) -> f64 {
        self.blowup.eval(y)
    }

    /// Monotone collapse `h` with `h∘g ≈ R_α∘h`, as a lift.
    pub fn semiconjugacy(&self, x: f64) -> f64 {
        let y = self.collapse.eval(x);
        let (k, r) = split(y);
        let width = 2.0 * self.table.smear;
        // Accept rounding at the zone ends.
        let reach = width + 1e-15;
        let i = self.zones.partition_point(|z| z.0 <= r);
        if i > 0 {
            let lo = self.zones[i - 1].0;
            if r <= lo + reach {
                return k as f64 + lo + 0.5 * width;
            }
        }
        // The last zone may wrap through 0.
        if let Some(&(lo, _)) = self.zones.last() {
            if r + 1.0 <= lo + reach {
                return k as f64 - 1.0 + lo + 0.5 * width;
            }
        }
        y
    }
}
