//! Rotation sets, vertical rotation numbers, deviation profiles and orbit probes.

mod hull;
mod sampling;

pub use hull::convex_hull;
pub use sampling::SamplePlan;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::torus_dist;
use crate::torus_maps::{LiftedPoint, TorusMap};

/// Absolute slack allowed before a late value counts as an increase.
pub const PLATEAU_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct PlateauVerdict {
    pub bounded: bool,
    /// `max_n D(n)`.
    pub c_est: f64,
    /// Maximum over the first 80% of the ladder.
    pub early_max: f64,
    /// Maximum over the final 20%.
    pub late_max: f64,
    pub caveat: &'static str,
}

impl PlateauVerdict {
    fn from_table(table: &[f64]) -> Self {
        let cut = (table.len() * 4) / 5;
        let early_max = table[..cut.max(1)].iter().copied().fold(0.0, f64::max);
        let late_max = table[cut.max(1)..].iter().copied().fold(0.0, f64::max);
        Self {
            bounded: late_max <= early_max + PLATEAU_SLACK,
            c_est: early_max.max(late_max),
            early_max,
            late_max,
            caveat: "sampled evidence only",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationProfile {
    pub direction: [f64; 2],
    pub rho: f64,
    /// `max_z |⟨f̃ⁿ(z) − z, v⟩ − nρ|` for `n ≥ 0`.
    pub forward: Vec<f64>,
    /// The same quantity for `f̃⁻ⁿ` with `−nρ`.
    pub backward: Vec<f64>,
    pub samples: SamplePlan,
    pub verdict: PlateauVerdict,
}

impl DeviationProfile {
    /// `D(n)`: the larger of the forward and backward deviations at `|n|`.
    pub fn combined(&self) -> Vec<f64> {
        self.forward.iter().zip(&self.backward).map(|(a, b)| a.max(*b)).collect()
    }

    pub fn c_est(&self) -> f64 {
        self.verdict.c_est
    }
}

fn unit(v: [f64; 2]) -> Result<[f64; 2]> {
    let norm = v[0].hypot(v[1]);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidParameter("direction must be a nonzero vector".into()));
    }
    Ok([v[0] / norm, v[1] / norm])
}

/// Per-`n` elementwise reduction of per-sample orbit tables.
fn reduce_tables<F>(points: &[[f64; 2]], len: usize, init: f64, per_point: F, pick: fn(f64, f64) -> f64) -> Vec<f64>
where
    F: Fn(&[f64; 2], &mut dyn FnMut(usize, f64)) + Sync,
{
    points
        .par_iter()
        .fold(
            || vec![init; len],
            |mut acc, z| {
                per_point(z, &mut |n, value| acc[n] = pick(acc[n], value));
                acc
            },
        )
        .reduce(
            || vec![init; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = pick(*x, y);
                }
                a
            },
        )
}

pub fn deviation_profile(
    map: &TorusMap,
    direction: [f64; 2],
    rho: f64,
    n_max: usize,
    plan: SamplePlan,
) -> Result<DeviationProfile> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let v = unit(direction)?;
    let points = plan.points();
    let scan = |forward: bool| {
        reduce_tables(
            &points,
            n_max + 1,
            0.0,
            |z, emit| {
                let start = LiftedPoint::new(*z);
                let mut p = start;
                emit(0, 0.0);
                for n in 1..=n_max {
                    p = map.step(&p, forward);
                    let d = p.delta(&start);
                    let signed = if forward { n as f64 } else { -(n as f64) };
                    emit(n, (d[0] * v[0] + d[1] * v[1] - signed * rho).abs());
                }
            },
            f64::max,
        )
    };
    let forward = scan(true);
    let backward = scan(false);
    let combined: Vec<f64> = forward.iter().zip(&backward).map(|(a, b)| a.max(*b)).collect();
    Ok(DeviationProfile {
        direction: v,
        rho,
        verdict: PlateauVerdict::from_table(&combined),
        forward,
        backward,
        samples: plan,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpreadTable {
    /// `spread(n)` for `n = 0..=n_max`.
    pub forward: Vec<f64>,
    /// `spread(−n)` for `n = 0..=n_max`.
    pub backward: Vec<f64>,
    /// Each direction stays within the other's range plus 2.
    pub growth_agrees: bool,
    pub samples: SamplePlan,
}

/// Horizontal displacement spread over sampled pairs. The sample set is
/// closed under `z ↦ z + (0,1)`, which exposes the twist directly.
pub fn horizontal_spread(map: &TorusMap, n_max: usize, plan: SamplePlan) -> SpreadTable {
    let mut points = plan.points();
    let shifted: Vec<[f64; 2]> = points.iter().map(|z| [z[0], z[1] + 1.0]).collect();
    points.extend(shifted);
    let scan = |forward: bool| {
        let bound = |pick: fn(f64, f64) -> f64, init: f64| {
            reduce_tables(
                &points,
                n_max + 1,
                init,
                |z, emit| {
                    let start = LiftedPoint::new(*z);
                    let mut p = start;
                    emit(0, 0.0);
                    for n in 1..=n_max {
                        p = map.step(&p, forward);
                        emit(n, p.delta(&start)[0]);
                    }
                },
                pick,
            )
        };
        let hi = bound(f64::max, f64::NEG_INFINITY);
        let lo = bound(f64::min, f64::INFINITY);
        hi.iter().zip(&lo).map(|(a, b)| a - b).collect::<Vec<f64>>()
    };
    let forward = scan(true);
    let backward = scan(false);
    let fmax = forward.iter().copied().fold(0.0, f64::max);
    let bmax = backward.iter().copied().fold(0.0, f64::max);
    let growth_agrees = backward.iter().all(|&b| b <= fmax + 2.0) && forward.iter().all(|&f| f <= bmax + 2.0);
    SpreadTable { forward, backward, growth_agrees, samples: plan }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerticalRotation {
    pub estimate: f64,
    pub spread: f64,
}

pub fn vertical_rotation_number(map: &TorusMap, n: usize, plan: SamplePlan) -> Result<VerticalRotation> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let values: Vec<f64> = plan
        .points()
        .par_iter()
        .map(|z| {
            let start = LiftedPoint::new(*z);
            let end = map.iterate(*z, n as i64);
            end.delta(&start)[1] / n as f64
        })
        .collect();
    if values.is_empty() {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VerticalRotation { estimate: mean, spread: hi - lo })
}

#[derive(Clone, Debug, Serialize)]
pub struct CloudLevel {
    pub n: usize,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationCloud {
    pub levels: Vec<CloudLevel>,
    /// Hull of the deepest level, counter-clockwise.
    pub hull: Vec<[f64; 2]>,
    pub samples: SamplePlan,
}

impl RotationCloud {
    /// Largest distance from `center` to a hull vertex.
    pub fn radius_about(&self, center: [f64; 2]) -> f64 {
        self.hull
            .iter()
            .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
            .fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.hull {
            for b in &self.hull {
                d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        d
    }

    pub fn deepest(&self) -> &CloudLevel {
        self.levels.last().expect("cloud has at least one level")
    }
}

pub fn estimate_rotation_set(map: &TorusMap, ladder: &[usize], plan: SamplePlan) -> Result<RotationCloud> {
    if map.twist() != 0 {
        return Err(Error::Refused("rotation set undefined; use vertical_rotation_number".into()));
    }
    let mut ladder: Vec<usize> = ladder.iter().copied().filter(|&n| n > 0).collect();
    ladder.sort_unstable();
    ladder.dedup();
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("ladder needs a positive n".into()));
    }
    let n_max = *ladder.last().unwrap();
    let per_point: Vec<Vec<[f64; 2]>> = plan
        .points()
        .par_iter()
        .map(|z| {
            let start = LiftedPoint::new(*z);
            let mut p = start;
            let mut out = Vec::with_capacity(ladder.len());
            let mut next = 0;
            for n in 1..=n_max {
                p = map.step(&p, true);
                if n == ladder[next] {
                    let d = p.delta(&start);
                    out.push([d[0] / n as f64, d[1] / n as f64]);
                    next += 1;
                }
            }
            out
        })
        .collect();
    let levels: Vec<CloudLevel> = ladder
        .iter()
        .enumerate()
        .map(|(i, &n)| CloudLevel { n, points: per_point.iter().map(|row| row[i]).collect() })
        .collect();
    let hull = convex_hull(&levels.last().unwrap().points);
    Ok(RotationCloud { levels, hull, samples: plan })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProximityReport {
    pub forward_min: f64,
    pub forward_argmin: usize,
    pub backward_min: f64,
    pub backward_argmin: usize,
}

pub fn proximality_scan(map: &TorusMap, x: [f64; 2], y: [f64; 2], n_max: usize) -> ProximityReport {
    let scan = |forward: bool| {
        let (mut p, mut q) = (LiftedPoint::new(x), LiftedPoint::new(y));
        let mut best = (f64::INFINITY, 0);
        for n in 1..=n_max {
            p = map.step(&p, forward);
            q = map.step(&q, forward);
            let d = torus_dist(p.frac, q.frac);
            if d < best.0 {
                best = (d, n);
            }
        }
        best
    };
    let (forward_min, forward_argmin) = scan(true);
    let (backward_min, backward_argmin) = scan(false);
    ProximityReport { forward_min, forward_argmin, backward_min, backward_argmin }
}

/// Points of `B_radius(center)` on a sunflower lattice.
pub fn disk_samples(center: [f64; 2], radius: f64, count: usize) -> Vec<[f64; 2]> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let r = radius * ((i as f64 + 0.5) / count as f64).sqrt() * (1.0 - 1e-9);
            let a = i as f64 * golden_angle;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}

pub const RECURRENCE_SAMPLES: usize = 64;

/// Times `1 ≤ n ≤ n_max` at which some sampled point of the ball returns to it.
pub fn recurrence_probe(map: &TorusMap, center: [f64; 2], radius: f64, n_max: usize) -> Vec<usize> {
    let hits = reduce_tables(
        &disk_samples(center, radius, RECURRENCE_SAMPLES),
        n_max + 1,
        0.0,
        |z, emit| {
            let mut p = LiftedPoint::new(*z);
            for n in 1..=n_max {
                p = map.step(&p, true);
                if torus_dist(p.frac, center) < radius {
                    emit(n, 1.0);
                }
            }
        },
        f64::max,
    );
    (1..=n_max).filter(|&n| hits[n] > 0.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_maps::CircleLift;
    use crate::torus_maps::Suspension;
    use crate::{GOLDEN, SILVER};

    fn rigid_suspension() -> TorusMap {
        TorusMap::Suspension(Box::new(
            Suspension::new(CircleLift::rigid(GOLDEN).unwrap(), CircleLift::rigid(SILVER).unwrap(), 0.5)
                .unwrap(),
        ))
    }

    #[test]
    fn rigid_has_zero_deviation() {
        let p = deviation_profile(&TorusMap::rigid(GOLDEN, SILVER), [0.0, 1.0], SILVER, 500, SamplePlan::new(32, 0))
            .unwrap();
        assert!(p.combined().iter().all(|&d| d < 1e-9));
        assert_eq!(p.forward[0], 0.0);
        assert!(p.verdict.bounded);
    }

    #[test]
    fn dehn_twist_deviates_linearly() {
        let p = deviation_profile(&TorusMap::dehn_twist(1), [1.0, 0.0], 0.0, 200, SamplePlan::new(16, 3)).unwrap();
        let d = p.combined();
        for n in 1..=200 {
            assert!(d[n] >= n as f64 * 0.02, "n={n} D={}", d[n]);
        }
        assert!(!p.verdict.bounded);
    }

    #[test]
    fn profile_grows_with_sample_superset() {
        let map = rigid_suspension();
        let small = deviation_profile(&map, [0.0, 1.0], GOLDEN * SILVER, 300, SamplePlan::new(16, 5)).unwrap();
        let big = deviation_profile(&map, [0.0, 1.0], GOLDEN * SILVER, 300, SamplePlan::new(64, 5)).unwrap();
        for (a, b) in small.combined().iter().zip(big.combined()) {
            assert!(b >= *a);
        }
    }

    #[test]
    fn spreads() {
        let twist = horizontal_spread(&TorusMap::dehn_twist(1), 100, SamplePlan::new(16, 1));
        for n in 0..=100 {
            assert!(twist.forward[n] >= n as f64 && twist.backward[n] >= n as f64);
        }
        let rigid = horizontal_spread(&TorusMap::rigid(0.3, 0.2), 100, SamplePlan::new(16, 1));
        assert!(rigid.forward.iter().chain(&rigid.backward).all(|&s| s < 1e-9));
        let susp = horizontal_spread(&rigid_suspension(), 2000, SamplePlan::new(32, 1));
        assert!(susp.forward.iter().chain(&susp.backward).all(|&s| s <= 2.0));
        assert!(susp.growth_agrees);
    }

    #[test]
    fn vertical_rotation_examples() {
        let plan = SamplePlan::new(32, 0);
        let r = vertical_rotation_number(&TorusMap::rigid(0.1, SILVER), 100, plan).unwrap();
        assert!((r.estimate - SILVER).abs() < 1e-12 && r.spread < 1e-12);
        let t = vertical_rotation_number(&TorusMap::dehn_twist(1), 100, plan).unwrap();
        assert_eq!((t.estimate, t.spread), (0.0, 0.0));
        let n = 10_000;
        let s = vertical_rotation_number(&rigid_suspension(), n, plan).unwrap();
        assert!((s.estimate - GOLDEN * SILVER).abs() <= 2.0 / n as f64);
    }

    #[test]
    fn rotation_cloud_examples() {
        let plan = SamplePlan::new(32, 2);
        let cloud = estimate_rotation_set(&TorusMap::rigid(GOLDEN, SILVER), &[10, 100], plan).unwrap();
        assert!(cloud.radius_about([GOLDEN, SILVER]) < 1e-12);
        let id = estimate_rotation_set(&TorusMap::identity(), &[10], plan).unwrap();
        assert_eq!(id.hull, vec![[0.0, 0.0]]);
        let n = 10_000;
        let susp = estimate_rotation_set(&rigid_suspension(), &[100, n], plan).unwrap();
        assert!(susp.radius_about([GOLDEN, GOLDEN * SILVER]) <= 2.0 / n as f64);
        assert!(estimate_rotation_set(&TorusMap::dehn_twist(1), &[10], plan).is_err());
    }

    #[test]
    fn proximality_of_isometries() {
        let map = TorusMap::rigid(GOLDEN, SILVER);
        let r = proximality_scan(&map, [0.1, 0.1], [0.1, 0.1], 50);
        assert_eq!((r.forward_min, r.backward_min), (0.0, 0.0));
        let d = torus_dist([0.1, 0.2], [0.3, 0.25]);
        let r = proximality_scan(&map, [0.1, 0.2], [0.3, 0.25], 200);
        assert!((r.forward_min - d).abs() < 1e-12 && (r.backward_min - d).abs() < 1e-12);
    }

    #[test]
    fn recurrence_examples() {
        let rigid = TorusMap::rigid(GOLDEN, SILVER);
        let radius = 0.1;
        let n_max = ((1.0f64 / radius).ceil() as usize).pow(2);
        assert!(!recurrence_probe(&rigid, [0.5, 0.5], radius, n_max).is_empty());
        let id = recurrence_probe(&TorusMap::identity(), [0.5, 0.5], 0.05, 20);
        assert_eq!(id, (1..=20).collect::<Vec<_>>());
    }
}
