use serde::Serialize;

use crate::circle_maps::{CircleLift, DenjoyGap, GeometricSchedule};
use crate::error::{Error, Result};
use crate::metric::{frac, torus_dist};
use crate::rotation_theory::disk_samples;
use crate::torus_maps::{DiskPush, Suspension, TorusMap};
use crate::{GOLDEN, SILVER};

/// Gaps materialized in every gallery Denjoy map.
pub const DENJOY_TRUNCATION: usize = 40;
/// Orbit length used to estimate the rotation number of a piecewise-affine lift.
const ROTATION_ORBIT: usize = 100_000;

/// Suspension of a circle homeomorphism under the time-`g̃₁` map, with its
/// expected rotation vector.
#[derive(Clone, Debug)]
pub struct SuspensionSpec {
    pub suspension: Suspension,
    pub map: TorusMap,
    /// `(ρ(g̃₁), ρ(g̃₁)·ρ(g̃₂))`.
    pub rotation_target: [f64; 2],
    /// Summed truncation tolerance of the Denjoy factors.
    pub truncation_slack: f64,
}

fn nominal_rotation(lift: &CircleLift) -> Result<f64> {
    Ok(match lift {
        CircleLift::Rigid { alpha } => *alpha,
        CircleLift::Denjoy(d) => d.alpha(),
        CircleLift::PiecewiseAffine { .. } => lift.rotation_number(0.0, ROTATION_ORBIT)?.estimate,
    })
}

fn slack(lift: &CircleLift) -> f64 {
    lift.as_denjoy().map_or(0.0, |d| d.truncation_tolerance())
}

pub fn suspension_map(base: CircleLift, fiber: CircleLift) -> Result<SuspensionSpec> {
    suspension_map_warped(base, fiber, Suspension::DEFAULT_WARP)
}

pub fn suspension_map_warped(base: CircleLift, fiber: CircleLift, warp: f64) -> Result<SuspensionSpec> {
    let rho1 = nominal_rotation(&base)?;
    let rho2 = nominal_rotation(&fiber)?;
    let truncation_slack = slack(&base) + slack(&fiber);
    let suspension = Suspension::new(base, fiber, warp)?;
    Ok(SuspensionSpec {
        map: TorusMap::Suspension(Box::new(suspension.clone())),
        suspension,
        rotation_target: [rho1, rho1 * rho2],
        truncation_slack,
    })
}

fn denjoy(alpha: f64) -> Result<CircleLift> {
    CircleLift::denjoy(alpha, &GeometricSchedule::default(), DENJOY_TRUNCATION)
}

/// The rigid/rigid suspension with golden base and silver fiber.
pub fn rigid_suspension() -> Result<SuspensionSpec> {
    suspension_map(CircleLift::rigid(GOLDEN)?, CircleLift::rigid(SILVER)?)
}

/// Open set `{chart(s, x) : s ∈ times, x ∈ interior of the fiber gap}`.
#[derive(Clone, Debug, Serialize)]
pub struct WanderingBlock {
    pub times: [f64; 2],
    pub fiber_gap: DenjoyGap,
}

impl WanderingBlock {
    pub fn contains(&self, suspension: &Suspension, z: [f64; 2]) -> bool {
        let [t, x] = suspension.chart_inverse(frac(z[0]), z[1]);
        let inside_gap = {
            let d = frac(x - self.fiber_gap.start);
            d > 0.0 && d < self.fiber_gap.end - self.fiber_gap.start
        };
        t > self.times[0] && t < self.times[1] && inside_gap
    }
}

/// `w₀, w₁` in the wandering block and `w₀′, w₁′` the gap endpoints on
/// the fiber segments through them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbePoints {
    pub w0: [f64; 2],
    pub w1: [f64; 2],
    pub w0_end: [f64; 2],
    pub w1_end: [f64; 2],
}

/// `f = g∘ℓ` for a suspension `g` and a push `ℓ` supported in a wandering block.
#[derive(Clone, Debug)]
pub struct ObstructionExample {
    pub id: &'static str,
    pub base: SuspensionSpec,
    pub push: DiskPush,
    pub map: TorusMap,
    pub block: WanderingBlock,
    /// Suspension times of `w₀` and `w₁`.
    pub times: [f64; 2],
    pub probes: ProbePoints,
}

/// Number of sample points used to certify that the push support lies in the block.
pub const SUPPORT_SAMPLES: usize = 4096;

impl ObstructionExample {
    /// Whether sampled points of the closed push disk all lie in the block.
    pub fn support_in_block(&self) -> bool {
        let center = self.push.center();
        let r = self.push.radius();
        let rim = (0..720).map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 720.0;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        });
        disk_samples(center, r, SUPPORT_SAMPLES)
            .into_iter()
            .chain(rim)
            .all(|z| self.block.contains(&self.base.suspension, z))
    }

    fn assemble(
        id: &'static str,
        base: SuspensionSpec,
        block: WanderingBlock,
        times: [f64; 2],
        fiber_point: f64,
        radius: f64,
    ) -> Result<Self> {
        let chart = |s: f64, x: f64| base.suspension.chart(s, x);
        let probes = ProbePoints {
            w0: chart(times[0], fiber_point),
            w1: chart(times[1], fiber_point),
            w0_end: chart(times[0], frac(block.fiber_gap.start)),
            w1_end: chart(times[1], frac(block.fiber_gap.start)),
        };
        let push = DiskPush::new(probes.w0, probes.w1, radius)?;
        let map = TorusMap::composed(vec![base.map.clone(), TorusMap::DiskPush(push.clone())])?;
        let example = Self { id, base, push, map, block, times, probes };
        if !example.support_in_block() {
            return Err(Error::InvalidParameter(format!("{id}: push support leaves the wandering block")));
        }
        Ok(example)
    }
}

/// Parameters of the inessential example: rigid base, Denjoy fiber.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InessentialParams {
    pub block_times: [f64; 2],
    pub times: [f64; 2],
    pub push_radius: f64,
}

impl Default for InessentialParams {
    fn default() -> Self {
        Self { block_times: [0.05, 0.35], times: [0.2, 0.218], push_radius: 0.03 }
    }
}

/// Rigid golden base over a silver Denjoy fiber; a push inside one
/// wandering block carries `w₀` to `w₁`.
pub fn example_unbounded_inessential(params: InessentialParams) -> Result<ObstructionExample> {
    let base = suspension_map(CircleLift::rigid(GOLDEN)?, denjoy(SILVER)?)?;
    let gap = fiber_gap(&base)?;
    let mid = frac(0.5 * (gap.start + gap.end));
    let block = WanderingBlock { times: params.block_times, fiber_gap: gap };
    ObstructionExample::assemble("3.2", base, block, params.times, mid, params.push_radius)
}

/// Parameters of the fully essential example: Denjoy base and fiber.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EssentialParams {
    /// Rotation coordinate of the base point blown up to `s₀`.
    pub base_angle: f64,
    /// Requested `s₁ − s₀`; nudged forward out of base gaps.
    pub offset: f64,
    /// Half-length `ε` of the block in suspension time.
    pub epsilon: f64,
    pub push_radius: f64,
}

impl Default for EssentialParams {
    fn default() -> Self {
        Self { base_angle: 0.2, offset: 0.018, epsilon: 0.05, push_radius: 0.03 }
    }
}

/// Denjoy golden base over a silver Denjoy fiber.
pub fn example_fully_essential(params: EssentialParams) -> Result<ObstructionExample> {
    let base = suspension_map(denjoy(GOLDEN)?, denjoy(SILVER)?)?;
    let base_lift = base.suspension.base().as_denjoy().expect("Denjoy base");
    let table = base_lift.gap_table();
    let s0 = frac(base_lift.blowup(params.base_angle));
    if table.containing(s0).is_some() {
        return Err(Error::InvalidParameter(format!("s₀ = {s0} lies in a base gap")));
    }
    let mut s1 = s0 + params.offset;
    while let Some(n) = table.containing(s1) {
        let g = table.gap(n).expect("materialized gap");
        s1 += frac(g.end - s1) + 1e-9;
    }
    if (s1 - s0).abs() >= params.epsilon {
        return Err(Error::InvalidParameter("s₁ left the block".into()));
    }
    let gap = fiber_gap(&base)?;
    let mid = frac(0.5 * (gap.start + gap.end));
    let block = WanderingBlock { times: [s0 - params.epsilon, s0 + params.epsilon], fiber_gap: gap };
    ObstructionExample::assemble("3.3", base, block, [s0, s1], mid, params.push_radius)
}

fn fiber_gap(spec: &SuspensionSpec) -> Result<DenjoyGap> {
    spec.suspension
        .fiber()
        .as_denjoy()
        .and_then(|d| d.gap_table().gap(0))
        .cloned()
        .ok_or_else(|| Error::InvalidParameter("fiber map has no gap".into()))
}

/// Grid points `t ∈ (0,1)` whose suspension time `t·s₀ + (1−t)·s₁` projects
/// outside every materialized base gap.
pub fn crossing_times(example: &ObstructionExample, grid: usize) -> Vec<f64> {
    let Some(table) = example.base.suspension.base().as_denjoy().map(|d| d.gap_table()) else {
        return Vec::new();
    };
    let [s0, s1] = example.times;
    (1..grid)
        .map(|i| i as f64 / grid as f64)
        .filter(|t| table.containing(t * s0 + (1.0 - t) * s1).is_none())
        .collect()
}

/// Center and radius of a ball inside the strip over base gap 0.
pub fn base_gap_ball(example: &ObstructionExample) -> Option<([f64; 2], f64)> {
    let gap = example.base.suspension.base().as_denjoy()?.gap_table().gap(0)?.clone();
    let center = [frac(0.5 * (gap.start + gap.end)), 0.5];
    Some((center, (0.3 * (gap.end - gap.start)).min(0.025)))
}

/// Distance from `w₀` to `w₁` on the torus.
pub fn probe_separation(p: &ProbePoints) -> f64 {
    torus_dist(p.w0, p.w1)
}
