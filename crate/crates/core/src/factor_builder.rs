//! Circle factors from bounded vertical deviations.
//!
//! An invariant region `𝒯` of the centralized skew-product is traced on a
//! grid. Translating its fibers by the symmetry flow gives a monotone family
//! of lower components `𝒯₀^{s,−}` in the annulus, whose boundaries `𝒞ˢ` are
//! the level sets of a lifted factor map `ĥ`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{annulus_dist, circle_dist, frac};
use crate::rotation_theory::{estimate_rotation_set, SamplePlan};
use crate::skew_product::{
    label_components, make_block, trace_invariant_region, CentralizedSkew, GridGeometry, GridMask, SaturationStatus,
    TracePlan,
};
use crate::torus_maps::TorusMap;

/// The open ball that seeds `𝒯`, spread into a block over `t ∈ (−w, w)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeedBall {
    pub center: [f64; 2],
    pub radius: f64,
    pub half_width: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TauOptions {
    /// Cells in `t`, `x` and height.
    pub resolution: [usize; 3],
    /// Half-height of the window, centered on the seed height.
    pub half_height: f64,
    pub plan: TracePlan,
}

impl TauOptions {
    pub const DEFAULT_RESOLUTION: [usize; 3] = [256, 256, 512];

    /// Default resolution with window `2·C + 2` for a measured deviation
    /// bound `C`.
    pub fn for_deviation(c_est: f64) -> Self {
        Self { resolution: Self::DEFAULT_RESOLUTION, half_height: 2.0 * c_est + 2.0, plan: TracePlan::default() }
    }

    pub fn with_resolution(mut self, resolution: [usize; 3]) -> Self {
        self.resolution = resolution;
        self
    }
}

/// Lower component of one fiber complement, row-major `n_x × n_y`.
#[derive(Clone, Debug)]
struct FiberLower {
    cells: Vec<bool>,
    separating: bool,
}

#[derive(Debug)]
pub struct TauRegion {
    mask: GridMask,
    skew: CentralizedSkew,
    seed: SeedBall,
    status: SaturationStatus,
    rounds: usize,
    warnings: Vec<String>,
    lowers: Vec<OnceLock<FiberLower>>,
}

/// Traces `𝒯` from the half-block over the ball of `radius` about
/// `seed_point`. `recurrence` is the return-time evidence for the seed point;
/// an empty list is recorded as a warning.
pub fn build_tau(
    skew: CentralizedSkew,
    seed_point: [f64; 2],
    radius: f64,
    recurrence: &[usize],
    options: TauOptions,
) -> Result<TauRegion> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::InvalidParameter(format!("ball radius {radius} not in (0, 1]")));
    }
    if let Some(c) = skew.deviation_bound() {
        if options.half_height < 2.0 * c + 1.0 {
            return Err(Error::InvalidParameter(format!(
                "window half-height {} is below 2·C_est + 1 = {}",
                options.half_height,
                2.0 * c + 1.0
            )));
        }
    }
    let [n_t, n_x, n_y] = options.resolution;
    let y0 = seed_point[1];
    let geometry = GridGeometry::new(n_t, n_x, n_y, y0 - options.half_height, y0 + options.half_height)?;
    let seed = SeedBall { center: [frac(seed_point[0]), y0], radius, half_width: 0.5 };
    let ball = move |z: [f64; 2]| annulus_dist(z, seed.center) < radius;
    let label = format!("ball({:.6},{:.6};{radius})", seed.center[0], seed.center[1]);
    let block = make_block(geometry, &ball, 0.0, seed.half_width, &label)?;
    let traced = trace_invariant_region(&skew, &block, options.plan)?;
    if traced.status == SaturationStatus::WindowExhausted {
        return Err(Error::WindowExhausted { rounds: traced.rounds });
    }
    let mut warnings = Vec::new();
    if recurrence.is_empty() {
        warnings.push("seed point has no recurrence evidence".to_string());
    }
    if traced.status == SaturationStatus::MaxIterations {
        warnings.push(format!("orbit tracing stopped at the step cap after {} rounds", traced.rounds));
    }
    Ok(TauRegion {
        mask: traced.mask,
        skew,
        seed,
        status: traced.status,
        rounds: traced.rounds,
        warnings,
        lowers: (0..n_t).map(|_| OnceLock::new()).collect(),
    })
}

/// `𝒯₀^{s,−}`: the lower component of the `t = frac(s)` fiber, raised by `s`.
#[derive(Clone, Copy, Debug)]
pub struct LowerComponent<'a> {
    tau: &'a TauRegion,
    pub s: f64,
    pub fiber: usize,
    pub separating: bool,
}

impl LowerComponent<'_> {
    pub fn contains(&self, z: [f64; 2]) -> bool {
        self.tau.lower_contains(self.fiber, z[0], z[1] - self.s)
    }

    /// Membership at the cell centers of the window grid, row-major
    /// `n_x × n_y`.
    pub fn rasterize(&self) -> Vec<bool> {
        let g = self.tau.geometry();
        let mut out = Vec::with_capacity(g.n_x * g.n_y);
        for ix in 0..g.n_x {
            for iy in 0..g.n_y {
                out.push(self.contains([g.x_center(ix), g.y_center(iy)]));
            }
        }
        out
    }
}

/// Sampled boundary of a lower component.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuumApprox {
    pub s: f64,
    /// Midpoints of the cell faces between the component and the rest.
    pub cloud: Vec<[f64; 2]>,
    #[serde(skip)]
    pub lower: Vec<bool>,
}

impl ContinuumApprox {
    /// Smallest annulus distance between two clouds.
    pub fn distance_to(&self, other: &ContinuumApprox) -> f64 {
        self.cloud
            .par_iter()
            .map(|a| other.cloud.iter().map(|b| annulus_dist(*a, *b)).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min)
    }
}

impl TauRegion {
    pub fn mask(&self) -> &GridMask {
        &self.mask
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.mask.geometry()
    }

    pub fn skew(&self) -> &CentralizedSkew {
        &self.skew
    }

    pub fn seed(&self) -> &SeedBall {
        &self.seed
    }

    pub fn status(&self) -> SaturationStatus {
        self.status
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Height of one cell; the default spacing of the `s` ladder.
    pub fn s_step(&self) -> f64 {
        self.geometry().h_y()
    }

    /// Rows `(lowest, highest)` occupied anywhere in `𝒯`.
    pub fn vertical_extent(&self) -> (f64, f64) {
        let g = self.geometry();
        let (lo, hi) = self.mask.row_range().expect("traced region contains its seed");
        (g.y_min + lo as f64 * g.h_y(), g.y_min + (hi + 1) as f64 * g.h_y())
    }

    fn fiber_lower(&self, it: usize) -> &FiberLower {
        self.lowers[it].get_or_init(|| {
            let g = self.geometry();
            let open: Vec<bool> = self.mask.fiber(it).iter().map(|b| !b).collect();
            let (labels, infos) = label_components(&open, g.n_x, g.n_y);
            let cells: Vec<bool> = labels
                .iter()
                .zip(&open)
                .map(|(&l, &o)| o && infos[l as usize].touches_bottom)
                .collect();
            let separating = infos.iter().all(|c| !(c.touches_bottom && c.touches_top));
            FiberLower { cells, separating }
        })
    }

    /// Whether `(x, y)` lies in the lower component of fiber `it`; points
    /// below the window are inside, points above it outside.
    fn lower_contains(&self, it: usize, x: f64, y: f64) -> bool {
        let g = self.geometry();
        if y < g.y_min {
            return true;
        }
        match g.y_cell(y) {
            Some(iy) => self.fiber_lower(it).cells[g.x_cell(x) * g.n_y + iy],
            None => false,
        }
    }

    pub fn lower_component(&self, s: f64) -> LowerComponent<'_> {
        let fiber = self.geometry().t_cell(frac(s));
        LowerComponent { tau: self, s, fiber, separating: self.fiber_lower(fiber).separating }
    }

    /// Computes every fiber's lower component up front.
    pub fn prepare(&self) {
        (0..self.lowers.len()).into_par_iter().for_each(|it| {
            self.fiber_lower(it);
        });
    }

    pub fn continuum(&self, s: f64) -> Result<ContinuumApprox> {
        let lower = self.lower_component(s);
        if !lower.separating {
            return Err(Error::NotSeparating { t: frac(s) });
        }
        let g = self.geometry();
        let cells = lower.rasterize();
        let mut cloud = Vec::new();
        for ix in 0..g.n_x {
            for iy in 0..g.n_y {
                let here = cells[ix * g.n_y + iy];
                let right = cells[((ix + 1) % g.n_x) * g.n_y + iy];
                if here != right {
                    cloud.push([frac(g.x_center(ix) + 0.5 * g.h_x()), g.y_center(iy)]);
                }
                if iy + 1 < g.n_y && here != cells[ix * g.n_y + iy + 1] {
                    cloud.push([g.x_center(ix), g.y_center(iy) + 0.5 * g.h_y()]);
                }
            }
        }
        Ok(ContinuumApprox { s, cloud, lower: cells })
    }

    /// `ĥ(z) = inf{s : z ∈ 𝒯₀^{s,−}}`, bracketed on the `s` ladder and
    /// refined by bisection to width `tol`.
    pub fn evaluate_h(&self, z: [f64; 2], tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
        }
        let g = self.geometry();
        let step = self.s_step();
        let lo = z[1] - g.y_max - step;
        let count = g.n_y + 3;
        let member = |s: f64| -> Result<bool> {
            let lower = self.lower_component(s);
            if !lower.separating {
                return Err(Error::NotSeparating { t: frac(s) });
            }
            Ok(lower.contains(z))
        };
        let mut first_in = None;
        let mut last_out = None;
        for j in 0..=count {
            let s = lo + j as f64 * step;
            if member(s)? {
                first_in.get_or_insert(j);
            } else {
                last_out = Some(j);
            }
        }
        let (a, b) = match (first_in, last_out) {
            (Some(a), Some(b)) => (a, b),
            _ => unreachable!("ladder starts outside and ends inside"),
        };
        if b > a + 1 {
            return Err(Error::OrderingViolated { lower: lo + a as f64 * step, upper: lo + b as f64 * step });
        }
        let (mut left, mut right) = (lo + (a - 1) as f64 * step, lo + a as f64 * step);
        while right - left > tol {
            let mid = 0.5 * (left + right);
            if member(mid)? {
                right = mid;
            } else {
                left = mid;
            }
        }
        Ok(0.5 * (left + right))
    }

    /// One step of the annulus lift `f̂`.
    pub fn lift_step(&self, z: [f64; 2]) -> [f64; 2] {
        let w = self.skew.map().eval(z);
        [frac(w[0]), w[1]]
    }

    /// Counts pairs on the ladder `s_j = j·step` over one unit whose lower
    /// components fail strict inclusion at separations of 2 and 3 steps,
    /// which covers every separation of at least 2 steps by transitivity.
    pub fn ordering_violations(&self) -> (usize, usize) {
        let step = self.s_step();
        let n = (1.0 / step).ceil() as usize + 3;
        let masks: Vec<Vec<bool>> = (0..n).into_par_iter().map(|j| self.lower_component(j as f64 * step).rasterize()).collect();
        let mut pairs = 0;
        let mut violations = 0;
        for gap in [2, 3] {
            for j in 0..n - gap {
                pairs += 1;
                let (a, b) = (&masks[j], &masks[j + gap]);
                let subset = a.iter().zip(b).all(|(&p, &q)| !p || q);
                if !subset || a == b {
                    violations += 1;
                }
            }
        }
        (violations, pairs)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    /// `max |ĥ(z + (0,1)) − ĥ(z) − 1|`.
    pub translate_defect: f64,
    /// `max |ĥ(f̂(z)) − ĥ(z) − ρ|`.
    pub dynamics_defect: f64,
    pub ordering_violations: usize,
    pub ordering_pairs: usize,
    /// Samples where `ĥ` could not be evaluated.
    pub failures: usize,
}

pub fn verify_equivariance(tau: &TauRegion, samples: &[[f64; 2]], tol: f64) -> EquivarianceReport {
    tau.prepare();
    let rho = tau.skew().rho();
    let defects: Vec<Option<(f64, f64)>> = samples
        .par_iter()
        .map(|&z| {
            let h = tau.evaluate_h(z, tol).ok()?;
            let up = tau.evaluate_h([z[0], z[1] + 1.0], tol).ok()?;
            let image = tau.evaluate_h(tau.lift_step(z), tol).ok()?;
            Some(((up - h - 1.0).abs(), (image - h - rho).abs()))
        })
        .collect();
    let (ordering_violations, ordering_pairs) = tau.ordering_violations();
    let ok: Vec<(f64, f64)> = defects.iter().flatten().copied().collect();
    EquivarianceReport {
        samples: samples.len(),
        translate_defect: ok.iter().map(|d| d.0).fold(0.0, f64::max),
        dynamics_defect: ok.iter().map(|d| d.1).fold(0.0, f64::max),
        ordering_violations,
        ordering_pairs,
        failures: defects.len() - ok.len(),
    }
}

/// `ĥ` sampled at the cell centers of an `n_x × n_y` grid on `[0,1)²`.
#[derive(Clone, Debug, Serialize)]
pub struct FactorMap {
    pub resolution: [usize; 2],
    pub tol: f64,
    pub rho: f64,
    /// Height of one cell of the grid `𝒯` lives on.
    pub cell: f64,
    /// `ĥ` row-major in `x`, then height; `NaN` where evaluation failed.
    pub values: Vec<f64>,
    /// Circle distance `|h∘f − T_ρ∘h|`, max and mean over the grid.
    pub defect_max: f64,
    pub defect_mean: f64,
    /// Minimax fit `ĥ ≈ ỹ + offset` and its residual.
    pub offset: f64,
    pub fit_residual: f64,
    /// Vertical neighbors where `ĥ` decreases by more than `tol`.
    pub monotonicity_violations: usize,
    pub failures: usize,
}

impl FactorMap {
    pub fn point(&self, ix: usize, iy: usize) -> [f64; 2] {
        [(ix as f64 + 0.5) / self.resolution[0] as f64, (iy as f64 + 0.5) / self.resolution[1] as f64]
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.resolution[1] + iy]
    }
}

pub fn project_to_torus_factor(tau: &TauRegion, resolution: [usize; 2], tol: f64) -> Result<FactorMap> {
    let [n_x, n_y] = resolution;
    if n_x == 0 || n_y == 0 {
        return Err(Error::InvalidParameter("factor grid needs positive resolution".into()));
    }
    tau.prepare();
    let rho = tau.skew().rho();
    let point = |i: usize| [((i / n_y) as f64 + 0.5) / n_x as f64, ((i % n_y) as f64 + 0.5) / n_y as f64];
    let rows: Vec<(f64, Option<f64>)> = (0..n_x * n_y)
        .into_par_iter()
        .map(|i| {
            let z = point(i);
            let Ok(h) = tau.evaluate_h(z, tol) else {
                return (f64::NAN, None);
            };
            let defect = tau.evaluate_h(tau.lift_step(z), tol).ok().map(|hf| circle_dist(hf, h + rho));
            (h, defect)
        })
        .collect();
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let defects: Vec<f64> = rows.iter().filter_map(|r| r.1).collect();
    let failures = rows.iter().filter(|r| r.1.is_none()).count();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, h) in values.iter().enumerate().filter(|(_, h)| h.is_finite()) {
        let r = h - point(i)[1];
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let monotonicity_violations = (0..n_x)
        .flat_map(|ix| (1..n_y).map(move |iy| ix * n_y + iy))
        .filter(|&i| values[i - 1] - values[i] > tol)
        .count();
    Ok(FactorMap {
        resolution,
        tol,
        rho,
        cell: tau.s_step(),
        defect_max: defects.iter().copied().fold(0.0, f64::max),
        defect_mean: if defects.is_empty() { f64::NAN } else { defects.iter().sum::<f64>() / defects.len() as f64 },
        offset: 0.5 * (lo + hi),
        fit_residual: 0.5 * (hi - lo),
        values,
        monotonicity_violations,
        failures,
    })
}

/// Two circle factors, one per coordinate.
#[derive(Clone, Debug, Serialize)]
pub struct DoubleFactor {
    /// Factor onto the first coordinate rotation, built on the swapped map.
    pub horizontal: FactorMap,
    pub vertical: FactorMap,
    /// Largest of the two coordinate defects of `H∘f − T_ρ∘H`.
    pub joint_defect: f64,
}

/// Largest rotation-cloud diameter accepted as a pseudo-rotation.
pub const PSEUDO_ROTATION_DIAMETER: f64 = 0.05;

/// Builds `H = (h₁, h₂)` by running the single-factor pipeline on the map
/// and on its coordinate swap. `seeds` and `options` are given in each
/// pipeline's own coordinates, horizontal first.
pub fn double_factor(
    map: &TorusMap,
    rho: [f64; 2],
    seeds: [[f64; 2]; 2],
    options: [TauOptions; 2],
    resolution: [usize; 2],
    tol: f64,
) -> Result<DoubleFactor> {
    if map.twist() != 0 {
        return Err(Error::Refused(format!(
            "linear part is a Dehn twist with k = {}; a pair of circle factors needs a map isotopic to the identity",
            map.twist()
        )));
    }
    let cloud = estimate_rotation_set(map, &[1000], SamplePlan::new(64, 0))?;
    if cloud.diameter() > PSEUDO_ROTATION_DIAMETER {
        return Err(Error::Refused(format!(
            "rotation set estimate has diameter {:.3}; not a pseudo-rotation",
            cloud.diameter()
        )));
    }
    let swapped = TorusMap::swapped(map.clone())?;
    let across = build_tau(CentralizedSkew::new(swapped, rho[0])?, seeds[0], 1.0, &[1], options[0])?;
    let up = build_tau(CentralizedSkew::new(map.clone(), rho[1])?, seeds[1], 1.0, &[1], options[1])?;
    let horizontal = project_to_torus_factor(&across, resolution, tol)?;
    let vertical = project_to_torus_factor(&up, resolution, tol)?;
    let joint_defect = horizontal.defect_max.max(vertical.defect_max);
    Ok(DoubleFactor { horizontal, vertical, joint_defect })
}
