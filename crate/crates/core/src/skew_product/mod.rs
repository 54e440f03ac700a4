//! The `ρ`-centralized skew-product `F` on `𝕋 × 𝔸`, its symmetry flow `Γ`,
//! and grid approximations of invariant regions.

mod components;
mod mask;
mod saturate;
mod trace;

pub(crate) use components::label_components;
pub use components::{fiber_complement_components, ComponentInfo, FiberComponents};
pub use mask::{GridGeometry, GridMask, MaskProvenance};
pub use trace::{trace_invariant_region, TracePlan};
pub use saturate::{
    invariance_defect, make_block, saturate_invariant_region, InvarianceReport, Saturation, SaturationStatus,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{annulus_dist, circle_dist, frac};
use crate::torus_maps::{LiftedPoint, TorusMap};

/// Commutation threshold for `F∘Γᵘ = Γᵘ∘F`.
pub const COMMUTATION_TOLERANCE: f64 = 1e-9;
/// Threshold for iterates against the closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-7;

/// Point `(t, x, ỹ)` with `t, x ∈ [0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SkewState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl SkewState {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t: frac(t), x: frac(x), y }
    }
}

/// `d_𝕋(t, t′) + d_𝔸(z, z′)`.
pub fn skew_dist(a: &SkewState, b: &SkewState) -> f64 {
    circle_dist(a.t, b.t) + annulus_dist([a.x, a.y], [b.x, b.y])
}

/// `Γᵘ(t, x, ỹ) = (t + u, x, ỹ − u)`.
pub fn gamma_flow(s: &SkewState, u: f64) -> SkewState {
    SkewState { t: frac(s.t + u), x: s.x, y: s.y - u }
}

#[derive(Clone, Debug)]
pub struct CentralizedSkew {
    map: TorusMap,
    rho: f64,
    c_est: Option<f64>,
}

impl CentralizedSkew {
    pub fn new(map: TorusMap, rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::InvalidParameter("non-finite base angle".into()));
        }
        Ok(Self { map, rho, c_est: None })
    }

    /// Attaches a deviation bound measured by `rotation_theory`.
    pub fn with_deviation_bound(mut self, c_est: f64) -> Self {
        self.c_est = Some(c_est);
        self
    }

    pub fn map(&self) -> &TorusMap {
        &self.map
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn twist(&self) -> i64 {
        self.map.twist()
    }

    pub fn deviation_bound(&self) -> Option<f64> {
        self.c_est
    }

    /// `F(t,x,ỹ) = (t+ρ, x + k(ỹ+t) + Δ₁(x,ỹ+t), ỹ + Δ₂(x,ỹ+t) − ρ)`.
    pub fn eval(&self, s: &SkewState) -> SkewState {
        let height = s.y + s.t;
        let d = self.map.displacement([s.x, height]);
        SkewState {
            t: frac(s.t + self.rho),
            x: frac(s.x + self.twist() as f64 * height + d[0]),
            y: s.y + d[1] - self.rho,
        }
    }

    pub fn eval_inverse(&self, s: &SkewState) -> SkewState {
        let t = frac(s.t - self.rho);
        let w = self.map.eval_inverse([s.x, s.y + t + self.rho]);
        SkewState { t, x: frac(w[0]), y: w[1] - t }
    }

    pub fn iterate(&self, s: &SkewState, n: i64) -> SkewState {
        let mut out = *s;
        for _ in 0..n.unsigned_abs() {
            out = if n > 0 { self.eval(&out) } else { self.eval_inverse(&out) };
        }
        out
    }

    /// `Fⁿ(t, ẑ) = (t + nρ, T̂_{−t−nρ} f̂ⁿ T̂_t ẑ)` through the torus lift.
    pub fn closed_form(&self, s: &SkewState, n: i64) -> SkewState {
        let p = self.map.iterate([s.x, s.y + s.t], n);
        let shift = n as f64 * self.rho;
        SkewState {
            t: frac(s.t + shift),
            x: p.frac[0],
            y: (p.cell[1] as f64 - s.t - shift) + p.frac[1],
        }
    }

    /// Iterates `F` from `−n_max` to `n_max`, returning `(n, state)` rows.
    pub fn orbit(&self, s: &SkewState, n_max: usize) -> Vec<(i64, SkewState)> {
        let mut back = Vec::with_capacity(n_max);
        let mut cur = *s;
        for n in 1..=n_max as i64 {
            cur = self.eval_inverse(&cur);
            back.push((-n, cur));
        }
        back.reverse();
        back.push((0, *s));
        let mut cur = *s;
        for n in 1..=n_max as i64 {
            cur = self.eval(&cur);
            back.push((n, cur));
        }
        back
    }
}

/// Seeded random states with `ỹ ∈ [−2, 2)` and flow times `u ∈ [−2, 2)`.
fn random_states(count: usize, seed: u64) -> Vec<(SkewState, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = SkewState::new(rng.gen(), rng.gen(), rng.gen_range(-2.0..2.0));
            (s, rng.gen_range(-2.0..2.0))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub max_defect: f64,
    pub threshold: f64,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
}

impl CheckReport {
    fn new(max_defect: f64, threshold: f64, samples: usize, seed: u64) -> Self {
        Self { max_defect, threshold, passed: max_defect <= threshold, samples, seed }
    }
}

/// `max d(F(Γᵘ s), Γᵘ(F s))` over seeded samples.
pub fn check_commutation(f: &CentralizedSkew, samples: usize, seed: u64) -> CheckReport {
    let worst = random_states(samples, seed)
        .iter()
        .map(|(s, u)| skew_dist(&f.eval(&gamma_flow(s, *u)), &gamma_flow(&f.eval(s), *u)))
        .fold(0.0, f64::max);
    CheckReport::new(worst, COMMUTATION_TOLERANCE, samples, seed)
}

/// Stepwise iterates against the closed form, `|n| ≤ n_max`, `n` drawn per sample.
pub fn check_closed_form(f: &CentralizedSkew, samples: usize, n_max: i64, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let worst = random_states(samples, seed)
        .iter()
        .map(|(s, _)| {
            let n = rng.gen_range(-n_max..=n_max);
            skew_dist(&f.iterate(s, n), &f.closed_form(s, n))
        })
        .fold(0.0, f64::max);
    CheckReport::new(worst, CLOSED_FORM_TOLERANCE, samples, seed)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrbitOscillation {
    pub min_y: f64,
    pub max_y: f64,
    pub oscillation: f64,
}

/// `sup |ỹ_m − ỹ_n|` over `|m|, |n| ≤ n_max`.
pub fn vertical_orbit_bound(f: &CentralizedSkew, s: &SkewState, n_max: usize) -> OrbitOscillation {
    let (mut lo, mut hi) = (s.y, s.y);
    for forward in [true, false] {
        let mut cur = *s;
        for _ in 0..n_max {
            cur = if forward { f.eval(&cur) } else { f.eval_inverse(&cur) };
            lo = lo.min(cur.y);
            hi = hi.max(cur.y);
        }
    }
    OrbitOscillation { min_y: lo, max_y: hi, oscillation: hi - lo }
}

/// `LiftedPoint` of the torus lift corresponding to a state.
pub fn lift_of(s: &SkewState) -> LiftedPoint {
    LiftedPoint::new([s.x, s.y + s.t])
}
