use rayon::prelude::*;
use serde::Serialize;

use super::mask::GridMask;
use super::saturate::{Saturation, SaturationStatus};
use super::{CentralizedSkew, SkewState};
use crate::error::{Error, Result};

/// Sampling parameters for [`trace_invariant_region`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TracePlan {
    /// Interior seed cells are sampled on every `stride`-th cell in `t` and
    /// `x`; cells on the fiber boundary of the seed are always sampled.
    pub stride: usize,
    /// Orbit steps taken in each direction per round. An orbit retires after
    /// a round that visits no new cell.
    pub chunk: usize,
    /// Cap on the steps taken in each direction.
    pub max_steps: usize,
}

impl Default for TracePlan {
    fn default() -> Self {
        Self { stride: 16, chunk: 64, max_steps: 1 << 20 }
    }
}

#[derive(Clone, Copy)]
struct Orbit {
    forward: SkewState,
    backward: SkewState,
}

fn on_fiber_boundary(mask: &GridMask, idx: usize) -> bool {
    let g = mask.geometry();
    let (it, ix, iy) = g.coords(idx);
    iy == 0
        || iy + 1 == g.n_y
        || !mask.get(idx - 1)
        || !mask.get(idx + 1)
        || !mask.get(g.index(it, (ix + 1) % g.n_x, iy))
        || !mask.get(g.index(it, (ix + g.n_x - 1) % g.n_x, iy))
}

/// Union of the seed with the cells visited by true `F`-orbits of seed
/// cell centers.
///
/// Orbits are followed in both directions in rounds of `plan.chunk` steps;
/// an orbit stops once a round adds nothing, and the trace has converged
/// when every orbit has stopped. Only exact orbit points are rasterized, so
/// the region cannot drift through re-gridding; it approximates the
/// invariant region from inside.
pub fn trace_invariant_region(f: &CentralizedSkew, seed: &GridMask, plan: TracePlan) -> Result<Saturation> {
    let g = *seed.geometry();
    if seed.count() == 0 {
        return Err(Error::InvalidParameter("trace seed is empty".into()));
    }
    if plan.stride == 0 || plan.chunk == 0 {
        return Err(Error::InvalidParameter("trace stride and chunk must be positive".into()));
    }
    let center = |idx: usize| {
        let (it, ix, iy) = g.coords(idx);
        SkewState::new(g.t_center(it), g.x_center(ix), g.y_center(iy))
    };
    let sampled = |idx: &usize| {
        let (it, ix, _) = g.coords(*idx);
        (it % plan.stride == 0 && ix % plan.stride == 0) || on_fiber_boundary(seed, *idx)
    };
    let mut active: Vec<Orbit> = seed
        .iter_ones()
        .filter(sampled)
        .map(|idx| Orbit { forward: center(idx), backward: center(idx) })
        .collect();
    let mut mask = seed.clone();
    let mut status = if mask.touches_window_edge() {
        SaturationStatus::WindowExhausted
    } else {
        SaturationStatus::Converged
    };
    let (mut rounds, mut steps) = (0, 0);
    while status == SaturationStatus::Converged && !active.is_empty() {
        if steps >= plan.max_steps {
            status = SaturationStatus::MaxIterations;
            break;
        }
        let chunk = plan.chunk.min(plan.max_steps - steps);
        rounds += 1;
        steps += chunk;
        let snapshot = &mask;
        let advanced: Vec<(Orbit, Vec<u32>, bool)> = active
            .par_iter()
            .map(|orbit| {
                let mut o = *orbit;
                let mut fresh = Vec::new();
                let mut escaped = false;
                for _ in 0..chunk {
                    o.forward = f.eval(&o.forward);
                    o.backward = f.eval_inverse(&o.backward);
                    for w in [o.forward, o.backward] {
                        match g.locate(w.t, w.x, w.y) {
                            Some(c) if !snapshot.get(c) => fresh.push(c as u32),
                            Some(_) => {}
                            None => escaped = true,
                        }
                    }
                }
                (o, fresh, escaped)
            })
            .collect();
        active.clear();
        for (orbit, fresh, escaped) in advanced {
            if escaped {
                status = SaturationStatus::WindowExhausted;
            }
            if !fresh.is_empty() {
                active.push(orbit);
            }
            for c in fresh {
                mask.set(c as usize);
            }
        }
        if mask.touches_window_edge() {
            status = SaturationStatus::WindowExhausted;
        }
    }
    mask.provenance.iterations = rounds;
    Ok(Saturation { mask, rounds, status })
}
