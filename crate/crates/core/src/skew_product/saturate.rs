use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use super::mask::{GridGeometry, GridMask};
use super::{CentralizedSkew, SkewState};
use crate::error::{Error, Result};
use crate::metric::{frac, wrap};

/// Rasterizes the `r`-block `⋃_{|u|<r} Γᵘ({t} × V)` at cell centers.
pub fn make_block(
    geometry: GridGeometry,
    contains: &(dyn Fn([f64; 2]) -> bool + Sync),
    t: f64,
    r: f64,
    label: &str,
) -> Result<GridMask> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::InvalidParameter(format!("block half-width {r} not in (0, 1/2]")));
    }
    let g = geometry;
    let mut mask = GridMask::empty(g, label);
    for it in 0..g.n_t {
        let u = wrap(g.t_center(it) - t);
        if u.abs() >= r {
            continue;
        }
        for ix in 0..g.n_x {
            let x = g.x_center(ix);
            for iy in 0..g.n_y {
                if contains([x, g.y_center(iy) + u]) {
                    mask.set(g.index(it, ix, iy));
                }
            }
        }
    }
    Ok(mask)
}

/// Cross-fiber adjacency: rows of fiber `t ± h_t` whose height intervals
/// overlap the Γ-transport of a given row.
#[derive(Clone, Copy, Debug)]
struct Adjacency {
    next: (i64, i64),
    prev: (i64, i64),
}

impl Adjacency {
    fn new(g: &GridGeometry) -> Self {
        let delta = g.h_t() / g.h_y();
        // Open-interval overlap of [iy − δ, iy + 1 − δ) with [j, j + 1).
        let range = |shift: f64| ((-shift - 1.0).floor() as i64 + 1, (1.0 - shift).ceil() as i64 - 1);
        Self { next: range(delta), prev: range(-delta) }
    }

    fn for_each(&self, g: &GridGeometry, idx: usize, mut visit: impl FnMut(usize)) {
        let (it, ix, iy) = g.coords(idx);
        visit(g.index(it, (ix + 1) % g.n_x, iy));
        visit(g.index(it, (ix + g.n_x - 1) % g.n_x, iy));
        if iy + 1 < g.n_y {
            visit(idx + 1);
        }
        if iy > 0 {
            visit(idx - 1);
        }
        if g.n_t == 1 {
            return;
        }
        for (jt, (lo, hi)) in [((it + 1) % g.n_t, self.next), ((it + g.n_t - 1) % g.n_t, self.prev)] {
            for dy in lo..=hi {
                let jy = iy as i64 + dy;
                if jy >= 0 && jy < g.n_y as i64 {
                    visit(g.index(jt, ix, jy as usize));
                }
            }
        }
    }
}

/// Fraction of a half-cell at which corner samples sit. Corners close to
/// the cell boundary let images straddle neighboring cells, so the cell-level
/// dynamics of a rotation is not a mere permutation of cells.
pub const CORNER_INSET: f64 = 0.9;

/// Sample points of a cell: its center and the eight inset corners.
fn cell_samples(g: &GridGeometry, idx: usize) -> [SkewState; 9] {
    let (it, ix, iy) = g.coords(idx);
    let (t, x, y) = (g.t_center(it), g.x_center(ix), g.y_center(iy));
    let q = 0.5 * CORNER_INSET;
    let (dt, dx, dy) = (q * g.h_t(), q * g.h_x(), q * g.h_y());
    let mut out = [SkewState { t, x, y }; 9];
    for (i, slot) in out.iter_mut().skip(1).enumerate() {
        let sign = |bit: usize| if i >> bit & 1 == 1 { 1.0 } else { -1.0 };
        *slot = SkewState { t: frac(t + sign(0) * dt), x: frac(x + sign(1) * dx), y: y + sign(2) * dy };
    }
    out
}

/// Cells hit by `F` and `F⁻¹` of the sample points; `None` marks an escape.
fn images(f: &CentralizedSkew, g: &GridGeometry, idx: usize, out: &mut Vec<Option<u32>>) {
    for s in cell_samples(g, idx) {
        for w in [f.eval(&s), f.eval_inverse(&s)] {
            out.push(g.locate(w.t, w.x, w.y).map(|c| c as u32));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SaturationStatus {
    Converged,
    MaxIterations,
    WindowExhausted,
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub mask: GridMask,
    pub rounds: usize,
    pub status: SaturationStatus,
}

/// Grows the seed to the grid fixed point of
/// `M ↦ component of the seed in M ∪ F(M) ∪ F⁻¹(M)`.
///
/// Image cells not yet connected to `M` are kept pending and join as soon as
/// a later round connects them.
pub fn saturate_invariant_region(f: &CentralizedSkew, seed: &GridMask, max_iters: usize) -> Result<Saturation> {
    let g = *seed.geometry();
    if seed.count() == 0 {
        return Err(Error::InvalidParameter("saturation seed is empty".into()));
    }
    if let Some(c) = f.deviation_bound() {
        let half = 0.5 * (g.y_max - g.y_min);
        if half < 2.0 * c + 1.0 {
            return Err(Error::InvalidParameter(format!(
                "window half-height {half} is below 2·C_est + 1 = {}",
                2.0 * c + 1.0
            )));
        }
    }
    let adjacency = Adjacency::new(&g);
    let mut mask = seed.clone();
    let mut pending = GridMask::empty(g, "");
    let mut frontier: Vec<usize> = mask.iter_ones().collect();
    let mut rounds = 0;
    let mut status = SaturationStatus::Converged;
    if mask.touches_window_edge() {
        status = SaturationStatus::WindowExhausted;
        frontier.clear();
    }
    while !frontier.is_empty() {
        if rounds == max_iters {
            status = SaturationStatus::MaxIterations;
            break;
        }
        rounds += 1;
        let hits: Vec<Option<u32>> = frontier
            .par_chunks(1024)
            .flat_map_iter(|chunk| {
                let mut out = Vec::with_capacity(chunk.len() * 18);
                for &idx in chunk {
                    images(f, &g, idx, &mut out);
                }
                out
            })
            .collect();
        if hits.iter().any(Option::is_none) {
            status = SaturationStatus::WindowExhausted;
            break;
        }
        let mut queue = VecDeque::new();
        for c in hits.into_iter().flatten() {
            let c = c as usize;
            if mask.get(c) || pending.get(c) {
                continue;
            }
            pending.set(c);
            let mut linked = false;
            adjacency.for_each(&g, c, |n| linked |= mask.get(n));
            if linked {
                queue.push_back(c);
            }
        }
        let mut added = Vec::new();
        while let Some(c) = queue.pop_front() {
            if !pending.get(c) {
                continue;
            }
            pending.clear(c);
            mask.set(c);
            added.push(c);
            adjacency.for_each(&g, c, |n| {
                if pending.get(n) {
                    queue.push_back(n);
                }
            });
        }
        frontier = added;
        if mask.touches_window_edge() {
            status = SaturationStatus::WindowExhausted;
            break;
        }
    }
    mask.provenance.iterations = rounds;
    Ok(Saturation { mask, rounds, status })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InvarianceReport {
    /// Sampled images under `F` landing outside the one-cell dilation.
    pub forward_outside: usize,
    /// Same for `F⁻¹`.
    pub backward_outside: usize,
    pub escaped: usize,
}

impl InvarianceReport {
    pub fn within_one_cell(&self) -> bool {
        self.forward_outside == 0 && self.backward_outside == 0 && self.escaped == 0
    }
}

pub fn invariance_defect(f: &CentralizedSkew, mask: &GridMask) -> InvarianceReport {
    let g = *mask.geometry();
    let grown = mask.dilated();
    let cells: Vec<usize> = mask.iter_ones().collect();
    cells
        .par_iter()
        .map(|&idx| {
            let mut r = InvarianceReport { forward_outside: 0, backward_outside: 0, escaped: 0 };
            for s in cell_samples(&g, idx) {
                for (forward, w) in [(true, f.eval(&s)), (false, f.eval_inverse(&s))] {
                    match g.locate(w.t, w.x, w.y) {
                        None => r.escaped += 1,
                        Some(c) if !grown.get(c) => {
                            if forward {
                                r.forward_outside += 1
                            } else {
                                r.backward_outside += 1
                            }
                        }
                        Some(_) => {}
                    }
                }
            }
            r
        })
        .reduce(
            || InvarianceReport { forward_outside: 0, backward_outside: 0, escaped: 0 },
            |a, b| InvarianceReport {
                forward_outside: a.forward_outside + b.forward_outside,
                backward_outside: a.backward_outside + b.backward_outside,
                escaped: a.escaped + b.escaped,
            },
        )
}
