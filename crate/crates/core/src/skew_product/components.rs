use serde::Serialize;

use super::mask::GridMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentInfo {
    pub size: usize,
    pub touches_bottom: bool,
    pub touches_top: bool,
}

impl ComponentInfo {
    pub fn unbounded(&self) -> bool {
        self.touches_bottom || self.touches_top
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberComponents {
    pub fiber: usize,
    /// In order of first cell (x, then ỹ ascending).
    pub components: Vec<ComponentInfo>,
    /// The fiber holds no mask cell, so the complement is the whole window.
    pub degenerate: bool,
}

impl FiberComponents {
    pub fn unbounded_count(&self) -> usize {
        self.components.iter().filter(|c| c.unbounded()).count()
    }

    /// Exactly two unbounded components, one reaching only the top edge and
    /// one reaching only the bottom edge.
    pub fn has_two_unbounded(&self) -> bool {
        let unbounded: Vec<&ComponentInfo> = self.components.iter().filter(|c| c.unbounded()).collect();
        unbounded.len() == 2
            && unbounded.iter().filter(|c| c.touches_top && !c.touches_bottom).count() == 1
            && unbounded.iter().filter(|c| c.touches_bottom && !c.touches_top).count() == 1
    }
}

/// Labels the 4-connected components (x wraps) of a fiber occupancy vector
/// laid out as `n_x × n_y`, where `open[i]` marks cells to be labeled.
pub(crate) fn label_components(open: &[bool], n_x: usize, n_y: usize) -> (Vec<u32>, Vec<ComponentInfo>) {
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; open.len()];
    let mut infos = Vec::new();
    let mut stack = Vec::new();
    for start in 0..open.len() {
        if !open[start] || labels[start] != NONE {
            continue;
        }
        let id = infos.len() as u32;
        let mut info = ComponentInfo { size: 0, touches_bottom: false, touches_top: false };
        labels[start] = id;
        stack.push(start);
        while let Some(c) = stack.pop() {
            info.size += 1;
            let (ix, iy) = (c / n_y, c % n_y);
            info.touches_bottom |= iy == 0;
            info.touches_top |= iy == n_y - 1;
            let mut visit = |n: usize| {
                if open[n] && labels[n] == NONE {
                    labels[n] = id;
                    stack.push(n);
                }
            };
            visit(((ix + 1) % n_x) * n_y + iy);
            visit(((ix + n_x - 1) % n_x) * n_y + iy);
            if iy + 1 < n_y {
                visit(c + 1);
            }
            if iy > 0 {
                visit(c - 1);
            }
        }
        infos.push(info);
    }
    (labels, infos)
}

/// Components of the complement of the mask in the fiber containing `t`.
pub fn fiber_complement_components(mask: &GridMask, t: f64) -> FiberComponents {
    let g = mask.geometry();
    let it = g.t_cell(t);
    let occupied = mask.fiber(it);
    let open: Vec<bool> = occupied.iter().map(|b| !b).collect();
    let (_, components) = label_components(&open, g.n_x, g.n_y);
    FiberComponents { fiber: it, components, degenerate: occupied.iter().all(|b| !b) }
}
