use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::frac;

/// Cell layout of `𝕋 × 𝕋 × [y_min, y_max)`; cells are half-open boxes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridGeometry {
    pub n_t: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridGeometry {
    pub fn new(n_t: usize, n_x: usize, n_y: usize, y_min: f64, y_max: f64) -> Result<Self> {
        if n_t == 0 || n_x == 0 || n_y < 3 {
            return Err(Error::InvalidParameter("grid needs n_t, n_x ≥ 1 and n_y ≥ 3".into()));
        }
        if !(y_max > y_min) || !y_min.is_finite() || !y_max.is_finite() {
            return Err(Error::InvalidParameter(format!("bad height window [{y_min}, {y_max}]")));
        }
        if n_t.checked_mul(n_x).and_then(|v| v.checked_mul(n_y)).is_none_or(|v| v > u32::MAX as usize) {
            return Err(Error::InvalidParameter("grid too large".into()));
        }
        Ok(Self { n_t, n_x, n_y, y_min, y_max })
    }

    /// Window `[−half, half]`.
    pub fn symmetric(n_t: usize, n_x: usize, n_y: usize, half: f64) -> Result<Self> {
        Self::new(n_t, n_x, n_y, -half, half)
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_t(&self) -> f64 {
        1.0 / self.n_t as f64
    }

    pub fn h_x(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    pub fn h_y(&self) -> f64 {
        (self.y_max - self.y_min) / self.n_y as f64
    }

    #[inline]
    pub fn index(&self, it: usize, ix: usize, iy: usize) -> usize {
        (it * self.n_x + ix) * self.n_y + iy
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let iy = idx % self.n_y;
        let rest = idx / self.n_y;
        (rest / self.n_x, rest % self.n_x, iy)
    }

    #[inline]
    pub fn t_cell(&self, t: f64) -> usize {
        ((frac(t) * self.n_t as f64) as usize).min(self.n_t - 1)
    }

    #[inline]
    pub fn x_cell(&self, x: f64) -> usize {
        ((frac(x) * self.n_x as f64) as usize).min(self.n_x - 1)
    }

    /// Row of height `y`, or `None` outside the window.
    #[inline]
    pub fn y_cell(&self, y: f64) -> Option<usize> {
        let r = ((y - self.y_min) / self.h_y()).floor();
        if r >= 0.0 && r < self.n_y as f64 {
            Some(r as usize)
        } else {
            None
        }
    }

    pub fn t_center(&self, it: usize) -> f64 {
        (it as f64 + 0.5) * self.h_t()
    }

    pub fn x_center(&self, ix: usize) -> f64 {
        (ix as f64 + 0.5) * self.h_x()
    }

    pub fn y_center(&self, iy: usize) -> f64 {
        self.y_min + (iy as f64 + 0.5) * self.h_y()
    }

    pub fn locate(&self, t: f64, x: f64, y: f64) -> Option<usize> {
        Some(self.index(self.t_cell(t), self.x_cell(x), self.y_cell(y)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaskProvenance {
    pub seed_region: String,
    pub iterations: usize,
}

/// Boolean occupancy over a [`GridGeometry`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridMask {
    geometry: GridGeometry,
    words: Vec<u64>,
    pub provenance: MaskProvenance,
}

impl GridMask {
    pub fn empty(geometry: GridGeometry, seed_region: impl Into<String>) -> Self {
        Self {
            geometry,
            words: vec![0; geometry.len().div_ceil(64)],
            provenance: MaskProvenance { seed_region: seed_region.into(), iterations: 0 },
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.words[idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize) {
        self.words[idx >> 6] |= 1 << (idx & 63);
    }

    #[inline]
    pub fn clear(&mut self, idx: usize) {
        self.words[idx >> 6] &= !(1 << (idx & 63));
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        let len = self.geometry.len();
        self.words.iter().enumerate().flat_map(move |(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
            .filter(move |&idx| idx < len)
        })
    }

    pub fn is_subset_of(&self, other: &GridMask) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Occupied rows `(min, max)` over the whole mask.
    pub fn row_range(&self) -> Option<(usize, usize)> {
        let n_y = self.geometry.n_y;
        self.iter_ones().map(|i| i % n_y).fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((a, b)) => Some((a.min(r), b.max(r))),
        })
    }

    /// Whether some occupied cell lies in the bottom or top row.
    pub fn touches_window_edge(&self) -> bool {
        matches!(self.row_range(), Some((lo, hi)) if lo == 0 || hi == self.geometry.n_y - 1)
    }

    /// Occupancy of fiber `it` as a row-major `n_x × n_y` vector.
    pub fn fiber(&self, it: usize) -> Vec<bool> {
        let g = &self.geometry;
        let base = g.index(it, 0, 0);
        (0..g.n_x * g.n_y).map(|i| self.get(base + i)).collect()
    }

    /// Box dilation by one cell in every direction (t and x wrap).
    pub fn dilated(&self) -> GridMask {
        let g = self.geometry;
        let mut out = GridMask::empty(g, self.provenance.seed_region.clone());
        out.provenance.iterations = self.provenance.iterations;
        for idx in self.iter_ones() {
            let (it, ix, iy) = g.coords(idx);
            for dt in [g.n_t - 1, 0, 1] {
                for dx in [g.n_x - 1, 0, 1] {
                    for dy in [-1i64, 0, 1] {
                        let jy = iy as i64 + dy;
                        if jy < 0 || jy >= g.n_y as i64 {
                            continue;
                        }
                        out.set(g.index((it + dt) % g.n_t, (ix + dx) % g.n_x, jy as usize));
                    }
                }
            }
        }
        out
    }

    /// Header plus run-length-encoded occupancy in index order. The first
    /// run counts empty cells and may be zero.
    pub fn write_dump(&self, out: &mut impl Write) -> Result<()> {
        let g = &self.geometry;
        let mut text = String::new();
        writeln!(text, "circfactor-mask 1").unwrap();
        writeln!(text, "resolution {} {} {}", g.n_t, g.n_x, g.n_y).unwrap();
        writeln!(text, "window {} {}", g.y_min, g.y_max).unwrap();
        writeln!(text, "seed {}", self.provenance.seed_region.replace('\n', " ")).unwrap();
        writeln!(text, "iterations {}", self.provenance.iterations).unwrap();
        writeln!(text, "occupied {}", self.count()).unwrap();
        let mut runs = Vec::new();
        let mut current = false;
        let mut run = 0u64;
        for idx in 0..g.len() {
            let bit = self.get(idx);
            if bit != current {
                runs.push(run);
                run = 0;
                current = bit;
            }
            run += 1;
        }
        runs.push(run);
        writeln!(text, "runs {}", runs.len()).unwrap();
        for chunk in runs.chunks(32) {
            let line: Vec<String> = chunk.iter().map(u64::to_string).collect();
            writeln!(text, "{}", line.join(" ")).unwrap();
        }
        out.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn read_dump(input: impl BufRead) -> Result<Self> {
        let bad = |m: &str| Error::MaskFormat(m.to_string());
        let mut lines = input.lines();
        let mut next = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))??;
            line.strip_prefix(key)
                .map(|rest| rest.trim_start().to_string())
                .ok_or_else(|| bad(&format!("expected `{key}`")))
        };
        if next("circfactor-mask")? != "1" {
            return Err(bad("unsupported version"));
        }
        let nums = |s: String| -> Result<Vec<String>> { Ok(s.split_whitespace().map(str::to_string).collect()) };
        let res = nums(next("resolution")?)?;
        let win = nums(next("window")?)?;
        if res.len() != 3 || win.len() != 2 {
            return Err(bad("malformed resolution or window"));
        }
        let p = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
        let f = |s: &str| s.parse::<f64>().map_err(|_| bad("bad float"));
        let geometry = GridGeometry::new(p(&res[0])?, p(&res[1])?, p(&res[2])?, f(&win[0])?, f(&win[1])?)?;
        let seed = next("seed")?;
        let iterations = p(&next("iterations")?)?;
        let occupied = p(&next("occupied")?)?;
        let n_runs = p(&next("runs")?)?;
        let mut runs = Vec::with_capacity(n_runs);
        for line in lines {
            for tok in line?.split_whitespace() {
                runs.push(tok.parse::<u64>().map_err(|_| bad("bad run length"))?);
            }
        }
        if runs.len() != n_runs {
            return Err(bad("run count mismatch"));
        }
        let mut mask = GridMask::empty(geometry, seed);
        mask.provenance.iterations = iterations;
        let mut idx = 0usize;
        for (i, &r) in runs.iter().enumerate() {
            let end = idx + r as usize;
            if end > geometry.len() {
                return Err(bad("runs overflow the grid"));
            }
            if i % 2 == 1 {
                for j in idx..end {
                    mask.set(j);
                }
            }
            idx = end;
        }
        if idx != geometry.len() || mask.count() != occupied {
            return Err(bad("runs do not cover the grid"));
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn indexing_round_trips() {
        let g = GridGeometry::symmetric(4, 5, 6, 2.0).unwrap();
        for idx in 0..g.len() {
            let (a, b, c) = g.coords(idx);
            assert_eq!(g.index(a, b, c), idx);
        }
        assert_eq!(g.y_cell(-2.0), Some(0));
        assert_eq!(g.y_cell(2.0), None);
        assert_eq!(g.t_cell(-0.01), 3);
    }

    proptest! {
        #[test]
        fn dump_round_trips(bits in proptest::collection::vec(any::<bool>(), 4 * 3 * 5)) {
            let g = GridGeometry::new(4, 3, 5, -1.25, 0.1 + 0.2).unwrap();
            let mut m = GridMask::empty(g, "ball(0.5, 0) r=0.3");
            m.provenance.iterations = 7;
            for (i, b) in bits.iter().enumerate() {
                if *b { m.set(i); }
            }
            let mut buf = Vec::new();
            m.write_dump(&mut buf).unwrap();
            let back = GridMask::read_dump(&buf[..]).unwrap();
            prop_assert_eq!(&back, &m);
            let mut again = Vec::new();
            back.write_dump(&mut again).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
