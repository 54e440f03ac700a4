use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Window length `M₀ = N₀ + max A − min A` and start offset `m = m′ − min A`
/// proposed for covering `N₀ + 1` consecutive integers by `{j − ξ(j)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoGapWindow {
    pub set: Vec<i64>,
    pub run: u32,
    pub window: u32,
}

pub fn no_gap_window(set: &[i64], run: u32) -> Result<NoGapWindow> {
    let mut set = set.to_vec();
    set.sort_unstable();
    set.dedup();
    let (Some(&lo), Some(&hi)) = (set.first(), set.last()) else {
        return Err(Error::InvalidParameter("the shift set must be nonempty".into()));
    };
    let window = u32::try_from(i64::from(run) + hi - lo)
        .map_err(|_| Error::InvalidParameter("shift set spread too large".into()))?;
    Ok(NoGapWindow { set, run, window })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoGapCheck {
    /// `m′ − min A`.
    pub proposed_start: i64,
    pub proposed_holds: bool,
    /// Smallest start of a covered run, if any.
    pub any_start: Option<i64>,
}

impl NoGapWindow {
    pub fn proposed_start(&self, first: i64) -> i64 {
        first - self.set[0]
    }

    /// Checks the run condition for `ξ` given on `{first, …, first + M₀}`.
    pub fn check(&self, first: i64, xi: &[i64]) -> Result<NoGapCheck> {
        if xi.len() != self.window as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "ξ needs {} values, got {}",
                self.window + 1,
                xi.len()
            )));
        }
        if let Some(bad) = xi.iter().find(|v| self.set.binary_search(v).is_err()) {
            return Err(Error::InvalidParameter(format!("ξ takes the value {bad} outside the shift set")));
        }
        let mut image: Vec<i64> = xi.iter().enumerate().map(|(k, v)| first + k as i64 - v).collect();
        image.sort_unstable();
        image.dedup();
        let covers = |m: i64| (m..=m + i64::from(self.run)).all(|v| image.binary_search(&v).is_ok());
        let proposed_start = self.proposed_start(first);
        Ok(NoGapCheck {
            proposed_start,
            proposed_holds: covers(proposed_start),
            any_start: image.iter().copied().find(|&m| covers(m)),
        })
    }

    /// Runs every `ξ : {0, …, M₀} → A` (the start is immaterial by
    /// translation) and counts those whose image has no run of `N₀ + 1`
    /// consecutive integers anywhere.
    pub fn exhaust(&self) -> NoGapOutcome {
        let shifts: Vec<u64> = self.set.iter().map(|a| (self.set[self.set.len() - 1] - a) as u64).collect();
        let mut outcome = NoGapOutcome {
            set: self.set.clone(),
            run: self.run,
            window: self.window,
            functions: 0,
            counterexamples: 0,
            first_counterexample: None,
        };
        let mut choice = vec![0usize; self.window as usize + 1];
        self.descend(0, 0, &shifts, &mut choice, &mut outcome);
        outcome
    }

    fn descend(&self, j: usize, image: u64, shifts: &[u64], choice: &mut [usize], out: &mut NoGapOutcome) {
        if j == choice.len() {
            out.functions += 1;
            if !has_run(image, self.run) {
                out.counterexamples += 1;
                if out.first_counterexample.is_none() {
                    out.first_counterexample = Some(choice.iter().map(|&c| self.set[c]).collect());
                }
            }
            return;
        }
        for (c, shift) in shifts.iter().enumerate() {
            choice[j] = c;
            self.descend(j + 1, image | 1 << (j as u64 + shift), shifts, choice, out);
        }
    }
}

/// Whether `bits` holds `run + 1` consecutive ones.
fn has_run(bits: u64, run: u32) -> bool {
    let mut acc = bits;
    for k in 1..=run {
        acc &= bits >> k;
    }
    acc != 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoGapOutcome {
    pub set: Vec<i64>,
    pub run: u32,
    pub window: u32,
    pub functions: u64,
    pub counterexamples: u64,
    /// Values of `ξ` on `{0, …, M₀}`.
    pub first_counterexample: Option<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoGapSweep {
    pub cases: usize,
    pub functions: u64,
    pub counterexamples: u64,
    pub failing_cases: Vec<NoGapOutcome>,
}

/// Every nonempty `A ⊆ [lo, hi]` with `|A| ≤ max_size` and every
/// `N₀ ≤ max_run`.
pub fn no_gap_sweep(lo: i64, hi: i64, max_size: usize, max_run: u32) -> Result<NoGapSweep> {
    if hi < lo || hi - lo > 20 {
        return Err(Error::InvalidParameter("sweep range must hold 1 to 21 integers".into()));
    }
    let universe: Vec<i64> = (lo..=hi).collect();
    let mut sets = Vec::new();
    for mask in 1u32..1 << universe.len() {
        if mask.count_ones() as usize <= max_size {
            sets.push(universe.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect::<Vec<_>>());
        }
    }
    let cases: Vec<(Vec<i64>, u32)> =
        sets.into_iter().flat_map(|a| (0..=max_run).map(move |n| (a.clone(), n))).collect();
    let outcomes: Vec<NoGapOutcome> = cases
        .par_iter()
        .map(|(a, n)| no_gap_window(a, *n).map(|w| w.exhaust()))
        .collect::<Result<_>>()?;
    Ok(NoGapSweep {
        cases: outcomes.len(),
        functions: outcomes.iter().map(|o| o.functions).sum(),
        counterexamples: outcomes.iter().map(|o| o.counterexamples).sum(),
        failing_cases: outcomes.into_iter().filter(|o| o.counterexamples > 0).collect(),
    })
}
