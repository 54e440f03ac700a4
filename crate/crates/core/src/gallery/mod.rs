//! The counterexample gallery: suspension maps, the obstruction examples
//! built from them, the blow-up geometry of non-small wandering domains,
//! the no-gap covering check and Kronecker-separation probes.

mod examples;
mod kronecker;
mod no_gap;
mod surgery;

pub use examples::{
    base_gap_ball, crossing_times, example_fully_essential, example_unbounded_inessential, probe_separation,
    rigid_suspension, suspension_map, suspension_map_warped, EssentialParams, InessentialParams,
    ObstructionExample, ProbePoints, SuspensionSpec, WanderingBlock, DENJOY_TRUNCATION, SUPPORT_SAMPLES,
};
pub use kronecker::{factor_obstruction, kronecker_separation_probe, ObstructionEvidence, PairEvidence};
pub use no_gap::{no_gap_sweep, no_gap_window, NoGapCheck, NoGapOutcome, NoGapSweep, NoGapWindow};
pub use surgery::{max_disjoint_delta, surgery_geometry, DiameterRow, SurgeryGeometry};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metric::circle_dist;
use crate::rotation_theory::{deviation_profile, estimate_rotation_set, recurrence_probe, SamplePlan};
use crate::skew_product::{vertical_orbit_bound, CentralizedSkew, SkewState};
use crate::torus_maps::TorusMap;
use crate::{GOLDEN, SILVER};

pub const KNOWN_EXAMPLES: [&str; 5] = ["3.1", "3.2", "3.3", "3.4-geometry", "no-gap"];
pub const MANIFEST_VERSION: u32 = 1;

/// Default surgery parameters: slope `1 + √2 − 1 = √2`, half-length `δ`.
pub const SURGERY_SLOPE: f64 = 1.0 + SILVER;
pub const SURGERY_DELTA: f64 = 0.01;
pub const SURGERY_SCAN: usize = 1000;
pub const DIAMETER_TABLE_RANGE: i64 = 50;

/// Search box for the exhaustive no-gap sweep.
pub const NO_GAP_RANGE: [i64; 2] = [-5, 5];
pub const NO_GAP_MAX_SIZE: usize = 3;
pub const NO_GAP_MAX_RUN: u32 = 3;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GalleryOptions {
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Proximality threshold.
    pub threshold: f64,
}

impl Default for GalleryOptions {
    fn default() -> Self {
        Self { n_max: 10_000, samples: 256, seed: 0, threshold: 1e-2 }
    }
}

/// Every map the gallery constructs, with its rotation vector.
pub fn gallery_maps() -> Result<Vec<(String, TorusMap, [f64; 2])>> {
    let rigid = rigid_suspension()?;
    let inessential = example_unbounded_inessential(InessentialParams::default())?;
    let essential = example_fully_essential(EssentialParams::default())?;
    Ok(vec![
        ("3.1".into(), rigid.map, rigid.rotation_target),
        ("3.2".into(), inessential.map, inessential.base.rotation_target),
        ("3.3".into(), essential.map, essential.base.rotation_target),
        ("3.4-base".into(), TorusMap::rigid(GOLDEN, SILVER), [GOLDEN, SILVER]),
    ])
}

fn lookup(id: &str) -> Result<&'static str> {
    KNOWN_EXAMPLES.iter().copied().find(|k| *k == id).ok_or_else(|| Error::UnknownExample {
        id: id.to_string(),
        known: KNOWN_EXAMPLES.join(", "),
    })
}

fn probes_json(ex: &ObstructionExample) -> Value {
    json!({
        "w0": ex.probes.w0,
        "w1": ex.probes.w1,
        "w0_end": ex.probes.w0_end,
        "w1_end": ex.probes.w1_end,
        "times": ex.times,
        "push_center": ex.push.center(),
        "push_radius": ex.push.radius(),
        "block_times": ex.block.times,
        "fiber_gap": [ex.block.fiber_gap.start, ex.block.fiber_gap.end],
    })
}

/// Frozen parameters, probe points and evidence thresholds of every example.
pub fn manifest() -> Result<Value> {
    let inessential = example_unbounded_inessential(InessentialParams::default())?;
    let essential = example_fully_essential(EssentialParams::default())?;
    let defaults = GalleryOptions::default();
    Ok(json!({
        "manifest_version": MANIFEST_VERSION,
        "constants": {"golden": GOLDEN, "silver": SILVER},
        "denjoy": {"truncation": DENJOY_TRUNCATION, "mass": 0.3},
        "warp": crate::torus_maps::Suspension::DEFAULT_WARP,
        "defaults": defaults,
        "examples": {
            "3.1": {"base": {"rigid": GOLDEN}, "fiber": {"rigid": SILVER}},
            "3.2": {
                "base": {"rigid": GOLDEN},
                "fiber": {"denjoy": SILVER},
                "parameters": InessentialParams::default(),
                "probes": probes_json(&inessential),
                "thresholds": {"proximality": defaults.threshold, "n_max": defaults.n_max},
            },
            "3.3": {
                "base": {"denjoy": GOLDEN},
                "fiber": {"denjoy": SILVER},
                "parameters": EssentialParams::default(),
                "probes": probes_json(&essential),
                "thresholds": {"proximality": defaults.threshold, "n_max": defaults.n_max, "crossing_grid": 10_000},
            },
            "3.4-geometry": {
                "alpha": [GOLDEN, SILVER],
                "slope": SURGERY_SLOPE,
                "delta": SURGERY_DELTA,
                "n_scan": SURGERY_SCAN,
                "table_range": DIAMETER_TABLE_RANGE,
            },
            "no-gap": {
                "range": NO_GAP_RANGE,
                "max_size": NO_GAP_MAX_SIZE,
                "max_run": NO_GAP_MAX_RUN,
            },
        },
    }))
}

/// Hex SHA-256 of the compact manifest serialization.
pub fn manifest_hash() -> Result<String> {
    let text = serde_json::to_string(&manifest()?)?;
    Ok(Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
}

/// Evidence report for one example id.
pub fn gallery_report(id: &str, options: &GalleryOptions) -> Result<Value> {
    let id = lookup(id)?;
    let body = match id {
        "3.1" => report_suspension(options)?,
        "3.2" => report_obstruction(&example_unbounded_inessential(InessentialParams::default())?, options)?,
        "3.3" => report_obstruction(&example_fully_essential(EssentialParams::default())?, options)?,
        "3.4-geometry" => report_geometry()?,
        _ => report_no_gap()?,
    };
    Ok(json!({
        "id": id,
        "manifest_hash": manifest_hash()?,
        "options": options,
        "evidence": body,
    }))
}

/// Largest mismatch between the fundamental-domain formula and the same
/// point evaluated through the relation `(s, x) ~ (s + 1, g₂⁻¹(x))`.
pub fn quotient_consistency(spec: &SuspensionSpec, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let susp = &spec.suspension;
    (0..samples)
        .map(|_| {
            let (u, x): (f64, f64) = (rng.gen(), rng.gen());
            let direct = susp.eval_quotient(u, x);
            let s = susp.base().eval(u + 1.0);
            let carry = s.floor();
            let unwound = [s - carry, susp.fiber().iterate(susp.fiber().eval_inverse(x), carry as i64)];
            circle_dist(direct[0], unwound[0]) + circle_dist(direct[1], unwound[1])
        })
        .fold(0.0, f64::max)
}

fn report_suspension(options: &GalleryOptions) -> Result<Value> {
    let spec = rigid_suspension()?;
    let plan = SamplePlan::new(options.samples, options.seed);
    let cloud = estimate_rotation_set(&spec.map, &[options.n_max], plan)?;
    let radius = cloud.radius_about(spec.rotation_target);
    let bound = 2.0 / options.n_max as f64 + spec.truncation_slack;
    let vertical = deviation_profile(&spec.map, [0.0, 1.0], spec.rotation_target[1], options.n_max, plan)?;
    let horizontal = deviation_profile(&spec.map, [1.0, 0.0], spec.rotation_target[0], options.n_max, plan)?;
    Ok(json!({
        "rotation_target": spec.rotation_target,
        "rotation_radius": radius,
        "rotation_bound": bound,
        "rotation_within_bound": radius <= bound,
        "quotient_consistency": quotient_consistency(&spec, 1000, options.seed),
        "vertical_deviation": vertical.verdict,
        "horizontal_deviation": horizontal.verdict,
    }))
}

/// Oscillation of skew-product orbits started at a few sampled states.
fn orbit_oscillation(map: &TorusMap, rho: f64, n_max: usize, seed: u64) -> Result<f64> {
    let f = CentralizedSkew::new(map.clone(), rho)?;
    let states: Vec<SkewState> = SamplePlan::new(8, seed)
        .points()
        .iter()
        .enumerate()
        .map(|(i, z)| SkewState::new(i as f64 / 8.0, z[0], z[1]))
        .collect();
    Ok(states.iter().map(|s| vertical_orbit_bound(&f, s, n_max).oscillation).fold(0.0, f64::max))
}

fn report_obstruction(ex: &ObstructionExample, options: &GalleryOptions) -> Result<Value> {
    let plan = SamplePlan::new(options.samples, options.seed);
    let rho = ex.base.rotation_target[1];
    let profile = deviation_profile(&ex.map, [0.0, 1.0], rho, options.n_max, plan)?;
    let oscillation = orbit_oscillation(&ex.map, rho, options.n_max, options.seed)?;
    let recurrence = recurrence_probe(&ex.map, ex.push.center(), ex.push.radius(), options.n_max);
    let crossings = crossing_times(ex, 10_000);
    let endpoints_separated = match ex.id {
        "3.3" => !crossings.is_empty(),
        // Distinct suspension times over a rigid base lie on distinct fibers.
        _ => ex.times[0] != ex.times[1],
    };
    let evidence = factor_obstruction(&ex.map, &ex.probes, options.n_max, options.threshold, endpoints_separated);
    let mut report = json!({
        "probes": probes_json(ex),
        "support_in_block": ex.support_in_block(),
        "vertical_deviation": profile.verdict,
        "orbit_oscillation": oscillation,
        "oscillation_bound": 2.0 * profile.c_est() + 0.05,
        "recurrence_in_block": recurrence,
        "obstruction": evidence,
    });
    if ex.id == "3.3" {
        report["crossing_count"] = json!(crossings.len());
        report["crossing_grid"] = json!(10_000);
        if let Some((center, radius)) = base_gap_ball(ex) {
            report["base_gap_ball"] = json!({"center": center, "radius": radius});
            report["base_gap_recurrence"] = json!(recurrence_probe(&ex.map, center, radius, options.n_max));
        }
    }
    Ok(report)
}

fn report_geometry() -> Result<Value> {
    let g = surgery_geometry([GOLDEN, SILVER], SURGERY_SLOPE, SURGERY_DELTA, SURGERY_SCAN)?;
    let table = g.diameter_table(DIAMETER_TABLE_RANGE);
    let exact = table
        .iter()
        .all(|row| row.fiber_half_width == g.delta * 2f64.powi(-(row.n.unsigned_abs() as i32) - 10));
    let constant = table.iter().all(|row| row.diameter == 2.0 * g.delta);
    Ok(json!({
        "geometry": g,
        "max_disjoint_delta": max_disjoint_delta([GOLDEN, SILVER], SURGERY_SLOPE, SURGERY_SCAN),
        "table": table,
        "half_width_exact": exact,
        "diameter_constant": constant,
    }))
}

fn report_no_gap() -> Result<Value> {
    let sweep = no_gap_sweep(NO_GAP_RANGE[0], NO_GAP_RANGE[1], NO_GAP_MAX_SIZE, NO_GAP_MAX_RUN)?;
    Ok(json!({
        "cases": sweep.cases,
        "functions": sweep.functions,
        "counterexamples": sweep.counterexamples,
        "failing_cases": sweep.failing_cases.len(),
        "examples": sweep.failing_cases.iter().take(10).collect::<Vec<_>>(),
        "holds": sweep.counterexamples == 0,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_lists_known() {
        let err = gallery_report("3.9", &GalleryOptions::default()).unwrap_err();
        let text = err.to_string();
        for id in KNOWN_EXAMPLES {
            assert!(text.contains(id));
        }
    }

    #[test]
    fn manifest_hash_is_stable() {
        let a = manifest_hash().unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, manifest_hash().unwrap());
    }

    #[test]
    fn quotient_relation_agrees() {
        assert!(quotient_consistency(&rigid_suspension().unwrap(), 1000, 1) < 1e-10);
        let ex = example_fully_essential(EssentialParams::default()).unwrap();
        assert!(quotient_consistency(&ex.base, 1000, 2) < 1e-10);
    }

    #[test]
    fn geometry_report_is_exact() {
        let r = gallery_report("3.4-geometry", &GalleryOptions::default()).unwrap();
        assert_eq!(r["evidence"]["half_width_exact"], true);
        assert_eq!(r["evidence"]["diameter_constant"], true);
    }
}
