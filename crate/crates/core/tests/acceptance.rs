//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use circfactor::circle_maps::{CircleLift, GeometricSchedule};
use circfactor::factor_builder::{build_tau, project_to_torus_factor, verify_equivariance, TauOptions, TauRegion};
use circfactor::gallery::{
    example_fully_essential, example_unbounded_inessential, factor_obstruction, gallery_maps, max_disjoint_delta,
    no_gap_sweep, rigid_suspension, surgery_geometry, suspension_map, EssentialParams, InessentialParams, DENJOY_TRUNCATION,
    DIAMETER_TABLE_RANGE, SURGERY_DELTA, SURGERY_SCAN, SURGERY_SLOPE,
};
use circfactor::rotation_theory::{deviation_profile, horizontal_spread, recurrence_probe, SamplePlan};
use circfactor::skew_product::{
    check_closed_form, check_commutation, fiber_complement_components, vertical_orbit_bound, CentralizedSkew,
    SaturationStatus, SkewState,
};
use circfactor::torus_maps::{normalize_isotopy_class, TorusMap, UnimodularMatrix};
use circfactor::{Result, GOLDEN, SILVER};

const ALPHA: f64 = 0.6180339887;
const BETA: f64 = 0.4142135624;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rotation_bound() -> Result<Outcome> {
    let n = 100_000;
    let rigid = CircleLift::rigid(ALPHA)?.rotation_number(0.0, n)?;
    let rigid_err = (rigid.estimate - ALPHA).abs();
    let denjoy = CircleLift::denjoy(ALPHA, &GeometricSchedule::with_mass(0.3), DENJOY_TRUNCATION)?
        .rotation_number(0.0, n)?;
    let denjoy_err = (denjoy.estimate - ALPHA).abs();
    let denjoy_bound = 1.0 / n as f64 + 1e-6;
    outcome(
        rigid_err <= 1e-12 && denjoy_err <= denjoy_bound,
        format!("rigid error {rigid_err:.1e} <= 1e-12, Denjoy error {denjoy_err:.2e} <= {denjoy_bound:.2e}"),
    )
}

fn skew_algebra() -> Result<Outcome> {
    let mut worst = (0.0f64, 0.0f64);
    let mut names = Vec::new();
    for (name, map, rho) in gallery_maps()? {
        let f = CentralizedSkew::new(map, rho[1])?;
        worst.0 = worst.0.max(check_commutation(&f, 1000, 0).max_defect);
        worst.1 = worst.1.max(check_closed_form(&f, 1000, 1000, 0).max_defect);
        names.push(name);
    }
    outcome(
        worst.0 <= 1e-9 && worst.1 <= 1e-7,
        format!(
            "maps [{}]: commutation {:.1e} <= 1e-9, closed form {:.1e} <= 1e-7",
            names.join(", "),
            worst.0,
            worst.1
        ),
    )
}

/// Largest vertical oscillation over orbits started from eight sampled states.
fn orbit_oscillation(map: &TorusMap, rho: f64, n_max: usize) -> Result<f64> {
    let f = CentralizedSkew::new(map.clone(), rho)?;
    Ok(SamplePlan::new(8, 0)
        .points()
        .iter()
        .enumerate()
        .map(|(i, z)| vertical_orbit_bound(&f, &SkewState::new(i as f64 / 8.0, z[0], z[1]), n_max).oscillation)
        .fold(0.0, f64::max))
}

fn vertical_boundedness() -> Result<Outcome> {
    let n_max = 10_000;
    let mut passed = true;
    let mut parts = Vec::new();
    let examples = [
        example_unbounded_inessential(InessentialParams::default())?,
        example_fully_essential(EssentialParams::default())?,
    ];
    for ex in &examples {
        let start = Instant::now();
        let rho = ex.base.rotation_target[1];
        let c_est = deviation_profile(&ex.map, [0.0, 1.0], rho, n_max, SamplePlan::new(256, 0))?.c_est();
        let osc = orbit_oscillation(&ex.map, rho, n_max)?;
        let bound = 2.0 * c_est + 0.05;
        let elapsed = start.elapsed();
        passed &= osc <= bound && elapsed <= Duration::from_secs(30);
        parts.push(format!("{}: {osc:.4} <= {bound:.4} ({:.1}s)", ex.id, elapsed.as_secs_f64()));
    }
    outcome(passed, format!("oscillation vs 2*C_est + 0.05: {}", parts.join(", ")))
}

fn deviation_dichotomy() -> Result<Outcome> {
    let plan = SamplePlan::new(256, 0);
    let rigid = TorusMap::rigid(ALPHA, BETA);
    let rigid_max = [([1.0, 0.0], ALPHA), ([0.0, 1.0], BETA)]
        .into_iter()
        .map(|(v, r)| deviation_profile(&rigid, v, r, 10_000, plan).map(|p| p.c_est()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let spread = horizontal_spread(&TorusMap::Affine { twist: 1, shift: [0.0, 0.0] }, 1000, plan);
    let spread_excess = (1..=1000)
        .map(|n| spread.forward[n].min(spread.backward[n]) - (n as f64 - 1.0))
        .fold(f64::INFINITY, f64::min);

    let denjoy_fiber = suspension_map(
        CircleLift::rigid(GOLDEN)?,
        CircleLift::denjoy(SILVER, &GeometricSchedule::with_mass(0.3), DENJOY_TRUNCATION)?,
    )?;
    let mut suspensions = vec![("rigid/Denjoy".to_string(), denjoy_fiber.map, denjoy_fiber.rotation_target)];
    suspensions.extend(gallery_maps()?.into_iter().filter(|(name, ..)| ["3.1", "3.2", "3.3"].contains(&name.as_str())));
    let mut plateaus = Vec::new();
    let mut all_bounded = true;
    for (name, map, rho) in &suspensions {
        let profile = deviation_profile(map, [0.0, 1.0], rho[1], 10_000, plan)?;
        let record = profile.combined().iter().enumerate().fold((0, 0.0), |a, (n, &d)| if d > a.1 { (n, d) } else { a });
        let v = &profile.verdict;
        all_bounded &= v.bounded;
        plateaus.push(format!(
            "{name} {} (late {:.4}, early {:.4}, max at n = {})",
            if v.bounded { "flat" } else { "RISES" },
            v.late_max,
            v.early_max,
            record.0
        ));
    }
    outcome(
        rigid_max <= 1e-9 && spread_excess >= 0.0 && all_bounded && plateaus.len() == 4,
        format!(
            "rigid max D {rigid_max:.1e}, twist min(spread - (n-1)) {spread_excess:.3}, plateaus: {}",
            plateaus.join("; ")
        ),
    )
}

fn full_resolution_tau(map: TorusMap, rho: f64) -> Result<(TauRegion, f64)> {
    let c_est = deviation_profile(&map, [0.0, 1.0], rho, 10_000, SamplePlan::new(256, 0))?.c_est();
    let f = CentralizedSkew::new(map, rho)?.with_deviation_bound(c_est);
    let options = TauOptions::for_deviation(c_est).with_resolution(TauOptions::DEFAULT_RESOLUTION);
    let recurrence = recurrence_probe(f.map(), [0.5, 0.5], 0.05, 1000);
    Ok((build_tau(f, [0.5, 0.5], 1.0, &recurrence, options)?, c_est))
}

fn two_unbounded_components() -> Result<Outcome> {
    let spec = rigid_suspension()?;
    let (tau, _) = full_resolution_tau(spec.map, spec.rotation_target[1])?;
    let counts: Vec<usize> =
        (0..64).map(|i| fiber_complement_components(tau.mask(), (i as f64 + 0.5) / 64.0).unbounded_count()).collect();
    let good = counts.iter().filter(|&&c| c == 2).count();
    outcome(
        tau.status() == SaturationStatus::Converged && good == 64,
        format!("{good}/64 fibers with exactly two unbounded components, status {:?}", tau.status()),
    )
}

fn factor_rigid() -> Result<Outcome> {
    let (tau, _) = full_resolution_tau(TorusMap::rigid(ALPHA, BETA), BETA)?;
    let cell = tau.s_step();
    let fm = project_to_torus_factor(&tau, [128, 128], 0.5 * cell)?;
    let (defect, fit) = (fm.defect_max / cell, fm.fit_residual / cell);
    outcome(
        fm.failures == 0 && defect <= 2.0 && fit <= 2.0,
        format!("defect {defect:.2} cells <= 2, |h - (y + const)| {fit:.2} cells <= 2 (cell {cell:.2e})"),
    )
}

fn factor_suspension() -> Result<Outcome> {
    let base = CircleLift::rigid(ALPHA)?;
    let fiber = CircleLift::rigid(BETA)?;
    let spec = suspension_map(base, fiber)?;
    let (tau, _) = full_resolution_tau(spec.map, ALPHA * BETA)?;
    let cell = tau.s_step();
    let fm = project_to_torus_factor(&tau, [128, 128], 0.5 * cell)?;
    let eq = verify_equivariance(&tau, &SamplePlan::new(1000, 0).points(), 0.5 * cell);
    let defect = fm.defect_max / cell;
    let (t1, fhat) = (eq.translate_defect / cell, eq.dynamics_defect / cell);
    outcome(
        fm.failures == 0 && eq.failures == 0 && defect <= 4.0 && t1 <= 4.0 && fhat <= 4.0 && eq.ordering_violations == 0,
        format!(
            "defect {defect:.2} cells <= 4, translate {t1:.2}, dynamics {fhat:.2} cells <= 4, ordering violations {}/{}",
            eq.ordering_violations, eq.ordering_pairs
        ),
    )
}

fn no_gap_combinatorics() -> Result<Outcome> {
    let sweep = no_gap_sweep(-5, 5, 3, 3)?;
    let first = sweep
        .failing_cases
        .first()
        .map(|c| format!(", first failing case {}", serde_json::to_string(c).unwrap_or_default()))
        .unwrap_or_default();
    outcome(
        sweep.counterexamples == 0,
        format!(
            "{} counterexamples among {} functions over {} cases ({} cases failing){first}",
            sweep.counterexamples,
            sweep.functions,
            sweep.cases,
            sweep.failing_cases.len()
        ),
    )
}

fn isotopy_normalization() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut checked, mut bad) = (0, 0);
    while checked < 1000 {
        let p: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let r: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let Some(b) = bezout_completion(p, r) else { continue };
        let j: i64 = rng.gen_range(-50..=50);
        let a = b.checked_mul(&UnimodularMatrix::twist(j)).and_then(|m| m.checked_mul(&b.inverse()));
        let Some(a) = a else { continue };
        checked += 1;
        let ok = normalize_isotopy_class(&a).is_ok_and(|(bn, k)| {
            k == j
                && bn
                    .inverse()
                    .checked_mul(&a)
                    .and_then(|m| m.checked_mul(&bn))
                    .is_some_and(|m| m == UnimodularMatrix::twist(k))
        });
        bad += usize::from(!ok);
    }
    outcome(bad == 0, format!("{bad} of {checked} conjugates misclassified"))
}

/// `[[p, b], [r, d]]` with determinant 1, when `gcd(p, r) = 1`.
fn bezout_completion(p: i64, r: i64) -> Option<UnimodularMatrix> {
    let (mut old, mut cur) = ((p, 1i64, 0i64), (r, 0i64, 1i64));
    while cur.0 != 0 {
        let q = old.0.div_euclid(cur.0);
        (old, cur) = (cur, (old.0 - q * cur.0, old.1 - q * cur.1, old.2 - q * cur.2));
    }
    let (g, x, y) = if old.0 < 0 { (-old.0, -old.1, -old.2) } else { old };
    // p·x + r·y = 1, so p·x − (−y)·r = 1.
    (g == 1).then(|| UnimodularMatrix::new([[p, -y], [r, x]]).ok()).flatten()
}

fn obstruction_evidence() -> Result<Outcome> {
    let ex = example_unbounded_inessential(InessentialParams::default())?;
    let ev = factor_obstruction(&ex.map, &ex.probes, 10_000, 1e-2, ex.times[0] != ex.times[1]);
    let recurrence = recurrence_probe(&ex.map, ex.push.center(), ex.push.radius(), 10_000);

    let g = surgery_geometry([GOLDEN, SILVER], SURGERY_SLOPE, SURGERY_DELTA, SURGERY_SCAN)?;
    let table = g.diameter_table(DIAMETER_TABLE_RANGE);
    let exact = table.iter().all(|row| row.fiber_half_width == g.delta * 2f64.powi(-(row.n.unsigned_abs() as i32) - 10));
    let constant = table.iter().all(|row| row.diameter == 2.0 * g.delta);
    let delta_cap = max_disjoint_delta([GOLDEN, SILVER], SURGERY_SLOPE, SURGERY_SCAN);
    outcome(
        ev.forward_pair.forward_proximal
            && ev.backward_pair.backward_proximal
            && ev.obstruction
            && recurrence.is_empty()
            && exact
            && constant
            && g.delta < delta_cap,
        format!(
            "forward min {:.1e} (n = {}), backward min {:.1e} (n = {}) < 1e-2; block returns {}; \
             half-widths exact {exact}, diameter 2*delta {constant} over |n| <= 50",
            ev.forward_pair.scan.forward_min,
            ev.forward_pair.scan.forward_argmin,
            ev.backward_pair.scan.backward_min,
            ev.backward_pair.scan.backward_argmin,
            recurrence.len()
        ),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 10] = [
        ("rotation-number bound", Duration::from_secs(1), rotation_bound),
        ("skew-product algebra", Duration::from_secs(5), skew_algebra),
        ("vertical boundedness", Duration::from_secs(60), vertical_boundedness),
        ("deviation dichotomy", Duration::from_secs(60), deviation_dichotomy),
        ("two unbounded components", Duration::from_secs(300), two_unbounded_components),
        ("factor, rigid case", Duration::from_secs(300), factor_rigid),
        ("factor, suspension", Duration::from_secs(600), factor_suspension),
        ("no-gap combinatorics", Duration::from_secs(60), no_gap_combinatorics),
        ("isotopy normalization", Duration::from_secs(1), isotopy_normalization),
        ("obstruction evidence", Duration::from_secs(120), obstruction_evidence),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2}s of {}s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
