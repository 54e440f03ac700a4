use std::fs::{self, File};
use std::io::{BufWriter, ErrorKind, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use circfactor::factor_builder::{
    build_tau, double_factor as build_double, project_to_torus_factor, verify_equivariance, FactorMap, TauOptions,
    TauRegion,
};
use circfactor::gallery::{self, GalleryOptions};
use circfactor::mapdef::{Angle, CircleDef, TorusDef};
use circfactor::output::{to_sorted, write_csv, write_json, Provenance};
use circfactor::rotation_theory::{deviation_profile, horizontal_spread, recurrence_probe, SamplePlan};
use circfactor::skew_product::{
    check_closed_form, check_commutation, vertical_orbit_bound, CentralizedSkew, SaturationStatus, SkewState,
};
use circfactor::torus_maps::TorusMap;

use crate::config::{circle_def, map_value, resolve, torus_def, CliError, CliResult};
use crate::{DeviationFlags, DoubleFlags, FactorFlags, Format, GalleryFlags, RotnumFlags, SkewFlags};

/// Writes the files of one command run.
struct Emitter {
    out: Option<PathBuf>,
    format: Format,
    provenance: Provenance,
}

impl Emitter {
    fn new(command: &str, config: &impl Serialize, out: Option<PathBuf>, format: Format) -> CliResult<Self> {
        let provenance = Provenance::new(command, to_sorted(config)?, gallery::manifest_hash()?);
        if let Some(dir) = &out {
            fs::create_dir_all(dir)?;
        }
        Ok(Self { out, format, provenance })
    }

    fn table(&self, name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> CliResult<()> {
        let Some(dir) = &self.out else { return Ok(()) };
        match self.format {
            Format::Csv => {
                let mut w = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
                write_csv(&mut w, &self.provenance, header, rows)?;
            }
            Format::Json => {
                let columns: serde_json::Map<String, Value> = header
                    .iter()
                    .enumerate()
                    .map(|(i, h)| (h.to_string(), json!(rows.iter().map(|r| json_number(r[i])).collect::<Vec<_>>())))
                    .collect();
                self.json(name, &Value::Object(columns))?;
            }
        }
        Ok(())
    }

    fn json(&self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let Some(dir) = &self.out else { return Ok(()) };
        let mut w = BufWriter::new(File::create(dir.join(format!("{name}.json")))?);
        write_json(&mut w, &self.provenance, value)?;
        Ok(())
    }

    /// Prints the summary and files it as `summary.json`.
    fn summary(&self, value: &Value) -> CliResult<()> {
        let text = serde_json::to_string_pretty(&to_sorted(value)?)?;
        match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        }
        self.json("summary", value)
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn pair(v: &[f64], what: &str) -> CliResult<[f64; 2]> {
    <[f64; 2]>::try_from(v).map_err(|_| CliError::Usage(format!("{what} needs 2 values, got {}", v.len())))
}

fn attach_map(slot: &mut Option<Value>, flag: &Option<String>) -> CliResult<()> {
    if let Some(text) = flag {
        *slot = Some(map_value(text)?);
    }
    Ok(())
}

fn nominal(def: &TorusDef, what: &str) -> CliResult<[f64; 2]> {
    def.nominal_rotation()
        .ok_or_else(|| CliError::Usage(format!("{what} cannot be inferred from this map definition; pass it explicitly")))
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RotnumConfig {
    circle: Option<Value>,
    n: usize,
    x0: f64,
    out: Option<PathBuf>,
    format: Format,
}

impl Default for RotnumConfig {
    fn default() -> Self {
        Self { circle: None, n: 1000, x0: 0.0, out: None, format: Format::Csv }
    }
}

fn angle(text: &str) -> Angle {
    text.parse::<f64>().map_or_else(|_| Angle::Named(text.to_string()), Angle::Value)
}

pub fn rotnum(flags: RotnumFlags) -> CliResult<()> {
    let mut cfg: RotnumConfig = resolve(flags.output.config.as_ref(), &flags)?;
    if let Some(alpha) = flags.rigid {
        cfg.circle = Some(serde_json::to_value(CircleDef::Rigid { alpha: alpha.into() })?);
    } else if let Some(a) = &flags.denjoy {
        let def = CircleDef::DenjoyTruncated { alpha: angle(a), n: gallery::DENJOY_TRUNCATION, mass: 0.3 };
        cfg.circle = Some(serde_json::to_value(def)?);
    } else if let Some(text) = &flags.circle {
        cfg.circle = Some(map_value(text)?);
    }
    let def = circle_def(
        cfg.circle.as_ref().ok_or_else(|| CliError::Usage("give --rigid, --denjoy or --circle".into()))?,
    )?;
    if cfg.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let lift = def.build()?;
    let est = lift.rotation_number(cfg.x0, cfg.n)?;
    let slack = lift.as_denjoy().map_or(0.0, |d| d.truncation_tolerance());
    let emit = Emitter::new("rotnum", &cfg, cfg.out.clone(), cfg.format)?;
    let mut summary = json!({
        "estimate": est.estimate,
        "error_bound": est.error_bound,
        "truncation_slack": slack,
        "n": cfg.n,
    });
    if let Some(rho) = def.nominal_rotation() {
        summary["nominal"] = json!(rho);
        summary["within_bound"] = json!((est.estimate - rho).abs() <= est.error_bound + slack);
    }
    emit.summary(&summary)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeviationConfig {
    map: Option<Value>,
    v: [f64; 2],
    rho: Option<f64>,
    nmax: usize,
    samples: usize,
    seed: u64,
    spread: bool,
    out: Option<PathBuf>,
    format: Format,
}

impl Default for DeviationConfig {
    fn default() -> Self {
        Self {
            map: None,
            v: [0.0, 1.0],
            rho: None,
            nmax: 1000,
            samples: 64,
            seed: 0,
            spread: false,
            out: None,
            format: Format::Csv,
        }
    }
}

pub fn deviations(flags: DeviationFlags) -> CliResult<()> {
    let mut cfg: DeviationConfig = resolve(flags.output.config.as_ref(), &flags)?;
    attach_map(&mut cfg.map, &flags.map.map)?;
    let def = torus_def(&cfg.map)?;
    let map = def.build()?;
    let plan = SamplePlan::new(cfg.samples, cfg.seed);
    if cfg.spread {
        let emit = Emitter::new("deviations", &cfg, cfg.out.clone(), cfg.format)?;
        let table = horizontal_spread(&map, cfg.nmax, plan);
        let rows = (0..=cfg.nmax).map(|n| vec![n as f64, table.forward[n], table.backward[n]]).collect();
        emit.table("spread", &["n", "forward", "backward"], rows)?;
        let min_excess = (1..=cfg.nmax)
            .map(|n| table.forward[n].min(table.backward[n]) - (n as f64 - 1.0))
            .fold(f64::INFINITY, f64::min);
        return emit.summary(&json!({
            "twist": map.twist(),
            "growth_agrees": table.growth_agrees,
            "final_spread": [table.forward[cfg.nmax], table.backward[cfg.nmax]],
            "min_spread_minus_n_minus_1": json_number(min_excess),
        }));
    }
    if cfg.rho.is_none() {
        let norm = cfg.v[0].hypot(cfg.v[1]);
        let r = nominal(&def, "--rho")?;
        cfg.rho = Some((r[0] * cfg.v[0] + r[1] * cfg.v[1]) / norm);
    }
    let emit = Emitter::new("deviations", &cfg, cfg.out.clone(), cfg.format)?;
    let profile = deviation_profile(&map, cfg.v, cfg.rho.unwrap_or_default(), cfg.nmax, plan)?;
    let combined = profile.combined();
    let rows = (0..=cfg.nmax)
        .map(|n| vec![n as f64, profile.forward[n], profile.backward[n], combined[n]])
        .collect();
    emit.table("deviations", &["n", "forward", "backward", "combined"], rows)?;
    emit.summary(&json!({"verdict": profile.verdict, "direction": profile.direction, "rho": profile.rho}))
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SkewConfig {
    map: Option<Value>,
    rho: Option<f64>,
    state: [f64; 3],
    nmax: usize,
    check_samples: usize,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
}

impl Default for SkewConfig {
    fn default() -> Self {
        Self {
            map: None,
            rho: None,
            state: [0.0; 3],
            nmax: 1000,
            check_samples: 1000,
            seed: 0,
            out: None,
            format: Format::Csv,
        }
    }
}

pub fn skeworbit(flags: SkewFlags) -> CliResult<()> {
    let mut cfg: SkewConfig = resolve(flags.output.config.as_ref(), &flags)?;
    attach_map(&mut cfg.map, &flags.map.map)?;
    let def = torus_def(&cfg.map)?;
    if cfg.rho.is_none() {
        cfg.rho = Some(nominal(&def, "--rho")?[1]);
    }
    let f = CentralizedSkew::new(def.build()?, cfg.rho.unwrap_or_default())?;
    let emit = Emitter::new("skeworbit", &cfg, cfg.out.clone(), cfg.format)?;
    let start = SkewState::new(cfg.state[0], cfg.state[1], cfg.state[2]);
    let rows = f.orbit(&start, cfg.nmax).into_iter().map(|(n, s)| vec![n as f64, s.t, s.x, s.y]).collect();
    emit.table("orbit", &["n", "t", "x", "y"], rows)?;
    let bound = vertical_orbit_bound(&f, &start, cfg.nmax);
    let commutation = check_commutation(&f, cfg.check_samples, cfg.seed);
    let closed_form = check_closed_form(&f, cfg.check_samples, cfg.nmax.max(1) as i64, cfg.seed);
    emit.summary(&json!({
        "oscillation": bound,
        "commutation": commutation,
        "closed_form": closed_form,
    }))?;
    if !commutation.passed || !closed_form.passed {
        return Err(CliError::Check(format!(
            "commutation defect {:.3e}, closed-form defect {:.3e} above threshold",
            commutation.max_defect, closed_form.max_defect
        )));
    }
    Ok(())
}

/// Window and region construction shared by the factor commands.
struct Pipeline {
    map: TorusMap,
    c_est: f64,
    options: TauOptions,
}

fn pipeline(
    map: TorusMap,
    rho: f64,
    resolution: [usize; 3],
    window: Option<f64>,
    deviation_nmax: usize,
) -> CliResult<Pipeline> {
    let profile = deviation_profile(&map, [0.0, 1.0], rho, deviation_nmax, SamplePlan::new(256, 0))?;
    if !profile.verdict.bounded {
        return Err(CliError::Check(format!(
            "vertical deviations still growing (late max {:.4} > early max {:.4})",
            profile.verdict.late_max, profile.verdict.early_max
        )));
    }
    let c_est = profile.c_est();
    let mut options = TauOptions::for_deviation(c_est).with_resolution(resolution);
    if let Some(w) = window {
        options.half_height = w;
    }
    Ok(Pipeline { map, c_est, options })
}

fn tau_summary(tau: &TauRegion) -> Value {
    json!({
        "status": match tau.status() {
            SaturationStatus::Converged => "converged",
            SaturationStatus::MaxIterations => "max-iterations",
            SaturationStatus::WindowExhausted => "window-exhausted",
        },
        "rounds": tau.rounds(),
        "occupied": tau.mask().count(),
        "vertical_extent": tau.vertical_extent(),
        "warnings": tau.warnings(),
        "seed": tau.seed(),
    })
}

fn factor_rows(fm: &FactorMap) -> Vec<Vec<f64>> {
    let [n_x, n_y] = fm.resolution;
    (0..n_x)
        .flat_map(|ix| (0..n_y).map(move |iy| (ix, iy)))
        .map(|(ix, iy)| {
            let p = fm.point(ix, iy);
            vec![p[0], p[1], fm.value(ix, iy)]
        })
        .collect()
}

fn factor_summary(fm: &FactorMap) -> Value {
    json!({
        "resolution": fm.resolution,
        "cell": fm.cell,
        "tol": fm.tol,
        "rho": fm.rho,
        "defect_max": fm.defect_max,
        "defect_max_cells": fm.defect_max / fm.cell,
        "defect_mean": json_number(fm.defect_mean),
        "offset": fm.offset,
        "fit_residual": fm.fit_residual,
        "fit_residual_cells": fm.fit_residual / fm.cell,
        "monotonicity_violations": fm.monotonicity_violations,
        "failures": fm.failures,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FactorConfig {
    map: Option<Value>,
    rho: Option<f64>,
    seed_point: Option<[f64; 2]>,
    radius: f64,
    resolution: [usize; 3],
    window: Option<f64>,
    grid: [usize; 2],
    sladder: Vec<f64>,
    tol: Option<f64>,
    max_defect_cells: f64,
    deviation_nmax: usize,
    out: Option<PathBuf>,
    format: Format,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            map: None,
            rho: None,
            seed_point: None,
            radius: 1.0,
            resolution: TauOptions::DEFAULT_RESOLUTION,
            window: None,
            grid: [128, 128],
            sladder: Vec::new(),
            tol: None,
            max_defect_cells: 4.0,
            deviation_nmax: 2000,
            out: None,
            format: Format::Csv,
        }
    }
}

/// Factor flags that must be triples or pairs are checked here.
fn triple(v: &[usize], what: &str) -> CliResult<[usize; 3]> {
    <[usize; 3]>::try_from(v).map_err(|_| CliError::Usage(format!("{what} needs 3 values, got {}", v.len())))
}

fn usize_pair(v: &[usize], what: &str) -> CliResult<[usize; 2]> {
    <[usize; 2]>::try_from(v).map_err(|_| CliError::Usage(format!("{what} needs 2 values, got {}", v.len())))
}

/// Flags given as lists are validated before the config merge so that
/// their errors name the flag.
fn check_lists(seed: &Option<Vec<f64>>, resolution: &Option<Vec<usize>>, grid: &Option<Vec<usize>>) -> CliResult<()> {
    if let Some(s) = seed {
        pair(s, "--seed-point")?;
    }
    if let Some(r) = resolution {
        triple(r, "--resolution")?;
    }
    if let Some(g) = grid {
        usize_pair(g, "--grid")?;
    }
    Ok(())
}

pub fn factor(flags: FactorFlags) -> CliResult<()> {
    check_lists(&flags.seed_point, &flags.resolution, &flags.grid)?;
    let mut cfg: FactorConfig = resolve(flags.output.config.as_ref(), &flags)?;
    attach_map(&mut cfg.map, &flags.map.map)?;
    let def = torus_def(&cfg.map)?;
    let seed_point = cfg.seed_point.ok_or_else(|| CliError::Usage("--seed-point x,y is required".into()))?;
    if cfg.rho.is_none() {
        cfg.rho = Some(nominal(&def, "--rho")?[1]);
    }
    let rho = cfg.rho.unwrap_or_default();
    let p = pipeline(def.build()?, rho, cfg.resolution, cfg.window, cfg.deviation_nmax)?;
    cfg.window = Some(p.options.half_height);
    let emit = Emitter::new("factor", &cfg, cfg.out.clone(), cfg.format)?;
    let recurrence = recurrence_probe(&p.map, seed_point, 0.05, 1000);
    let skew = CentralizedSkew::new(p.map.clone(), rho)?.with_deviation_bound(p.c_est);
    let tau = build_tau(skew, seed_point, cfg.radius, &recurrence, p.options)?;
    let cell = tau.s_step();
    let tol = cfg.tol.unwrap_or(0.5 * cell);
    let fm = project_to_torus_factor(&tau, cfg.grid, tol)?;
    emit.table("factor", &["x", "y", "h"], factor_rows(&fm))?;
    let mut clouds = Vec::new();
    for (k, &s) in cfg.sladder.iter().enumerate() {
        let c = tau.continuum(s)?;
        clouds.push(json!({"s": s, "points": c.cloud.len()}));
        emit.table(&format!("continuum_{k}"), &["x", "y"], c.cloud.iter().map(|p| p.to_vec()).collect())?;
    }
    let equivariance = verify_equivariance(&tau, &SamplePlan::new(1000, 0).points(), tol);
    let summary = json!({
        "c_est": p.c_est,
        "recurrence_times": recurrence.len(),
        "region": tau_summary(&tau),
        "factor": factor_summary(&fm),
        "equivariance": equivariance,
        "continua": clouds,
    });
    emit.summary(&summary)?;
    if fm.defect_max > cfg.max_defect_cells * cell {
        return Err(CliError::Check(format!(
            "semi-conjugacy defect {:.2} cells exceeds {}",
            fm.defect_max / cell,
            cfg.max_defect_cells
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GalleryConfig {
    nmax: usize,
    samples: usize,
    seed: u64,
    threshold: f64,
    out: Option<PathBuf>,
    format: Format,
}

impl Default for GalleryConfig {
    fn default() -> Self {
        let d = GalleryOptions::default();
        Self { nmax: d.n_max, samples: d.samples, seed: d.seed, threshold: d.threshold, out: None, format: Format::Csv }
    }
}

pub fn gallery(flags: GalleryFlags) -> CliResult<()> {
    let cfg: GalleryConfig = resolve(flags.output.config.as_ref(), &flags)?;
    let options = GalleryOptions { n_max: cfg.nmax, samples: cfg.samples, seed: cfg.seed, threshold: cfg.threshold };
    let report = gallery::gallery_report(&flags.id, &options)?;
    let emit = Emitter::new("gallery", &json!({"id": flags.id, "options": cfg}), cfg.out.clone(), cfg.format)?;
    if let Some(rows) = report["evidence"]["table"].as_array() {
        let rows = rows
            .iter()
            .map(|r| {
                ["n", "fiber_half_width", "diameter"].iter().map(|k| r[k].as_f64().unwrap_or(f64::NAN)).collect()
            })
            .collect();
        emit.table("diameters", &["n", "fiber_half_width", "diameter"], rows)?;
    }
    emit.summary(&report)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DoubleConfig {
    map: Option<Value>,
    rho: Option<[f64; 2]>,
    seed_point: [f64; 2],
    resolution: [usize; 3],
    window: Option<f64>,
    grid: [usize; 2],
    tol: Option<f64>,
    max_defect_cells: f64,
    deviation_nmax: usize,
    out: Option<PathBuf>,
    format: Format,
}

impl Default for DoubleConfig {
    fn default() -> Self {
        Self {
            map: None,
            rho: None,
            seed_point: [0.5, 0.5],
            resolution: TauOptions::DEFAULT_RESOLUTION,
            window: None,
            grid: [128, 128],
            tol: None,
            max_defect_cells: 4.0,
            deviation_nmax: 2000,
            out: None,
            format: Format::Csv,
        }
    }
}

pub fn double_factor(flags: DoubleFlags) -> CliResult<()> {
    check_lists(&flags.seed_point, &flags.resolution, &flags.grid)?;
    if let Some(r) = &flags.rho {
        pair(r, "--rho")?;
    }
    let mut cfg: DoubleConfig = resolve(flags.output.config.as_ref(), &flags)?;
    attach_map(&mut cfg.map, &flags.map.map)?;
    let def = torus_def(&cfg.map)?;
    let map = def.build()?;
    if map.twist() != 0 {
        // Refused before any numerics.
        return Err(CliError::Usage(format!(
            "precondition refused: linear part is a Dehn twist with k = {}; a pair of circle factors needs a map \
             isotopic to the identity",
            map.twist()
        )));
    }
    if cfg.rho.is_none() {
        cfg.rho = Some(nominal(&def, "--rho")?);
    }
    let rho = cfg.rho.unwrap_or_default();
    let swapped = TorusMap::swapped(map.clone())?;
    let across = pipeline(swapped, rho[0], cfg.resolution, cfg.window, cfg.deviation_nmax)?;
    let up = pipeline(map.clone(), rho[1], cfg.resolution, cfg.window, cfg.deviation_nmax)?;
    let emit = Emitter::new("double-factor", &cfg, cfg.out.clone(), cfg.format)?;
    let cell = 2.0 * across.options.half_height.max(up.options.half_height) / cfg.resolution[2] as f64;
    let tol = cfg.tol.unwrap_or(0.5 * cell);
    let pair_result = build_double(
        &map,
        rho,
        [cfg.seed_point, cfg.seed_point],
        [across.options, up.options],
        cfg.grid,
        tol,
    )?;
    let [n_x, n_y] = cfg.grid;
    let rows = (0..n_x)
        .flat_map(|ix| (0..n_y).map(move |iy| (ix, iy)))
        .map(|(ix, iy)| {
            let p = pair_result.vertical.point(ix, iy);
            // The horizontal factor lives in swapped coordinates.
            vec![p[0], p[1], pair_result.horizontal.value(iy, ix), pair_result.vertical.value(ix, iy)]
        })
        .collect();
    emit.table("double_factor", &["x", "y", "h1", "h2"], rows)?;
    let worst_cells = (pair_result.horizontal.defect_max / pair_result.horizontal.cell)
        .max(pair_result.vertical.defect_max / pair_result.vertical.cell);
    emit.summary(&json!({
        "c_est": [across.c_est, up.c_est],
        "horizontal": factor_summary(&pair_result.horizontal),
        "vertical": factor_summary(&pair_result.vertical),
        "joint_defect": pair_result.joint_defect,
        "joint_defect_cells": worst_cells,
    }))?;
    if worst_cells > cfg.max_defect_cells {
        return Err(CliError::Check(format!(
            "joint defect {worst_cells:.2} cells exceeds {}",
            cfg.max_defect_cells
        )));
    }
    Ok(())
}
