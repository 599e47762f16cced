use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use terrain_planner::planner::{plan, PlanStatus, PlannerConfig, PlanningProblem};
use terrain_planner::scenarios;
use terrain_planner::terrain::{
    load_dem_str, mask_raster, surface_raster, to_esri_ascii, Corridor, ElevationGrid, LoiterOptions, Raster,
    SurfaceSet,
};

use crate::args::{BenchmarkArgs, Common, PlanArgs, Settings};
use crate::cache::{sha256_hex, SurfaceCache};
use crate::manifest::{RunManifest, Timing};
use crate::{input_error, ExitCode};

struct Loaded {
    surfaces: SurfaceSet,
    cached: bool,
}

fn elevation(settings: &Settings, manifest: &mut RunManifest) -> Result<(ElevationGrid, String)> {
    if let Some(path) = &settings.dem {
        let bytes = fs::read(path).map_err(|e| input_error(format!("reading {}: {e}", path.display())))?;
        manifest.input(path, &bytes);
        let text = String::from_utf8(bytes).map_err(|_| input_error(format!("{} is not text", path.display())))?;
        let grid = load_dem_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        Ok((grid, sha256_hex(text.as_bytes())))
    } else {
        let name = settings.scenario.as_deref().expect("dem or scenario is set");
        let scenario = scenarios::by_name(name).expect("scenario name was validated");
        let grid = scenario.terrain.generate()?;
        let digest = sha256_hex(to_esri_ascii(&grid).as_bytes());
        Ok((grid, digest))
    }
}

fn load(settings: &Settings, no_cache: bool, manifest: &mut RunManifest) -> Result<Loaded> {
    let (grid, digest) = elevation(settings, manifest)?;
    let corridor = Corridor::new(settings.min_dist.unwrap_or(50.0), settings.max_dist.unwrap_or(120.0))
        .map_err(|e| input_error(e.to_string()))?;
    let mut options = LoiterOptions::new(settings.radius.unwrap_or(scenarios::LOITER_RADIUS));
    options.padding = settings.disk_padding().map_err(|e| input_error(e.to_string()))?;
    if !(options.radius > 0.0) {
        return Err(input_error(format!("--radius must be positive, got {}", options.radius)));
    }
    let cache_dir = if no_cache { None } else { settings.cache_dir.clone().or_else(SurfaceCache::default_dir) };
    match cache_dir {
        Some(dir) => {
            let (surfaces, cached) = SurfaceCache::new(dir).load_or_build(&digest, grid, corridor, &options)?;
            Ok(Loaded { surfaces, cached })
        }
        None => Ok(Loaded { surfaces: SurfaceSet::build(grid, corridor, &options)?, cached: false }),
    }
}

fn out_dir(settings: &Settings) -> Result<&Path> {
    let dir = settings.out.as_deref().expect("out has a default");
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn emit_raster(manifest: &mut RunManifest, dir: &Path, stem: &str, raster: &Raster) -> Result<()> {
    manifest.emit(dir, &format!("{stem}.pgm"), &raster.pgm)?;
    manifest.emit(dir, &format!("{stem}.json"), serde_json::to_string_pretty(&raster.sidecar)?.as_bytes())
}

pub fn surfaces(common: &Common) -> Result<ExitCode> {
    let started = Instant::now();
    let settings = Settings::for_common(common).map_err(input_error)?;
    let mut manifest = RunManifest::new("surfaces", settings.clone());
    let loaded = load(&settings, common.no_cache, &mut manifest)?;
    let dir = out_dir(&settings)?;
    emit_raster(&mut manifest, dir, "d_minus", &surface_raster(loaded.surfaces.d_minus()))?;
    emit_raster(&mut manifest, dir, "d_plus", &surface_raster(loaded.surfaces.d_plus()))?;
    manifest.timing = Some(Timing { wall_s: started.elapsed().as_secs_f64(), surfaces_cached: loaded.cached });
    manifest.finish(dir)?;
    Ok(ExitCode::Ok)
}

#[derive(Debug, Serialize)]
struct MaskReport {
    radius: f64,
    disk_radius: f64,
    valid_count: usize,
    cells: usize,
    valid_fraction: f64,
}

pub fn mask(common: &Common) -> Result<ExitCode> {
    let started = Instant::now();
    let settings = Settings::for_common(common).map_err(input_error)?;
    let mut manifest = RunManifest::new("mask", settings.clone());
    let loaded = load(&settings, common.no_cache, &mut manifest)?;
    let dir = out_dir(&settings)?;
    let loiter = loaded.surfaces.loiter();
    let mask = loiter.mask();
    let raster = mask_raster(mask, loiter.radius(), None);
    emit_raster(&mut manifest, dir, "mask", &raster)?;
    let report = MaskReport {
        radius: loiter.radius(),
        disk_radius: loiter.radius() + loiter.padding(),
        valid_count: mask.valid_count(),
        cells: mask.cells().len(),
        valid_fraction: mask.valid_fraction(),
    };
    manifest.emit(dir, "mask_report.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    println!("valid loiter cells: {} of {} ({:.2}%)", report.valid_count, report.cells, 100.0 * report.valid_fraction);
    manifest.timing = Some(Timing { wall_s: started.elapsed().as_secs_f64(), surfaces_cached: loaded.cached });
    manifest.finish(dir)?;
    Ok(ExitCode::Ok)
}

pub fn run_plan(args: &PlanArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let settings = Settings::for_plan(args).map_err(input_error)?;
    let mut manifest = RunManifest::new("plan", settings.clone());
    let loaded = load(&settings, args.common.no_cache, &mut manifest)?;
    let dir = out_dir(&settings)?;
    let radius = loaded.surfaces.loiter().radius();
    let gamma = settings.gamma_max.expect("gamma has a default");
    let limits = terrain_planner::dubins::VehicleLimits::new(radius, gamma.to_radians())
        .map_err(|e| input_error(format!("--gamma-max: {e}")))?;
    let problem = PlanningProblem::from_centers(
        Arc::new(loaded.surfaces),
        settings.start.expect("start is required"),
        settings.start_dir.expect("start direction has a default"),
        settings.goal.expect("goal is required"),
        limits,
    )
    .map_err(|e| input_error(format!("start loiter: {e}")))?;
    let deterministic = settings.deterministic.unwrap_or(false);
    let config = PlannerConfig {
        ds: settings.ds,
        seed: settings.seed.unwrap_or(0),
        max_time_s: settings.budget_s,
        max_iterations: settings.iterations,
        stop_at_first_solution: settings.first_solution.unwrap_or(false),
        record_wall_time: !deterministic,
        ..Default::default()
    };
    let result = plan(&problem, &config);
    manifest.emit(dir, "plan.json", result.to_json().as_bytes())?;
    let cost = result.cost.map_or_else(|| "-".to_string(), |c| format!("{c:.2} m"));
    println!("status: {}  cost: {cost}", serde_json::to_value(result.status)?.as_str().unwrap_or("?"));
    if let Some(reason) = &result.reason {
        eprintln!("{reason}");
    }
    if !deterministic {
        manifest.timing = Some(Timing { wall_s: started.elapsed().as_secs_f64(), surfaces_cached: loaded.cached });
    }
    manifest.finish(dir)?;
    Ok(match result.status {
        PlanStatus::Solved | PlanStatus::SolvedSuboptimalBudget => ExitCode::Ok,
        PlanStatus::InfeasibleGoal => ExitCode::InfeasibleGoal,
        PlanStatus::Timeout => ExitCode::Timeout,
    })
}

struct BenchRow {
    map: String,
    seed: u64,
    time_to_first: Option<f64>,
    final_cost: Option<f64>,
    success: bool,
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 })
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.digits$}"))
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<ExitCode> {
    let maps: Vec<&str> = args.maps.iter().map(|m| m.trim()).filter(|m| !m.is_empty()).collect();
    if maps.is_empty() {
        return Err(input_error(format!("--maps is empty (known: {})", scenarios::NAMES.join(", "))));
    }
    if !(args.budget_s > 0.0) {
        return Err(input_error("--budget-s must be positive"));
    }
    let mut rows = Vec::new();
    for name in &maps {
        let scenario = scenarios::by_name(name)
            .ok_or_else(|| input_error(format!("unknown map `{name}` (known: {})", scenarios::NAMES.join(", "))))?;
        let surfaces = Arc::new(scenario.surfaces()?);
        let problem = scenario.problem(surfaces)?;
        for k in 0..args.repetitions {
            let seed = args.seed + k;
            let config = PlannerConfig { seed, max_time_s: Some(args.budget_s), ..Default::default() };
            let result = plan(&problem, &config);
            log::info!("{name} seed {seed}: {:?} cost {:?}", result.status, result.cost);
            rows.push(BenchRow {
                map: name.to_string(),
                seed,
                time_to_first: result.stats.time_to_first_solution,
                final_cost: result.trace.last().map(|t| t.cost),
                success: result.status.is_solved(),
            });
        }
    }
    let mut csv = String::from("map,seed,time_to_first,cost_trace_final,success\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.map,
            r.seed,
            cell(r.time_to_first, 6),
            cell(r.final_cost, 3),
            u8::from(r.success)
        ));
    }
    for name in &maps {
        let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.map == *name).collect();
        let t = median(mine.iter().filter_map(|r| r.time_to_first).collect());
        let c = median(mine.iter().filter_map(|r| r.final_cost).collect());
        let rate = mine.iter().filter(|r| r.success).count() as f64 / mine.len().max(1) as f64;
        csv.push_str(&format!("{name},median,{},{},{rate:.3}\n", cell(t, 2), cell(c, 3)));
        println!("{name}: median time to first solution {} s, success rate {:.0}%", cell(t, 2), 100.0 * rate);
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(ExitCode::Ok)
}

pub fn synth(name: &str, out: &Path) -> Result<ExitCode> {
    let scenario = scenarios::by_name(name)
        .ok_or_else(|| input_error(format!("unknown scenario `{name}` (known: {})", scenarios::NAMES.join(", "))))?;
    let grid = scenario.terrain.generate()?;
    fs::write(out, to_esri_ascii(&grid)).with_context(|| format!("writing {}", out.display()))?;
    Ok(ExitCode::Ok)
}
