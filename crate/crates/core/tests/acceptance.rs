//! Acceptance gate. Runs every top-level criterion and prints one line each.

mod common;

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::Dims;
use terrain_planner::dubins::{
    airplane_distance, airplane_path, dubins_shortest_2d, AirplaneState, PlanarPose, VehicleLimits,
};
use terrain_planner::guidance::blended_curvature;
use terrain_planner::planner::{path_collision_free, plan, PlanResult, PlannerConfig, PlanningProblem};
use terrain_planner::safe_sets::{circle_safe_fast, circle_states_safe, LoiterCircle, LoiterDirection};
use terrain_planner::scenarios::{self, Scenario};
use terrain_planner::terrain::{
    horizontal_offset, load_dem, offset_surface, Corridor, DiskMode, DiskPadding, ElevationGrid, GridFrame,
    LoiterOptions, SurfaceKind, SurfaceSet, SyntheticTerrain, TerrainShape,
};

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dims_of(frame: &GridFrame) -> Dims {
    Dims { cols: frame.n_cols, rows: frame.n_rows, cell: frame.cell_size, origin: frame.origin }
}

fn random_grid(rng: &mut ChaCha8Rng) -> ElevationGrid {
    let frame = GridFrame::new([0.0, 0.0], 10.0, 64, 64).unwrap();
    ElevationGrid::new(frame, common::random_heights(rng, 64 * 64, 400.0)).unwrap()
}

fn dilation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grids: Vec<_> = (0..20).map(|_| random_grid(&mut rng)).collect();
    let mut library_time = 0.0;
    let mut worst: f64 = 0.0;
    for g in &grids {
        for d in [0.0, 10.0, 50.0, 120.0] {
            let t = Instant::now();
            let lib = offset_surface(g, d, SurfaceKind::MinDistance).map_err(|e| e.to_string())?;
            library_time += t.elapsed().as_secs_f64();
            let oracle = common::dilation(g.heights(), dims_of(g.frame()), d);
            for (a, b) in lib.values().iter().zip(&oracle) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e} m"))?;
    ensure(library_time < 10.0, || format!("runtime {library_time:.2} s"))?;
    Ok(format!("80 surfaces, max deviation {worst:e} m, {library_time:.3} s"))
}

fn disk_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0usize;
    for _ in 0..20 {
        let g = random_grid(&mut rng);
        let dims = dims_of(g.frame());
        let dm = offset_surface(&g, 50.0, SurfaceKind::MinDistance).unwrap();
        let dp = offset_surface(&g, 120.0, SurfaceKind::MaxDistance).unwrap();
        for r in [0.0, 30.0, 66.67] {
            let hm = horizontal_offset(&dm, r, DiskMode::Max).unwrap();
            let hp = horizontal_offset(&dp, r, DiskMode::Min).unwrap();
            let om = common::disk_extreme(dm.values(), dims, r, true);
            let op = common::disk_extreme(dp.values(), dims, r, false);
            ensure(hm.values() == om.as_slice(), || format!("H- mismatch at R = {r}"))?;
            ensure(hp.values() == op.as_slice(), || format!("H+ mismatch at R = {r}"))?;
            compared += 2;
        }
    }
    Ok(format!("{compared} surfaces identical"))
}

fn flat_analytics() -> Outcome {
    let g = SyntheticTerrain::new([2000.0, 2000.0], 10.0, TerrainShape::Flat { height: 0.0 }).generate().unwrap();
    let set = SurfaceSet::build(g, Corridor::new(50.0, 120.0).unwrap(), &LoiterOptions::new(66.67))
        .map_err(|e| e.to_string())?;
    ensure(set.mask().valid_fraction() == 1.0, || format!("valid fraction {}", set.mask().valid_fraction()))?;
    let frame = *set.frame();
    for r in 0..frame.n_rows {
        for c in 0..frame.n_cols {
            let z = set.loiter().goal_altitude(frame.world(c, r)).map_err(|e| e.to_string())?;
            ensure(z == 85.0, || format!("altitude {z} at ({c}, {r})"))?;
        }
    }
    Ok(format!("{} cells valid at exactly 85 m", frame.len()))
}

fn safety_terrains() -> Vec<TerrainShape> {
    vec![
        TerrainShape::Flat { height: 30.0 },
        TerrainShape::Ramp { slope_x: 0.15, slope_y: -0.05, base: 100.0 },
        TerrainShape::Cone { peak: 400.0, radius: 600.0 },
        TerrainShape::StepCliff { height: 90.0, offset: 0.0 },
        TerrainShape::Valley {
            depth: 300.0,
            ridge: 250.0,
            saddle: 120.0,
            floor_half_width: 300.0,
            wall_width: 200.0,
            ridge_half_width: 500.0,
            saddle_half_width: 150.0,
        },
    ]
}

fn safety_sufficiency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = 66.67;
    let (mut fast_true, mut total) = (0usize, 0usize);
    for shape in safety_terrains() {
        let g = SyntheticTerrain::new([2000.0, 2000.0], 10.0, shape).generate().unwrap();
        let set = SurfaceSet::build(g, Corridor::default(), &LoiterOptions::new(r)).unwrap();
        let dims = dims_of(set.frame());
        let mut n = 0;
        while n < 120 {
            let x = rng.gen_range(0.0..2000.0);
            let y = rng.gen_range(0.0..2000.0);
            let [cx, cy] = set.loiter().snap([x, y]).unwrap();
            let z = match set.loiter().goal_altitude([cx, cy]) {
                Ok(z) if rng.gen_bool(0.7) => z + rng.gen_range(-10.0..10.0),
                _ => match set.bounds_at(cx, cy) {
                    Some((lo, hi)) => rng.gen_range(lo - 20.0..hi + 20.0),
                    None => continue,
                },
            };
            n += 1;
            total += 1;
            let dir = if rng.gen_bool(0.5) { LoiterDirection::Cw } else { LoiterDirection::Ccw };
            let circle = LoiterCircle::new([cx, cy, z], r, dir);
            if circle_safe_fast(&circle, set.loiter()).unwrap() {
                fast_true += 1;
                let states = circle_states_safe(&circle, set.d_plus(), set.d_minus(), 3600);
                ensure(states.is_safe(), || format!("fast check accepted {circle:?}: {states:?}"))?;
                let clear = common::circle_clear(
                    circle.center,
                    r,
                    set.d_minus().values(),
                    set.d_plus().values(),
                    dims,
                    3600,
                );
                ensure(clear, || format!("oracle rejects fast-accepted {circle:?}"))?;
            }
        }
    }
    ensure(fast_true >= 100, || format!("only {fast_true} circles accepted by the fast check"))?;
    Ok(format!("{total} circles, {fast_true} fast-accepted, all period-safe"))
}

fn random_pose(rng: &mut ChaCha8Rng, span: f64) -> PlanarPose {
    PlanarPose::new(rng.gen_range(-span..span), rng.gen_range(-span..span), rng.gen_range(0.0..TAU))
}

fn dubins_2d() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let limits = VehicleLimits::new(50.0, 0.15).unwrap();
    let mut worst_len: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    for i in 0..1000 {
        let r = rng.gen_range(10.0..120.0);
        let span = if i % 3 == 0 { 2.0 * r } else { 1000.0 };
        let a = random_pose(&mut rng, span);
        let b = random_pose(&mut rng, span);
        let p = dubins_shortest_2d(a, b, r);
        let oracle = common::dubins_length([a.x, a.y, a.theta], [b.x, b.y, b.theta], r);
        worst_len = worst_len.max((p.length() - oracle).abs());
        let e = p.end();
        let dth = (e.theta - b.theta).sin().abs();
        worst_end = worst_end.max((e.x - b.x).hypot(e.y - b.y) / r).max(dth);
        ensure(p.length() + 1e-9 >= (b.x - a.x).hypot(b.y - a.y), || format!("shorter than Euclidean: {a:?} {b:?}"))?;
        let self_len = dubins_shortest_2d(a, a, r).length();
        ensure(self_len == 0.0, || format!("d(x, x) = {self_len}"))?;

        let sa = AirplaneState::new(a.x, a.y, rng.gen_range(0.0..200.0), a.theta);
        let sb = AirplaneState::new(b.x, b.y, rng.gen_range(0.0..200.0), b.theta);
        ensure(airplane_distance(&sa, &sa, &limits) == 0.0, || "airplane d(x, x) != 0".into())?;
        ensure(airplane_distance(&sa, &sb, &limits) + 1e-9 >= sa.distance(&sb), || "airplane below Euclidean".into())?;
    }
    ensure(worst_len <= 1e-9, || format!("length deviation {worst_len:e} m"))?;
    ensure(worst_end < 1e-3, || format!("endpoint error {worst_end:e}·R"))?;
    Ok(format!("1000 pairs, length deviation {worst_len:e} m, endpoint error {worst_end:e}·R"))
}

fn airplane_feasibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let limits = VehicleLimits::new(66.67, 8.6f64.to_radians()).unwrap();
    let kmax = 1.0 / limits.radius;
    let h = 1e-4;
    let mut worst_fd: f64 = 0.0;
    let mut samples = 0usize;
    for _ in 0..1000 {
        let a = AirplaneState::new(
            rng.gen_range(-800.0..800.0),
            rng.gen_range(-800.0..800.0),
            rng.gen_range(0.0..300.0),
            rng.gen_range(0.0..TAU),
        );
        let b = AirplaneState::new(
            rng.gen_range(-800.0..800.0),
            rng.gen_range(-800.0..800.0),
            rng.gen_range(0.0..300.0),
            rng.gen_range(0.0..TAU),
        );
        let path = airplane_path(&a, &b, &limits);
        let end = path.end().ok_or("empty path for distinct states")?;
        ensure(end.distance(&b) < 1e-6 && (end.theta - b.theta).sin().abs() < 1e-6, || {
            format!("endpoint {end:?} != {b:?}")
        })?;
        let n = path.length().ceil() as usize;
        for k in 0..=n {
            let s = (k as f64).min(path.length());
            let (kappa, gamma) = path.curvature_and_gamma(s).unwrap();
            ensure(kappa.abs() <= kmax + 1e-9, || format!("|κ| = {kappa}"))?;
            ensure(gamma <= limits.gamma_max + 1e-9 && gamma >= limits.gamma_min - 1e-9, || format!("γ = {gamma}"))?;
            let i = path.segment_index(s);
            let seg = &path.segments()[i];
            let local = s - path.segment_offset(i);
            if local < h || local > seg.length - h {
                continue;
            }
            let p0 = seg.sample(local - h);
            let p1 = seg.sample(local + h);
            let fd = [
                (p1.x - p0.x) / (2.0 * h),
                (p1.y - p0.y) / (2.0 * h),
                (p1.z - p0.z) / (2.0 * h),
                ((p1.theta - p0.theta + PI).rem_euclid(TAU) - PI) / (2.0 * h),
            ];
            let field = seg.derivative(local);
            for (f, g) in fd.iter().zip(field) {
                worst_fd = worst_fd.max((f - g).abs());
            }
            samples += 1;
        }
    }
    ensure(worst_fd <= 1e-4, || format!("finite-difference deviation {worst_fd:e}"))?;
    Ok(format!("1000 paths, {samples} interior samples, FD deviation {worst_fd:e}"))
}

struct BenchRun {
    scenario: &'static str,
    surfaces: Arc<SurfaceSet>,
    result: PlanResult,
}

fn run_benchmarks() -> Vec<BenchRun> {
    let mut runs = Vec::new();
    for (name, scenario, budget) in [("easy", scenarios::easy(), 10.0), ("hard", scenarios::hard(), 30.0)] {
        let surfaces = Arc::new(scenario.surfaces().unwrap());
        let problem = scenario.problem(surfaces.clone()).unwrap();
        for seed in 0..20 {
            let config = PlannerConfig {
                seed,
                max_time_s: Some(budget),
                stop_at_first_solution: true,
                ..Default::default()
            };
            runs.push(BenchRun { scenario: name, surfaces: surfaces.clone(), result: plan(&problem, &config) });
        }
        for seed in 100..102 {
            let config = PlannerConfig { seed, max_time_s: Some(1.0), ..Default::default() };
            runs.push(BenchRun { scenario: name, surfaces: surfaces.clone(), result: plan(&problem, &config) });
        }
    }
    runs
}

fn planner_safety(runs: &[BenchRun]) -> Outcome {
    let mut checked = 0;
    for run in runs.iter().filter(|r| r.result.status.is_solved()) {
        let r = &run.result;
        let set = &run.surfaces;
        let ds = r.config.as_ref().unwrap().ds / 2.0;
        let path = r.path.as_ref().ok_or("solved without a path")?;
        ensure(path_collision_free(path, set.d_plus(), set.d_minus(), ds), || {
            format!("{} seed {} path fails the recheck", run.scenario, r.config.as_ref().unwrap().seed)
        })?;
        let cert = r.certificate.ok_or("solved without a certificate")?;
        let verdict = circle_states_safe(&cert.goal_circle, set.d_plus(), set.d_minus(), 3600);
        ensure(verdict.is_safe(), || format!("certificate fails: {verdict:?}"))?;
        let end = path.end().ok_or("empty path")?;
        let on_circle = (end.x - cert.goal_circle.center[0]).hypot(end.y - cert.goal_circle.center[1]);
        ensure((on_circle - cert.goal_circle.radius).abs() < 1e-6 && (end.z - cert.goal_circle.center[2]).abs() < 1e-6, || {
            "path does not end on the goal circle".into()
        })?;
        checked += 1;
    }
    ensure(checked > 0, || "no solved runs".into())?;
    Ok(format!("{checked} solved paths rechecked at ds/2, certificates pass 3600 samples"))
}

fn convergence(runs: &[BenchRun]) -> Outcome {
    let first_runs = |name: &str| -> Vec<&PlanResult> {
        runs.iter().filter(|r| r.scenario == name).map(|r| &r.result).take(20).collect()
    };
    let easy = first_runs("easy");
    let easy_ok = easy.iter().filter(|r| r.status.is_solved()).count();
    let mut t1: Vec<f64> = easy.iter().filter_map(|r| r.stats.time_to_first_solution).collect();
    let median = if t1.is_empty() { f64::INFINITY } else { common::median(&mut t1) };
    let hard = first_runs("hard");
    let hard_ok = hard.iter().filter(|r| r.status.is_solved()).count();
    ensure(easy_ok == easy.len() && easy.len() == 20, || format!("easy success {easy_ok}/{}", easy.len()))?;
    ensure(median < 2.0, || format!("easy median first solution {median:.3} s"))?;
    ensure(hard_ok * 100 >= 95 * hard.len() && hard.len() == 20, || format!("hard success {hard_ok}/{}", hard.len()))?;
    Ok(format!("easy {easy_ok}/20 (median first solution {median:.3} s), hard {hard_ok}/20 within 30 s"))
}

fn real_terrain() -> Outcome {
    let Some(dir) = std::env::var_os("TERRAIN_PLANNER_REAL_DEM_DIR").map(PathBuf::from) else {
        return Ok("SKIPPED (set TERRAIN_PLANNER_REAL_DEM_DIR to a folder with sargans.asc, gotthard.asc, hoernli.asc)".into());
    };
    let mut report = Vec::new();
    for (file, expected) in [("sargans.asc", 0.77), ("gotthard.asc", 0.79), ("hoernli.asc", 0.73)] {
        let path = dir.join(file);
        if !path.exists() {
            report.push(format!("{file} missing"));
            continue;
        }
        let reader = std::io::BufReader::new(std::fs::File::open(&path).map_err(|e| e.to_string())?);
        let grid = load_dem(reader).map_err(|e| format!("{file}: {e}"))?;
        let options = LoiterOptions { padding: DiskPadding::None, ..LoiterOptions::new(66.67) };
        let set = SurfaceSet::build(grid, Corridor::default(), &options).map_err(|e| e.to_string())?;
        let f = set.mask().valid_fraction();
        ensure((f - expected).abs() <= 0.02, || format!("{file}: fraction {f:.3}, expected {expected:.2}"))?;
        report.push(format!("{file} {f:.3}"));
    }
    Ok(report.join(", "))
}

fn random_valid_center(set: &SurfaceSet, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let [x0, y0, x1, y1] = set.frame().bounds();
    loop {
        let p = [rng.gen_range(x0..x1), rng.gen_range(y0..y1)];
        let snapped = set.loiter().snap(p).unwrap();
        if set.mask().is_valid_at(snapped[0], snapped[1]) {
            return snapped;
        }
    }
}

fn curvature_blending() -> Outcome {
    let l_bar = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let maps: Vec<(Scenario, Arc<SurfaceSet>)> = [scenarios::easy(), scenarios::hard()]
        .into_iter()
        .map(|s| {
            let set = Arc::new(s.surfaces().unwrap());
            (s, set)
        })
        .collect();
    let (mut paths, mut attempts, mut endpoint_checks) = (0, 0, 0);
    while paths < 100 {
        attempts += 1;
        if attempts > 1000 {
            return Err(format!("only {paths} paths planned in 1000 attempts"));
        }
        let (scenario, set) = &maps[attempts % 2];
        let start = random_valid_center(set, &mut rng);
        let goal = random_valid_center(set, &mut rng);
        let Ok(problem) =
            PlanningProblem::from_centers(set.clone(), start, LoiterDirection::Ccw, goal, scenario.limits())
        else {
            continue;
        };
        let config = PlannerConfig {
            seed: attempts as u64,
            max_iterations: Some(400),
            max_time_s: None,
            record_wall_time: false,
            ..Default::default()
        };
        let result = plan(&problem, &config);
        let (Some(path), Some(cert)) = (result.path.as_ref(), result.certificate) else {
            continue;
        };
        if path.is_empty() {
            continue;
        }
        paths += 1;
        let terminal = cert.goal_circle.curvature();
        let lipschitz = (2.0 / scenario.radius) / l_bar;
        let step = 0.25;
        let n = (path.length() / step).ceil() as usize;
        let kappa: Vec<f64> =
            (0..=n).map(|k| blended_curvature(path, (k as f64 * step).min(path.length()), l_bar, terminal)).collect();
        for w in kappa.windows(2) {
            ensure((w[1] - w[0]).abs() <= lipschitz * step + 1e-9, || format!("jump {} over {step} m", w[1] - w[0]))?;
        }
        for _ in 0..50 {
            let s = rng.gen_range(0.0..path.length());
            let delta = rng.gen_range(0.0..=l_bar);
            let a = blended_curvature(path, s, l_bar, terminal);
            let b = blended_curvature(path, s + delta, l_bar, terminal);
            ensure((b - a).abs() <= lipschitz * delta + 1e-9, || format!("jump {} over {delta} m", b - a))?;
        }
        let segs = path.segments();
        for i in 0..segs.len().saturating_sub(1) {
            if segs[i].length < l_bar + 1.0 || segs[i + 1].length < l_bar {
                continue;
            }
            let end = path.segment_offset(i + 1);
            let far = blended_curvature(path, end - l_bar - 0.5 * rng.gen::<f64>(), l_bar, terminal);
            let at_end = blended_curvature(path, end, l_bar, terminal);
            ensure(far == segs[i].kappa, || format!("κ_ref {far} != κ_i {}", segs[i].kappa))?;
            ensure(at_end == segs[i + 1].kappa, || format!("κ_ref {at_end} != κ_i+1 {}", segs[i + 1].kappa))?;
            endpoint_checks += 1;
        }
    }
    ensure(endpoint_checks > 0, || "no segment pair long enough for endpoint checks".into())?;
    Ok(format!("{paths} paths, Lipschitz bound holds, {endpoint_checks} exact endpoint checks"))
}

fn determinism() -> Outcome {
    let scenario = scenarios::hard();
    let set = Arc::new(scenario.surfaces().unwrap());
    let problem = scenario.problem(set).unwrap();
    let config = PlannerConfig {
        seed: 42,
        max_iterations: Some(5000),
        max_time_s: None,
        record_wall_time: false,
        ..Default::default()
    };
    let first = plan(&problem, &config);
    ensure(first.status.is_solved(), || format!("status {:?}", first.status))?;
    let a = first.to_json();
    let b = plan(&problem, &config).to_json();
    ensure(a == b, || "plan JSON differs between runs".into())?;
    Ok(format!("{} bytes identical", a.len()))
}

fn main() {
    let started = Instant::now();
    let runs = run_benchmarks();
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("dilation oracle equivalence", Box::new(dilation_oracle)),
        ("disk offset oracle equivalence", Box::new(disk_oracle)),
        ("flat terrain analytics", Box::new(flat_analytics)),
        ("safety sufficiency", Box::new(safety_sufficiency)),
        ("dubins 2d correctness", Box::new(dubins_2d)),
        ("airplane path feasibility", Box::new(airplane_feasibility)),
        ("planner safety", Box::new(|| planner_safety(&runs))),
        ("planner convergence", Box::new(|| convergence(&runs))),
        ("real terrain fractions", Box::new(real_terrain)),
        ("curvature blending", Box::new(curvature_blending)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
