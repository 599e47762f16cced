use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_terrain-plan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_dem(dir: &Path, name: &str, n: usize, cell: f64, height: impl Fn(usize, usize) -> f64) -> String {
    let mut text = format!("ncols {n}\nnrows {n}\nxllcorner 0\nyllcorner 0\ncellsize {cell}\nNODATA_value -9999\n");
    for row in (0..n).rev() {
        let line: Vec<String> = (0..n).map(|col| format!("{}", height(col, row))).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn flat_plan_is_solved_and_ends_on_goal() {
    let tmp = TempDir::new().unwrap();
    let dem = write_dem(tmp.path(), "flat.asc", 101, 10.0, |_, _| 0.0);
    let out = tmp.path().join("out");
    let res = run(&[
        "plan", "--dem", &dem, "--start", "200,200", "--goal", "803,703", "--iterations", "300", "--no-cache",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let plan = json(&out.join("plan.json"));
    assert_eq!(plan["status"], "solved");
    let cert = &plan["certificate"]["goal_circle"]["center"];
    assert_eq!((cert[0].as_f64().unwrap(), cert[1].as_f64().unwrap()), (805.0, 705.0));
    // Flat ground: the loiter altitude is the corridor midpoint.
    assert!((cert[2].as_f64().unwrap() - 85.0).abs() < 1e-9);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_goal_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let res = run(&[
        "plan", "--scenario", "hard", "--goal", "1000,2250", "--iterations", "100", "--no-cache", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 3);
    assert_eq!(json(&tmp.path().join("plan.json"))["status"], "infeasible_goal");
}

#[test]
fn missing_header_key_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let dem = tmp.path().join("broken.asc");
    fs::write(&dem, "ncols 3\nnrows 3\nxllcorner 0\ncellsize 10\n1 2 3\n4 5 6\n7 8 9\n").unwrap();
    let res = run(&["mask", "--dem", dem.to_str().unwrap(), "--no-cache", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("yllcorner"));
}

#[test]
fn missing_dem_file_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let res = run(&["surfaces", "--dem", "/nonexistent/x.asc", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&res), 2);
}

#[test]
fn plan_json_is_reproducible_and_manifest_replays() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let cache = tmp.path().join("cache");
    let common = ["--scenario", "hard", "--iterations", "3000", "--seed", "4", "--deterministic", "--cache-dir"];
    for dir in [&a, &b] {
        let mut args = vec!["plan"];
        args.extend(common);
        args.extend([cache.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        let res = run(&args);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    }
    let first = fs::read(a.join("plan.json")).unwrap();
    assert_eq!(first, fs::read(b.join("plan.json")).unwrap());
    let c = tmp.path().join("c");
    let manifest = a.join("manifest.json");
    let res = run(&["plan", "--config", manifest.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(first, fs::read(c.join("plan.json")).unwrap());
    let second = json(&b.join("manifest.json"));
    assert_eq!(second["timing"], serde_json::Value::Null);
}

#[test]
fn cached_surfaces_match_fresh_ones() {
    let tmp = TempDir::new().unwrap();
    let cache = tmp.path().join("cache");
    let dem = write_dem(tmp.path(), "bumps.asc", 60, 20.0, |c, r| ((c as f64) * 0.3).sin() * 40.0 + (r * 3) as f64);
    let mut digests = Vec::new();
    for (i, cache_args) in [vec!["--no-cache"], vec!["--cache-dir", cache.to_str().unwrap()], vec![
        "--cache-dir",
        cache.to_str().unwrap(),
    ]]
    .into_iter()
    .enumerate()
    {
        let out = tmp.path().join(format!("out{i}"));
        let mut args = vec!["mask", "--dem", &dem, "--out", out.to_str().unwrap()];
        args.extend(cache_args);
        assert_eq!(code(&run(&args)), 0);
        digests.push(fs::read(out.join("mask.pgm")).unwrap());
    }
    assert!(fs::read_dir(&cache).unwrap().count() >= 2);
    assert_eq!(digests[0], digests[1]);
    assert_eq!(digests[0], digests[2]);
}

#[test]
fn benchmark_writes_rows_and_summary() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("bench.csv");
    let res = run(&["benchmark", "--maps", "easy", "--repetitions", "3", "--budget-s", "0.2", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "map,seed,time_to_first,cost_trace_final,success");
    assert_eq!(lines.len(), 5);
    for (k, line) in lines[1..4].iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[0], "easy");
        assert_eq!(cols[1], k.to_string());
        assert_eq!(cols[4], "1");
        assert!(cols[2].parse::<f64>().unwrap() <= 0.2);
    }
    let summary: Vec<&str> = lines[4].split(',').collect();
    assert_eq!(&summary[..2], &["easy", "median"]);
    assert_eq!(summary[2].split('.').nth(1).unwrap().len(), 2);
    assert_eq!(summary[4], "1.000");
}

#[test]
fn empty_map_set_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("bench.csv");
    let res = run(&["benchmark", "--maps", "", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(!csv.exists());
}

#[test]
fn flat_mask_is_fully_valid() {
    let tmp = TempDir::new().unwrap();
    let dem = write_dem(tmp.path(), "flat.asc", 40, 25.0, |_, _| 312.5);
    let res = run(&["mask", "--dem", &dem, "--no-cache", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let report = json(&tmp.path().join("mask_report.json"));
    assert_eq!(report["valid_fraction"], 1.0);
    assert_eq!(report["cells"], 1600);
    let sidecar = json(&tmp.path().join("mask.json"));
    assert_eq!(sidecar["kind"], "valid_loiter_mask");
}

/// A 100 m cliff splits the map. With the bare disk, a center is invalid
/// exactly when its disk straddles the cliff edge and the cliff exceeds the
/// corridor width; brute-force count of those centers below.
#[test]
fn step_cliff_mask_fraction_matches_ring_count() {
    let tmp = TempDir::new().unwrap();
    let n = 50;
    let cell = 10.0;
    let radius = 70.0;
    let edge = 25;
    let dem = write_dem(tmp.path(), "cliff.asc", n, cell, |c, _| if c >= edge { 100.0 } else { 0.0 });
    let res = run(&[
        "mask", "--dem", &dem, "--radius", "70", "--padding", "none", "--no-cache", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let report = json(&tmp.path().join("mask_report.json"));

    // Ground-truth clearance surfaces by direct search.
    let h = |c: isize| if c >= edge as isize { 100.0 } else { 0.0 };
    let dilate = |c: isize, d: f64| {
        let reach = (d / cell).ceil() as isize;
        let mut best = f64::NEG_INFINITY;
        for dc in -reach..=reach {
            let c2 = c + dc;
            if c2 < 0 || c2 >= n as isize {
                continue;
            }
            let q = (dc as f64 * cell).powi(2);
            if q <= d * d {
                best = best.max(h(c2) + (d * d - q).sqrt());
            }
        }
        best
    };
    let d_minus: Vec<f64> = (0..n as isize).map(|c| dilate(c, 50.0)).collect();
    let d_plus: Vec<f64> = (0..n as isize).map(|c| dilate(c, 120.0)).collect();
    let reach = (radius / cell) as isize;
    let mut valid = 0u64;
    for r in 0..n as isize {
        for c in 0..n as isize {
            let (mut floor, mut ceil) = (f64::NEG_INFINITY, f64::INFINITY);
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    let (c2, r2) = (c + dc, r + dr);
                    let inside = c2 >= 0 && r2 >= 0 && c2 < n as isize && r2 < n as isize;
                    if inside && ((dc * dc + dr * dr) as f64) * cell * cell <= radius * radius {
                        floor = floor.max(d_minus[c2 as usize]);
                        ceil = ceil.min(d_plus[c2 as usize]);
                    }
                }
            }
            if ceil > floor {
                valid += 1;
            }
        }
    }
    assert_eq!(report["valid_count"].as_u64().unwrap(), valid);
    assert!(valid > 0 && valid < (n * n) as u64);
}

#[test]
fn synth_output_loads_as_dem() {
    let tmp = TempDir::new().unwrap();
    let dem = tmp.path().join("easy.asc");
    assert_eq!(code(&run(&["synth", "--scenario", "easy", "--out", dem.to_str().unwrap()])), 0);
    let res = run(&["surfaces", "--dem", dem.to_str().unwrap(), "--no-cache", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    for name in ["d_minus.pgm", "d_minus.json", "d_plus.pgm", "d_plus.json", "manifest.json"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
}
