use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use terrain_planner::safe_sets::LoiterDirection;
use terrain_planner::scenarios;
use terrain_planner::terrain::DiskPadding;

#[derive(Debug, Parser)]
#[command(name = "terrain-plan", version, about = "Safe loiter-to-loiter planning above elevation maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the minimum and maximum clearance surfaces.
    Surfaces(Common),
    /// Compute the valid loiter mask for a loiter radius.
    Mask(Common),
    /// Plan a path between two loiter circles.
    Plan(PlanArgs),
    /// Repeat seeded plans on benchmark maps and write a CSV.
    Benchmark(BenchmarkArgs),
    /// Write a synthetic benchmark map as an ESRI ASCII grid.
    Synth {
        /// Scenario name (easy, hard).
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with the same keys as the flags; flags take precedence.
    /// A manifest written by an earlier run is accepted too.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ESRI ASCII elevation grid.
    #[arg(long)]
    pub dem: Option<PathBuf>,
    /// Built-in synthetic map instead of a DEM file.
    #[arg(long, conflicts_with = "dem")]
    pub scenario: Option<String>,
    #[arg(long)]
    pub min_dist: Option<f64>,
    #[arg(long)]
    pub max_dist: Option<f64>,
    /// Loiter radius, meters.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Horizontal disk padding: `interpolation`, `none` or meters.
    #[arg(long)]
    pub padding: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Surface cache directory. Defaults to `$HOME/.cache/terrain-plan`.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Maximum flight-path angle, degrees.
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Start loiter center `x,y` in map meters.
    #[arg(long, value_parser = parse_xy)]
    pub start: Option<[f64; 2]>,
    /// Start loiter direction, `cw` or `ccw`.
    #[arg(long, value_parser = parse_direction)]
    pub start_dir: Option<LoiterDirection>,
    /// Goal loiter center `x,y` in map meters.
    #[arg(long, value_parser = parse_xy)]
    pub goal: Option<[f64; 2]>,
    /// Wall-clock budget, seconds.
    #[arg(long)]
    pub budget_s: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Collision-check step, meters.
    #[arg(long)]
    pub ds: Option<f64>,
    /// Iteration budget; with no wall budget the run is reproducible.
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Stop at the first solution.
    #[arg(long)]
    pub first_solution: bool,
    /// Leave wall-clock timestamps out of the plan JSON.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated scenario names.
    #[arg(long, value_delimiter = ',')]
    pub maps: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub repetitions: u64,
    #[arg(long, default_value_t = 10.0)]
    pub budget_s: f64,
    /// First seed; run `k` uses `seed + k`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_xy(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => Ok([
            x.parse().map_err(|_| format!("bad x coordinate `{x}`"))?,
            y.parse().map_err(|_| format!("bad y coordinate `{y}`"))?,
        ]),
        _ => Err(format!("expected `x,y`, got `{text}`")),
    }
}

pub fn parse_direction(text: &str) -> Result<LoiterDirection, String> {
    match text.to_ascii_lowercase().as_str() {
        "cw" => Ok(LoiterDirection::Cw),
        "ccw" => Ok(LoiterDirection::Ccw),
        _ => Err(format!("expected `cw` or `ccw`, got `{text}`")),
    }
}

/// Every setting of a run. Also the on-disk config file format.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub dem: Option<PathBuf>,
    pub scenario: Option<String>,
    pub min_dist: Option<f64>,
    pub max_dist: Option<f64>,
    pub radius: Option<f64>,
    pub padding: Option<String>,
    pub gamma_max: Option<f64>,
    pub start: Option<[f64; 2]>,
    pub start_dir: Option<LoiterDirection>,
    pub goal: Option<[f64; 2]>,
    pub budget_s: Option<f64>,
    pub seed: Option<u64>,
    pub ds: Option<f64>,
    pub iterations: Option<u64>,
    pub first_solution: Option<bool>,
    pub deterministic: Option<bool>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let body = match value.get("config") {
            Some(config) if value.get("tool").is_some() => config.clone(),
            _ => value,
        };
        serde_json::from_value(body).with_context(|| format!("{}: invalid config", path.display()))
    }

    fn overlay(&mut self, top: &Settings) {
        overlay!(self, top; dem, scenario, min_dist, max_dist, radius, padding, gamma_max, start, start_dir,
            goal, budget_s, seed, ds, iterations, first_solution, deterministic, out, cache_dir);
    }

    fn from_common(c: &Common) -> Result<Self> {
        let mut s = match &c.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if c.dem.is_some() {
            s.scenario = None;
        }
        if c.scenario.is_some() {
            s.dem = None;
        }
        let flags = Settings {
            dem: c.dem.clone(),
            scenario: c.scenario.clone(),
            min_dist: c.min_dist,
            max_dist: c.max_dist,
            radius: c.radius,
            padding: c.padding.clone(),
            out: c.out.clone(),
            cache_dir: c.cache_dir.clone(),
            ..Default::default()
        };
        s.overlay(&flags);
        Ok(s)
    }

    pub fn for_common(c: &Common) -> Result<Self> {
        let mut s = Self::from_common(c)?;
        s.fill_defaults()?;
        Ok(s)
    }

    pub fn for_plan(p: &PlanArgs) -> Result<Self> {
        let mut s = Self::from_common(&p.common)?;
        let flags = Settings {
            gamma_max: p.gamma_max,
            start: p.start,
            start_dir: p.start_dir,
            goal: p.goal,
            budget_s: p.budget_s,
            seed: p.seed,
            ds: p.ds,
            iterations: p.iterations,
            first_solution: p.first_solution.then_some(true),
            deterministic: p.deterministic.then_some(true),
            ..Default::default()
        };
        s.overlay(&flags);
        s.fill_defaults()?;
        if let Some(sc) = s.scenario.as_deref().and_then(scenarios::by_name) {
            s.start.get_or_insert(sc.start);
            s.goal.get_or_insert(sc.goal);
        }
        s.start_dir.get_or_insert(LoiterDirection::Ccw);
        s.gamma_max.get_or_insert(scenarios::GAMMA_MAX_DEG);
        s.seed.get_or_insert(0);
        s.first_solution.get_or_insert(false);
        s.deterministic.get_or_insert(false);
        if s.budget_s.is_none() && s.iterations.is_none() {
            s.budget_s = Some(10.0);
        }
        if s.start.is_none() {
            bail!("--start is required");
        }
        if s.goal.is_none() {
            bail!("--goal is required");
        }
        Ok(s)
    }

    fn fill_defaults(&mut self) -> Result<()> {
        if self.dem.is_none() && self.scenario.is_none() {
            bail!("one of --dem or --scenario is required");
        }
        if let Some(name) = &self.scenario {
            if scenarios::by_name(name).is_none() {
                bail!("unknown scenario `{name}` (known: {})", scenarios::NAMES.join(", "));
            }
        }
        self.min_dist.get_or_insert(50.0);
        self.max_dist.get_or_insert(120.0);
        self.radius.get_or_insert(scenarios::LOITER_RADIUS);
        self.padding.get_or_insert_with(|| "interpolation".into());
        self.out.get_or_insert_with(|| PathBuf::from("."));
        self.disk_padding()?;
        Ok(())
    }

    pub fn disk_padding(&self) -> Result<DiskPadding> {
        match self.padding.as_deref().unwrap_or("interpolation") {
            "interpolation" => Ok(DiskPadding::Interpolation),
            "none" => Ok(DiskPadding::None),
            other => match other.parse::<f64>() {
                Ok(m) if m >= 0.0 => Ok(DiskPadding::Meters(m)),
                _ => bail!("--padding must be `interpolation`, `none` or a non-negative number, got `{other}`"),
            },
        }
    }
}
