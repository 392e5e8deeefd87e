//! The `riverine` command line: `fixtures`, `plan`, `metrics`, `simulate`,
//! `bathy` and `render`.
//!
//! Every flag mirrors a key of the JSON [`RunConfig`] given with
//! `--config`; flags win. Outputs go to `--out`, else `$RIVERINE_OUT`, else
//! the config's `out_dir`, else `riverine-out`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bathymetry::{
    fit_gp_capped, parse_samples_csv, predict_grid, samples_from_track, tune_length_scale, DepthSample, GpHyper,
    SinusoidDepth, DEFAULT_MAX_SAMPLES,
};
use crate::error::{Error, Result};
use crate::export;
use crate::fixtures;
use crate::geometry::Point;
use crate::lcover::{plan_lcover, LCoverParams, PassParity};
use crate::map::{load_map_file, save_map_file, GeoAnchor, MapMeta, RiverMap, StartPoint};
use crate::metrics::{evaluate, CoverageReport};
use crate::path::{CoveragePath, PlannerId};
use crate::sim::{simulate_with, SimConfig};
use crate::tcover::{plan_tcover, TCoverParams};
use crate::zcover::{plan_fixed_angle, plan_zcover, ZCoverParams};

/// Environment variable overriding the output root.
pub const OUT_ENV: &str = "RIVERINE_OUT";
const DEFAULT_OUT: &str = "riverine-out";

/// Planner settings shared by the four planners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSettings {
    /// Pass spacing `s`, meters.
    pub spacing: f64,
    pub parity: PassParity,
    pub merge_width_tolerance: Option<f64>,
    pub min_cluster_length: Option<f64>,
    pub zcover: ZCoverParams,
    pub fixed_angle_deg: f64,
    /// T-Cover bank clearance, meters.
    pub clearance: Option<f64>,
    pub station_step: Option<f64>,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        PlannerSettings {
            spacing: 10.0,
            parity: PassParity::Even,
            merge_width_tolerance: None,
            min_cluster_length: None,
            zcover: ZCoverParams::default(),
            fixed_angle_deg: 45.0,
            clearance: None,
            station_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathySettings {
    /// Output grid cell, meters; `None` means half the pass spacing.
    pub cell_size: Option<f64>,
    /// Seconds between soundings taken from a track.
    pub ping_interval: f64,
    pub length_scale: Option<f64>,
    pub signal_variance: Option<f64>,
    pub noise_variance: f64,
    pub max_samples: usize,
    /// Grid-search the length scale by marginal likelihood.
    pub tune: bool,
    pub depth_field: SinusoidDepth,
}

impl Default for BathySettings {
    fn default() -> Self {
        BathySettings {
            cell_size: None,
            ping_interval: 5.0,
            length_scale: None,
            signal_variance: None,
            noise_variance: 0.01,
            max_samples: DEFAULT_MAX_SAMPLES,
            tune: false,
            depth_field: SinusoidDepth::default(),
        }
    }
}

/// One JSON document describing a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Raster path; its sidecar is the same stem with `.json`.
    pub map: Option<PathBuf>,
    /// Standard fixture name, used when `map` is absent.
    pub fixture: Option<String>,
    /// Map-frame meters; falls back to the sidecar or fixture start.
    pub start: Option<[f64; 2]>,
    pub planner: Option<PlannerId>,
    pub params: PlannerSettings,
    /// Meters; `None` means the pass spacing.
    pub footprint_width: Option<f64>,
    pub sim: SimConfig,
    pub bathy: BathySettings,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_slice(&text)?)
    }

    pub fn footprint(&self) -> f64 {
        self.footprint_width.unwrap_or(self.params.spacing)
    }
}

#[derive(Debug, Parser)]
#[command(name = "riverine", version, about = "Coverage path planning for river surveys")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Map raster (PGM or PNG) with a JSON sidecar.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Standard fixture name instead of a raster.
    #[arg(long)]
    fixture: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the standard fixture rivers as PGM + JSON sidecars.
    Fixtures {
        #[command(flatten)]
        common: Common,
        /// Geo anchor `LAT,LON` added to every sidecar.
        #[arg(long, value_parser = parse_pair)]
        anchor: Option<[f64; 2]>,
    },
    /// Plan a coverage path.
    Plan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanFlags,
    },
    /// Score a path file, or every fixture and planner with `--batch`.
    Metrics {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanFlags,
        /// `*.path.json` written by `plan`.
        #[arg(long, required_unless_present = "batch")]
        path: Option<PathBuf>,
        #[arg(long)]
        batch: bool,
        /// Comma-separated fixture names for `--batch`.
        #[arg(long, value_delimiter = ',')]
        fixtures: Vec<String>,
        /// Comma-separated planners for `--batch`.
        #[arg(long, value_delimiter = ',')]
        planners: Vec<PlannerId>,
        #[arg(long)]
        footprint: Option<f64>,
    },
    /// Execute a path with the boat model.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Current `VX,VY` in m/s.
        #[arg(long, value_parser = parse_pair)]
        current: Option<[f64; 2]>,
        #[arg(long)]
        gps_sigma: Option<f64>,
    },
    /// Fit a GP depth map to soundings or to a track over the synthetic field.
    Bathy {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
        track: Option<PathBuf>,
        /// CSV `t,x,y,depth`.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        cell_size: Option<f64>,
        #[arg(long)]
        ping_interval: Option<f64>,
        #[arg(long)]
        length_scale: Option<f64>,
        #[arg(long)]
        tune: bool,
    },
    /// Draw a map with an optional path and track as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        path: Option<PathBuf>,
        /// Track CSV written by `simulate`.
        #[arg(long)]
        track: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
struct PlanFlags {
    #[arg(long)]
    planner: Option<PlannerId>,
    /// Start point `X,Y` in map-frame meters.
    #[arg(long, value_parser = parse_pair)]
    start: Option<[f64; 2]>,
    /// Pass spacing in meters.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    parity: Option<String>,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got '{s}'"));
    }
    let v = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok([v(parts[0])?, v(parts[1])?])
}

/// Run the CLI and map the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Parse and run; errors are returned instead of printed.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    dispatch(cli.command)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Fixtures { common, anchor } => cmd_fixtures(&common, anchor).map(|_| ()),
        Command::Plan { common, plan } => {
            let cfg = config(&common, &plan)?;
            cmd_plan(&cfg, &out_dir(&common, &cfg)).map(|_| ())
        }
        Command::Metrics {
            common,
            plan,
            path,
            batch,
            fixtures,
            planners,
            footprint,
        } => {
            let mut cfg = config(&common, &plan)?;
            if footprint.is_some() {
                cfg.footprint_width = footprint;
            }
            let out = out_dir(&common, &cfg);
            match (batch, path) {
                (true, _) => cmd_batch(&cfg, &fixtures, &planners, &out).map(|_| ()),
                (false, Some(p)) => cmd_metrics(&cfg, &p, &out).map(|_| ()),
                (false, None) => Err(Error::InvalidParameter("--path or --batch required".into())),
            }
        }
        Command::Simulate {
            common,
            path,
            seed,
            dt,
            current,
            gps_sigma,
        } => {
            let mut cfg = config(&common, &PlanFlags::default())?;
            if let Some(s) = seed {
                cfg.sim.seed = s;
            }
            if let Some(d) = dt {
                cfg.sim.dt = d;
            }
            if let Some(c) = current {
                cfg.sim.disturbance.current = c;
            }
            if let Some(g) = gps_sigma {
                cfg.sim.disturbance.gps_noise_sigma = g;
            }
            cmd_simulate(&cfg, &path, &out_dir(&common, &cfg)).map(|_| ())
        }
        Command::Bathy {
            common,
            track,
            samples,
            cell_size,
            ping_interval,
            length_scale,
            tune,
        } => {
            let mut cfg = config(&common, &PlanFlags::default())?;
            if cell_size.is_some() {
                cfg.bathy.cell_size = cell_size;
            }
            if let Some(p) = ping_interval {
                cfg.bathy.ping_interval = p;
            }
            if length_scale.is_some() {
                cfg.bathy.length_scale = length_scale;
            }
            cfg.bathy.tune |= tune;
            let input = match (track, samples) {
                (Some(t), _) => BathyInput::Track(t),
                (None, Some(s)) => BathyInput::Samples(s),
                (None, None) => return Err(Error::InvalidParameter("--track or --samples required".into())),
            };
            cmd_bathy(&cfg, &input, &out_dir(&common, &cfg)).map(|_| ())
        }
        Command::Render { common, path, track } => {
            let cfg = config(&common, &PlanFlags::default())?;
            cmd_render(&cfg, path.as_deref(), track.as_deref(), &out_dir(&common, &cfg)).map(|_| ())
        }
    }
}

fn config(common: &Common, plan: &PlanFlags) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.map {
        cfg.map = Some(m.clone());
        cfg.fixture = None;
    }
    if let Some(f) = &common.fixture {
        cfg.fixture = Some(f.clone());
        cfg.map = None;
    }
    if plan.planner.is_some() {
        cfg.planner = plan.planner;
    }
    if plan.start.is_some() {
        cfg.start = plan.start;
    }
    if let Some(s) = plan.spacing {
        cfg.params.spacing = s;
    }
    if let Some(p) = &plan.parity {
        cfg.params.parity = serde_json::from_value(json!(p))
            .map_err(|_| Error::InvalidParameter(format!("parity must be nearest, even or odd, got '{p}'")))?;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// A map ready for planning, with its name and default start.
pub struct LoadedMap {
    pub name: String,
    pub map: RiverMap,
    pub start: Option<StartPoint>,
}

pub fn load_configured_map(cfg: &RunConfig) -> Result<LoadedMap> {
    let mut loaded = if let Some(p) = &cfg.map {
        let (map, meta) = load_map_file(p)?;
        let start = match meta.start {
            Some([x, y]) => Some(StartPoint::new(
                &map,
                Point::new(x / map.resolution(), y / map.resolution()),
            )?),
            None => None,
        };
        LoadedMap {
            name: p.file_stem().map_or_else(|| "map".into(), |s| s.to_string_lossy().into_owned()),
            map,
            start,
        }
    } else if let Some(f) = &cfg.fixture {
        let fx = fixtures::by_name(f)?;
        LoadedMap {
            name: fx.name,
            map: fx.map,
            start: Some(fx.start),
        }
    } else {
        return Err(Error::InvalidParameter("no map: give --map or --fixture".into()));
    };
    if let Some([x, y]) = cfg.start {
        let res = loaded.map.resolution();
        loaded.start = Some(StartPoint::new(&loaded.map, Point::new(x / res, y / res))?);
    }
    Ok(loaded)
}

pub fn plan_with(planner: PlannerId, map: &RiverMap, start: StartPoint, p: &PlannerSettings) -> Result<CoveragePath> {
    match planner {
        PlannerId::Lcover => {
            let mut lp = LCoverParams::new(p.spacing).with_parity(p.parity);
            if let Some(t) = p.merge_width_tolerance {
                lp.merge_width_tolerance = t;
            }
            if let Some(m) = p.min_cluster_length {
                lp.min_cluster_length = m;
            }
            lp.station_step = p.station_step;
            plan_lcover(map, start, &lp)
        }
        PlannerId::Zcover => plan_zcover(map, start, &p.zcover),
        PlannerId::FixedAngle => plan_fixed_angle(map, start, p.fixed_angle_deg.to_radians()),
        PlannerId::Tcover => {
            let mut tp = TCoverParams::new(p.spacing);
            tp.clearance = p.clearance;
            tp.station_step = p.station_step;
            plan_tcover(map, start, &tp)
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write(path, text)
}

fn read_path_file(p: &Path) -> Result<CoveragePath> {
    let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
    let path: CoveragePath = serde_json::from_slice(&bytes).map_err(|e| Error::Malformed(format!("{}: {e}", p.display())))?;
    if path.is_empty() {
        return Err(Error::Malformed(format!("{}: path has no waypoints", p.display())));
    }
    Ok(path)
}

/// `name.planner` from `name.planner.path.json`.
fn artifact_stem(p: &Path) -> String {
    let name = p.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    name.strip_suffix(".path.json")
        .or_else(|| name.strip_suffix(".json"))
        .or_else(|| name.strip_suffix(".csv"))
        .unwrap_or(&name)
        .to_string()
}

fn cmd_fixtures(common: &Common, anchor: Option<[f64; 2]>) -> Result<Vec<PathBuf>> {
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = out_dir(common, &cfg);
    create_dir(&out)?;
    let mut written = Vec::new();
    for f in fixtures::standard()? {
        let res = f.map.resolution();
        let meta = MapMeta {
            resolution: res,
            threshold: 128,
            geo_anchor: anchor.map(|[lat, lon]| GeoAnchor {
                lat,
                lon,
                bearing_deg: 90.0,
            }),
            start: Some([f.start.position().x * res, f.start.position().y * res]),
        };
        let raster = out.join(format!("{}.pgm", f.name));
        save_map_file(&f.map, &meta, &raster)?;
        println!("wrote {}", raster.display());
        written.push(raster);
    }
    Ok(written)
}

/// Write the plan artifacts for one path. Returns the files written.
fn write_plan(path: &CoveragePath, map: &RiverMap, stem: &str, out: &Path, acceptance_radius: f64) -> Result<Vec<PathBuf>> {
    let anchor = map.geo_anchor.as_ref();
    let mut files = vec![
        write_json(&out.join(format!("{stem}.path.json")), path)?,
        write_json(&out.join(format!("{stem}.geojson")), &export::path_geojson(path, anchor))?,
        write(&out.join(format!("{stem}.csv")), export::path_csv(path))?,
    ];
    // The mission file needs geographic coordinates.
    if let Some(a) = anchor {
        files.push(write(
            &out.join(format!("{stem}.waypoints")),
            export::mission_wpl(path, a, acceptance_radius),
        )?);
    }
    Ok(files)
}

pub fn cmd_plan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let loaded = load_configured_map(cfg)?;
    let planner = cfg
        .planner
        .ok_or_else(|| Error::InvalidParameter("no planner: give --planner".into()))?;
    let start = loaded
        .start
        .ok_or_else(|| Error::InvalidParameter("no start point: give --start or a sidecar start".into()))?;
    let path = plan_with(planner, &loaded.map, start, &cfg.params)?;
    create_dir(out)?;
    let stem = format!("{}.{}", loaded.name, planner.as_str());
    let files = write_plan(&path, &loaded.map, &stem, out, cfg.sim.model.waypoint_radius)?;
    if loaded.map.geo_anchor.is_none() {
        eprintln!("warning: map has no geo_anchor; skipping mission file for {stem}");
    }
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(files)
}

fn check_resolution(path: &CoveragePath, map: &RiverMap) -> Result<()> {
    if (path.resolution - map.resolution()).abs() > 1e-12 {
        return Err(Error::Malformed(format!(
            "path resolution {} does not match map resolution {}",
            path.resolution,
            map.resolution()
        )));
    }
    Ok(())
}

pub fn cmd_metrics(cfg: &RunConfig, path_file: &Path, out: &Path) -> Result<CoverageReport> {
    let path = read_path_file(path_file)?;
    let loaded = load_configured_map(cfg)?;
    check_resolution(&path, &loaded.map)?;
    path.validate(&loaded.map)?;
    let v_s = StartPoint::new(&loaded.map, path.waypoints[0].position())?;
    let report = evaluate(&path, &loaded.map, v_s, cfg.footprint())?;
    create_dir(out)?;
    let stem = artifact_stem(path_file);
    write_json(&out.join(format!("{stem}.metrics.json")), &report)?;
    let csv = format!("{}\n{}\n", CoverageReport::CSV_HEADER, report.csv_row(&loaded.name));
    write(&out.join(format!("{stem}.metrics.csv")), &csv)?;
    print!("{csv}");
    Ok(report)
}

/// Plan, score and render every (fixture, planner) pair; writes the
/// per-run artifacts and `table.csv`. Returns the table rows.
pub fn cmd_batch(cfg: &RunConfig, fixture_names: &[String], planners: &[PlannerId], out: &Path) -> Result<Vec<String>> {
    let names: Vec<String> = if fixture_names.is_empty() {
        fixtures::names()
    } else {
        fixture_names.to_vec()
    };
    let planners: Vec<PlannerId> = if planners.is_empty() {
        PlannerId::ALL.to_vec()
    } else {
        planners.to_vec()
    };
    let maps = names.iter().map(|n| fixtures::by_name(n)).collect::<Result<Vec<_>>>()?;
    if maps.iter().any(|f| f.map.geo_anchor.is_none()) {
        eprintln!("warning: fixtures have no geo_anchor; skipping mission files");
    }
    create_dir(out)?;
    let jobs: Vec<(usize, PlannerId)> = (0..maps.len()).flat_map(|m| planners.iter().map(move |p| (m, *p))).collect();
    let rows: Vec<Result<String>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(m, planner)| {
                let f = &maps[m];
                s.spawn(move || -> Result<String> {
                    let path = plan_with(planner, &f.map, f.start, &cfg.params)?;
                    let stem = format!("{}.{}", f.name, planner.as_str());
                    write_plan(&path, &f.map, &stem, out, cfg.sim.model.waypoint_radius)?;
                    let report = evaluate(&path, &f.map, f.start, cfg.footprint())?;
                    write_json(&out.join(format!("{stem}.metrics.json")), &report)?;
                    write(&out.join(format!("{stem}.svg")), export::render_svg(&f.map, Some(&path), None))?;
                    Ok(report.csv_row(&f.name))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("batch worker panicked")).collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = String::from(CoverageReport::CSV_HEADER);
    table.push('\n');
    for r in &rows {
        table.push_str(r);
        table.push('\n');
    }
    let file = write(&out.join("table.csv"), &table)?;
    print!("{table}");
    println!("wrote {}", file.display());
    Ok(rows)
}

pub fn cmd_simulate(cfg: &RunConfig, path_file: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let path = read_path_file(path_file)?;
    // The map is optional here; it only supplies the geo anchor.
    let anchor = if cfg.map.is_some() || cfg.fixture.is_some() {
        let loaded = load_configured_map(cfg)?;
        check_resolution(&path, &loaded.map)?;
        loaded.map.geo_anchor
    } else {
        None
    };
    let track = simulate_with(&path, &cfg.sim)?;
    create_dir(out)?;
    let stem = artifact_stem(path_file);
    let summary = json!({
        "seed": cfg.sim.seed,
        "dt_s": cfg.sim.dt,
        "duration_s": track.duration(),
        "distance_m": track.distance(),
        "cross_track_rmse_m": track.cross_track_rmse,
        "cross_track_max_m": track.cross_track_max,
        "arrivals_s": track.arrivals,
    });
    let files = vec![
        write(&out.join(format!("{stem}.track.csv")), export::track_csv(&track))?,
        write_json(&out.join(format!("{stem}.track.geojson")), &export::track_geojson(&track, anchor.as_ref()))?,
        write_json(&out.join(format!("{stem}.track.json")), &summary)?,
    ];
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(files)
}

pub enum BathyInput {
    /// Track CSV from `simulate`, joined with the configured depth field.
    Track(PathBuf),
    /// Soundings CSV `t,x,y,depth`.
    Samples(PathBuf),
}

pub fn cmd_bathy(cfg: &RunConfig, input: &BathyInput, out: &Path) -> Result<Vec<PathBuf>> {
    let loaded = load_configured_map(cfg)?;
    let b = &cfg.bathy;
    let (samples, stem): (Vec<DepthSample>, String) = match input {
        BathyInput::Track(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let track = export::parse_track_csv(&text)?;
            let stem = artifact_stem(p);
            let stem = stem.strip_suffix(".track").unwrap_or(&stem).to_string();
            (samples_from_track(&track, &b.depth_field, b.ping_interval, &loaded.map), stem)
        }
        BathyInput::Samples(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            (parse_samples_csv(&text)?, artifact_stem(p))
        }
    };
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no depth samples inside the water".into()));
    }
    let mut hyper = GpHyper::defaults_for(&samples, cfg.params.spacing);
    if let Some(l) = b.length_scale {
        hyper.length_scale = l;
    }
    if let Some(v) = b.signal_variance {
        hyper.signal_variance = v;
    }
    hyper.noise_variance = b.noise_variance;
    if b.tune {
        let l = hyper.length_scale;
        hyper = tune_length_scale(&samples, hyper, &[0.25 * l, 0.5 * l, l, 2.0 * l, 4.0 * l])?;
    }
    let model = fit_gp_capped(&samples, hyper, b.max_samples)?;
    let cell = b.cell_size.unwrap_or(cfg.params.spacing / 2.0).max(loaded.map.resolution());
    let grid = predict_grid(&model, &loaded.map, cell)?;
    create_dir(out)?;
    let mut samples_csv = String::from("t,x,y,depth\n");
    for (i, s) in samples.iter().enumerate() {
        samples_csv.push_str(&format!("{i},{:.4},{:.4},{:.6}\n", s.x, s.y, s.depth));
    }
    let meta = export::bathy_metadata(
        &grid,
        json!({
            "samples": samples.len(),
            "training_points": model.samples.len(),
            "hyper": model.hyper,
            "prior_mean_m": model.prior_mean,
            "jitter": model.jitter,
        }),
    );
    let files = vec![
        write(&out.join(format!("{stem}.bathy.samples.csv")), samples_csv)?,
        write(&out.join(format!("{stem}.bathy.mean.pfm")), export::grid_pfm(grid.width, grid.height, &grid.mean))?,
        write(
            &out.join(format!("{stem}.bathy.rmse.pfm")),
            export::grid_pfm(grid.width, grid.height, &grid.uncertainty),
        )?,
        write(&out.join(format!("{stem}.bathy.mean.png")), export::grid_png(grid.width, grid.height, &grid.mean)?)?,
        write(
            &out.join(format!("{stem}.bathy.rmse.png")),
            export::grid_png(grid.width, grid.height, &grid.uncertainty)?,
        )?,
        write_json(&out.join(format!("{stem}.bathy.json")), &meta)?,
    ];
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(files)
}

pub fn cmd_render(cfg: &RunConfig, path_file: Option<&Path>, track_file: Option<&Path>, out: &Path) -> Result<PathBuf> {
    let loaded = load_configured_map(cfg)?;
    let path = path_file.map(read_path_file).transpose()?;
    if let Some(p) = &path {
        check_resolution(p, &loaded.map)?;
    }
    let track = match track_file {
        Some(t) => {
            let text = std::fs::read_to_string(t).map_err(|e| Error::io(t, e))?;
            Some(export::parse_track_csv(&text)?)
        }
        None => None,
    };
    let stem = match (path_file, track_file) {
        (Some(p), _) => artifact_stem(p),
        (None, Some(t)) => artifact_stem(t),
        (None, None) => loaded.name.clone(),
    };
    create_dir(out)?;
    let file = write(
        &out.join(format!("{stem}.svg")),
        export::render_svg(&loaded.map, path.as_ref(), track.as_ref()),
    )?;
    println!("wrote {}", file.display());
    Ok(file)
}
