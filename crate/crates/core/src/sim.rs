//! Kinematic execution of a plan: unicycle boat, pure-pursuit steering,
//! constant current and GPS noise on the reported positions.
//!
//! Everything here is in map-frame meters (cell coordinates times the
//! path resolution).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, wrap_angle, Point};
use crate::path::CoveragePath;

/// Boat limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsvModel {
    /// m/s, also the commanded speed.
    pub v_max: f64,
    /// rad/s.
    pub max_turn_rate: f64,
    /// A waypoint counts as reached inside this radius (m). Pure pursuit
    /// looks `2 * waypoint_radius` ahead.
    pub waypoint_radius: f64,
}

impl Default for AsvModel {
    fn default() -> Self {
        AsvModel {
            v_max: 2.0,
            max_turn_rate: std::f64::consts::FRAC_PI_4,
            waypoint_radius: 3.0,
        }
    }
}

impl AsvModel {
    pub fn lookahead(&self) -> f64 {
        2.0 * self.waypoint_radius
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.v_max) || !ok(self.max_turn_rate) || !ok(self.waypoint_radius) {
            return Err(Error::InvalidParameter(format!("boat model must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Disturbance {
    /// Constant water velocity, m/s.
    #[serde(default)]
    pub current: [f64; 2],
    #[serde(default)]
    pub gps_noise_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsvState {
    pub position: Point,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub x_gps: f64,
    pub y_gps: f64,
    pub heading: f64,
}

impl TrackSample {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn gps(&self) -> Point {
        Point::new(self.x_gps, self.y_gps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutedTrack {
    pub samples: Vec<TrackSample>,
    /// Arrival time of each path waypoint, seconds.
    pub arrivals: Vec<f64>,
    pub cross_track_rmse: f64,
    pub cross_track_max: f64,
}

impl ExecutedTrack {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Length of the true track, meters.
    pub fn distance(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].position().dist(w[1].position())).sum()
    }
}

/// Everything `simulate` needs besides the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub model: AsvModel,
    pub disturbance: Disturbance,
    /// Seconds.
    pub dt: f64,
    pub seed: u64,
    /// A leg times out after `timeout_factor` times its straight-line time
    /// plus two full turns.
    pub timeout_factor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: AsvModel::default(),
            disturbance: Disturbance::default(),
            dt: 0.1,
            seed: 0,
            timeout_factor: 4.0,
        }
    }
}

pub fn simulate(path: &CoveragePath, model: AsvModel, disturbance: Disturbance, dt: f64, seed: u64) -> Result<ExecutedTrack> {
    simulate_with(
        path,
        &SimConfig {
            model,
            disturbance,
            dt,
            seed,
            ..SimConfig::default()
        },
    )
}

/// Point `lookahead` ahead of the projection of `p` on leg `a -> b`,
/// clamped to `b`.
pub fn pursuit_target(a: Point, b: Point, p: Point, lookahead: f64) -> Point {
    let ab = b - a;
    let len = ab.norm();
    if len == 0.0 {
        return b;
    }
    let u = ab * (1.0 / len);
    let s = (p - a).dot(u).clamp(0.0, len);
    a + u * (s + lookahead).min(len)
}

pub fn simulate_with(path: &CoveragePath, cfg: &SimConfig) -> Result<ExecutedTrack> {
    cfg.model.validate()?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {} must be > 0", cfg.dt)));
    }
    if !(cfg.disturbance.gps_noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("gps_noise_sigma must be >= 0".into()));
    }
    if path.is_empty() {
        return Err(Error::InvalidParameter("cannot simulate an empty path".into()));
    }
    let wps: Vec<Point> = path.points().iter().map(|p| *p * path.resolution).collect();
    let model = cfg.model;
    let dt = cfg.dt;
    let current = Point::new(cfg.disturbance.current[0], cfg.disturbance.current[1]);
    let sigma = cfg.disturbance.gps_noise_sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let turn_allowance = 2.0 * std::f64::consts::TAU / model.max_turn_rate;
    let leg_timeout = |k: usize| cfg.timeout_factor * wps[k - 1].dist(wps[k]) / model.v_max + turn_allowance;

    let mut arrivals = vec![f64::NAN; wps.len()];
    arrivals[0] = 0.0;
    let mut state = AsvState {
        position: wps[0],
        heading: wps.get(1).map_or(0.0, |w| (*w - wps[0]).angle()),
        speed: model.v_max,
    };
    let mut samples = Vec::new();
    let mut record = |t: f64, s: &AsvState, rng: &mut ChaCha8Rng| {
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        samples.push(TrackSample {
            t,
            x: s.position.x,
            y: s.position.y,
            x_gps: s.position.x + sigma * nx,
            y_gps: s.position.y + sigma * ny,
            heading: s.heading,
        });
    };
    record(0.0, &state, &mut rng);

    let last = wps.len() - 1;
    let mut active = 1usize;
    let mut leg_start = 0.0;
    let mut step = 0u64;
    while active <= last {
        // Intermediate waypoints are consumed as soon as they are in range.
        while active < last && state.position.dist(wps[active]) <= model.waypoint_radius {
            arrivals[active] = step as f64 * dt;
            active += 1;
            leg_start = step as f64 * dt;
        }
        let (a, b) = (wps[active - 1], wps[active]);
        if active == last && finished(a, b, state.position, model.v_max * dt) {
            arrivals[active] = step as f64 * dt;
            break;
        }
        let t = step as f64 * dt;
        if t - leg_start > leg_timeout(active) {
            return Err(Error::LegTimeout {
                leg: active,
                timeout: leg_timeout(active),
            });
        }
        let target = pursuit_target(a, b, state.position, model.lookahead());
        let desired = if target == state.position {
            state.heading
        } else {
            (target - state.position).angle()
        };
        let max_turn = model.max_turn_rate * dt;
        state.heading = wrap_angle(state.heading + wrap_angle(desired - state.heading).clamp(-max_turn, max_turn));
        let velocity = Point::from_angle(state.heading) * state.speed + current;
        state.position = state.position + velocity * dt;
        step += 1;
        record(step as f64 * dt, &state, &mut rng);
    }
    let mut track = ExecutedTrack {
        samples,
        arrivals,
        cross_track_rmse: 0.0,
        cross_track_max: 0.0,
    };
    let dev = track_deviation(&track, path);
    track.cross_track_rmse = dev.rmse;
    track.cross_track_max = dev.max;
    Ok(track)
}

/// The final waypoint is reached once the boat is within one step of it
/// or has passed it along the last leg.
fn finished(a: Point, b: Point, p: Point, step: f64) -> bool {
    if p.dist(b) <= step {
        return true;
    }
    let ab = b - a;
    let len = ab.norm();
    len > 0.0 && (p - a).dot(ab) / len >= len
}

/// Independent runs of the same plan, one per seed, on scoped threads.
pub fn simulate_seeds(path: &CoveragePath, cfg: &SimConfig, seeds: &[u64]) -> Vec<Result<ExecutedTrack>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let cfg = SimConfig { seed, ..*cfg };
                s.spawn(move || simulate_with(path, &cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub rmse: f64,
    pub max: f64,
}

/// Distances from the true positions to the planned polyline, meters.
pub fn track_deviation(track: &ExecutedTrack, path: &CoveragePath) -> Deviation {
    let pts: Vec<Point> = path.points().iter().map(|p| *p * path.resolution).collect();
    let index = SegmentIndex::new(&pts);
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for s in &track.samples {
        let d = index.distance(s.position());
        sum += d * d;
        max = max.max(d);
    }
    let n = track.samples.len().max(1) as f64;
    Deviation {
        rmse: (sum / n).sqrt(),
        max,
    }
}

/// Uniform bucket grid over polyline segments for nearest-distance queries.
struct SegmentIndex<'a> {
    pts: &'a [Point],
    origin: Point,
    cell: f64,
    nx: i64,
    ny: i64,
    buckets: Vec<Vec<usize>>,
}

impl<'a> SegmentIndex<'a> {
    fn new(pts: &'a [Point]) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
        let cell = (extent / 256.0).max(5.0);
        let nx = ((hi.x - lo.x) / cell).floor() as i64 + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as i64 + 1;
        let mut buckets = vec![Vec::new(); (nx * ny) as usize];
        let segs = pts.len().saturating_sub(1).max(1);
        for i in 0..segs {
            let (a, b) = (pts[i], pts[(i + 1).min(pts.len() - 1)]);
            let (x0, x1) = (((a.x.min(b.x) - lo.x) / cell) as i64, ((a.x.max(b.x) - lo.x) / cell) as i64);
            let (y0, y1) = (((a.y.min(b.y) - lo.y) / cell) as i64, ((a.y.max(b.y) - lo.y) / cell) as i64);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    buckets[(y * nx + x) as usize].push(i);
                }
            }
        }
        SegmentIndex {
            pts,
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn seg_distance(&self, i: usize, p: Point) -> f64 {
        let b = self.pts[(i + 1).min(self.pts.len() - 1)];
        point_segment_distance(p, self.pts[i], b).0
    }

    fn distance(&self, p: Point) -> f64 {
        let cx = ((p.x - self.origin.x) / self.cell).floor() as i64;
        let cy = ((p.y - self.origin.y) / self.cell).floor() as i64;
        // Rings beyond r are at least r cells away.
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) + cx.abs().max(cy.abs());
        for r in 0..=max_ring {
            for y in cy - r..=cy + r {
                for x in cx - r..=cx + r {
                    if (y - cy).abs() != r && (x - cx).abs() != r {
                        continue;
                    }
                    if x < 0 || y < 0 || x >= self.nx || y >= self.ny {
                        continue;
                    }
                    for &i in &self.buckets[(y * self.nx + x) as usize] {
                        best = best.min(self.seg_distance(i, p));
                    }
                }
            }
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{Label, PlannerId};

    fn straight(len: f64) -> CoveragePath {
        let mut p = CoveragePath::new(PlannerId::Lcover, serde_json::Value::Null, 1.0);
        p.push(Point::new(0.0, 0.0), Label::Coverage);
        p.push(Point::new(len, 0.0), Label::Coverage);
        p
    }

    #[test]
    fn straight_leg_arrival_time() {
        let t = simulate(&straight(500.0), AsvModel::default(), Disturbance::default(), 0.1, 1).unwrap();
        assert!((t.arrivals[1] - 250.0).abs() <= 0.2, "{}", t.arrivals[1]);
        assert!(t.cross_track_max < 0.1);
        assert!(t.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn deviation_of_offset_track() {
        let path = straight(100.0);
        let samples = (0..=50)
            .map(|i| TrackSample {
                t: i as f64,
                x: 2.0 * i as f64,
                y: 2.0,
                x_gps: 0.0,
                y_gps: 0.0,
                heading: 0.0,
            })
            .collect();
        let track = ExecutedTrack {
            samples,
            arrivals: vec![],
            cross_track_rmse: 0.0,
            cross_track_max: 0.0,
        };
        let d = track_deviation(&track, &path);
        assert!((d.rmse - 2.0).abs() < 1e-12 && (d.max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn index_matches_brute_force() {
        let pts: Vec<Point> = (0..40)
            .map(|i| Point::new((i as f64 * 0.7).sin() * 80.0 + i as f64 * 9.0, (i as f64 * 1.3).cos() * 60.0))
            .collect();
        let index = SegmentIndex::new(&pts);
        for k in 0..200 {
            let p = Point::new((k as f64 * 12.9) % 420.0 - 30.0, (k as f64 * 7.3) % 200.0 - 100.0);
            let brute = pts
                .windows(2)
                .map(|w| point_segment_distance(p, w[0], w[1]).0)
                .fold(f64::INFINITY, f64::min);
            assert!((index.distance(p) - brute).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_current_times_out() {
        let d = Disturbance {
            current: [-3.0, 0.0],
            gps_noise_sigma: 0.0,
        };
        let err = simulate(&straight(50.0), AsvModel::default(), d, 0.1, 0).unwrap_err();
        assert!(matches!(err, Error::LegTimeout { leg: 1, .. }));
    }
}
