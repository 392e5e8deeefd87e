//! Plan scoring: covered area, return path, turns and crossing statistics.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{in_river_shortest_path, point_segment_distance, polyline_length, triangle_area, wrap_angle, Point};
use crate::map::{RiverMap, StartPoint};
use crate::path::{CoveragePath, Label, PlannerId};

/// Default heading change (radians) that counts as a turn.
pub const DEFAULT_TURN_THRESHOLD: f64 = std::f64::consts::PI / 6.0;

/// Boolean mask of FREE cells within `footprint_width / 2` of any COVERAGE
/// segment, in raster order.
pub fn coverage_mask(path: &CoveragePath, map: &RiverMap, footprint_width: f64) -> Vec<bool> {
    let (w, h) = (map.width(), map.height());
    let mut mask = vec![false; w * h];
    let r = footprint_width / 2.0 / map.resolution();
    if !(r > 0.0) {
        return mask;
    }
    for (a, b) in path.coverage_segments() {
        let x_lo = ((a.x.min(b.x) - r).floor().max(0.0)) as usize;
        let y_lo = ((a.y.min(b.y) - r).floor().max(0.0)) as usize;
        let x_hi = ((a.x.max(b.x) + r).ceil().max(0.0) as usize).min(w.saturating_sub(1));
        let y_hi = ((a.y.max(b.y) + r).ceil().max(0.0) as usize).min(h.saturating_sub(1));
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                let i = y * w + x;
                if mask[i] || !map.is_free(x as i64, y as i64) {
                    continue;
                }
                let (d, _) = point_segment_distance(Point::new(x as f64, y as f64), a, b);
                if d <= r {
                    mask[i] = true;
                }
            }
        }
    }
    mask
}

/// Percentage of FREE cells swept by the COVERAGE segments at the given
/// footprint width (meters).
pub fn covered_area_pct(path: &CoveragePath, map: &RiverMap, footprint_width: f64) -> f64 {
    let free = map.free_count();
    if free == 0 {
        return 0.0;
    }
    let covered = coverage_mask(path, map, footprint_width).iter().filter(|c| **c).count();
    100.0 * covered as f64 / free as f64
}

/// Share of travel spent getting home from the last COVERAGE waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPath {
    pub pct: f64,
    /// Meters.
    pub return_length: f64,
    /// Path length up to the last COVERAGE waypoint, meters.
    pub outbound_length: f64,
}

pub fn return_path_pct(path: &CoveragePath, map: &RiverMap, v_s: StartPoint) -> Result<ReturnPath> {
    let Some(last) = path.last_coverage_index() else {
        return Ok(ReturnPath {
            pct: 0.0,
            return_length: 0.0,
            outbound_length: 0.0,
        });
    };
    let pts = path.points();
    let outbound = polyline_length(&pts[..=last]) * path.resolution;
    let ret = in_river_shortest_path(map, pts[last], v_s.position())?.length;
    let total = outbound + ret;
    Ok(ReturnPath {
        pct: if total > 0.0 { 100.0 * ret / total } else { 0.0 },
        return_length: ret,
        outbound_length: outbound,
    })
}

/// Interior waypoints whose heading change exceeds `angle_threshold`, and
/// the summed absolute heading change.
pub fn turn_statistics(path: &CoveragePath, angle_threshold: f64) -> (usize, f64) {
    turn_statistics_points(&path.points(), angle_threshold)
}

pub fn turn_statistics_points(pts: &[Point], angle_threshold: f64) -> (usize, f64) {
    let mut count = 0;
    let mut total = 0.0;
    for w in pts.windows(3) {
        let (u, v) = (w[1] - w[0], w[2] - w[1]);
        if u.norm() == 0.0 || v.norm() == 0.0 {
            continue;
        }
        let turn = wrap_angle(v.angle() - u.angle()).abs();
        total += turn;
        if turn > angle_threshold {
            count += 1;
        }
    }
    (count, total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingStats {
    /// Meters, one per bank-to-bank crossing.
    pub lengths: Vec<f64>,
    /// m², one per consecutive triple of turn points.
    pub triangle_areas: Vec<f64>,
    pub max: f64,
    pub sd: f64,
    pub triangle_area_cv: f64,
}

/// Crossing statistics of a zig-zag plan, ignoring the leg out of `v_s`.
/// Returns `None` for non-zig-zag planners.
pub fn crossing_statistics(path: &CoveragePath) -> Option<CrossingStats> {
    if !path.planner.is_zigzag() {
        return None;
    }
    let last = path.last_coverage_index()?;
    let turns: Vec<Point> = path.waypoints[1..=last]
        .iter()
        .filter(|w| w.label == Label::Coverage)
        .map(|w| w.position())
        .collect();
    let res = path.resolution;
    let lengths: Vec<f64> = turns.windows(2).map(|w| w[0].dist(w[1]) * res).collect();
    let areas: Vec<f64> = turns
        .windows(3)
        .map(|w| triangle_area(w[0], w[1], w[2]) * res * res)
        .collect();
    let (mean_a, sd_a) = mean_sd(&areas);
    let (_, sd) = mean_sd(&lengths);
    Some(CrossingStats {
        max: lengths.iter().cloned().fold(0.0, f64::max),
        sd,
        triangle_area_cv: if mean_a > 0.0 { sd_a / mean_a } else { 0.0 },
        lengths,
        triangle_areas: areas,
    })
}

/// Population mean and standard deviation; zeros for an empty slice.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub planner: PlannerId,
    pub covered_area_pct: f64,
    pub return_path_pct: f64,
    /// Meters.
    pub coverage_length: f64,
    pub transit_length: f64,
    pub return_length: f64,
    /// Outbound length plus the return leg, meters.
    pub total_length: f64,
    pub turn_count: usize,
    /// Radians.
    pub total_turning: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing_length_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing_length_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangle_area_cv: Option<f64>,
}

impl CoverageReport {
    pub const CSV_HEADER: &'static str = "map,planner,return_path_pct,covered_area_pct,coverage_length_m,transit_length_m,return_length_m,total_length_m,turn_count,total_turning_rad,crossing_length_max_m,crossing_length_sd_m,triangle_area_cv";

    pub fn csv_row(&self, map_name: &str) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        format!(
            "{},{},{:.4},{:.4},{:.3},{:.3},{:.3},{:.3},{},{:.4},{},{},{}",
            map_name,
            self.planner.as_str(),
            self.return_path_pct,
            self.covered_area_pct,
            self.coverage_length,
            self.transit_length,
            self.return_length,
            self.total_length,
            self.turn_count,
            self.total_turning,
            opt(self.crossing_length_max),
            opt(self.crossing_length_sd),
            opt(self.triangle_area_cv),
        )
    }
}

/// All metrics for one plan.
pub fn evaluate(path: &CoveragePath, map: &RiverMap, v_s: StartPoint, footprint_width: f64) -> Result<CoverageReport> {
    let coverage_length: f64 = path.coverage_segments().map(|(a, b)| a.dist(b)).sum::<f64>() * path.resolution;
    let ret = return_path_pct(path, map, v_s)?;
    let (turn_count, total_turning) = if path.waypoints.len() >= 3 {
        turn_statistics(path, DEFAULT_TURN_THRESHOLD)
    } else {
        (0, 0.0)
    };
    let cross = crossing_statistics(path);
    Ok(CoverageReport {
        planner: path.planner,
        covered_area_pct: covered_area_pct(path, map, footprint_width),
        return_path_pct: ret.pct,
        coverage_length,
        transit_length: (ret.outbound_length - coverage_length).max(0.0),
        return_length: ret.return_length,
        total_length: ret.outbound_length + ret.return_length,
        turn_count,
        total_turning,
        crossing_length_max: cross.as_ref().map(|c| c.max),
        crossing_length_sd: cross.as_ref().map(|c| c.sd),
        triangle_area_cv: cross.as_ref().map(|c| c.triangle_area_cv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::make_rect_river;

    fn path_of(points: &[(f64, f64)], label: Label) -> CoveragePath {
        let mut p = CoveragePath::new(PlannerId::Lcover, serde_json::Value::Null, 1.0);
        for &(x, y) in points {
            p.push(Point::new(x, y), label);
        }
        p
    }

    #[test]
    fn empty_path_covers_nothing() {
        let map = make_rect_river(50, 10).unwrap();
        let p = path_of(&[(5.0, 5.0)], Label::Coverage);
        assert_eq!(covered_area_pct(&p, &map, 10.0), 0.0);
    }

    #[test]
    fn centerline_pass_full_footprint() {
        let map = make_rect_river(1000, 100).unwrap();
        let p = path_of(&[(1.0, 50.5), (1000.0, 50.5)], Label::Coverage);
        assert!(covered_area_pct(&p, &map, 100.0) >= 98.0);
    }

    #[test]
    fn transit_earns_nothing() {
        let map = make_rect_river(100, 10).unwrap();
        let p = path_of(&[(1.0, 5.0), (100.0, 5.0)], Label::Transit);
        assert_eq!(covered_area_pct(&p, &map, 10.0), 0.0);
    }

    #[test]
    fn turns() {
        let straight = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert_eq!(turn_statistics_points(&straight, 0.5), (0, 0.0));
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0), (2.0, 0.0), (3.0, 0.0)];
        let pts: Vec<Point> = sq.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let (n, total) = turn_statistics_points(&pts, 0.5);
        assert_eq!(n, 4);
        assert!((total - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn return_is_zero_at_home() {
        let map = make_rect_river(100, 10).unwrap();
        let v_s = StartPoint::new(&map, Point::new(5.0, 5.0)).unwrap();
        let p = path_of(&[(5.0, 5.0), (50.0, 5.0), (5.0, 6.0), (5.0, 5.0)], Label::Coverage);
        let r = return_path_pct(&p, &map, v_s).unwrap();
        assert_eq!(r.pct, 0.0);
    }

    #[test]
    fn single_crossing_has_zero_sd() {
        let mut p = CoveragePath::new(PlannerId::Zcover, serde_json::Value::Null, 1.0);
        for (x, y) in [(0.0, 50.0), (10.0, 1.0), (110.0, 100.0)] {
            p.push(Point::new(x, y), Label::Coverage);
        }
        let c = crossing_statistics(&p).unwrap();
        assert_eq!(c.lengths.len(), 1);
        assert_eq!(c.sd, 0.0);
        assert!(crossing_statistics(&path_of(&[(0.0, 0.0), (1.0, 1.0)], Label::Coverage)).is_none());
    }
}
