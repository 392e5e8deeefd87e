use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polyline_length, Point};
use crate::map::RiverMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    /// Survey leg, credited toward covered area.
    Coverage,
    /// Repositioning between legs or returning home.
    Transit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerId {
    Lcover,
    Zcover,
    FixedAngle,
    Tcover,
}

impl PlannerId {
    pub const ALL: [PlannerId; 4] = [PlannerId::Zcover, PlannerId::FixedAngle, PlannerId::Lcover, PlannerId::Tcover];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerId::Lcover => "lcover",
            PlannerId::Zcover => "zcover",
            PlannerId::FixedAngle => "fixed_angle",
            PlannerId::Tcover => "tcover",
        }
    }

    pub fn is_zigzag(self) -> bool {
        matches!(self, PlannerId::Zcover | PlannerId::FixedAngle)
    }
}

impl std::str::FromStr for PlannerId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcover" => Ok(PlannerId::Lcover),
            "zcover" => Ok(PlannerId::Zcover),
            "fixed_angle" => Ok(PlannerId::FixedAngle),
            "tcover" => Ok(PlannerId::Tcover),
            other => Err(Error::InvalidParameter(format!("unknown planner '{other}'"))),
        }
    }
}

/// One path vertex in cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub label: Label,
    /// L-Cover cluster the waypoint belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
}

impl Waypoint {
    pub fn new(p: Point, label: Label) -> Self {
        Waypoint {
            x: p.x,
            y: p.y,
            label,
            cluster: None,
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Waypoints `start..=end` of a path, all joined by segments of `label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub label: Label,
    pub start: usize,
    pub end: usize,
}

/// Planned route `π`. A segment earns coverage credit only when both of
/// its endpoints are labeled [`Label::Coverage`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePath {
    pub planner: PlannerId,
    /// Parameters the planner ran with.
    pub params: serde_json::Value,
    /// Meters per cell of the map the path was planned on.
    pub resolution: f64,
    pub waypoints: Vec<Waypoint>,
}

impl CoveragePath {
    pub fn new(planner: PlannerId, params: serde_json::Value, resolution: f64) -> Self {
        CoveragePath {
            planner,
            params,
            resolution,
            waypoints: Vec::new(),
        }
    }

    /// Append a waypoint, dropping exact repeats of the previous one.
    pub fn push(&mut self, p: Point, label: Label) {
        self.push_waypoint(Waypoint::new(p, label));
    }

    pub fn push_waypoint(&mut self, w: Waypoint) {
        if let Some(last) = self.waypoints.last_mut() {
            if last.position() == w.position() {
                // Coverage wins when a leg starts where a transit ended.
                if w.label == Label::Coverage {
                    last.label = Label::Coverage;
                    last.cluster = w.cluster.or(last.cluster);
                }
                return;
            }
        }
        self.waypoints.push(w);
    }

    /// Append a transit leg ending at `to`. Intermediate vertices are
    /// labeled TRANSIT; a midpoint is inserted when the leg is a single
    /// straight segment so it never earns coverage credit.
    pub fn push_transit(&mut self, route: &[Point]) {
        if route.len() < 2 {
            return;
        }
        if route.len() == 2 {
            self.push(route[0].lerp(route[1], 0.5), Label::Transit);
        } else {
            for p in &route[1..route.len() - 1] {
                self.push(*p, Label::Transit);
            }
        }
    }

    pub fn points(&self) -> Vec<Point> {
        self.waypoints.iter().map(|w| w.position()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Index of the last COVERAGE waypoint.
    pub fn last_coverage_index(&self) -> Option<usize> {
        self.waypoints.iter().rposition(|w| w.label == Label::Coverage)
    }

    /// Length in meters of the whole polyline.
    pub fn length(&self) -> f64 {
        polyline_length(&self.points()) * self.resolution
    }

    /// Consecutive index pairs forming COVERAGE segments.
    pub fn coverage_segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.waypoints.windows(2).filter_map(|w| {
            (w[0].label == Label::Coverage && w[1].label == Label::Coverage).then(|| (w[0].position(), w[1].position()))
        })
    }

    /// Maximal stretches of consecutive segments of one kind. A segment is
    /// COVERAGE when both its endpoints are.
    pub fn runs(&self) -> Vec<Run> {
        let mut out: Vec<Run> = Vec::new();
        for (i, w) in self.waypoints.windows(2).enumerate() {
            let label = if w[0].label == Label::Coverage && w[1].label == Label::Coverage {
                Label::Coverage
            } else {
                Label::Transit
            };
            match out.last_mut() {
                Some(r) if r.label == label => r.end = i + 1,
                _ => out.push(Run {
                    label,
                    start: i,
                    end: i + 1,
                }),
            }
        }
        out
    }

    /// Check the structural invariants against a map.
    pub fn validate(&self, map: &RiverMap) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::Malformed("path has no waypoints".into()));
        }
        for (i, w) in self.waypoints.iter().enumerate() {
            if !map.is_free_point(w.position()) {
                return Err(Error::Malformed(format!("waypoint {i} ({:.2}, {:.2}) is not FREE", w.x, w.y)));
            }
        }
        if self.waypoints.windows(2).any(|w| w[0].position() == w[1].position()) {
            return Err(Error::Malformed("consecutive duplicate waypoints".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transit_between_adjacent_legs_is_uncredited() {
        let mut p = CoveragePath::new(PlannerId::Lcover, serde_json::Value::Null, 1.0);
        p.push(Point::new(0.0, 0.0), Label::Coverage);
        p.push(Point::new(10.0, 0.0), Label::Coverage);
        p.push_transit(&[Point::new(10.0, 0.0), Point::new(10.0, 10.0)]);
        p.push(Point::new(10.0, 10.0), Label::Coverage);
        p.push(Point::new(0.0, 10.0), Label::Coverage);
        assert_eq!(p.coverage_segments().count(), 2);
        assert_eq!(p.waypoints.len(), 5);
        let labels: Vec<(Label, usize, usize)> = p.runs().iter().map(|r| (r.label, r.start, r.end)).collect();
        assert_eq!(
            labels,
            [(Label::Coverage, 0, 1), (Label::Transit, 1, 3), (Label::Coverage, 3, 4)]
        );
    }

    #[test]
    fn duplicate_points_collapse() {
        let mut p = CoveragePath::new(PlannerId::Tcover, serde_json::Value::Null, 1.0);
        p.push(Point::new(1.0, 1.0), Label::Transit);
        p.push(Point::new(1.0, 1.0), Label::Coverage);
        assert_eq!(p.waypoints.len(), 1);
        assert_eq!(p.waypoints[0].label, Label::Coverage);
    }

    #[test]
    fn planner_id_parse() {
        assert_eq!("fixed_angle".parse::<PlannerId>().unwrap(), PlannerId::FixedAngle);
        assert!("spiral".parse::<PlannerId>().is_err());
    }
}
