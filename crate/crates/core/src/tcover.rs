//! Transverse lawn-mower coverage: bank-to-bank passes perpendicular to
//! the centerline, spaced `s` apart along it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_river_shortest_path, Point, RiverModel};
use crate::map::{RiverMap, StartPoint};
use crate::path::{CoveragePath, Label, PlannerId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TCoverParams {
    /// Pass spacing along the centerline, meters.
    pub s: f64,
    /// Inset of pass endpoints from each bank, meters, capped at a quarter
    /// of the pass span. `None` means one cell plus `s / 4`.
    #[serde(default)]
    pub clearance: Option<f64>,
    #[serde(default)]
    pub station_step: Option<f64>,
}

impl TCoverParams {
    pub fn new(s: f64) -> Self {
        TCoverParams {
            s,
            clearance: None,
            station_step: None,
        }
    }

    fn clearance_m(&self, resolution: f64) -> f64 {
        self.clearance.unwrap_or(resolution + self.s / 4.0)
    }
}

/// One transverse pass: the station it sits on and its two inset ends,
/// left end first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransversePass {
    pub station: usize,
    pub left: Point,
    pub right: Point,
}

/// Stations nearest every multiple of `s`, each turned into an inset
/// cross-section.
pub fn transverse_passes(model: &RiverModel, params: &TCoverParams) -> Result<Vec<TransversePass>> {
    if !(params.s > 0.0 && params.s.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing s = {} must be > 0", params.s)));
    }
    let cl = &model.centerline;
    let res = model.map.resolution();
    let inset = params.clearance_m(res) / res;
    if !(inset >= 0.0) {
        return Err(Error::InvalidParameter("clearance must be >= 0".into()));
    }
    let mut picks: Vec<usize> = Vec::new();
    let mut k = 0usize;
    while k as f64 * params.s <= cl.total_length + 1e-9 {
        let target = k as f64 * params.s;
        let i = cl
            .stations
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1.arc_length - target)
                    .abs()
                    .total_cmp(&(b.1.arc_length - target).abs())
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        if picks.last() != Some(&i) {
            picks.push(i);
        }
        k += 1;
    }
    Ok(picks
        .into_iter()
        .map(|i| {
            let cs = &cl.stations[i].cross_section;
            let (left, right) = inset_ends(cs.a, cs.b, inset);
            TransversePass { station: i, left, right }
        })
        .collect())
}

/// Pull both ends of `a..b` inward by `inset`, never by more than a
/// quarter of the span.
fn inset_ends(a: Point, b: Point, inset: f64) -> (Point, Point) {
    let span = a.dist(b);
    if span == 0.0 {
        return (a, b);
    }
    let d = inset.min(span / 4.0);
    let u = (b - a) * (1.0 / span);
    (a + u * d, b - u * d)
}

pub fn plan_tcover(map: &RiverMap, v_s: StartPoint, params: &TCoverParams) -> Result<CoveragePath> {
    let step = params
        .station_step
        .unwrap_or_else(|| RiverModel::default_station_step(map, params.s));
    let model = RiverModel::build(map, v_s, step)?;
    plan_tcover_on(&model, params)
}

/// Serpentine over the transverse passes. Consecutive passes are joined
/// along the same bank through the inset ends of the stations in between;
/// a TRANSIT leg returns to `v_s` at the end.
pub fn plan_tcover_on(model: &RiverModel, params: &TCoverParams) -> Result<CoveragePath> {
    let passes = transverse_passes(model, params)?;
    let map = &model.map;
    let res = map.resolution();
    let mut snapshot = *params;
    snapshot.clearance = Some(params.clearance_m(res));
    let mut path = CoveragePath::new(PlannerId::Tcover, serde_json::to_value(snapshot)?, res);
    let home = model.start.position();
    path.push(home, Label::Transit);
    let Some(first) = passes.first() else {
        return Ok(path);
    };
    // Start on whichever end of the first pass is closer to v_s.
    let mut on_left = first.left.dist(home) <= first.right.dist(home);
    let route = in_river_shortest_path(map, home, if on_left { first.left } else { first.right })?;
    path.push_transit(&route.points);
    let inset = params.clearance_m(res) / res;
    for (k, pass) in passes.iter().enumerate() {
        let (from, to) = if on_left {
            (pass.left, pass.right)
        } else {
            (pass.right, pass.left)
        };
        path.push(from, Label::Coverage);
        path.push(to, Label::Coverage);
        on_left = !on_left;
        if let Some(next) = passes.get(k + 1) {
            let mut leg = vec![to];
            for st in &model.centerline.stations[pass.station + 1..next.station] {
                let cs = &st.cross_section;
                let (l, r) = inset_ends(cs.a, cs.b, inset);
                let p = if on_left { l } else { r };
                if map.is_free_point(p) {
                    leg.push(p);
                }
            }
            leg.push(if on_left { next.left } else { next.right });
            path.push_transit(&leg);
        }
    }
    let last = path.waypoints.last().unwrap().position();
    if last != home {
        let route = in_river_shortest_path(map, last, home)?;
        path.push_transit(&route.points);
        path.push(home, Label::Transit);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::make_rect_river;

    #[test]
    fn rect_pass_count_and_length() {
        let map = make_rect_river(1000, 100).unwrap();
        let v_s = StartPoint::new(&map, Point::new(3.0, 50.0)).unwrap();
        let model = RiverModel::build(&map, v_s, 5.0).unwrap();
        let passes = transverse_passes(&model, &TCoverParams::new(10.0)).unwrap();
        assert!((98..=101).contains(&passes.len()), "{}", passes.len());
        for p in &passes {
            let l = p.left.dist(p.right);
            assert!((l - 92.0).abs() <= 3.0, "{l}");
        }
    }

    #[test]
    fn huge_spacing_gives_one_pass() {
        let map = make_rect_river(200, 40).unwrap();
        let v_s = StartPoint::new(&map, Point::new(3.0, 20.0)).unwrap();
        let path = plan_tcover(&map, v_s, &TCoverParams::new(500.0)).unwrap();
        assert_eq!(path.coverage_segments().count(), 1);
    }
}
