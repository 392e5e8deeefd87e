//! Bank-to-bank zig-zag coverage.
//!
//! [`plan_zcover`] picks each crossing from a fan of candidate rays so the
//! triangle formed with the two previous turn points keeps roughly the
//! same area as the last one. [`plan_fixed_angle`] is the naive baseline
//! that always turns by the same angle off the near shore.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cast_ray_to_opposite_bank, in_river_shortest_path, triangle_area, BankSide, Point, RiverModel};
use crate::map::{RiverMap, StartPoint};
use crate::path::{CoveragePath, Label, PlannerId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZCoverParams {
    /// Offset of the first candidate fan from the downriver direction, radians.
    pub theta0: f64,
    /// Angular step between candidates, radians.
    pub alpha: f64,
    /// Number of candidate rays.
    pub d: usize,
    /// Initial area tolerance, m². `None` means 5% of the squared mean width.
    #[serde(default)]
    pub eps_init: Option<f64>,
    /// Tolerance increment, m². `None` means equal to the initial tolerance.
    #[serde(default)]
    pub eps_step: Option<f64>,
    /// Escalations allowed before giving up on a step.
    #[serde(default = "default_max_escalations")]
    pub max_escalations: usize,
    #[serde(default)]
    pub station_step: Option<f64>,
}

fn default_max_escalations() -> usize {
    1000
}

impl Default for ZCoverParams {
    /// `θ₀ = 30°`, `α = 5°`, `d = 11` (the largest count that keeps every
    /// ray strictly below 90° off the downriver axis).
    fn default() -> Self {
        ZCoverParams {
            theta0: 30f64.to_radians(),
            alpha: 5f64.to_radians(),
            d: 11,
            eps_init: None,
            eps_step: None,
            max_escalations: default_max_escalations(),
            station_step: None,
        }
    }
}

impl ZCoverParams {
    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("candidate count d must be >= 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha {} must be > 0", self.alpha)));
        }
        if !(self.theta0 >= 0.0) || self.theta0 + self.d as f64 * self.alpha >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidParameter(format!(
                "theta0 + d*alpha = {:.2} deg must stay below 90 deg",
                (self.theta0 + self.d as f64 * self.alpha).to_degrees()
            )));
        }
        for (name, v) in [("eps_init", self.eps_init), ("eps_step", self.eps_step)] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return Err(Error::InvalidParameter(format!("{name} {v} must be >= 0")));
                }
            }
        }
        Ok(())
    }

    /// Candidate offsets `θ₀ + iα`, `i = 1..=d`.
    pub fn candidate_angles(&self) -> Vec<f64> {
        (1..=self.d).map(|i| self.theta0 + i as f64 * self.alpha).collect()
    }
}

/// One accepted zig-zag triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleRecord {
    /// The two previous turn points and the accepted one (cells).
    pub vertices: [Point; 3],
    /// m².
    pub area: f64,
    /// Area of the previous triangle, m².
    pub previous_area: f64,
    /// Tolerance in force when the point was accepted; `None` for bootstrap.
    pub tolerance: Option<f64>,
    /// Candidate index (1-based) that was accepted.
    pub candidate: usize,
}

/// Plan plus the per-step triangle log.
#[derive(Debug, Clone, PartialEq)]
pub struct ZCoverRun {
    pub path: CoveragePath,
    pub triangles: Vec<TriangleRecord>,
    /// Tolerances resolved from the defaults, m².
    pub eps_init: f64,
    pub eps_step: f64,
}

struct Candidate {
    index: usize,
    point: Point,
    valid: bool,
    reached_end: bool,
}

fn cells2_to_m2(model: &RiverModel, a: f64) -> f64 {
    a * model.map.resolution().powi(2)
}

/// Arc length (meters) and lateral offset of a ray hit, and whether it
/// landed on the downstream end cut rather than a bank.
fn progress(model: &RiverModel, p: Point) -> (f64, f64, bool) {
    let cl = &model.centerline;
    let pr = cl.project(p);
    let tol = END_TOLERANCE_CELLS * model.map.resolution();
    let at_end = pr.arc_length >= cl.total_length - tol
        || (pr.arc_length > cl.total_length / 2.0 && model.contours.distance_to_banks(p) > CUT_DISTANCE_CELLS);
    (pr.arc_length, pr.lateral, at_end)
}

/// Stations stop 1.5 cells short of the end cuts; a hit this close to the
/// last station counts as reaching the end.
const END_TOLERANCE_CELLS: f64 = 3.0;
/// A hit farther than this (cells) from every bank vertex is on an end cut.
const CUT_DISTANCE_CELLS: f64 = 2.0;

fn side_sign(side: BankSide) -> f64 {
    // Left is a clockwise (negative) rotation with y pointing down.
    match side {
        BankSide::Left => -1.0,
        BankSide::Right => 1.0,
    }
}

fn cast_candidates(model: &RiverModel, from: Point, target: BankSide, params: &ZCoverParams) -> Vec<Candidate> {
    let phi = model.centerline.direction_at(from);
    let (arc0, _, _) = progress(model, from);
    params
        .candidate_angles()
        .into_iter()
        .enumerate()
        .filter_map(|(i, off)| {
            let hit = cast_ray_to_opposite_bank(&model.map, from, phi + side_sign(target) * off).ok()?;
            let (arc, lat, at_end) = progress(model, hit);
            let on_target = match target {
                BankSide::Left => lat > 0.0,
                BankSide::Right => lat < 0.0,
            };
            Some(Candidate {
                index: i + 1,
                point: hit,
                valid: on_target && arc > arc0 && !at_end && hit != from,
                reached_end: at_end,
            })
        })
        .collect()
}

fn initial_target(model: &RiverModel, v_s: Point) -> BankSide {
    if model.centerline.project(v_s).lateral > 0.0 {
        BankSide::Right
    } else {
        BankSide::Left
    }
}

/// Equal-triangles zig-zag from `v_s` to the downstream end, followed by a
/// TRANSIT return leg to `v_s`.
pub fn plan_zcover(map: &RiverMap, v_s: StartPoint, params: &ZCoverParams) -> Result<CoveragePath> {
    plan_zcover_run(map, v_s, params).map(|r| r.path)
}

pub fn plan_zcover_run(map: &RiverMap, v_s: StartPoint, params: &ZCoverParams) -> Result<ZCoverRun> {
    params.validate()?;
    // Crossings are long; stations every couple of cells are plenty.
    let step = params.station_step.unwrap_or(2.0 * map.resolution());
    let model = RiverModel::build(map, v_s, step)?;
    plan_zcover_on(&model, params)
}

pub fn plan_zcover_on(model: &RiverModel, params: &ZCoverParams) -> Result<ZCoverRun> {
    params.validate()?;
    let w = model.centerline.mean_width();
    let eps_init = params.eps_init.unwrap_or(0.05 * w * w);
    let eps_step = params.eps_step.unwrap_or(eps_init);
    let mut snapshot = *params;
    snapshot.eps_init = Some(eps_init);
    snapshot.eps_step = Some(eps_step);
    let start = model.start.position();
    let mut path = CoveragePath::new(PlannerId::Zcover, serde_json::to_value(snapshot)?, model.map.resolution());
    path.push(start, Label::Coverage);

    let mut pts = vec![start];
    let mut target = initial_target(model, start);
    let mut triangles = Vec::new();
    let mut s_prev: Option<f64> = None;
    let middle = params.d.div_ceil(2);
    'plan: loop {
        let cur = *pts.last().unwrap();
        let cands = cast_candidates(model, cur, target, params);
        let valid: Vec<&Candidate> = cands.iter().filter(|c| c.valid).collect();
        if valid.is_empty() {
            if cands.iter().any(|c| c.reached_end) {
                break;
            }
            return Err(Error::NoProgress {
                waypoint: pts.len() - 1,
                reason: "no candidate ray reaches the opposite bank downriver".into(),
            });
        }
        let (chosen, record) = if pts.len() < 3 {
            // Bootstrap: middle ray; the second point needs no area test.
            let c = valid
                .iter()
                .min_by_key(|c| (c.index as i64 - middle as i64).abs())
                .copied()
                .unwrap();
            let rec = (pts.len() == 2).then(|| {
                let area = cells2_to_m2(model, triangle_area(pts[0], pts[1], c.point));
                TriangleRecord {
                    vertices: [pts[0], pts[1], c.point],
                    area,
                    previous_area: area,
                    tolerance: None,
                    candidate: c.index,
                }
            });
            (c, rec)
        } else {
            let prev = s_prev.expect("set after bootstrap");
            let (a, b) = (pts[pts.len() - 2], cur);
            // Rays leaving through the end cut compete too: if one of them is
            // the first to fit, the sweep has reached the end.
            let usable: Vec<&Candidate> = cands.iter().filter(|c| c.valid || c.reached_end).collect();
            let areas: Vec<f64> = usable
                .iter()
                .map(|c| cells2_to_m2(model, triangle_area(a, b, c.point)))
                .collect();
            let mut eps = eps_init;
            let mut pick = None;
            for _ in 0..=params.max_escalations {
                if let Some(k) = areas.iter().position(|s| (s - prev).abs() <= eps) {
                    pick = Some(k);
                    break;
                }
                if eps_step <= 0.0 {
                    break;
                }
                eps += eps_step;
            }
            let Some(k) = pick else {
                return Err(Error::NoProgress {
                    waypoint: pts.len() - 1,
                    reason: format!("no triangle within tolerance after {} escalations", params.max_escalations),
                });
            };
            let c = usable[k];
            if !c.valid {
                break 'plan;
            }
            let rec = TriangleRecord {
                vertices: [a, b, c.point],
                area: areas[k],
                previous_area: prev,
                tolerance: Some(eps),
                candidate: c.index,
            };
            (c, Some(rec))
        };
        if let Some(rec) = record {
            s_prev = Some(rec.area);
            triangles.push(rec);
        }
        pts.push(chosen.point);
        path.push(chosen.point, Label::Coverage);
        target = target.opposite();
    }
    push_return(&mut path, model)?;
    Ok(ZCoverRun {
        path,
        triangles,
        eps_init,
        eps_step,
    })
}

fn push_return(path: &mut CoveragePath, model: &RiverModel) -> Result<()> {
    let last = path.waypoints.last().unwrap().position();
    let home = model.start.position();
    if last != home {
        let route = in_river_shortest_path(&model.map, last, home)?;
        path.push_transit(&route.points);
        path.push(home, Label::Transit);
    }
    Ok(())
}

/// Fixed-angle baseline: from each bank touch, turn `turn_angle` off the
/// near-shore tangent toward the other bank and run to the hit.
pub fn plan_fixed_angle(map: &RiverMap, v_s: StartPoint, turn_angle: f64) -> Result<CoveragePath> {
    if !(turn_angle > 0.0 && turn_angle < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "turn angle {:.2} deg must be in (0, 90)",
            turn_angle.to_degrees()
        )));
    }
    let model = RiverModel::build(map, v_s, 2.0 * map.resolution())?;
    plan_fixed_angle_on(&model, turn_angle)
}

pub fn plan_fixed_angle_on(model: &RiverModel, turn_angle: f64) -> Result<CoveragePath> {
    let params = serde_json::json!({ "turn_angle": turn_angle });
    let start = model.start.position();
    let mut path = CoveragePath::new(PlannerId::FixedAngle, params, model.map.resolution());
    path.push(start, Label::Coverage);
    let mut cur = start;
    let mut target = initial_target(model, start);
    let mut first = true;
    // Each step must advance; this bounds the loop on any finite map.
    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps > 4 * (model.map.width() + model.map.height()) {
            return Err(Error::NoProgress {
                waypoint: path.waypoints.len() - 1,
                reason: "step limit exceeded".into(),
            });
        }
        let (arc0, _, _) = progress(model, cur);
        // Near-shore tangent at a bank touch; the start point may sit
        // mid-river, in which case the local downriver direction is used.
        let tangent = if first {
            let d = model.centerline.direction_at(cur);
            Point::from_angle(d)
        } else {
            let (side, _, t) = model.contours.nearest_bank(cur);
            target = side.opposite();
            t
        };
        first = false;
        let theta = tangent.angle() + side_sign(target) * turn_angle;
        let hit = cast_ray_to_opposite_bank(&model.map, cur, theta)?;
        let (arc, _, at_end) = progress(model, hit);
        if at_end {
            break;
        }
        if arc <= arc0 || hit == cur {
            return Err(Error::NoProgress {
                waypoint: path.waypoints.len() - 1,
                reason: "fixed-angle ray does not advance downriver".into(),
            });
        }
        path.push(hit, Label::Coverage);
        cur = hit;
        target = target.opposite();
    }
    push_return(&mut path, model)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::make_rect_river;

    fn rect() -> (RiverMap, StartPoint) {
        let map = make_rect_river(1000, 100).unwrap();
        let s = StartPoint::new(&map, Point::new(2.0, 2.0)).unwrap();
        (map, s)
    }

    #[test]
    fn rejects_fan_reaching_right_angle() {
        let p = ZCoverParams {
            d: 12,
            ..ZCoverParams::default()
        };
        let (map, s) = rect();
        assert!(matches!(plan_zcover(&map, s, &p), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn rect_triangles_are_congruent() {
        let (map, s) = rect();
        let p = ZCoverParams {
            theta0: 40f64.to_radians(),
            alpha: 5f64.to_radians(),
            d: 9,
            ..ZCoverParams::default()
        };
        let run = plan_zcover_run(&map, s, &p).unwrap();
        assert!(run.triangles.len() >= 5);
        for t in &run.triangles[1..] {
            assert!((t.area - t.previous_area).abs() <= run.eps_init, "{t:?}");
        }
    }

    #[test]
    fn fixed_angle_rect_geometry() {
        let (map, s) = rect();
        for (deg, len, adv) in [(45.0, 100.0 * 2f64.sqrt(), 100.0), (30.0, 200.0, 173.2)] {
            let path = plan_fixed_angle(&map, s, f64::to_radians(deg)).unwrap();
            let pts: Vec<Point> = path
                .waypoints
                .iter()
                .filter(|w| w.label == Label::Coverage)
                .map(|w| w.position())
                .collect();
            assert!(pts.len() >= 4);
            for w in pts[1..].windows(2) {
                let l = w[0].dist(w[1]);
                assert!((l - len).abs() <= 0.03 * len, "{deg}: crossing {l}");
                assert!(((w[1].x - w[0].x) - adv).abs() <= 0.03 * adv + 1.0);
            }
        }
    }

    #[test]
    fn deterministic() {
        let (map, s) = rect();
        let a = plan_zcover(&map, s, &ZCoverParams::default()).unwrap();
        let b = plan_zcover(&map, s, &ZCoverParams::default()).unwrap();
        assert_eq!(a, b);
    }
}
