//! Longitudinal boustrophedon coverage.
//!
//! The centerline is split into clusters of similar width, small clusters
//! are merged into their neighbours, and each cluster is swept by a fixed
//! number of passes that follow the meander. Passes are joined in
//! serpentine order through in-river transits.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_river_shortest_path, Centerline, Point, RiverModel};
use crate::map::{RiverMap, StartPoint};
use crate::path::{CoveragePath, Label, PlannerId, Waypoint};

/// How the per-cluster pass count is rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassParity {
    /// `round(width / s)`.
    #[default]
    Nearest,
    /// Nearest even count, so the sweep ends on the side it started.
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LCoverParams {
    /// Pass spacing, meters.
    pub s: f64,
    /// Largest width difference (meters) for merging a small cluster.
    pub merge_width_tolerance: f64,
    /// Clusters shorter than this (meters) are merge candidates.
    pub min_cluster_length: f64,
    #[serde(default)]
    pub parity: PassParity,
    /// Centerline station spacing in meters; `None` means `max(2 cells, s/2)`.
    #[serde(default)]
    pub station_step: Option<f64>,
}

impl LCoverParams {
    /// Defaults: merge tolerance `2s`, minimum cluster length `4s`.
    pub fn new(s: f64) -> Self {
        LCoverParams {
            s,
            merge_width_tolerance: 2.0 * s,
            min_cluster_length: 4.0 * s,
            parity: PassParity::Nearest,
            station_step: None,
        }
    }

    pub fn with_parity(mut self, parity: PassParity) -> Self {
        self.parity = parity;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing s = {} must be > 0", self.s)));
        }
        if !(self.merge_width_tolerance >= 0.0) || !(self.min_cluster_length >= 0.0) {
            return Err(Error::InvalidParameter("merge tolerance and minimum cluster length must be >= 0".into()));
        }
        if let Some(st) = self.station_step {
            if !(st > 0.0) {
                return Err(Error::InvalidParameter(format!("station_step {st} must be > 0")));
            }
        }
        Ok(())
    }

    /// Number of passes for a reach of the given width.
    pub fn pass_count(&self, width: f64) -> usize {
        let ratio = width / self.s;
        let n = (ratio.round() as usize).max(1);
        match self.parity {
            PassParity::Nearest => n,
            PassParity::Even if n % 2 == 0 => n,
            PassParity::Odd if n % 2 == 1 => n,
            PassParity::Even => {
                if ratio > n as f64 || n == 1 {
                    n + 1
                } else {
                    n - 1
                }
            }
            PassParity::Odd => {
                if ratio > n as f64 {
                    n + 1
                } else {
                    n - 1
                }
            }
        }
    }
}

/// Contiguous reach swept with a constant number of passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Half-open range of centerline station indices.
    pub station_range: Range<usize>,
    /// Meters.
    pub representative_width: f64,
    pub pass_count: usize,
}

impl Cluster {
    /// Reach length in meters.
    pub fn length(&self, centerline: &Centerline) -> f64 {
        self.station_range.len() as f64 * centerline.station_step()
    }
}

/// Walk the stations downriver, opening a new cluster whenever a station's
/// width differs from the running mean of the current cluster by more than
/// `s`.
pub fn segment_clusters(centerline: &Centerline, params: &LCoverParams) -> Result<Vec<Cluster>> {
    params.validate()?;
    let st = &centerline.stations;
    if st.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "centerline needs at least 2 stations (has {})",
            st.len()
        )));
    }
    let mut out = Vec::new();
    let mut begin = 0;
    let mut sum = st[0].width;
    for (i, station) in st.iter().enumerate().skip(1) {
        let mean = sum / (i - begin) as f64;
        if (station.width - mean).abs() > params.s {
            out.push(make_cluster(begin..i, mean, params));
            begin = i;
            sum = 0.0;
        }
        sum += station.width;
    }
    let mean = sum / (st.len() - begin) as f64;
    out.push(make_cluster(begin..st.len(), mean, params));
    Ok(out)
}

fn make_cluster(range: Range<usize>, width: f64, params: &LCoverParams) -> Cluster {
    Cluster {
        station_range: range,
        representative_width: width,
        pass_count: params.pass_count(width),
    }
}

/// Fold clusters shorter than `min_cluster_length` into the neighbour of
/// closest width.
///
/// A small cluster is merged when that width difference is within
/// `merge_width_tolerance`, or regardless of width when it is shorter than
/// `2s`. Merged widths are length-weighted means.
pub fn merge_small_clusters(clusters: Vec<Cluster>, params: &LCoverParams, centerline: &Centerline) -> Vec<Cluster> {
    let step = centerline.station_step();
    let len = |c: &Cluster| c.station_range.len() as f64 * step;
    let mut cs = clusters;
    let mut kept = vec![false; cs.len()];
    loop {
        if cs.len() < 2 {
            break;
        }
        let cand = (0..cs.len())
            .filter(|&i| !kept[i] && len(&cs[i]) < params.min_cluster_length)
            .min_by(|&a, &b| len(&cs[a]).total_cmp(&len(&cs[b])).then(a.cmp(&b)));
        let Some(i) = cand else { break };
        let diff = |j: usize| (cs[j].representative_width - cs[i].representative_width).abs();
        let neighbour = match (i.checked_sub(1), (i + 1 < cs.len()).then_some(i + 1)) {
            (Some(a), Some(b)) => {
                if diff(b) < diff(a) {
                    b
                } else {
                    a
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => break,
        };
        if diff(neighbour) > params.merge_width_tolerance && len(&cs[i]) >= 2.0 * params.s {
            kept[i] = true;
            continue;
        }
        let (lo, hi) = (i.min(neighbour), i.max(neighbour));
        let (a, b) = (&cs[lo], &cs[hi]);
        let (la, lb) = (a.station_range.len() as f64, b.station_range.len() as f64);
        let width = (a.representative_width * la + b.representative_width * lb) / (la + lb);
        let merged = make_cluster(a.station_range.start..b.station_range.end, width, params);
        cs[lo] = merged;
        cs.remove(hi);
        kept.remove(hi);
        // The merged cluster may need another look.
        kept[lo] = false;
    }
    cs
}

/// Longitudinal passes for one cluster, each running downriver through one
/// point per station at lateral fraction `(k + 0.5) / n` of the cross-section.
///
/// Passes extend to the first station of the next cluster so consecutive
/// clusters meet without a gap. Points within a cell of an obstacle are dropped.
pub fn generate_passes(
    cluster: &Cluster,
    centerline: &Centerline,
    map: &RiverMap,
    params: &LCoverParams,
) -> Result<Vec<Vec<Point>>> {
    params.validate()?;
    let r = &cluster.station_range;
    if r.is_empty() || r.end > centerline.len() {
        return Err(Error::InvalidParameter(format!(
            "cluster range {r:?} does not fit {} stations",
            centerline.len()
        )));
    }
    let last = if r.end < centerline.len() { r.end } else { r.end - 1 };
    // Reaches narrower than s get a single centerline pass.
    let n = if cluster.representative_width < params.s {
        1
    } else {
        cluster.pass_count.max(1)
    };
    let mut passes = Vec::with_capacity(n);
    for k in 0..n {
        let f = (k as f64 + 0.5) / n as f64;
        let pass: Vec<Point> = (r.start..=last)
            .map(|i| centerline.stations[i].cross_section.at(f))
            .filter(|p| clear_of_obstacles(map, *p))
            .collect();
        if !pass.is_empty() {
            passes.push(pass);
        }
    }
    Ok(passes)
}

/// FREE, with no obstacle cell center closer than one cell.
fn clear_of_obstacles(map: &RiverMap, p: Point) -> bool {
    if !map.is_free_point(p) {
        return false;
    }
    let (x0, y0) = (p.x.floor() as i64, p.y.floor() as i64);
    (y0 - 1..=y0 + 2).all(|y| {
        (x0 - 1..=x0 + 2).all(|x| map.is_free(x, y) || p.dist(Point::new(x as f64, y as f64)) >= 1.0)
    })
}

/// Full L-Cover plan. The path starts at `v_s`, sweeps each cluster in
/// downriver order and ends at the end of the last pass.
pub fn plan_lcover(map: &RiverMap, v_s: StartPoint, params: &LCoverParams) -> Result<CoveragePath> {
    params.validate()?;
    let step = params
        .station_step
        .unwrap_or_else(|| RiverModel::default_station_step(map, params.s));
    let model = RiverModel::build(map, v_s, step)?;
    plan_lcover_on(&model, params)
}

/// Plan on a pre-built river model.
pub fn plan_lcover_on(model: &RiverModel, params: &LCoverParams) -> Result<CoveragePath> {
    params.validate()?;
    let (map, cl) = (&model.map, &model.centerline);
    let clusters = merge_small_clusters(segment_clusters(cl, params)?, params, cl);
    let mut path = CoveragePath::new(PlannerId::Lcover, serde_json::to_value(params)?, map.resolution());
    let mut cur = model.start.position();
    path.push(cur, Label::Transit);
    for (ci, cluster) in clusters.iter().enumerate() {
        let mut passes = generate_passes(cluster, cl, map, params)?;
        if passes.is_empty() {
            continue;
        }
        // Enter from whichever outer pass end is closest.
        let first = passes[0][0];
        let last_pass = passes.last().unwrap();
        let candidates = [
            (first, false, false),
            (*passes[0].last().unwrap(), false, true),
            (last_pass[0], true, false),
            (*last_pass.last().unwrap(), true, true),
        ];
        let (_, from_far_side, reverse_first) = candidates
            .iter()
            .copied()
            .min_by(|a, b| a.0.dist(cur).total_cmp(&b.0.dist(cur)))
            .unwrap();
        if from_far_side {
            passes.reverse();
        }
        let mut reverse = reverse_first;
        for pass in passes.iter_mut() {
            if reverse {
                pass.reverse();
            }
            reverse = !reverse;
            let route = in_river_shortest_path(map, cur, pass[0])?;
            path.push_transit(&route.points);
            for &p in pass.iter() {
                path.push_waypoint(Waypoint {
                    cluster: Some(ci),
                    ..Waypoint::new(p, Label::Coverage)
                });
            }
            cur = *pass.last().unwrap();
        }
    }
    Ok(path)
}

/// Clusters as the planner sees them, for reporting and rendering.
pub fn clusters_for(model: &RiverModel, params: &LCoverParams) -> Result<Vec<Cluster>> {
    Ok(merge_small_clusters(
        segment_clusters(&model.centerline, params)?,
        params,
        &model.centerline,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CrossSection, Station};

    fn synthetic_centerline(widths: &[f64], step: f64) -> Centerline {
        let stations = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let p = Point::new(i as f64 * step, 0.0);
                Station {
                    position: p,
                    tangent: Point::new(1.0, 0.0),
                    arc_length: i as f64 * step,
                    width: w,
                    cross_section: CrossSection {
                        a: p + Point::new(0.0, -w / 2.0),
                        b: p + Point::new(0.0, w / 2.0),
                        length: w,
                    },
                }
            })
            .collect();
        Centerline {
            stations,
            total_length: (widths.len() - 1) as f64 * step,
            resolution: 1.0,
        }
    }

    #[test]
    fn pass_count_parity() {
        let p = LCoverParams::new(10.0);
        assert_eq!(p.pass_count(100.0), 10);
        assert_eq!(p.pass_count(3.0), 1);
        assert_eq!(p.pass_count(94.0), 9);
        assert_eq!(p.with_parity(PassParity::Even).pass_count(94.0), 10);
        assert_eq!(p.with_parity(PassParity::Even).pass_count(86.0), 8);
        assert_eq!(p.with_parity(PassParity::Even).pass_count(3.0), 2);
        assert_eq!(p.with_parity(PassParity::Odd).pass_count(100.0), 9);
        assert_eq!(p.with_parity(PassParity::Odd).pass_count(104.0), 11);
    }

    #[test]
    fn drifting_widths_split_against_running_mean() {
        // Creeps by 1 m per station: never more than s between neighbours.
        let widths: Vec<f64> = (0..60).map(|i| 60.0 + i as f64).collect();
        let cl = synthetic_centerline(&widths, 5.0);
        let cs = segment_clusters(&cl, &LCoverParams::new(10.0)).unwrap();
        assert!(cs.len() >= 2);
        assert_eq!(cs[0].station_range.start, 0);
        assert_eq!(cs.last().unwrap().station_range.end, 60);
        assert!(cs.windows(2).all(|w| w[0].station_range.end == w[1].station_range.start));
    }

    #[test]
    fn merge_prefers_closest_width() {
        let cl = synthetic_centerline(&vec![100.0; 30], 5.0);
        let p = LCoverParams::new(10.0);
        let cs = vec![
            make_cluster(0..12, 100.0, &p),
            make_cluster(12..14, 102.0, &p),
            make_cluster(14..30, 140.0, &p),
        ];
        let merged = merge_small_clusters(cs, &p, &cl);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].station_range, 0..14);
        assert!((merged[0].representative_width - (100.0 * 12.0 + 102.0 * 2.0) / 14.0).abs() < 1e-9);
    }

    #[test]
    fn single_cluster_unchanged() {
        let cl = synthetic_centerline(&vec![100.0; 4], 5.0);
        let p = LCoverParams::new(10.0);
        let cs = vec![make_cluster(0..4, 100.0, &p)];
        assert_eq!(merge_small_clusters(cs.clone(), &p, &cl), cs);
    }

    #[test]
    fn alternating_small_clusters_collapse() {
        let cl = synthetic_centerline(&vec![100.0; 12], 5.0);
        let p = LCoverParams::new(10.0);
        let widths = [100.0, 112.0, 101.0, 113.0, 99.0, 111.0];
        let cs: Vec<Cluster> = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| make_cluster(2 * i..2 * i + 2, w, &p))
            .collect();
        let merged = merge_small_clusters(cs, &p, &cl);
        assert_eq!(merged.len(), 1);
        let mean = widths.iter().sum::<f64>() / widths.len() as f64;
        assert!((merged[0].representative_width - mean).abs() <= 1.0);
    }
}
