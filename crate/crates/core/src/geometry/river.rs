//! River geometry shared by all planners: bank contours, the centerline
//! with arc-length stations, cross-sections and the downriver direction.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::point::point_segment_distance;
use crate::geometry::raster::{thin, trace_boundary, DistanceField, MOORE};
use crate::geometry::ray::{cast_ray_dir, traverse_to_wall};
use crate::geometry::Point;
use crate::map::{RiverMap, StartPoint};

/// Skeleton ends are trimmed while the clearance rises faster than
/// `SPUR_SLOPE` per cell over a window of `SPUR_WINDOW` points.
const SPUR_WINDOW: usize = 6;
const SPUR_SLOPE: f64 = 0.3;
/// Per-cell lateral correction and total heading change allowed while
/// extending the spine.
const MAX_RECENTER: f64 = 0.25;
const MAX_EXTENSION_TURN: f64 = std::f64::consts::FRAC_PI_4;
const CUT_NARROWING: f64 = 0.9;
/// The extended centerline stops this far (cells) inside the end cut.
const END_INSET: f64 = 1.5;
/// Loop points this close (cells of arc) to a spine end may be end-cut points.
const CAP_ZONE: f64 = 3.0;
const CAP_ZONE_SLOPE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BankSide {
    Left,
    Right,
}

impl BankSide {
    pub fn opposite(self) -> BankSide {
        match self {
            BankSide::Left => BankSide::Right,
            BankSide::Right => BankSide::Left,
        }
    }
}

/// Shore polylines (FREE boundary cells), both ordered downriver.
#[derive(Debug, Clone, PartialEq)]
pub struct BankContours {
    pub left_bank: Vec<Point>,
    pub right_bank: Vec<Point>,
    /// Smoothed river spine, upstream to downstream, in cells.
    spine: Vec<Point>,
}

impl BankContours {
    pub fn bank(&self, side: BankSide) -> &[Point] {
        match side {
            BankSide::Left => &self.left_bank,
            BankSide::Right => &self.right_bank,
        }
    }

    pub fn spine(&self) -> &[Point] {
        &self.spine
    }

    /// Distance (cells) from `p` to the closest bank vertex. Points on an
    /// end cut are far from both banks.
    pub fn distance_to_banks(&self, p: Point) -> f64 {
        self.left_bank
            .iter()
            .chain(self.right_bank.iter())
            .map(|q| q.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest bank point to `p`: its side, index and downriver tangent.
    pub fn nearest_bank(&self, p: Point) -> (BankSide, usize, Point) {
        let mut best = (BankSide::Left, 0usize, f64::INFINITY);
        for side in [BankSide::Left, BankSide::Right] {
            for (i, q) in self.bank(side).iter().enumerate() {
                let d = q.dist(p);
                if d < best.2 {
                    best = (side, i, d);
                }
            }
        }
        let bank = self.bank(best.0);
        let k = 5;
        let lo = best.1.saturating_sub(k);
        let hi = (best.1 + k).min(bank.len().saturating_sub(1));
        let t = if hi > lo {
            (bank[hi] - bank[lo]).normalized()
        } else {
            Point::new(1.0, 0.0)
        };
        (best.0, best.1, t)
    }
}

/// Straight cross-river segment through a station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    /// Left-bank end (cells).
    pub a: Point,
    /// Right-bank end (cells).
    pub b: Point,
    /// Meters.
    pub length: f64,
}

impl CrossSection {
    /// Point at fraction `f` from `a` toward `b`.
    pub fn at(&self, f: f64) -> Point {
        self.a.lerp(self.b, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Station {
    /// Cells.
    pub position: Point,
    /// Unit downriver tangent.
    pub tangent: Point,
    /// Meters from the upstream end.
    pub arc_length: f64,
    /// Meters.
    pub width: f64,
    pub cross_section: CrossSection,
}

/// Arc-length parameterized river spine with per-station cross-sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pub stations: Vec<Station>,
    /// Meters.
    pub total_length: f64,
    /// Meters per cell.
    pub resolution: f64,
}

/// Result of projecting a point onto the centerline polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Arc length of the foot point, meters.
    pub arc_length: f64,
    /// Signed lateral offset in cells, positive toward the left bank.
    pub lateral: f64,
    /// Index of the station nearest to the foot point.
    pub station: usize,
    /// True when the foot point is clamped at either end of the centerline.
    pub clamped: bool,
}

impl Centerline {
    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    /// Uniform station spacing in meters.
    pub fn station_step(&self) -> f64 {
        if self.stations.len() < 2 {
            self.total_length
        } else {
            self.total_length / (self.stations.len() - 1) as f64
        }
    }

    pub fn positions(&self) -> Vec<Point> {
        self.stations.iter().map(|s| s.position).collect()
    }

    pub fn nearest_station(&self, p: Point) -> usize {
        self.stations
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.position.dist(p).total_cmp(&b.1.position.dist(p)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Project `p` onto the centerline polyline.
    pub fn project(&self, p: Point) -> Projection {
        let st = &self.stations;
        if st.len() == 1 {
            let s = &st[0];
            return Projection {
                arc_length: 0.0,
                lateral: (p - s.position).dot(s.tangent.left_normal()),
                station: 0,
                clamped: true,
            };
        }
        let mut best = (f64::INFINITY, 0usize, 0.0f64);
        for i in 0..st.len() - 1 {
            let (d, t) = point_segment_distance(p, st[i].position, st[i + 1].position);
            if d < best.0 {
                best = (d, i, t);
            }
        }
        let (_, i, t) = best;
        let (a, b) = (&st[i], &st[i + 1]);
        let arc = a.arc_length + t * (b.arc_length - a.arc_length);
        let dir = (b.position - a.position).normalized();
        let foot = a.position.lerp(b.position, t);
        let clamped = (i == 0 && t == 0.0) || (i == st.len() - 2 && t == 1.0);
        Projection {
            arc_length: arc,
            lateral: (p - foot).dot(dir.left_normal()),
            station: if t < 0.5 { i } else { i + 1 },
            clamped,
        }
    }

    /// Which bank side of the centerline `p` lies on.
    pub fn side_of(&self, p: Point) -> BankSide {
        if self.project(p).lateral > 0.0 {
            BankSide::Left
        } else {
            BankSide::Right
        }
    }

    /// Downriver heading at the station nearest `at`.
    pub fn direction_at(&self, at: Point) -> f64 {
        self.stations[self.nearest_station(at)].tangent.angle()
    }

    pub fn mean_width(&self) -> f64 {
        self.stations.iter().map(|s| s.width).sum::<f64>() / self.stations.len().max(1) as f64
    }
}

/// Trace the FREE boundary and split it into left and right banks, both
/// ordered downriver with `v_s` nearer the upstream ends.
pub fn extract_bank_contours(map: &RiverMap, v_s: StartPoint) -> Result<BankContours> {
    let df = DistanceField::compute(map);
    let mut spine = compute_spine(map, &df)?;
    let (s_vs, _) = project_polyline(&spine, v_s.position());
    let total = crate::geometry::point::polyline_length(&spine);
    if s_vs > total / 2.0 {
        spine.reverse();
    }
    let boundary = trace_boundary(map);
    if boundary.len() < 4 {
        return Err(Error::NoExtent);
    }

    let frame_runs = count_frame_runs(map, &boundary);
    if frame_runs > 2 {
        return Err(Error::AmbiguousEnds(frame_runs));
    }

    let spine_len = crate::geometry::point::polyline_length(&spine);
    let pts: Vec<Point> = boundary.iter().map(|&(x, y)| Point::new(x as f64, y as f64)).collect();
    let n = pts.len();
    // End cuts are not exactly square to the spine, so the far corners of
    // a cut project some way back from the spine end.
    let mut clears: Vec<f64> = spine.iter().map(|p| df.at(p.x.round() as i64, p.y.round() as i64)).collect();
    clears.sort_by(f64::total_cmp);
    let cap_zone = CAP_ZONE + CAP_ZONE_SLOPE * clears[clears.len() / 2];
    #[derive(Clone, Copy, PartialEq)]
    enum Class {
        CapIn,
        CapOut,
        Bank,
    }
    let mut class = vec![Class::Bank; n];
    let mut arc = vec![0.0; n];
    let mut lateral = vec![0.0; n];
    for i in 0..n {
        let (s, lat) = project_polyline(&spine, pts[i]);
        arc[i] = s;
        lateral[i] = lat;
        let near_in = s <= cap_zone;
        let near_out = s >= spine_len - cap_zone;
        if !(near_in || near_out) {
            continue;
        }
        let chord = pts[(i + 2) % n] - pts[(i + n - 2) % n];
        let t = tangent_at(&spine, s);
        if chord.dot(t).abs() < chord.cross(t).abs() {
            class[i] = if near_in && (!near_out || s < spine_len / 2.0) {
                Class::CapIn
            } else {
                Class::CapOut
            };
        }
    }

    let longest_run = |want: Class| -> Option<(usize, usize)> {
        // Returns (start, len) of the longest cyclic run.
        if class.iter().all(|c| *c == want) {
            return Some((0, n));
        }
        let first_break = class.iter().position(|c| *c != want)?;
        let mut best: Option<(usize, usize)> = None;
        let mut run_start = None;
        for k in 1..=n {
            let i = (first_break + k) % n;
            if class[i] == want {
                if run_start.is_none() {
                    run_start = Some(k);
                }
            } else if let Some(rs) = run_start.take() {
                let len = k - rs;
                if best.is_none_or(|b| len > b.1) {
                    best = Some(((first_break + rs) % n, len));
                }
            }
        }
        best
    };

    // Fall back to single-point cuts at the extremal arc positions.
    let cut_in = longest_run(Class::CapIn).unwrap_or_else(|| {
        let i = (0..n).min_by(|&a, &b| arc[a].total_cmp(&arc[b])).unwrap();
        (i, 1)
    });
    let cut_out = longest_run(Class::CapOut).unwrap_or_else(|| {
        let i = (0..n).max_by(|&a, &b| arc[a].total_cmp(&arc[b])).unwrap();
        (i, 1)
    });
    let collect = |from: usize, to: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut i = from;
        while i != to {
            out.push(i);
            i = (i + 1) % n;
        }
        out
    };
    let in_end = (cut_in.0 + cut_in.1) % n;
    let out_end = (cut_out.0 + cut_out.1) % n;
    let arc_a = collect(in_end, cut_out.0);
    let mut arc_b = collect(out_end, cut_in.0);
    arc_b.reverse();
    if arc_a.len() < 2 || arc_b.len() < 2 {
        return Err(Error::NoExtent);
    }
    let mean_lat = |ix: &[usize]| ix.iter().map(|&i| lateral[i]).sum::<f64>() / ix.len() as f64;
    let (left, right) = if mean_lat(&arc_a) >= mean_lat(&arc_b) {
        (arc_a, arc_b)
    } else {
        (arc_b, arc_a)
    };
    let left_bank: Vec<Point> = left.iter().map(|&i| pts[i]).collect();
    let right_bank: Vec<Point> = right.iter().map(|&i| pts[i]).collect();
    let spine = recenter(&spine, &left_bank, &right_bank);
    Ok(BankContours {
        left_bank,
        right_bank,
        spine,
    })
}

/// Shift every spine point laterally onto the midpoint of its bank feet.
/// Skeleton cells sit half a cell off the axis of an even-width channel,
/// and the skeleton forks toward the corners of the end cuts.
fn recenter(spine: &[Point], left: &[Point], right: &[Point]) -> Vec<Point> {
    let n = spine.len();
    if n < 3 {
        return spine.to_vec();
    }
    (0..n)
        .map(|i| {
            let t = (spine[(i + 1).min(n - 1)] - spine[i.saturating_sub(1)]).normalized();
            let nrm = t.left_normal();
            let mid = nearest_on_polyline(left, spine[i]).lerp(nearest_on_polyline(right, spine[i]), 0.5);
            spine[i] + nrm * (mid - spine[i]).dot(nrm)
        })
        .collect()
}

fn count_frame_runs(map: &RiverMap, boundary: &[(i64, i64)]) -> usize {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let on_frame: Vec<bool> = boundary
        .iter()
        .map(|&(x, y)| x == 0 || y == 0 || x == w - 1 || y == h - 1)
        .collect();
    if on_frame.iter().all(|f| *f) {
        return 1;
    }
    let n = on_frame.len();
    (0..n).filter(|&i| on_frame[i] && !on_frame[(i + n - 1) % n]).count()
}

/// Arc length and signed lateral offset (left positive) of `p` against a polyline.
fn project_polyline(line: &[Point], p: Point) -> (f64, f64) {
    if line.len() == 1 {
        return (0.0, 0.0);
    }
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut acc = 0.0;
    for w in line.windows(2) {
        let seg = w[0].dist(w[1]);
        let (d, t) = point_segment_distance(p, w[0], w[1]);
        if d < best.0 {
            let dir = (w[1] - w[0]).normalized();
            let foot = w[0].lerp(w[1], t);
            best = (d, acc + t * seg, (p - foot).dot(dir.left_normal()));
        }
        acc += seg;
    }
    (best.1, best.2)
}

/// Unit tangent of a polyline near arc length `s`.
fn tangent_at(line: &[Point], s: f64) -> Point {
    let h = 2.0;
    let total = crate::geometry::point::polyline_length(line);
    let a = point_at(line, (s - h).max(0.0));
    let b = point_at(line, (s + h).min(total));
    (b - a).normalized()
}

fn nearest_on_polyline(line: &[Point], p: Point) -> Point {
    if line.len() == 1 {
        return line[0];
    }
    let mut best = (f64::INFINITY, line[0]);
    for w in line.windows(2) {
        let (d, t) = point_segment_distance(p, w[0], w[1]);
        if d < best.0 {
            best = (d, w[0].lerp(w[1], t));
        }
    }
    best.1
}

fn point_at(line: &[Point], s: f64) -> Point {
    let mut acc = 0.0;
    for w in line.windows(2) {
        let seg = w[0].dist(w[1]);
        if acc + seg >= s && seg > 0.0 {
            return w[0].lerp(w[1], ((s - acc) / seg).clamp(0.0, 1.0));
        }
        acc += seg;
    }
    *line.last().unwrap()
}

/// Longest skeleton path, trimmed of corner spurs, smoothed and extended
/// along its end tangents to just inside the end cuts.
fn compute_spine(map: &RiverMap, df: &DistanceField) -> Result<Vec<Point>> {
    let skel = thin(map);
    if skel.is_empty() {
        return Err(Error::NoExtent);
    }
    let index: HashMap<(i64, i64), usize> = skel.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let seed = (0..skel.len())
        .max_by(|&a, &b| {
            df.at(skel[a].0, skel[a].1)
                .total_cmp(&df.at(skel[b].0, skel[b].1))
                .then(b.cmp(&a))
        })
        .unwrap();
    let (far1, _) = skeleton_dijkstra(&skel, &index, seed);
    let (far2, parent) = skeleton_dijkstra(&skel, &index, far1);
    let mut path = vec![far2];
    let mut i = far2;
    while i != far1 {
        i = parent[i];
        if i == usize::MAX {
            return Err(Error::NoSkeletonPath);
        }
        path.push(i);
    }
    let raw: Vec<Point> = path
        .iter()
        .map(|&i| Point::new(skel[i].0 as f64, skel[i].1 as f64))
        .collect();
    if raw.len() < 2 {
        return Err(Error::NoExtent);
    }

    // Trim spurs at both ends.
    let clear = |p: Point| df.at(p.x as i64, p.y as i64);
    // Trim while the clearance is still rising steeply: that part of the
    // path is a corner spur or boundary hair, not the channel axis.
    let climb = |pts: &[Point], mut i: usize| -> usize {
        while i + SPUR_WINDOW < pts.len() {
            let j = i + SPUR_WINDOW;
            let arc = crate::geometry::point::polyline_length(&pts[i..=j]);
            if clear(pts[j]) - clear(pts[i]) <= SPUR_SLOPE * arc {
                break;
            }
            i += 1;
        }
        i
    };
    let trim_from = |pts: &[Point]| climb(pts, 0);
    let lo = trim_from(&raw);
    let rev: Vec<Point> = raw.iter().rev().cloned().collect();
    let hi = raw.len() - trim_from(&rev);
    let trimmed: Vec<Point> = if hi > lo + 1 {
        raw[lo..hi].to_vec()
    } else {
        let mid = raw.len() / 2;
        raw[mid.saturating_sub(1)..(mid + 1).min(raw.len())].to_vec()
    };
    if trimmed.len() < 2 {
        return Err(Error::NoExtent);
    }

    // Symmetric moving average; the window shrinks near the ends.
    let mut clears: Vec<f64> = trimmed.iter().map(|p| clear(*p)).collect();
    clears.sort_by(f64::total_cmp);
    let median = clears[clears.len() / 2];
    let k = ((median / 4.0).round() as usize).clamp(2, 10);
    let n = trimmed.len();
    let smooth: Vec<Point> = (0..n)
        .map(|i| {
            let r = k.min(i).min(n - 1 - i);
            let sum = trimmed[i - r..=i + r].iter().fold(Point::default(), |acc, p| acc + *p);
            sum * (1.0 / (2 * r + 1) as f64)
        })
        .collect();

    let m = (2 * k).min(n - 1);
    // March outward one cell at a time, re-centering between the walls so
    // the extension follows the bend, until just short of the end cut.
    let extend = |end: Point, inner: Point| -> Vec<Point> {
        let dir0 = (end - inner).normalized();
        let mut dir = dir0;
        let mut cur = end;
        let mut span0: Option<f64> = None;
        let mut out = Vec::new();
        let limit = 4 * (map.width() + map.height());
        for _ in 0..limit {
            let ahead = traverse_to_wall(map, cur, dir);
            if ahead <= END_INSET + 1.0 {
                if ahead > END_INSET {
                    out.push(cur + dir * (ahead - END_INSET));
                }
                break;
            }
            let probe = cur + dir;
            let nl = dir.left_normal();
            let l = traverse_to_wall(map, probe, nl);
            let r = traverse_to_wall(map, probe, -nl);
            // A narrowing section means one ray is hitting the end cut: stop
            // steering and head straight for it.
            let span = *span0.get_or_insert(l + r);
            if l + r < CUT_NARROWING * span {
                out.push(cur + dir * (ahead - END_INSET));
                break;
            }
            let shift = ((l - r) / 2.0).clamp(-MAX_RECENTER, MAX_RECENTER);
            let next = probe + nl * shift;
            if !map.is_free_point(next) {
                break;
            }
            let turned = (dir + (next - cur).normalized()).normalized();
            if turned.dot(dir0) < MAX_EXTENSION_TURN.cos() {
                break;
            }
            dir = turned;
            cur = next;
            out.push(cur);
        }
        out
    };
    let head = extend(smooth[0], smooth[m]);
    let tail = extend(smooth[n - 1], smooth[n - 1 - m]);
    let mut spine: Vec<Point> = head.into_iter().rev().collect();
    spine.extend(smooth);
    spine.extend(tail);
    spine.dedup();
    if spine.len() < 2 {
        return Err(Error::NoExtent);
    }
    Ok(spine)
}

fn skeleton_dijkstra(skel: &[(i64, i64)], index: &HashMap<(i64, i64), usize>, from: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![f64::INFINITY; skel.len()];
    let mut parent = vec![usize::MAX; skel.len()];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push((Reverse(0u64), Reverse(from)));
    while let Some((Reverse(db), Reverse(i))) = heap.pop() {
        if f64::from_bits(db) > dist[i] {
            continue;
        }
        let (x, y) = skel[i];
        for (dx, dy) in MOORE {
            if let Some(&j) = index.get(&(x + dx, y + dy)) {
                let nd = dist[i] + if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                if nd < dist[j] {
                    dist[j] = nd;
                    parent[j] = i;
                    heap.push((Reverse(nd.to_bits()), Reverse(j)));
                }
            }
        }
    }
    let far = (0..skel.len())
        .filter(|&i| dist[i].is_finite())
        .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
        .unwrap_or(from);
    (far, parent)
}

/// Centerline resampled every `station_step` meters (adjusted so the
/// stations are uniformly spaced end to end), with perpendicular
/// cross-sections clipped to the water.
pub fn extract_centerline(map: &RiverMap, contours: &BankContours, station_step: f64) -> Result<Centerline> {
    if !(station_step > 0.0) {
        return Err(Error::InvalidParameter(format!("station_step {station_step} must be > 0")));
    }
    let res = map.resolution();
    let spine = &contours.spine;
    let total_cells = crate::geometry::point::polyline_length(spine);
    if total_cells <= 0.0 {
        return Err(Error::NoSkeletonPath);
    }
    let step_cells = station_step / res;
    let intervals = ((total_cells / step_cells).round() as usize).max(1);
    let mut stations = Vec::with_capacity(intervals + 1);
    let h = step_cells.max(2.0);
    for i in 0..=intervals {
        let s = total_cells * i as f64 / intervals as f64;
        let position = point_at(spine, s);
        // Tangent from a chord about half the local width long on each side.
        let half = nearest_on_polyline(&contours.left_bank, position)
            .dist(nearest_on_polyline(&contours.right_bank, position))
            / 2.0;
        let h = h.max(half);
        let a = point_at(spine, (s - h).max(0.0));
        let b = point_at(spine, (s + h).min(total_cells));
        let tangent = (b - a).normalized();
        let (left, right) = cross_section_ends(map, contours, position, tangent);
        // Bank points are centers of the outermost FREE cells.
        let length = (left.dist(right) + 1.0) * res;
        stations.push(Station {
            position,
            tangent,
            arc_length: s * res,
            width: length,
            cross_section: CrossSection {
                a: left,
                b: right,
                length,
            },
        });
    }
    Ok(Centerline {
        stations,
        total_length: total_cells * res,
        resolution: res,
    })
}

/// Ends of the cross-section through `position`: rays along both normals
/// when each lands on its own bank, otherwise (a ray grazing an end cut)
/// the nearest points of the two banks.
fn cross_section_ends(map: &RiverMap, contours: &BankContours, position: Point, tangent: Point) -> (Point, Point) {
    let n = tangent.left_normal();
    let on = |bank: &[Point], p: Point| nearest_on_polyline(bank, p).dist(p) <= 1.5;
    if let (Ok(l), Ok(r)) = (cast_ray_dir(map, position, n), cast_ray_dir(map, position, n * -1.0)) {
        let (l, r) = (l.cell_center, r.cell_center);
        if on(&contours.left_bank, l) && on(&contours.right_bank, r) {
            return (l, r);
        }
    }
    (
        nearest_on_polyline(&contours.left_bank, position),
        nearest_on_polyline(&contours.right_bank, position),
    )
}

/// Downriver heading (radians) at the station nearest `at`.
pub fn downriver_direction(_contours: &BankContours, centerline: &Centerline, at: Point) -> f64 {
    centerline.direction_at(at)
}

/// Pre-computed geometry for one map and start point.
#[derive(Debug, Clone)]
pub struct RiverModel {
    pub map: RiverMap,
    pub start: StartPoint,
    pub contours: BankContours,
    pub centerline: Centerline,
}

impl RiverModel {
    pub fn build(map: &RiverMap, start: StartPoint, station_step: f64) -> Result<Self> {
        let contours = extract_bank_contours(map, start)?;
        let centerline = extract_centerline(map, &contours, station_step)?;
        Ok(RiverModel {
            map: map.clone(),
            start,
            contours,
            centerline,
        })
    }

    /// Default station spacing `max(2 cells, s / 2)` for planner spacing `s` (meters).
    pub fn default_station_step(map: &RiverMap, spacing: f64) -> f64 {
        (2.0 * map.resolution()).max(spacing / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{make_meander_river, make_rect_river};

    fn rect_model(v_s: Point) -> RiverModel {
        let map = make_rect_river(1000, 100).unwrap();
        let start = StartPoint::new(&map, v_s).unwrap();
        RiverModel::build(&map, start, 10.0).unwrap()
    }

    #[test]
    fn rect_banks_ordered_downriver() {
        let m = rect_model(Point::new(5.0, 50.0));
        let l = &m.contours.left_bank;
        let r = &m.contours.right_bank;
        assert!((l.len() as i64 - 1000).abs() <= 10, "{}", l.len());
        assert!((r.len() as i64 - 1000).abs() <= 10, "{}", r.len());
        assert!(l.iter().all(|p| p.y == 1.0));
        assert!(r.iter().all(|p| p.y == 100.0));
        assert!(l.windows(2).all(|w| w[1].x > w[0].x));
        assert!(r.windows(2).all(|w| w[1].x > w[0].x));
    }

    #[test]
    fn rect_banks_reverse_with_start() {
        let m = rect_model(Point::new(995.0, 50.0));
        assert!(m.contours.left_bank.windows(2).all(|w| w[1].x < w[0].x));
        assert!(m.contours.right_bank.windows(2).all(|w| w[1].x < w[0].x));
        assert!(m.contours.left_bank.iter().all(|p| p.y == 100.0));
    }

    #[test]
    fn small_rect_banks_have_full_length() {
        let map = make_rect_river(10, 4).unwrap();
        let start = StartPoint::new(&map, Point::new(2.0, 2.0)).unwrap();
        let c = extract_bank_contours(&map, start).unwrap();
        assert_eq!(c.left_bank.len(), 10);
        assert_eq!(c.right_bank.len(), 10);
    }

    #[test]
    fn rect_centerline() {
        let m = rect_model(Point::new(5.0, 50.0));
        let cl = &m.centerline;
        assert!(cl.total_length >= 990.0);
        for s in &cl.stations {
            assert!((s.position.y - 50.5).abs() <= 1.0, "{:?}", s.position);
            assert!((s.width - 100.0).abs() <= 2.0, "{}", s.width);
        }
        assert!(cl.stations.windows(2).all(|w| w[1].arc_length > w[0].arc_length));
        assert_eq!(cl.stations[0].arc_length, 0.0);
    }

    #[test]
    fn rect_direction() {
        let m = rect_model(Point::new(5.0, 50.0));
        for x in [20.0, 400.0, 980.0] {
            let th = downriver_direction(&m.contours, &m.centerline, Point::new(x, 30.0));
            assert!(th.abs() < 0.05, "{th}");
        }
        let back = rect_model(Point::new(995.0, 50.0));
        let th = back.centerline.direction_at(Point::new(500.0, 50.0));
        assert!((th.abs() - std::f64::consts::PI).abs() < 0.05);
    }

    #[test]
    fn meander_widths_and_crest_direction() {
        let (amp, period) = (100.0, 800.0);
        let map = make_meander_river(2000, 80, amp, period).unwrap();
        let sl = amp * std::f64::consts::TAU / period;
        let x0 = 0.5 + 40.0 * sl / (1.0 + sl * sl).sqrt();
        let start_pt = Point::new(x0 + 10.0, amp + 40.5 + 10.0 * sl);
        let start = StartPoint::new(&map, start_pt).unwrap();
        let m = RiverModel::build(&map, start, 10.0).unwrap();
        for s in &m.centerline.stations {
            assert!((s.width - 80.0).abs() <= 8.0, "width {} at {:?}", s.width, s.position);
        }
        // First crest of the sinusoid is at u = period / 4.
        let crest = Point::new(x0 + period / 4.0, 2.0 * amp + 40.5);
        let th = m.centerline.direction_at(crest);
        assert!(th.abs() < 0.1, "{th}");
    }
}
