//! Independent reference implementations the integration tests compare
//! the library against. None of these call into the code under test
//! beyond reading map cells.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use riverine::{CoveragePath, Label, Point, RiverMap};

/// Sizes of the 4-connected FREE components, largest first.
pub fn free_components(map: &RiverMap) -> Vec<usize> {
    let (w, h) = (map.width(), map.height());
    let mut seen = vec![false; w * h];
    let mut sizes = Vec::new();
    for start in 0..w * h {
        let (sx, sy) = ((start % w) as i64, (start / w) as i64);
        if seen[start] || !map.is_free(sx, sy) {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([(sx, sy)]);
        let mut n = 0;
        while let Some((x, y)) = queue.pop_front() {
            n += 1;
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if map.is_free(nx, ny) {
                    let k = ny as usize * w + nx as usize;
                    if !seen[k] {
                        seen[k] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
        }
        sizes.push(n);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Moore-neighbor trace of the outer boundary of the FREE region, with
/// Jacob's stopping criterion. Returns the visited cells in order; the
/// start cell is not repeated at the end.
pub fn moore_trace(map: &RiverMap) -> Vec<(i64, i64)> {
    // Clockwise in screen coordinates (y down), starting west.
    const RING: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];
    let start = (0..map.height() as i64)
        .flat_map(|y| (0..map.width() as i64).map(move |x| (x, y)))
        .find(|&(x, y)| map.is_free(x, y))
        .expect("map has FREE cells");
    let dir_of = |d: (i64, i64)| RING.iter().position(|r| *r == d).unwrap();
    let mut out = vec![start];
    let mut cur = start;
    // Backtrack cell relative to `cur`: west of the topmost-leftmost cell.
    let mut back = 0usize;
    let first_back = back;
    loop {
        let mut moved = false;
        for k in 1..=8 {
            let d = RING[(back + k) % 8];
            let n = (cur.0 + d.0, cur.1 + d.1);
            if map.is_free(n.0, n.1) {
                let prev = RING[(back + k - 1) % 8];
                let prev_cell = (cur.0 + prev.0, cur.1 + prev.1);
                cur = n;
                back = dir_of((prev_cell.0 - cur.0, prev_cell.1 - cur.1));
                moved = true;
                break;
            }
        }
        if !moved || (cur == start && back == first_back) {
            break;
        }
        out.push(cur);
    }
    out
}

pub fn shoelace(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y)).abs()
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (abx, aby) = (b.x - a.x, b.y - a.y);
    let l2 = abx * abx + aby * aby;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * abx + (p.y - a.y) * aby) / l2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.x + t * abx, a.y + t * aby);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

/// Percentage of FREE cells whose center lies within `footprint / 2`
/// meters of some COVERAGE segment, by checking every cell against every
/// segment.
pub fn brute_force_coverage(path: &CoveragePath, map: &RiverMap, footprint: f64) -> f64 {
    let res = map.resolution();
    let r = footprint / 2.0 / res;
    let segs: Vec<(Point, Point)> = path
        .waypoints
        .windows(2)
        .filter(|w| w[0].label == Label::Coverage && w[1].label == Label::Coverage)
        .map(|w| (w[0].position(), w[1].position()))
        .collect();
    let (mut free, mut hit) = (0usize, 0usize);
    for y in 0..map.height() as i64 {
        for x in 0..map.width() as i64 {
            if !map.is_free(x, y) {
                continue;
            }
            free += 1;
            let p = Point::new(x as f64, y as f64);
            let near = segs.iter().any(|&(a, b)| {
                let lo_x = a.x.min(b.x) - r;
                let hi_x = a.x.max(b.x) + r;
                let lo_y = a.y.min(b.y) - r;
                let hi_y = a.y.max(b.y) + r;
                p.x >= lo_x && p.x <= hi_x && p.y >= lo_y && p.y <= hi_y && seg_dist(p, a, b) <= r
            });
            if near {
                hit += 1;
            }
        }
    }
    100.0 * hit as f64 / free as f64
}

/// First-octant primitive steps of the 32-neighborhood.
const OCTANT: [(i64, i64); 5] = [(1, 0), (1, 1), (2, 1), (3, 1), (3, 2)];

fn neighborhood() -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for (a, b) in OCTANT {
        for (x, y) in [(a, b), (b, a)] {
            for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let d = (x * sx, y * sy);
                if !out.contains(&d) {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Does the segment from the origin to `(dx, dy)` meet the closed unit
/// square centered on `(cx, cy)`? Separating-axis test.
fn touches(dx: f64, dy: f64, cx: f64, cy: f64) -> bool {
    let (lo_x, hi_x) = (cx - 0.5, cx + 0.5);
    let (lo_y, hi_y) = (cy - 0.5, cy + 0.5);
    if dx.max(0.0) < lo_x || dx.min(0.0) > hi_x || dy.max(0.0) < lo_y || dy.min(0.0) > hi_y {
        return false;
    }
    let corners = [(lo_x, lo_y), (hi_x, lo_y), (lo_x, hi_y), (hi_x, hi_y)];
    let side = |(x, y): (f64, f64)| dx * y - dy * x;
    let s: Vec<f64> = corners.iter().map(|&c| side(c)).collect();
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    min <= 0.0 && max >= 0.0
}

fn swept_cells(d: (i64, i64)) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for cy in d.1.min(0)..=d.1.max(0) {
        for cx in d.0.min(0)..=d.0.max(0) {
            if touches(d.0 as f64, d.1 as f64, cx as f64, cy as f64) {
                out.push((cx, cy));
            }
        }
    }
    out
}

/// Shortest FREE-cell path length in cells between two cell centers on a
/// 32-connected grid. An edge is allowed when every cell its segment
/// touches is FREE.
pub fn grid_dijkstra(map: &RiverMap, a: (i64, i64), b: (i64, i64)) -> Option<f64> {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let moves: Vec<((i64, i64), f64, Vec<(i64, i64)>)> = neighborhood()
        .into_iter()
        .map(|d| (d, ((d.0 * d.0 + d.1 * d.1) as f64).sqrt(), swept_cells(d)))
        .collect();
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let mut dist = vec![f64::INFINITY; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    dist[idx(a.0, a.1)] = 0.0;
    heap.push(Reverse((0u64, a)));
    while let Some(Reverse((dq, (x, y)))) = heap.pop() {
        let d = f64::from_bits(dq);
        if d > dist[idx(x, y)] {
            continue;
        }
        if (x, y) == b {
            return Some(d);
        }
        for (m, cost, cells) in &moves {
            let (nx, ny) = (x + m.0, y + m.1);
            if !map.is_free(nx, ny) || !cells.iter().all(|c| map.is_free(x + c.0, y + c.1)) {
                continue;
            }
            let nd = d + cost;
            if nd < dist[idx(nx, ny)] {
                dist[idx(nx, ny)] = nd;
                // Non-negative floats order the same as their bit patterns.
                heap.push(Reverse((nd.to_bits(), (nx, ny))));
            }
        }
    }
    None
}

/// Steady lateral offset of an idealized pure-pursuit boat on the x axis:
/// heading always points at the target `lookahead` ahead on the line,
/// speed `v`, lateral current `c`. Fourth-order Runge-Kutta at step `h`
/// for `t_end` seconds, starting on the line.
pub fn rk4_pursuit_offset(v: f64, c: f64, lookahead: f64, h: f64, t_end: f64) -> f64 {
    let f = |y: f64| {
        let heading = (-y).atan2(lookahead);
        v * heading.sin() + c
    };
    let mut y = 0.0;
    let steps = (t_end / h).round() as usize;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

/// Nearest-neighbor interpolation by linear scan.
pub fn nearest_neighbor(samples: &[(f64, f64, f64)], x: f64, y: f64) -> f64 {
    samples
        .iter()
        .min_by(|a, b| {
            let da = (a.0 - x).powi(2) + (a.1 - y).powi(2);
            let db = (b.0 - x).powi(2) + (b.1 - y).powi(2);
            da.total_cmp(&db)
        })
        .map(|s| s.2)
        .unwrap()
}

/// Centerline heading of `make_meander_river(_, width, amplitude, period)`
/// at map column `x`, from the generating sinusoid.
pub fn meander_tangent(width: usize, amplitude: f64, period: f64, x: f64) -> f64 {
    let half = width as f64 / 2.0;
    let k = std::f64::consts::TAU / period;
    let slope0 = amplitude * k;
    let tilt = slope0.abs() / (1.0 + slope0 * slope0).sqrt();
    let x0 = 0.5 + half * tilt;
    (amplitude * k * (k * (x - x0)).cos()).atan()
}

/// Exact GP posterior mean and variance with a squared-exponential kernel
/// and constant prior mean, by dense Gaussian elimination with partial
/// pivoting. `samples` are `(x, y, depth)`.
pub fn naive_gp(
    samples: &[(f64, f64, f64)],
    (ell, sf2, sn2): (f64, f64, f64),
    prior_mean: f64,
    x: f64,
    y: f64,
) -> (f64, f64) {
    let k = |a: (f64, f64), b: (f64, f64)| sf2 * (-((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)) / (2.0 * ell * ell)).exp();
    let n = samples.len();
    let ks: Vec<f64> = samples.iter().map(|s| k((s.0, s.1), (x, y))).collect();
    // Solve for [alpha | v] with right-hand sides (y - m) and k_*.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| k((samples[i].0, samples[i].1), (samples[j].0, samples[j].1)) + if i == j { sn2 } else { 0.0 })
                .collect();
            row.push(samples[i].2 - prior_mean);
            row.push(ks[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n + 2 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let (mut mean, mut reduce) = (prior_mean, 0.0);
    for i in 0..n {
        mean += ks[i] * a[i][n] / a[i][i];
        reduce += ks[i] * a[i][n + 1] / a[i][i];
    }
    (mean, (sf2 + sn2 - reduce).max(0.0))
}
