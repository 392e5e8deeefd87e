//! Raster primitives over the FREE mask: Euclidean distance transform,
//! Zhang–Suen thinning and Moore-neighbor boundary tracing.
//!
//! Everything outside the raster frame is treated as obstacle.

use crate::map::RiverMap;

/// Clockwise 8-neighborhood in raster coordinates (y down), starting west.
pub(crate) const MOORE: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Distance (cells) from each FREE cell center to the nearest obstacle cell
/// center, out-of-frame included. Obstacle cells hold 0.
#[derive(Debug, Clone)]
pub struct DistanceField {
    width: usize,
    height: usize,
    dist: Vec<f64>,
}

impl DistanceField {
    pub fn compute(map: &RiverMap) -> Self {
        // Pad by one so the frame acts as obstacle.
        let (w, h) = (map.width() + 2, map.height() + 2);
        let inf = 1e20;
        let mut g = vec![0.0f64; w * h];
        for y in 0..map.height() {
            for x in 0..map.width() {
                if map.is_free(x as i64, y as i64) {
                    g[(y + 1) * w + x + 1] = inf;
                }
            }
        }
        let mut f = vec![0.0; w.max(h)];
        let mut d = vec![0.0; w.max(h)];
        let mut v = vec![0usize; w.max(h)];
        let mut z = vec![0.0; w.max(h) + 1];
        for x in 0..w {
            for y in 0..h {
                f[y] = g[y * w + x];
            }
            edt_1d(&f[..h], &mut d[..h], &mut v, &mut z);
            for y in 0..h {
                g[y * w + x] = d[y];
            }
        }
        for y in 0..h {
            f[..w].copy_from_slice(&g[y * w..(y + 1) * w]);
            edt_1d(&f[..w], &mut d[..w], &mut v, &mut z);
            g[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
        }
        let mut dist = vec![0.0; map.width() * map.height()];
        for y in 0..map.height() {
            for x in 0..map.width() {
                dist[y * map.width() + x] = g[(y + 1) * w + x + 1].sqrt();
            }
        }
        DistanceField {
            width: map.width(),
            height: map.height(),
            dist,
        }
    }

    pub fn at(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0.0
        } else {
            self.dist[y as usize * self.width + x as usize]
        }
    }
}

// Felzenszwalb & Huttenlocher lower envelope of parabolas.
fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        d[q] = dq * dq + f[v[k]];
    }
}

/// Zhang–Suen thinning of the FREE mask. Returns skeleton pixels in raster order.
pub fn thin(map: &RiverMap) -> Vec<(i64, i64)> {
    let (w, h) = (map.width(), map.height());
    let mut on: Vec<bool> = (0..w * h)
        .map(|i| map.is_free((i % w) as i64, (i / w) as i64))
        .collect();
    let get = |on: &[bool], x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && on[y as usize * w + x as usize]
    };
    let mut active: Vec<usize> = (0..w * h).filter(|&i| on[i]).collect();
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            doomed.clear();
            for &i in &active {
                if !on[i] {
                    continue;
                }
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                // P2..P9 clockwise from north.
                let p = [
                    get(&on, x, y - 1),
                    get(&on, x + 1, y - 1),
                    get(&on, x + 1, y),
                    get(&on, x + 1, y + 1),
                    get(&on, x, y + 1),
                    get(&on, x - 1, y + 1),
                    get(&on, x - 1, y),
                    get(&on, x - 1, y - 1),
                ];
                let b = p.iter().filter(|v| **v).count();
                if !(2..=6).contains(&b) {
                    continue;
                }
                let a = (0..8).filter(|&j| !p[j] && p[(j + 1) % 8]).count();
                if a != 1 {
                    continue;
                }
                let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                let ok = if pass == 0 {
                    !(p2 && p4 && p6) && !(p4 && p6 && p8)
                } else {
                    !(p2 && p4 && p8) && !(p2 && p6 && p8)
                };
                if ok {
                    doomed.push(i);
                }
            }
            for &i in &doomed {
                on[i] = false;
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            break;
        }
        active.retain(|&i| on[i]);
    }
    (0..w * h)
        .filter(|&i| on[i])
        .map(|i| ((i % w) as i64, (i / w) as i64))
        .collect()
}

/// Moore-neighbor trace of the outer boundary of the FREE region, clockwise
/// on screen, starting at the first FREE cell in raster order. The start
/// cell is not repeated at the end.
pub fn trace_boundary(map: &RiverMap) -> Vec<(i64, i64)> {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let Some(start) = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .find(|&(x, y)| map.is_free(x, y))
    else {
        return Vec::new();
    };
    let start_back = (start.0 - 1, start.1);
    let mut out = vec![start];
    let mut cur = start;
    let mut back = start_back;
    let limit = 4 * (w * h) as usize + 8;
    for _ in 0..limit {
        let bdir = MOORE
            .iter()
            .position(|&(dx, dy)| (cur.0 + dx, cur.1 + dy) == back)
            .expect("backtrack is adjacent");
        let mut found = None;
        for k in 1..=8 {
            let (dx, dy) = MOORE[(bdir + k) % 8];
            let n = (cur.0 + dx, cur.1 + dy);
            if map.is_free(n.0, n.1) {
                let (bx, by) = MOORE[(bdir + k - 1) % 8];
                found = Some((n, (cur.0 + bx, cur.1 + by)));
                break;
            }
        }
        let Some((next, nb)) = found else {
            // Isolated cell.
            return out;
        };
        if next == start && nb == start_back {
            break;
        }
        cur = next;
        back = nb;
        out.push(cur);
    }
    out
}
