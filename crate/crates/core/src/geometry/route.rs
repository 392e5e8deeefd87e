//! Shortest in-river paths: Lazy Theta* over the 8-connected cell grid,
//! which lets a cell's parent be any visible cell so paths take any angle.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::ray::line_of_sight;
use crate::geometry::{point::polyline_length, Point};
use crate::map::RiverMap;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Polyline from `a` to `b`, in cells.
    pub points: Vec<Point>,
    /// Polyline length in meters.
    pub length: f64,
}

/// Shortest path through FREE cells from `a` to `b`.
///
/// Every polyline edge has line of sight. The result is symmetric:
/// swapping `a` and `b` yields the reversed polyline and the same length.
pub fn in_river_shortest_path(map: &RiverMap, a: Point, b: Point) -> Result<Route> {
    let swap = (a.x, a.y) > (b.x, b.y);
    let (s, t) = if swap { (b, a) } else { (a, b) };
    let mut pts = shortest_path_raw(map, s, t)?;
    let length = polyline_length(&pts) * map.resolution();
    if swap {
        pts.reverse();
    }
    Ok(Route { points: pts, length })
}

fn shortest_path_raw(map: &RiverMap, a: Point, b: Point) -> Result<Vec<Point>> {
    let no_route = || Error::NoRoute(a.x, a.y, b.x, b.y);
    if !map.is_free_point(a) || !map.is_free_point(b) {
        return Err(no_route());
    }
    if a == b {
        return Ok(vec![a]);
    }
    if line_of_sight(map, a, b) {
        return Ok(vec![a, b]);
    }
    let mut pts = lazy_theta(map, a, b).ok_or_else(no_route)?;
    pts.push(b);
    pts.dedup();
    Ok(shortcut(map, &pts))
}

/// Greedy string pulling: keep a vertex only when the next one is not
/// visible from the current anchor.
pub(crate) fn shortcut(map: &RiverMap, pts: &[Point]) -> Vec<Point> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let mut out = vec![pts[0]];
    let mut anchor = 0;
    let mut i = 1;
    while i < pts.len() - 1 {
        if line_of_sight(map, pts[anchor], pts[i + 1]) {
            i += 1;
        } else {
            out.push(pts[i]);
            anchor = i;
            i += 1;
        }
    }
    out.push(pts[pts.len() - 1]);
    out
}

/// Lazy Theta* from `a` to the cell containing `b`. Vertices are cell
/// centers, except the first, which is `a` itself. Diagonal grid steps
/// may not cut obstacle corners.
fn lazy_theta(map: &RiverMap, a: Point, b: Point) -> Option<Vec<Point>> {
    let w = map.width();
    let n = w * map.height();
    let idx = |c: (i64, i64)| c.1 as usize * w + c.0 as usize;
    let (start, target) = (idx(a.cell()), idx(b.cell()));
    let pos = |i: usize| {
        if i == start {
            a
        } else {
            Point::new((i % w) as f64, (i / w) as f64)
        }
    };
    let goal = pos(target);
    let step_ok = |c: (i64, i64), dx: i64, dy: i64| {
        map.is_free(c.0 + dx, c.1 + dy)
            && (dx == 0 || dy == 0 || (map.is_free(c.0 + dx, c.1) && map.is_free(c.0, c.1 + dy)))
    };
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[start] = 0.0;
    parent[start] = start as u32;
    heap.push((Reverse(a.dist(goal).to_bits()), Reverse(start)));
    while let Some((_, Reverse(i))) = heap.pop() {
        if closed[i] {
            continue;
        }
        let c = ((i % w) as i64, (i / w) as i64);
        let p = parent[i] as usize;
        if p != i && !line_of_sight(map, pos(p), pos(i)) {
            // Optimistic parent is hidden; fall back to the best closed
            // grid neighbor.
            g[i] = f64::INFINITY;
            for (dx, dy) in crate::geometry::raster::MOORE {
                if !step_ok(c, dx, dy) {
                    continue;
                }
                let j = idx((c.0 + dx, c.1 + dy));
                let cost = g[j] + if dx != 0 && dy != 0 { SQRT2 } else { 1.0 };
                if closed[j] && cost < g[i] {
                    g[i] = cost;
                    parent[i] = j as u32;
                }
            }
        }
        closed[i] = true;
        if i == target {
            break;
        }
        let p = parent[i] as usize;
        for (dx, dy) in crate::geometry::raster::MOORE {
            if !step_ok(c, dx, dy) {
                continue;
            }
            let j = idx((c.0 + dx, c.1 + dy));
            if closed[j] {
                continue;
            }
            let ng = g[p] + pos(p).dist(pos(j));
            if ng < g[j] {
                g[j] = ng;
                parent[j] = p as u32;
                heap.push((Reverse((ng + pos(j).dist(goal)).to_bits()), Reverse(j)));
            }
        }
    }
    if !closed[target] {
        return None;
    }
    let mut out = vec![pos(target)];
    let mut i = target;
    while i != start {
        i = parent[i] as usize;
        out.push(pos(i));
    }
    out.reverse();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::make_rect_river;

    #[test]
    fn straight_corridor() {
        let map = make_rect_river(1000, 100).unwrap();
        let r = in_river_shortest_path(&map, Point::new(10.0, 50.0), Point::new(900.0, 50.0)).unwrap();
        assert!((r.length - 890.0).abs() <= 8.9);
    }

    #[test]
    fn identity_route() {
        let map = make_rect_river(20, 5).unwrap();
        let p = Point::new(3.0, 3.0);
        let r = in_river_shortest_path(&map, p, p).unwrap();
        assert_eq!(r.points, vec![p]);
        assert_eq!(r.length, 0.0);
    }

    #[test]
    fn route_bends_around_wall() {
        // U-shaped water: two arms joined at the bottom.
        let map = crate::map::make_width_profile_river(40, |_| 20.0).unwrap();
        let mut cells = map.cells().to_vec();
        let w = map.width();
        for y in 0..16 {
            cells[y * w + 20] = crate::map::Cell::Obstacle;
        }
        let map = RiverMap::from_cells(w, map.height(), cells, 1.0).unwrap();
        let a = Point::new(10.0, 3.0);
        let b = Point::new(30.0, 3.0);
        let r = in_river_shortest_path(&map, a, b).unwrap();
        assert!(r.points.len() >= 3);
        assert!(r.length > a.dist(b));
        for w in r.points.windows(2) {
            assert!(line_of_sight(&map, w[0], w[1]));
        }
        let back = in_river_shortest_path(&map, b, a).unwrap();
        assert_eq!(back.length, r.length);
    }
}
