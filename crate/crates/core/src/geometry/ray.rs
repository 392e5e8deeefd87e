//! Conservative grid traversal for rays and line-of-sight checks.
//!
//! The traversal visits every cell a segment passes through (Amanatides &
//! Woo). When the segment crosses exactly through a cell corner both
//! side cells are checked, so a ray can never slip through a diagonal
//! one-cell wall.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::RiverMap;

/// How far the reported hit point sits back from the boundary crossing.
pub const HIT_BACKOFF: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    /// Point on the ray just inside the water, `HIT_BACKOFF` before the crossing.
    pub point: Point,
    /// Where the ray crosses into the first obstacle cell.
    pub exit: Point,
    /// Center of the last FREE cell before the obstacle.
    pub cell_center: Point,
    /// Ray parameter (cells) of the crossing.
    pub distance: f64,
}

enum Step {
    /// Entered cell `(x, y)` at ray parameter `t`.
    Cell(i64, i64, f64),
}

/// Walk the cells along `from + t * dir` for `t` in `(0, max_t]`, calling
/// `visit(x, y, t)` on every newly entered cell; stop when it returns false.
/// Returns the `t` at which `visit` refused, if any.
fn traverse(from: Point, dir: Point, max_t: f64, mut visit: impl FnMut(i64, i64, f64) -> bool) -> Option<f64> {
    let (mut cx, mut cy) = from.cell();
    let sx: i64 = if dir.x > 0.0 { 1 } else if dir.x < 0.0 { -1 } else { 0 };
    let sy: i64 = if dir.y > 0.0 { 1 } else if dir.y < 0.0 { -1 } else { 0 };
    let next_edge = |c: i64, s: i64, o: f64, d: f64| -> f64 {
        if s == 0 {
            f64::INFINITY
        } else {
            ((c as f64 + 0.5 * s as f64) - o) / d
        }
    };
    let mut tx = next_edge(cx, sx, from.x, dir.x);
    let mut ty = next_edge(cy, sy, from.y, dir.y);
    let dtx = if sx == 0 { f64::INFINITY } else { 1.0 / dir.x.abs() };
    let dty = if sy == 0 { f64::INFINITY } else { 1.0 / dir.y.abs() };
    let eps = 1e-9;
    loop {
        let t = tx.min(ty);
        if t > max_t {
            return None;
        }
        let step = if (tx - ty).abs() <= eps {
            // Corner crossing: both side cells must be passable.
            if !visit(cx + sx, cy, t) || !visit(cx, cy + sy, t) {
                return Some(t);
            }
            cx += sx;
            cy += sy;
            tx += dtx;
            ty += dty;
            Step::Cell(cx, cy, t)
        } else if tx < ty {
            cx += sx;
            tx += dtx;
            Step::Cell(cx, cy, t)
        } else {
            cy += sy;
            ty += dty;
            Step::Cell(cx, cy, t)
        };
        let Step::Cell(x, y, t) = step;
        if !visit(x, y, t) {
            return Some(t);
        }
    }
}

/// Cast a ray from a FREE point at heading `theta` until it enters an
/// obstacle cell.
pub fn cast_ray(map: &RiverMap, from: Point, theta: f64) -> Result<RayHit> {
    cast_ray_dir(map, from, Point::from_angle(theta))
}

pub fn cast_ray_dir(map: &RiverMap, from: Point, dir: Point) -> Result<RayHit> {
    let dir = dir.normalized();
    if !map.is_free_point(from) {
        return Err(Error::InvalidParameter(format!(
            "ray origin ({:.2}, {:.2}) is not FREE",
            from.x, from.y
        )));
    }
    let mut last = from.cell();
    let mut left_frame = false;
    let max_t = (map.width() + map.height()) as f64 * 2.0;
    let hit_t = traverse(from, dir, max_t, |x, y, _| {
        if !map.in_bounds(x, y) {
            left_frame = true;
            return false;
        }
        if map.is_free(x, y) {
            last = (x, y);
            true
        } else {
            false
        }
    });
    let Some(t) = hit_t else {
        return Err(Error::RayExitedFrame);
    };
    if left_frame {
        return Err(Error::RayExitedFrame);
    }
    let back = (t - HIT_BACKOFF).max(0.0);
    Ok(RayHit {
        point: from + dir * back,
        exit: from + dir * t,
        cell_center: Point::new(last.0 as f64, last.1 as f64),
        distance: t,
    })
}

/// First boundary hit of the ray from `from` at angle `theta`: the center
/// of the last FREE cell before the obstacle.
pub fn cast_ray_to_opposite_bank(map: &RiverMap, from: Point, theta: f64) -> Result<Point> {
    cast_ray(map, from, theta).map(|h| h.cell_center)
}

/// Distance (cells) along `dir` from `from` to the first obstacle cell,
/// treating the raster frame as a wall.
pub(crate) fn traverse_to_wall(map: &RiverMap, from: Point, dir: Point) -> f64 {
    let dir = dir.normalized();
    let max_t = (map.width() + map.height()) as f64 * 2.0;
    traverse(from, dir, max_t, |x, y, _| map.is_free(x, y)).unwrap_or(max_t)
}

/// True when every cell touched by segment `ab` is FREE.
pub fn line_of_sight(map: &RiverMap, a: Point, b: Point) -> bool {
    if !map.is_free_point(a) || !map.is_free_point(b) {
        return false;
    }
    let len = a.dist(b);
    if len == 0.0 {
        return true;
    }
    traverse(a, (b - a) * (1.0 / len), len, |x, y, _| map.is_free(x, y)).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{make_rect_river, Cell};

    #[test]
    fn diagonal_hit_on_rect() {
        let map = make_rect_river(1000, 100).unwrap();
        let hit = cast_ray(&map, Point::new(10.0, 99.0), -std::f64::consts::FRAC_PI_4).unwrap();
        assert!((hit.cell_center.y - 1.0).abs() <= 1.0);
        assert!((hit.cell_center.x - 108.0).abs() <= 2.0, "{:?}", hit);
        assert!((hit.distance - 98.5 * 2f64.sqrt()).abs() < 1.0);
    }

    #[test]
    fn adjacent_bank_hit() {
        let map = make_rect_river(20, 10).unwrap();
        let p = cast_ray_to_opposite_bank(&map, Point::new(5.0, 2.0), -std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(p, Point::new(5.0, 1.0));
    }

    #[test]
    fn ray_leaving_frame_errors() {
        let mut cells = vec![Cell::Free; 10 * 3];
        for x in 0..10 {
            cells[x] = Cell::Obstacle;
            cells[20 + x] = Cell::Obstacle;
        }
        let map = RiverMap::from_cells(10, 3, cells, 1.0).unwrap();
        assert!(matches!(cast_ray(&map, Point::new(2.0, 1.0), 0.0), Err(Error::RayExitedFrame)));
    }

    #[test]
    fn no_tunnelling_through_diagonal_wall() {
        // FREE everywhere except a one-cell diagonal wall x == y.
        let n = 12;
        let mut cells = vec![Cell::Free; n * n];
        for i in 0..n {
            cells[i * n + i] = Cell::Obstacle;
        }
        let map = RiverMap::from_cells(n, n, cells, 1.0).unwrap();
        // Ray from below the diagonal heading up-left crosses the wall at a corner.
        let from = Point::new(6.0, 5.0);
        let hit = cast_ray_dir(&map, from, Point::new(-1.0, 1.0)).unwrap();
        assert!(hit.distance <= 1.0, "{hit:?}");
        assert!(!line_of_sight(&map, Point::new(6.0, 5.0), Point::new(5.0, 6.0)));
    }
}
