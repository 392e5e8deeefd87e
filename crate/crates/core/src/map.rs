//! Binary river maps: loading, cleanup, encoding and synthetic fixtures.
//!
//! Rasters are row-major with the origin at the top-left corner, `x`
//! rightward and `y` downward. Dark pixels (intensity at or below the
//! threshold) are water.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Holes in the FREE region smaller than this fraction of its area are filled.
pub const HOLE_FILL_FRACTION: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Cell {
    Free = 0,
    Obstacle = 1,
}

/// Geographic reference of the raster: position of cell `(0, 0)` and the
/// bearing of the `+x` axis in degrees clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoAnchor {
    pub lat: f64,
    pub lon: f64,
    #[serde(default = "default_bearing")]
    pub bearing_deg: f64,
}

fn default_bearing() -> f64 {
    90.0
}

const EARTH_RADIUS_M: f64 = 6_371_008.8;

impl GeoAnchor {
    /// Convert map-frame meters to `(lon, lat)` with a local equirectangular
    /// approximation.
    pub fn to_lon_lat(&self, x_m: f64, y_m: f64) -> (f64, f64) {
        let b = self.bearing_deg.to_radians();
        let east = x_m * b.sin() + y_m * b.cos();
        let north = x_m * b.cos() - y_m * b.sin();
        let lat = self.lat + (north / EARTH_RADIUS_M).to_degrees();
        let lon = self.lon + (east / (EARTH_RADIUS_M * self.lat.to_radians().cos())).to_degrees();
        (lon, lat)
    }
}

/// Binary occupancy grid of a river reach.
#[derive(Debug, Clone, PartialEq)]
pub struct RiverMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    resolution: f64,
    pub geo_anchor: Option<GeoAnchor>,
}

impl RiverMap {
    /// Build a map from raw cells. No cleanup is applied.
    pub fn from_cells(width: usize, height: usize, cells: Vec<Cell>, resolution: f64) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{} cells for a {}x{} grid",
                cells.len(),
                width,
                height
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolution {resolution} must be > 0")));
        }
        Ok(RiverMap {
            width,
            height,
            cells,
            resolution,
            geo_anchor: None,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Meters per cell.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn cell(&self, x: i64, y: i64) -> Cell {
        if self.in_bounds(x, y) {
            self.cells[y as usize * self.width + x as usize]
        } else {
            Cell::Obstacle
        }
    }

    /// Out-of-frame cells count as obstacles.
    pub fn is_free(&self, x: i64, y: i64) -> bool {
        self.cell(x, y) == Cell::Free
    }

    pub fn is_free_point(&self, p: Point) -> bool {
        let (x, y) = p.cell();
        self.is_free(x, y)
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    /// True when any of the 8 neighbors of a cell is an obstacle.
    pub fn touches_obstacle(&self, x: i64, y: i64) -> bool {
        (-1..=1).any(|dy| (-1..=1).any(|dx| (dx != 0 || dy != 0) && !self.is_free(x + dx, y + dy)))
    }

    /// Encode as a binary PGM (P5): FREE is 0, OBSTACLE is 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.cells.iter().map(|c| match c {
            Cell::Free => 0u8,
            Cell::Obstacle => 255u8,
        }));
        out
    }
}

/// Validated start location `v_s`, in cells (sub-cell precision allowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartPoint(Point);

impl StartPoint {
    pub fn new(map: &RiverMap, position: Point) -> Result<Self> {
        if map.is_free_point(position) {
            Ok(StartPoint(position))
        } else {
            Err(Error::StartNotFree {
                x: position.x,
                y: position.y,
            })
        }
    }

    pub fn position(&self) -> Point {
        self.0
    }
}

/// Decode a single-channel raster and build a cleaned [`RiverMap`].
pub fn load_map(raster_bytes: &[u8], threshold: u8, resolution: f64) -> Result<RiverMap> {
    let img = image::load_from_memory(raster_bytes).map_err(|e| Error::Decode(e.to_string()))?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        image::DynamicImage::ImageLuma16(g) => {
            image::DynamicImage::ImageLuma16(g).to_luma8()
        }
        other => {
            return Err(Error::Decode(format!(
                "expected a single-channel raster, got {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let cells = gray
        .into_raw()
        .into_iter()
        .map(|v| if v <= threshold { Cell::Free } else { Cell::Obstacle })
        .collect();
    let mut map = RiverMap::from_cells(w, h, cells, resolution)?;
    cleanup(&mut map)?;
    Ok(map)
}

/// Keep the largest 4-connected FREE component and fill small enclosed holes.
pub fn cleanup(map: &mut RiverMap) -> Result<()> {
    let (w, h) = (map.width, map.height);
    let free_labels = label_components(map, Cell::Free, false);
    let mut sizes = vec![0usize; free_labels.count];
    for l in free_labels.labels.iter().flatten() {
        sizes[*l] += 1;
    }
    let Some((keep, _)) = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
    else {
        return Err(Error::EmptyFreeRegion);
    };
    for (c, l) in map.cells.iter_mut().zip(&free_labels.labels) {
        if *l != Some(keep) {
            *c = Cell::Obstacle;
        }
    }
    let free_area = sizes[keep];

    // Obstacle components use 8-connectivity, the dual of 4-connected water.
    let holes = label_components(map, Cell::Obstacle, true);
    let mut hole_size = vec![0usize; holes.count];
    let mut touches_frame = vec![false; holes.count];
    for y in 0..h {
        for x in 0..w {
            if let Some(l) = holes.labels[y * w + x] {
                hole_size[l] += 1;
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    touches_frame[l] = true;
                }
            }
        }
    }
    let limit = HOLE_FILL_FRACTION * free_area as f64;
    for (c, l) in map.cells.iter_mut().zip(&holes.labels) {
        if let Some(l) = l {
            if !touches_frame[*l] && (hole_size[*l] as f64) < limit {
                *c = Cell::Free;
            }
        }
    }
    Ok(())
}

struct Components {
    labels: Vec<Option<usize>>,
    count: usize,
}

fn label_components(map: &RiverMap, kind: Cell, eight: bool) -> Components {
    let (w, h) = (map.width, map.height);
    let mut labels = vec![None; w * h];
    let mut count = 0;
    let mut queue = VecDeque::new();
    let n4: &[(i64, i64)] = &[(1, 0), (-1, 0), (0, 1), (0, -1)];
    let n8: &[(i64, i64)] = &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    let nbrs = if eight { n8 } else { n4 };
    for start in 0..w * h {
        if map.cells[start] != kind || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(count);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in nbrs {
                let (nx, ny) = (x + dx, y + dy);
                if !map.in_bounds(nx, ny) {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if map.cells[j] == kind && labels[j].is_none() {
                    labels[j] = Some(count);
                    queue.push_back(j);
                }
            }
        }
        count += 1;
    }
    Components { labels, count }
}

/// JSON sidecar describing a raster map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    /// Meters per cell.
    pub resolution: f64,
    #[serde(default = "default_threshold")]
    pub threshold: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo_anchor: Option<GeoAnchor>,
    /// Suggested start point in map-frame meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
}

fn default_threshold() -> u8 {
    128
}

impl MapMeta {
    /// Sidecar path for a raster: same stem, `.json` extension.
    pub fn sidecar_path(raster: &Path) -> std::path::PathBuf {
        raster.with_extension("json")
    }
}

/// Load a raster and its JSON sidecar from disk.
pub fn load_map_file(raster: &Path) -> Result<(RiverMap, MapMeta)> {
    let bytes = std::fs::read(raster).map_err(|e| Error::io(raster, e))?;
    let side = MapMeta::sidecar_path(raster);
    let meta: MapMeta = serde_json::from_slice(&std::fs::read(&side).map_err(|e| Error::io(&side, e))?)?;
    let mut map = load_map(&bytes, meta.threshold, meta.resolution)?;
    map.geo_anchor = meta.geo_anchor;
    Ok((map, meta))
}

/// Write a map as PGM together with its sidecar.
pub fn save_map_file(map: &RiverMap, meta: &MapMeta, raster: &Path) -> Result<()> {
    std::fs::write(raster, map.to_pgm()).map_err(|e| Error::io(raster, e))?;
    let side = MapMeta::sidecar_path(raster);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

/// Axis-aligned `length x width` water rectangle with a one-cell border.
///
/// FREE cells are `x in 1..=length`, `y in 1..=width`.
pub fn make_rect_river(length: usize, width: usize) -> Result<RiverMap> {
    if length < 3 || width < 3 {
        return Err(Error::InvalidParameter(format!(
            "rect river needs length, width >= 3 (got {length}x{width})"
        )));
    }
    make_width_profile_river(length, |_| width as f64)
}

/// Straight river along `+x` whose width at column `x` (1-based) is
/// `width_at(x)` cells, centered on a common midline.
pub fn make_width_profile_river(length: usize, width_at: impl Fn(usize) -> f64) -> Result<RiverMap> {
    if length < 3 {
        return Err(Error::InvalidParameter("length must be >= 3".into()));
    }
    let widths: Vec<f64> = (1..=length).map(&width_at).collect();
    let max_w = widths.iter().cloned().fold(0.0, f64::max);
    if !(max_w >= 1.0) {
        return Err(Error::InvalidParameter("width must be >= 1".into()));
    }
    let h = max_w.ceil() as usize + 2;
    let w = length + 2;
    let mid = max_w.ceil() / 2.0 + 0.5;
    let mut cells = vec![Cell::Obstacle; w * h];
    for (i, wx) in widths.iter().enumerate() {
        let x = i + 1;
        for y in 1..h - 1 {
            if (y as f64 - mid).abs() < wx / 2.0 {
                cells[y * w + x] = Cell::Free;
            }
        }
    }
    RiverMap::from_cells(w, h, cells, 1.0)
}

/// Sinusoidal river `y(x) = amplitude * sin(2πx / period)` of the given
/// centerline arc length, with flat ends perpendicular to the centerline.
///
/// A cell is FREE when its center is within `width / 2` of the centerline
/// and lies between the two end cuts. With `amplitude = 0` the result is
/// identical to [`make_rect_river`].
pub fn make_meander_river(length: usize, width: usize, amplitude: f64, period: f64) -> Result<RiverMap> {
    if width < 3 {
        return Err(Error::InvalidParameter(format!("meander width {width} must be >= 3")));
    }
    if !(period > 0.0) || !(length >= 3) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter("meander needs period > 0 and length >= 3".into()));
    }
    let amp = amplitude.abs();
    let half = width as f64 / 2.0;
    let k = std::f64::consts::TAU / period;
    let slope = |u: f64| amplitude * k * (k * u).cos();
    let tilt = |u: f64| {
        let s = slope(u);
        s.abs() / (1.0 + s * s).sqrt()
    };
    let x0 = 0.5 + half * tilt(0.0);
    let ybase = amp + half + 0.5;
    let curve = |u: f64| Point::new(x0 + u, ybase + amplitude * (k * u).sin());

    // Dense centerline polyline truncated at the requested arc length.
    let du = 0.25;
    let target = length as f64;
    let mut pts = vec![curve(0.0)];
    let mut arc = 0.0;
    let mut u = 0.0;
    loop {
        let next = curve(u + du);
        let seg = pts.last().unwrap().dist(next);
        if arc + seg >= target {
            let t = (target - arc) / seg;
            let last = *pts.last().unwrap();
            pts.push(last.lerp(next, t));
            break;
        }
        pts.push(next);
        arc += seg;
        u += du;
    }
    let start = pts[0];
    let end = *pts.last().unwrap();
    let t_start = (pts[1] - pts[0]).normalized();
    let t_end = (end - pts[pts.len() - 2]).normalized();

    // Generous width; cropped to one obstacle column past the water below.
    let w = (end.x + half + 2.0).ceil() as usize + 1;
    let h = (2.0 * amp + width as f64).ceil() as usize + 2;
    let mut best = vec![f64::INFINITY; w * h];
    for seg in pts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let x_lo = (a.x.min(b.x) - half).floor().max(0.0) as usize;
        let x_hi = ((a.x.max(b.x) + half).ceil() as usize).min(w - 1);
        let y_lo = (a.y.min(b.y) - half).floor().max(0.0) as usize;
        let y_hi = ((a.y.max(b.y) + half).ceil() as usize).min(h - 1);
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                let (d, _) = crate::geometry::point::point_segment_distance(
                    Point::new(x as f64, y as f64),
                    a,
                    b,
                );
                let slot = &mut best[y * w + x];
                if d < *slot {
                    *slot = d;
                }
            }
        }
    }
    let mut cells = vec![Cell::Obstacle; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = Point::new(x as f64, y as f64);
            let inside_ends = (p - start).dot(t_start) > 0.0 && (p - end).dot(t_end) < 0.0;
            let border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            if !border && inside_ends && best[y * w + x] < half {
                cells[y * w + x] = Cell::Free;
            }
        }
    }
    let max_x = (0..w)
        .rev()
        .find(|&x| (0..h).any(|y| cells[y * w + x] == Cell::Free))
        .unwrap_or(0);
    let cw = max_x + 2;
    let cropped: Vec<Cell> = (0..h).flat_map(|y| cells[y * w..y * w + cw].iter().copied()).collect();
    let mut map = RiverMap::from_cells(cw, h, cropped, 1.0)?;
    cleanup(&mut map)?;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_png(w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> Vec<u8> {
        let img = image::GrayImage::from_fn(w, h, |x, y| image::Luma([f(x, y)]));
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png).unwrap();
        buf.into_inner()
    }

    #[test]
    fn all_dark_raster_is_all_free() {
        let png = encode_png(100, 100, |_, _| 10);
        let map = load_map(&png, 128, 1.0).unwrap();
        assert_eq!(map.free_count(), 10_000);
    }

    #[test]
    fn all_bright_raster_is_rejected() {
        let png = encode_png(50, 50, |_, _| 250);
        assert!(matches!(load_map(&png, 128, 1.0), Err(Error::EmptyFreeRegion)));
    }

    #[test]
    fn undecodable_payload_is_rejected() {
        assert!(matches!(load_map(b"not an image", 128, 1.0), Err(Error::Decode(_))));
    }

    #[test]
    fn color_raster_is_rejected() {
        let img = image::RgbImage::from_pixel(4, 4, image::Rgb([0, 0, 0]));
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png).unwrap();
        assert!(matches!(load_map(&buf.into_inner(), 128, 1.0), Err(Error::Decode(_))));
    }

    #[test]
    fn keeps_largest_blob() {
        // 20x20 blob (400 px) and a 6x10 blob (60 px).
        let png = encode_png(60, 40, |x, y| {
            let a = (2..22).contains(&x) && (2..22).contains(&y);
            let b = (40..46).contains(&x) && (5..15).contains(&y);
            if a || b {
                0
            } else {
                255
            }
        });
        let map = load_map(&png, 128, 1.0).unwrap();
        assert_eq!(map.free_count(), 400);
    }

    #[test]
    fn small_holes_filled_large_kept() {
        let png = encode_png(200, 200, |x, y| {
            let small = x == 50 && y == 50;
            let large = (100..130).contains(&x) && (100..130).contains(&y);
            if small || large {
                255
            } else {
                0
            }
        });
        let map = load_map(&png, 128, 1.0).unwrap();
        assert!(map.is_free(50, 50));
        assert!(!map.is_free(110, 110));
    }

    #[test]
    fn pgm_round_trip_is_idempotent() {
        let map = make_meander_river(300, 20, 15.0, 120.0).unwrap();
        let again = load_map(&map.to_pgm(), 128, 1.0).unwrap();
        assert_eq!(map, again);
    }

    #[test]
    fn rect_fixture_area() {
        assert_eq!(make_rect_river(1000, 100).unwrap().free_count(), 100_000);
        assert_eq!(make_rect_river(3, 3).unwrap().free_count(), 9);
        assert!(make_rect_river(2, 5).is_err());
    }

    #[test]
    fn flat_meander_equals_rect() {
        let a = make_meander_river(200, 30, 0.0, 100.0).unwrap();
        let b = make_rect_river(200, 30).unwrap();
        assert_eq!(a.cells(), b.cells());
        assert_eq!((a.width(), a.height()), (b.width(), b.height()));
    }

    #[test]
    fn fixtures_are_deterministic() {
        let a = make_meander_river(400, 20, 30.0, 150.0).unwrap();
        let b = make_meander_river(400, 20, 30.0, 150.0).unwrap();
        assert_eq!(a.to_pgm(), b.to_pgm());
    }

    #[test]
    fn start_point_must_be_free() {
        let map = make_rect_river(10, 5).unwrap();
        assert!(StartPoint::new(&map, Point::new(0.0, 0.0)).is_err());
        assert!(StartPoint::new(&map, Point::new(2.2, 3.4)).is_ok());
    }

    #[test]
    fn geo_anchor_north_up() {
        let g = GeoAnchor {
            lat: 33.8,
            lon: -81.0,
            bearing_deg: 90.0,
        };
        let (lon, lat) = g.to_lon_lat(1000.0, 0.0);
        assert!(lon > -81.0 && (lat - 33.8).abs() < 1e-9);
        let (lon2, lat2) = g.to_lon_lat(0.0, 1000.0);
        assert!(lat2 < 33.8 && (lon2 + 81.0).abs() < 1e-9);
    }
}
