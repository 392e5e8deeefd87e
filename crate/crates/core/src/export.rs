//! File formats: GeoJSON, CSV, QGC waypoint missions, SVG figures and
//! bathymetry rasters.
//!
//! GeoJSON positions are `[longitude, latitude]` when the map has a geo
//! anchor. Without one they are map-frame meters `[x, y]` and the
//! collection carries `"coordinate_frame": "map_meters"`. CSV files are
//! always map-frame meters.

use std::fmt::Write as _;

use image::{Rgb, RgbImage};
use serde_json::{json, Value};

use crate::bathymetry::BathymetryGrid;
use crate::error::{Error, Result};
use crate::map::{GeoAnchor, RiverMap};
use crate::path::{CoveragePath, Label};
use crate::sim::ExecutedTrack;

fn position(anchor: Option<&GeoAnchor>, x_m: f64, y_m: f64) -> Value {
    match anchor {
        Some(a) => {
            let (lon, lat) = a.to_lon_lat(x_m, y_m);
            json!([round(lon, 9), round(lat, 9)])
        }
        None => json!([round(x_m, 4), round(y_m, 4)]),
    }
}

fn round(v: f64, digits: i32) -> f64 {
    let k = 10f64.powi(digits);
    (v * k).round() / k
}

fn collection(anchor: Option<&GeoAnchor>, features: Vec<Value>) -> Value {
    let mut fc = json!({ "type": "FeatureCollection", "features": features });
    if anchor.is_none() {
        fc["coordinate_frame"] = json!("map_meters");
    }
    fc
}

fn label_str(l: Label) -> &'static str {
    match l {
        Label::Coverage => "COVERAGE",
        Label::Transit => "TRANSIT",
    }
}

/// The whole path as one LineString with per-point labels, followed by
/// one LineString per coverage or transit run.
pub fn path_geojson(path: &CoveragePath, anchor: Option<&GeoAnchor>) -> Value {
    let res = path.resolution;
    let coords = |a: usize, b: usize| -> Vec<Value> {
        path.waypoints[a..=b]
            .iter()
            .map(|w| position(anchor, w.x * res, w.y * res))
            .collect()
    };
    let mut features = vec![json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": coords(0, path.waypoints.len().saturating_sub(1)) },
        "properties": {
            "role": "path",
            "planner": path.planner.as_str(),
            "params": path.params,
            "labels": path.waypoints.iter().map(|w| label_str(w.label)).collect::<Vec<_>>(),
        }
    })];
    if path.waypoints.len() < 2 {
        features[0]["geometry"] = json!({ "type": "Point", "coordinates": coords(0, 0)[0] });
    }
    for (k, run) in path.runs().into_iter().enumerate() {
        let mut props = json!({ "role": "segment", "label": label_str(run.label), "run": k });
        if let Some(c) = path.waypoints[run.start].cluster.filter(|_| run.label == Label::Coverage) {
            props["cluster"] = json!(c);
        }
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords(run.start, run.end) },
            "properties": props,
        }));
    }
    collection(anchor, features)
}

/// `index,x,y,label` in map-frame meters.
pub fn path_csv(path: &CoveragePath) -> String {
    let mut out = String::from("index,x,y,label\n");
    for (i, w) in path.waypoints.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{:.4},{:.4},{}",
            w.x * path.resolution,
            w.y * path.resolution,
            label_str(w.label)
        );
    }
    out
}

/// Tab-separated `QGC WPL 110` mission: a home row at the first waypoint,
/// then one NAV_WAYPOINT per path waypoint at zero relative altitude.
pub fn mission_wpl(path: &CoveragePath, anchor: &GeoAnchor, acceptance_radius: f64) -> String {
    const NAV_WAYPOINT: u32 = 16;
    const FRAME_GLOBAL: u32 = 0;
    const FRAME_RELATIVE_ALT: u32 = 3;
    let mut out = String::from("QGC WPL 110\n");
    let res = path.resolution;
    let Some(home) = path.waypoints.first() else {
        return out;
    };
    let (lon, lat) = anchor.to_lon_lat(home.x * res, home.y * res);
    let _ = writeln!(out, "0\t1\t{FRAME_GLOBAL}\t{NAV_WAYPOINT}\t0\t0\t0\t0\t{lat:.8}\t{lon:.8}\t0.000000\t1");
    for (i, w) in path.waypoints.iter().enumerate() {
        let (lon, lat) = anchor.to_lon_lat(w.x * res, w.y * res);
        let _ = writeln!(
            out,
            "{}\t0\t{FRAME_RELATIVE_ALT}\t{NAV_WAYPOINT}\t0\t{acceptance_radius:.6}\t0\t0\t{lat:.8}\t{lon:.8}\t0.000000\t1",
            i + 1
        );
    }
    out
}

/// `t,x,y,x_gps,y_gps,heading`.
pub fn track_csv(track: &ExecutedTrack) -> String {
    let mut out = String::from("t,x,y,x_gps,y_gps,heading\n");
    for s in &track.samples {
        let _ = writeln!(
            out,
            "{:.3},{:.4},{:.4},{:.4},{:.4},{:.6}",
            s.t, s.x, s.y, s.x_gps, s.y_gps, s.heading
        );
    }
    out
}

/// True track and GPS track as two LineStrings.
pub fn track_geojson(track: &ExecutedTrack, anchor: Option<&GeoAnchor>) -> Value {
    let line = |gps: bool| -> Vec<Value> {
        track
            .samples
            .iter()
            .map(|s| if gps { position(anchor, s.x_gps, s.y_gps) } else { position(anchor, s.x, s.y) })
            .collect()
    };
    collection(
        anchor,
        vec![
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": line(false) },
                "properties": {
                    "role": "true_track",
                    "duration_s": round(track.duration(), 3),
                    "cross_track_rmse_m": round(track.cross_track_rmse, 6),
                    "cross_track_max_m": round(track.cross_track_max, 6),
                }
            }),
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": line(true) },
                "properties": { "role": "gps_track" }
            }),
        ],
    )
}

/// Parse a track CSV written by [`track_csv`].
pub fn parse_track_csv(text: &str) -> Result<ExecutedTrack> {
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Malformed(format!("track line {}: {e}", n + 1)))?;
        if f.len() != 6 {
            return Err(Error::Malformed(format!("track line {}: expected 6 fields", n + 1)));
        }
        samples.push(crate::sim::TrackSample {
            t: f[0],
            x: f[1],
            y: f[2],
            x_gps: f[3],
            y_gps: f[4],
            heading: f[5],
        });
    }
    if samples.is_empty() {
        return Err(Error::Malformed("track has no samples".into()));
    }
    Ok(ExecutedTrack {
        samples,
        arrivals: Vec::new(),
        cross_track_rmse: 0.0,
        cross_track_max: 0.0,
    })
}

/// Alternating colors for consecutive clusters.
const CLUSTER_COLORS: [&str; 2] = ["#1f77b4", "#ff7f0e"];

/// SVG figure in cell units: water silhouette, the path (one
/// `class="coverage"` polyline per coverage run, colored by cluster) and
/// an optional executed track.
pub fn render_svg(map: &RiverMap, path: Option<&CoveragePath>, track: Option<&ExecutedTrack>) -> String {
    let (w, h) = (map.width(), map.height());
    let stroke = (w.max(h) as f64 / 800.0).max(0.5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-0.5 -0.5 {w} {h}" width="{}" height="{}">"#,
        (w as f64 * 1600.0 / w.max(h) as f64).round(),
        (h as f64 * 1600.0 / w.max(h) as f64).round()
    );
    let _ = writeln!(out, r##"<rect class="land" x="-0.5" y="-0.5" width="{w}" height="{h}" fill="#d9d2c3"/>"##);
    // Water as one rectangle per horizontal run of FREE cells.
    let _ = writeln!(out, r##"<g class="water" fill="#cfe8f7">"##);
    for y in 0..h as i64 {
        let mut x = 0i64;
        while x < w as i64 {
            if map.is_free(x, y) {
                let x0 = x;
                while x < w as i64 && map.is_free(x, y) {
                    x += 1;
                }
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="1"/>"#,
                    x0 as f64 - 0.5,
                    y as f64 - 0.5,
                    x - x0
                );
            } else {
                x += 1;
            }
        }
    }
    out.push_str("</g>\n");
    let fmt_pts = |pts: &mut dyn Iterator<Item = (f64, f64)>| -> String {
        let mut s = String::new();
        for (i, (x, y)) in pts.enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    };
    if let Some(p) = path {
        for run in p.runs() {
            let pts = fmt_pts(&mut p.waypoints[run.start..=run.end].iter().map(|w| (w.x, w.y)));
            match run.label {
                Label::Coverage => {
                    let color = CLUSTER_COLORS[p.waypoints[run.start].cluster.unwrap_or(0) % 2];
                    let _ = writeln!(
                        out,
                        r#"<polyline class="coverage" points="{pts}" fill="none" stroke="{color}" stroke-width="{stroke:.2}"/>"#
                    );
                }
                Label::Transit => {
                    let _ = writeln!(
                        out,
                        r##"<polyline class="transit" points="{pts}" fill="none" stroke="#7f7f7f" stroke-width="{:.2}" stroke-dasharray="{:.2}"/>"##,
                        stroke * 0.6,
                        stroke * 3.0
                    );
                }
            }
        }
        if let Some(home) = p.waypoints.first() {
            let _ = writeln!(
                out,
                r##"<circle class="start" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#2ca02c"/>"##,
                home.x,
                home.y,
                stroke * 4.0
            );
        }
    }
    if let Some(t) = track {
        let res = map.resolution();
        let pts = fmt_pts(&mut t.samples.iter().map(|s| (s.x / res, s.y / res)));
        let _ = writeln!(
            out,
            r##"<polyline class="track" points="{pts}" fill="none" stroke="#e6b400" stroke-width="{:.2}"/>"##,
            stroke * 0.8
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Single-channel little-endian PFM; absent cells are NaN.
pub fn grid_pfm(width: usize, height: usize, layer: &[Option<f64>]) -> Vec<u8> {
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    // PFM stores rows bottom to top.
    for j in (0..height).rev() {
        for i in 0..width {
            let v = layer[j * width + i].map_or(f32::NAN, |v| v as f32);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Heatmap of one layer: dark blue at the minimum to yellow at the
/// maximum, land in light gray.
pub fn grid_png(width: usize, height: usize, layer: &[Option<f64>]) -> Result<Vec<u8>> {
    let (lo, hi) = BathymetryGrid::range(layer).unwrap_or((0.0, 1.0));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut img = RgbImage::new(width as u32, height as u32);
    for j in 0..height {
        for i in 0..width {
            let px = match layer[j * width + i] {
                None => Rgb([217, 217, 217]),
                Some(v) => ramp((v - lo) / span),
            };
            img.put_pixel(i as u32, j as u32, px);
        }
    }
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| Error::Malformed(format!("PNG encode: {e}")))?;
    Ok(buf.into_inner())
}

fn ramp(t: f64) -> Rgb<u8> {
    const STOPS: [[f64; 3]; 4] = [[48.0, 18.0, 59.0], [33.0, 145.0, 140.0], [94.0, 201.0, 98.0], [253.0, 231.0, 37.0]];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let c = |i: usize| (STOPS[k][i] + (STOPS[k + 1][i] - STOPS[k][i]) * f).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

/// Metadata written next to the bathymetry rasters.
pub fn bathy_metadata(grid: &BathymetryGrid, extra: Value) -> Value {
    let range = |l: &[Option<f64>]| BathymetryGrid::range(l).map(|(a, b)| json!([round(a, 6), round(b, 6)]));
    json!({
        "cell_size_m": grid.cell_size,
        "width": grid.width,
        "height": grid.height,
        "origin": "cell (0, 0) centered at map-frame (0, 0) m; rows top to bottom",
        "uncertainty": "predictive standard deviation (RMSE map), meters",
        "mean_range_m": range(&grid.mean),
        "uncertainty_range_m": range(&grid.uncertainty),
        "present_cells": grid.mean.iter().filter(|v| v.is_some()).count(),
        "fit": extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::map::make_rect_river;
    use crate::path::PlannerId;

    fn sample_path() -> CoveragePath {
        let mut p = CoveragePath::new(PlannerId::Lcover, Value::Null, 2.0);
        p.push(Point::new(1.0, 1.0), Label::Transit);
        p.push(Point::new(2.0, 2.0), Label::Coverage);
        p.push(Point::new(8.0, 2.0), Label::Coverage);
        p.push_transit(&[Point::new(8.0, 2.0), Point::new(8.0, 4.0)]);
        p.push(Point::new(8.0, 4.0), Label::Coverage);
        p.push(Point::new(2.0, 4.0), Label::Coverage);
        p
    }

    #[test]
    fn geojson_has_one_feature_per_run() {
        let g = path_geojson(&sample_path(), None);
        let f = g["features"].as_array().unwrap();
        let coverage = f.iter().filter(|x| x["properties"]["label"] == "COVERAGE").count();
        assert_eq!(coverage, 2);
        assert_eq!(g["coordinate_frame"], "map_meters");
        assert_eq!(f[1]["geometry"]["coordinates"][0], json!([2.0, 2.0]));
    }

    #[test]
    fn geojson_uses_lon_lat_order() {
        let a = GeoAnchor {
            lat: 33.0,
            lon: -80.0,
            bearing_deg: 90.0,
        };
        let g = path_geojson(&sample_path(), Some(&a));
        let c = &g["features"][0]["geometry"]["coordinates"][0];
        assert!(c[0].as_f64().unwrap() < -79.0 && c[1].as_f64().unwrap() > 32.0);
        assert!(g.get("coordinate_frame").is_none());
    }

    #[test]
    fn mission_rows() {
        let a = GeoAnchor {
            lat: 33.0,
            lon: -80.0,
            bearing_deg: 90.0,
        };
        let m = mission_wpl(&sample_path(), &a, 3.0);
        let lines: Vec<&str> = m.lines().collect();
        assert_eq!(lines[0], "QGC WPL 110");
        assert_eq!(lines.len(), 2 + sample_path().waypoints.len());
        assert!(lines.iter().skip(1).all(|l| l.split('\t').count() == 12));
    }

    #[test]
    fn svg_polyline_per_pass() {
        let map = make_rect_river(10, 6).unwrap();
        let svg = render_svg(&map, Some(&sample_path()), None);
        assert_eq!(svg.matches(r#"class="coverage""#).count(), 2);
        assert!(!svg.contains(r#"class="track""#));
    }

    #[test]
    fn pfm_layout() {
        let b = grid_pfm(2, 1, &[Some(1.0), None]);
        let header = b"Pf\n2 1\n-1.0\n";
        assert_eq!(&b[..header.len()], header);
        assert_eq!(b.len(), header.len() + 8);
        assert_eq!(f32::from_le_bytes(b[header.len()..header.len() + 4].try_into().unwrap()), 1.0);
    }

    #[test]
    fn track_csv_round_trip() {
        let t = ExecutedTrack {
            samples: vec![crate::sim::TrackSample {
                t: 0.5,
                x: 1.0,
                y: 2.0,
                x_gps: 1.5,
                y_gps: 2.5,
                heading: 0.25,
            }],
            arrivals: vec![],
            cross_track_rmse: 0.0,
            cross_track_max: 0.0,
        };
        let back = parse_track_csv(&track_csv(&t)).unwrap();
        assert_eq!(back.samples, t.samples);
    }
}
