mod common;

use riverine::map::{load_map, load_map_file, make_meander_river, make_rect_river, save_map_file, MapMeta};
use riverine::{Error, RiverModel, StartPoint};

fn pgm(w: usize, h: usize, px: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            out.push(px(x, y));
        }
    }
    out
}

#[test]
fn all_dark_raster_is_all_free() {
    let map = load_map(&pgm(100, 100, |_, _| 0), 128, 1.0).unwrap();
    assert_eq!(map.free_count(), 10_000);
}

#[test]
fn all_bright_raster_is_rejected() {
    let err = load_map(&pgm(100, 100, |_, _| 255), 128, 1.0).unwrap_err();
    assert!(matches!(err, Error::EmptyFreeRegion), "{err}");
    assert!(err.to_string().contains("empty FREE region"));
}

#[test]
fn only_the_largest_blob_survives() {
    let bytes = pgm(80, 60, |x, y| {
        let big = (5..25).contains(&x) && (5..25).contains(&y);
        let small = (50..56).contains(&x) && (30..40).contains(&y);
        if big || small {
            10
        } else {
            240
        }
    });
    let map = load_map(&bytes, 128, 1.0).unwrap();
    assert_eq!(common::free_components(&map), vec![400]);
}

#[test]
fn threshold_is_inclusive_for_dark() {
    let bytes = pgm(10, 10, |x, _| if x < 5 { 128 } else { 129 });
    let map = load_map(&bytes, 128, 1.0).unwrap();
    assert_eq!(map.free_count(), 50);
}

#[test]
fn colour_raster_is_a_decode_error() {
    let img = image::RgbImage::new(4, 4);
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png).unwrap();
    assert!(matches!(load_map(buf.get_ref(), 128, 1.0), Err(Error::Decode(_))));
}

#[test]
fn rect_areas() {
    assert_eq!(make_rect_river(1000, 100).unwrap().free_count(), 100_000);
    assert_eq!(make_rect_river(3, 3).unwrap().free_count(), 9);
}

#[test]
fn small_rect_banks_are_ten_long() {
    let map = make_rect_river(10, 4).unwrap();
    let start = StartPoint::new(&map, riverine::Point::new(1.0, 2.0)).unwrap();
    let model = RiverModel::build(&map, start, 2.0).unwrap();
    assert_eq!(model.contours.left_bank.len(), 10);
    assert_eq!(model.contours.right_bank.len(), 10);
    assert!(model.contours.left_bank.iter().all(|p| p.y == 1.0));
    assert!(model.contours.right_bank.iter().all(|p| p.y == 4.0));
}

#[test]
fn meander_area_and_connectivity() {
    let map = make_meander_river(2000, 80, 150.0, 500.0).unwrap();
    let expect = 2000.0 * 80.0;
    let area = map.free_count() as f64;
    assert!((area - expect).abs() / expect < 0.03, "area {area}");
    let comps = common::free_components(&map);
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0], map.free_count());
}

#[test]
fn flat_meander_is_the_rectangle() {
    let a = make_meander_river(300, 40, 0.0, 100.0).unwrap();
    let b = make_rect_river(300, 40).unwrap();
    let free = |m: &riverine::RiverMap| {
        let mut v = Vec::new();
        for y in 0..m.height() as i64 {
            for x in 0..m.width() as i64 {
                if m.is_free(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    };
    assert_eq!(free(&a), free(&b));
}

#[test]
fn generators_are_deterministic() {
    let a = make_meander_river(900, 60, 80.0, 450.0).unwrap();
    let b = make_meander_river(900, 60, 80.0, 450.0).unwrap();
    assert_eq!(a.cells(), b.cells());
}

#[test]
fn cleanup_is_idempotent() {
    let map = make_meander_river(900, 60, 80.0, 450.0).unwrap();
    let mut again = map.clone();
    riverine::map::cleanup(&mut again).unwrap();
    assert_eq!(map.cells(), again.cells());
}

#[test]
fn file_round_trip_keeps_cells_and_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let map = make_meander_river(400, 40, 30.0, 200.0).unwrap();
    let meta = MapMeta {
        resolution: 0.5,
        threshold: 128,
        geo_anchor: Some(riverine::map::GeoAnchor {
            lat: 45.0,
            lon: -73.0,
            bearing_deg: 90.0,
        }),
        start: None,
    };
    let path = dir.path().join("m.pgm");
    save_map_file(&map, &meta, &path).unwrap();
    let (back, meta_back) = load_map_file(&path).unwrap();
    assert_eq!(back.cells(), map.cells());
    assert_eq!(back.resolution(), 0.5);
    assert_eq!(meta_back, meta);
    assert!(back.geo_anchor.is_some());
}

#[test]
fn missing_raster_names_the_path() {
    let err = load_map_file(std::path::Path::new("/nonexistent/river.pgm")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/river.pgm"), "{err}");
}
