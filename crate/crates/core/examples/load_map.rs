//! Write a fixture to disk as PGM + sidecar, read it back and summarize it.
//!
//! cargo run --example load_map

use riverine::fixtures;
use riverine::map::{load_map_file, save_map_file, GeoAnchor, MapMeta};

fn main() -> riverine::Result<()> {
    let f = fixtures::by_name("meander_2000x100_a100_p800")?;
    let dir = std::env::temp_dir().join("riverine-load-map");
    std::fs::create_dir_all(&dir).map_err(|e| riverine::Error::io(&dir, e))?;
    let raster = dir.join(format!("{}.pgm", f.name));
    let meta = MapMeta {
        resolution: f.map.resolution(),
        threshold: 128,
        geo_anchor: Some(GeoAnchor {
            lat: 33.99,
            lon: -81.03,
            bearing_deg: 90.0,
        }),
        start: Some([f.start.position().x, f.start.position().y]),
    };
    save_map_file(&f.map, &meta, &raster)?;

    let (map, meta) = load_map_file(&raster)?;
    println!("{}", raster.display());
    println!("  {} x {} cells at {} m", map.width(), map.height(), map.resolution());
    println!("  {} FREE cells", map.free_count());
    println!("  start {:?}, anchor {:?}", meta.start, meta.geo_anchor);
    Ok(())
}
