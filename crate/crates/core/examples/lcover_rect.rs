//! Longitudinal passes on the 1000 x 100 rectangle.
//!
//! cargo run --example lcover_rect

use riverine::fixtures;
use riverine::lcover::{clusters_for, plan_lcover_on, LCoverParams, PassParity};
use riverine::metrics::evaluate;
use riverine::{Label, RiverModel};

fn main() -> riverine::Result<()> {
    let f = fixtures::rect()?;
    let params = LCoverParams::new(10.0).with_parity(PassParity::Even);
    let model = RiverModel::build(&f.map, f.start, RiverModel::default_station_step(&f.map, params.s))?;
    for (k, c) in clusters_for(&model, &params)?.iter().enumerate() {
        println!(
            "cluster {k}: stations {:?}, width {:.1} m, {} passes",
            c.station_range, c.representative_width, c.pass_count
        );
    }
    let path = plan_lcover_on(&model, &params)?;
    for run in path.runs().iter().filter(|r| r.label == Label::Coverage) {
        let (a, b) = (path.waypoints[run.start].position(), path.waypoints[run.end].position());
        println!("  pass ({:6.1}, {:5.1}) -> ({:6.1}, {:5.1})", a.x, a.y, b.x, b.y);
    }
    let r = evaluate(&path, &f.map, f.start, params.s)?;
    println!("covered {:.2}%, return {:.2}%", r.covered_area_pct, r.return_path_pct);
    Ok(())
}
