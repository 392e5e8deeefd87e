//! Banks, centerline and an in-river route on a meander.
//!
//! cargo run --example river_geometry

use riverine::fixtures::MEANDERS;
use riverine::geometry::{in_river_shortest_path, BankSide};
use riverine::RiverModel;

fn main() -> riverine::Result<()> {
    let f = MEANDERS[2].build()?;
    let model = RiverModel::build(&f.map, f.start, 10.0)?;
    let cl = &model.centerline;
    println!("{}", f.name);
    println!(
        "  left bank {} pts, right bank {} pts",
        model.contours.bank(BankSide::Left).len(),
        model.contours.bank(BankSide::Right).len()
    );
    println!("  centerline {:.0} m over {} stations, mean width {:.1} m", cl.total_length, cl.len(), cl.mean_width());
    for s in cl.stations.iter().step_by(cl.len() / 8) {
        println!(
            "    arc {:7.1}  at ({:6.1}, {:6.1})  heading {:+.2}  width {:5.1}",
            s.arc_length, s.position.x, s.position.y, s.tangent.angle(), s.width
        );
    }

    let (a, b) = (cl.stations[0].position, cl.stations[cl.len() - 1].position);
    let route = in_river_shortest_path(&f.map, a, b)?;
    println!(
        "  route end to end: {:.0} m in {} legs (centerline {:.0} m)",
        route.length,
        route.points.len() - 1,
        cl.total_length
    );
    Ok(())
}
