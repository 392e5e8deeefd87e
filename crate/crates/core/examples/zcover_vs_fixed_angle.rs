//! Equal-triangles zig-zag against the fixed 45 degree zig-zag.
//!
//! cargo run --example zcover_vs_fixed_angle

use riverine::fixtures;
use riverine::metrics::{covered_area_pct, crossing_statistics};
use riverine::zcover::{plan_fixed_angle, plan_zcover_run, ZCoverParams};

fn main() -> riverine::Result<()> {
    for f in fixtures::standard()? {
        let run = plan_zcover_run(&f.map, f.start, &ZCoverParams::default())?;
        let fa = plan_fixed_angle(&f.map, f.start, 45f64.to_radians())?;
        println!("{}", f.name);
        for (name, path) in [("equal triangles", &run.path), ("fixed angle", &fa)] {
            let c = crossing_statistics(path).expect("zig-zag has crossings");
            println!(
                "  {name:15} {:3} crossings  max {:6.1} m  sd {:6.1} m  area cv {:.3}  covered {:5.2}%",
                c.lengths.len(),
                c.max,
                c.sd,
                c.triangle_area_cv,
                covered_area_pct(path, &f.map, 10.0)
            );
        }
        let escalated = run.triangles.iter().filter(|t| t.tolerance.is_some_and(|e| e > run.eps_init)).count();
        println!("  {escalated} of {} turn points needed a looser tolerance", run.triangles.len());
    }
    Ok(())
}
