//! Transverse passes on the tightest meander, written as SVG.
//!
//! cargo run --example tcover_meander

use riverine::export::render_svg;
use riverine::fixtures::MEANDERS;
use riverine::metrics::{turn_statistics, DEFAULT_TURN_THRESHOLD};
use riverine::tcover::{plan_tcover_on, transverse_passes, TCoverParams};
use riverine::RiverModel;

fn main() -> riverine::Result<()> {
    let f = MEANDERS[2].build()?;
    let params = TCoverParams::new(10.0);
    let model = RiverModel::build(&f.map, f.start, 5.0)?;
    let passes = transverse_passes(&model, &params)?;
    let lengths: Vec<f64> = passes.iter().map(|p| p.left.dist(p.right)).collect();
    println!(
        "{}: {} passes, {:.1} to {:.1} m long",
        f.name,
        passes.len(),
        lengths.iter().cloned().fold(f64::INFINITY, f64::min),
        lengths.iter().cloned().fold(0.0, f64::max)
    );
    let path = plan_tcover_on(&model, &params)?;
    let (turns, total) = turn_statistics(&path, DEFAULT_TURN_THRESHOLD);
    println!("{turns} turns, {:.0} rad of turning", total);

    let out = std::env::temp_dir().join(format!("{}.tcover.svg", f.name));
    std::fs::write(&out, render_svg(&f.map, Some(&path), None)).map_err(|e| riverine::Error::io(&out, e))?;
    println!("wrote {}", out.display());
    Ok(())
}
