//! Depth map from simulated soundings: dense L-Cover track against a
//! sparse Z-Cover track over the same synthetic riverbed.
//!
//! cargo run --release --example bathymetry_gp

use riverine::bathymetry::{fit_gp, predict_grid, rmse_at, samples_from_track, BathymetryGrid, GpHyper, SinusoidDepth};
use riverine::fixtures;
use riverine::lcover::{plan_lcover, LCoverParams};
use riverine::sim::{simulate, AsvModel, Disturbance};
use riverine::zcover::{plan_zcover, ZCoverParams};
use riverine::Point;

fn main() -> riverine::Result<()> {
    let f = fixtures::rect()?;
    let field = SinusoidDepth::default();
    let held: Vec<Point> = (0..200).map(|i| Point::new(5.0 + 5.0 * i as f64, 10.0 + (i % 9) as f64 * 10.0)).collect();
    for (name, path) in [
        ("lcover", plan_lcover(&f.map, f.start, &LCoverParams::new(10.0))?),
        ("zcover", plan_zcover(&f.map, f.start, &ZCoverParams::default())?),
    ] {
        let track = simulate(&path, AsvModel::default(), Disturbance::default(), 0.1, 0)?;
        let samples = samples_from_track(&track, &field, 5.0, &f.map);
        let model = fit_gp(&samples, GpHyper::defaults_for(&samples, 10.0))?;
        let grid = predict_grid(&model, &f.map, 10.0)?;
        let err = rmse_at(&held, |p| field.depth(p), |p| model.predict(p).0);
        let (lo, hi) = BathymetryGrid::range(&grid.uncertainty).unwrap_or((0.0, 0.0));
        println!(
            "{name}: {} soundings, held-out rmse {err:.3} m, grid {}x{}, sd {lo:.2}..{hi:.2} m",
            samples.len(),
            grid.width,
            grid.height
        );
    }
    Ok(())
}
