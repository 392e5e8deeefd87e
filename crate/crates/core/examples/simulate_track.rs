//! Run an L-Cover plan through the boat model with current and GPS noise.
//!
//! cargo run --release --example simulate_track

use riverine::fixtures::MEANDERS;
use riverine::lcover::{plan_lcover, LCoverParams};
use riverine::sim::{simulate_seeds, Disturbance, SimConfig};

fn main() -> riverine::Result<()> {
    let f = MEANDERS[0].build()?;
    let path = plan_lcover(&f.map, f.start, &LCoverParams::new(10.0))?;
    let cfg = SimConfig {
        disturbance: Disturbance {
            current: [0.3, 0.1],
            gps_noise_sigma: 1.5,
        },
        ..SimConfig::default()
    };
    println!("{}: {} waypoints", f.name, path.waypoints.len());
    for (seed, run) in (0..4).zip(simulate_seeds(&path, &cfg, &[0, 1, 2, 3])) {
        let t = run?;
        // Cross-track error uses true positions, so only the GPS column
        // changes with the seed.
        let gps = (t.samples.iter().map(|s| s.gps().dist(s.position()).powi(2)).sum::<f64>() / t.samples.len() as f64).sqrt();
        println!(
            "  seed {seed}: {:6.0} s, {:6.0} m, cross-track rmse {:.2} m, max {:.2} m, gps rms error {gps:.3} m",
            t.duration(),
            t.distance(),
            t.cross_track_rmse,
            t.cross_track_max
        );
    }
    Ok(())
}
