//! Area and return metrics for every planner on every standard fixture.
//!
//! cargo run --release --example table_metrics

use riverine::cli::{plan_with, PlannerSettings};
use riverine::fixtures;
use riverine::metrics::{evaluate, CoverageReport};
use riverine::PlannerId;

fn main() -> riverine::Result<()> {
    let settings = PlannerSettings::default();
    println!("{}", CoverageReport::CSV_HEADER);
    for f in fixtures::standard()? {
        for planner in PlannerId::ALL {
            let path = plan_with(planner, &f.map, f.start, &settings)?;
            let report = evaluate(&path, &f.map, f.start, settings.spacing)?;
            println!("{}", report.csv_row(&f.name));
        }
    }
    Ok(())
}
