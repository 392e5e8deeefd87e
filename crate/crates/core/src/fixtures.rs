//! Named synthetic rivers used by the tests, the examples and the
//! `fixtures` command.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::{make_meander_river, make_rect_river, RiverMap, StartPoint};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub map: RiverMap,
    pub start: StartPoint,
}

/// Sinusoid parameters of a meander fixture, in cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanderSpec {
    pub length: usize,
    pub width: usize,
    pub amplitude: f64,
    pub period: f64,
}

impl MeanderSpec {
    pub fn name(&self) -> String {
        format!(
            "meander_{}x{}_a{}_p{}",
            self.length, self.width, self.amplitude as i64, self.period as i64
        )
    }

    /// Point `lead` cells downstream of the upstream end cut, `inset` cells
    /// in from the left bank.
    pub fn start_point(&self, lead: f64, inset: f64) -> Point {
        let half = self.width as f64 / 2.0;
        let k = std::f64::consts::TAU / self.period;
        let slope = self.amplitude * k;
        let tilt = slope.abs() / (1.0 + slope * slope).sqrt();
        let origin = Point::new(0.5 + half * tilt, self.amplitude.abs() + half + 0.5);
        let t = Point::new(1.0, slope).normalized();
        origin + t * lead + t.left_normal() * (half - inset)
    }

    pub fn build(&self) -> Result<Fixture> {
        let map = make_meander_river(self.length, self.width, self.amplitude, self.period)?;
        let start = StartPoint::new(&map, self.start_point(START_LEAD, START_INSET))?;
        Ok(Fixture {
            name: self.name(),
            map,
            start,
        })
    }
}

/// Start points sit this many cells downstream of the upstream end cut...
pub const START_LEAD: f64 = 3.0;
/// ...and this many cells in from the left bank.
pub const START_INSET: f64 = 2.0;

/// The meanders of the standard set: varying amplitude and period.
pub const MEANDERS: [MeanderSpec; 3] = [
    MeanderSpec {
        length: 1500,
        width: 80,
        amplitude: 60.0,
        period: 600.0,
    },
    MeanderSpec {
        length: 2000,
        width: 100,
        amplitude: 100.0,
        period: 800.0,
    },
    MeanderSpec {
        length: 1800,
        width: 80,
        amplitude: 150.0,
        period: 900.0,
    },
];

/// `1000 x 100` cell rectangle at 1 m/cell, start at the upstream end
/// near the left bank.
pub fn rect() -> Result<Fixture> {
    let map = make_rect_river(1000, 100)?;
    let start = StartPoint::new(&map, Point::new(START_LEAD, 1.0 + START_INSET))?;
    Ok(Fixture {
        name: "rect_1000x100".into(),
        map,
        start,
    })
}

/// Rectangle followed by the meanders.
pub fn standard() -> Result<Vec<Fixture>> {
    let mut out = vec![rect()?];
    for m in MEANDERS {
        out.push(m.build()?);
    }
    Ok(out)
}

/// Build one standard fixture by name; `rect` is accepted for the rectangle.
pub fn by_name(name: &str) -> Result<Fixture> {
    if name == "rect" || name == "rect_1000x100" {
        return rect();
    }
    MEANDERS
        .iter()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown fixture '{name}'")))?
        .build()
}

/// Names of the standard fixtures, in [`standard`] order.
pub fn names() -> Vec<String> {
    std::iter::once("rect_1000x100".to_string())
        .chain(MEANDERS.iter().map(|m| m.name()))
        .collect()
}
