//! Coverage path planning for river surveys.
//!
//! Three deterministic strategies cover a river reach given as a binary
//! occupancy grid:
//!
//! - [`lcover`]: longitudinal boustrophedon passes, with the river split
//!   into clusters of similar width.
//! - [`zcover`]: a bank-to-bank zig-zag that keeps consecutive triangles at
//!   roughly equal area, plus the fixed-angle baseline it improves on.
//! - [`tcover`]: transverse lawn-mower passes perpendicular to the banks.
//!
//! [`metrics`] scores a plan (covered area, return path, turns, crossing
//! statistics), [`sim`] executes it with a kinematic boat model, and
//! [`bathymetry`] fuses depth soundings into a Gaussian-process depth map.
//!
//! Coordinates are in cells of the map raster (origin top-left, `x` right,
//! `y` down); lengths and widths reported to users are in meters.

pub mod bathymetry;
pub mod cli;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod geometry;
pub mod lcover;
pub mod map;
pub mod metrics;
pub mod path;
pub mod sim;
pub mod tcover;
pub mod zcover;

pub use error::{Error, Result};
pub use geometry::{Point, RiverModel};
pub use map::{RiverMap, StartPoint};
pub use path::{CoveragePath, Label, PlannerId, Waypoint};
