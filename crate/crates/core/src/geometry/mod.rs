//! Geometric substrate: points, raster algorithms, ray casting, routing
//! and the river model (banks, centerline, cross-sections).

pub mod point;
pub mod raster;
pub mod ray;
pub mod river;
pub mod route;

pub use point::{point_segment_distance, polyline_length, triangle_area, wrap_angle, Point};
pub use ray::{cast_ray, cast_ray_dir, cast_ray_to_opposite_bank, line_of_sight, RayHit};
pub use river::{
    downriver_direction, extract_bank_contours, extract_centerline, BankContours, BankSide, Centerline,
    CrossSection, Projection, RiverModel, Station,
};
pub use route::{in_river_shortest_path, Route};
