use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode raster: {0}")]
    Decode(String),

    #[error("empty FREE region after cleanup")]
    EmptyFreeRegion,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("start point ({x:.2}, {y:.2}) is not in a FREE cell")]
    StartNotFree { x: f64, y: f64 },

    #[error("FREE region touches the raster frame on {0} disjoint boundary arcs (ambiguous inlet/outlet)")]
    AmbiguousEnds(usize),

    #[error("FREE region has no traversable extent")]
    NoExtent,

    #[error("centerline skeleton has no path connecting the river ends")]
    NoSkeletonPath,

    #[error("ray left the raster frame before reaching a bank")]
    RayExitedFrame,

    #[error("no FREE path between ({0:.1}, {1:.1}) and ({2:.1}, {3:.1})")]
    NoRoute(f64, f64, f64, f64),

    #[error("zig-zag planner made no progress at waypoint {waypoint}: {reason}")]
    NoProgress { waypoint: usize, reason: String },

    #[error("waypoint {leg} unreachable within {timeout:.1} s")]
    LegTimeout { leg: usize, timeout: f64 },

    #[error("kernel matrix not positive definite after jitter escalation")]
    NotPositiveDefinite,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
