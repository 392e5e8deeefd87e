//! Gaussian-process depth maps from scattered soundings.
//!
//! Exact GP regression with a squared-exponential kernel and a constant
//! prior mean equal to the sample mean. The "RMSE map" written next to the
//! depth map is the predictive standard deviation.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::RiverMap;
use crate::sim::ExecutedTrack;

/// One sounding. Position in map-frame meters, depth positive down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSample {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

impl DepthSample {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    /// Meters.
    pub length_scale: f64,
    /// m².
    pub signal_variance: f64,
    /// m².
    pub noise_variance: f64,
}

impl GpHyper {
    /// `ℓ = 2 s`, `σ_f` the sample depth SD (floored at 1 cm) and
    /// `σ_n = 0.1 m`.
    pub fn defaults_for(samples: &[DepthSample], pass_spacing: f64) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().map(|s| s.depth).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s.depth - mean).powi(2)).sum::<f64>() / n;
        GpHyper {
            length_scale: 2.0 * pass_spacing,
            signal_variance: var.max(1e-4),
            noise_variance: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.length_scale) || !ok(self.signal_variance) || !ok(self.noise_variance) {
            return Err(Error::InvalidParameter(format!("GP hyperparameters must be positive: {self:?}")));
        }
        Ok(())
    }

    fn kernel(&self, a: Point, b: Point) -> f64 {
        let d2 = (a - b).norm().powi(2);
        self.signal_variance * (-d2 / (2.0 * self.length_scale * self.length_scale)).exp()
    }
}

/// Above this many samples, `fit_gp` averages them into grid cells first.
pub const DEFAULT_MAX_SAMPLES: usize = 5000;
const JITTER_STEPS: usize = 8;

#[derive(Debug, Clone)]
pub struct GpModel {
    pub hyper: GpHyper,
    /// Training inputs after thinning, in canonical order.
    pub samples: Vec<DepthSample>,
    pub prior_mean: f64,
    /// Diagonal jitter that made the kernel matrix factorizable, m².
    pub jitter: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

pub fn fit_gp(samples: &[DepthSample], hyper: GpHyper) -> Result<GpModel> {
    fit_gp_capped(samples, hyper, DEFAULT_MAX_SAMPLES)
}

pub fn fit_gp_capped(samples: &[DepthSample], hyper: GpHyper, max_samples: usize) -> Result<GpModel> {
    hyper.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidParameter("GP needs at least one sample".into()));
    }
    if let Some(s) = samples.iter().find(|s| !(s.depth > 0.0) || !s.x.is_finite() || !s.y.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad depth sample {s:?}")));
    }
    let mut pts = if samples.len() > max_samples.max(1) {
        thin_samples(samples, max_samples.max(1))
    } else {
        samples.to_vec()
    };
    // A fixed order makes the fit independent of how samples arrived.
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.depth.total_cmp(&b.depth)));
    let n = pts.len();
    let prior_mean = pts.iter().map(|s| s.depth).sum::<f64>() / n as f64;
    let mut k = DMatrix::from_fn(n, n, |i, j| hyper.kernel(pts[i].position(), pts[j].position()));
    for i in 0..n {
        k[(i, i)] += hyper.noise_variance;
    }
    let mut jitter = 0.0;
    let mut chol = None;
    for step in 0..=JITTER_STEPS {
        let mut kj = k.clone();
        if jitter > 0.0 {
            for i in 0..n {
                kj[(i, i)] += jitter;
            }
        }
        if let Some(c) = Cholesky::new(kj) {
            chol = Some(c);
            break;
        }
        jitter = hyper.signal_variance * 1e-10 * 10f64.powi(step as i32);
    }
    let chol = chol.ok_or(Error::NotPositiveDefinite)?;
    let y = DVector::from_iterator(n, pts.iter().map(|s| s.depth - prior_mean));
    let alpha = chol.solve(&y);
    Ok(GpModel {
        hyper,
        samples: pts,
        prior_mean,
        jitter,
        chol,
        alpha,
    })
}

/// Average samples into square cells, growing the cell until at most
/// `cap` cells are occupied.
pub fn thin_samples(samples: &[DepthSample], cap: usize) -> Vec<DepthSample> {
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for s in samples {
        lo = Point::new(lo.x.min(s.x), lo.y.min(s.y));
        hi = Point::new(hi.x.max(s.x), hi.y.max(s.y));
    }
    let area = ((hi.x - lo.x) * (hi.y - lo.y)).max(1e-9);
    let mut cell = (area / cap as f64).sqrt().max(1e-6);
    loop {
        let mut bins: BTreeMap<(i64, i64), (f64, f64, f64, usize)> = BTreeMap::new();
        for s in samples {
            let key = (((s.x - lo.x) / cell).floor() as i64, ((s.y - lo.y) / cell).floor() as i64);
            let e = bins.entry(key).or_insert((0.0, 0.0, 0.0, 0));
            e.0 += s.x;
            e.1 += s.y;
            e.2 += s.depth;
            e.3 += 1;
        }
        if bins.len() <= cap {
            return bins
                .into_values()
                .map(|(x, y, d, c)| {
                    let c = c as f64;
                    DepthSample {
                        x: x / c,
                        y: y / c,
                        depth: d / c,
                    }
                })
                .collect();
        }
        cell *= 1.25;
    }
}

impl GpModel {
    /// Predictive mean and standard deviation (meters) at `p`, map-frame
    /// meters. The deviation includes the observation noise.
    pub fn predict(&self, p: Point) -> (f64, f64) {
        let n = self.samples.len();
        let ks = DVector::from_iterator(n, self.samples.iter().map(|s| self.hyper.kernel(p, s.position())));
        let mean = self.prior_mean + ks.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&ks)
            .expect("Cholesky factor has a positive diagonal");
        let var = self.hyper.signal_variance + self.hyper.noise_variance - v.norm_squared();
        (mean, var.max(0.0).sqrt())
    }

    /// `sqrt(σ_f² + σ_n²)`, the deviation far from every sample.
    pub fn prior_sd(&self) -> f64 {
        (self.hyper.signal_variance + self.hyper.noise_variance).sqrt()
    }

    /// Log marginal likelihood of the training depths.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.samples.len();
        let y = DVector::from_iterator(n, self.samples.iter().map(|s| s.depth - self.prior_mean));
        let log_det: f64 = self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * y.dot(&self.alpha) - log_det - 0.5 * n as f64 * std::f64::consts::TAU.ln()
    }
}

/// Pick the length scale with the highest marginal likelihood from
/// `candidates`; other hyperparameters stay fixed.
pub fn tune_length_scale(samples: &[DepthSample], hyper: GpHyper, candidates: &[f64]) -> Result<GpHyper> {
    let mut best: Option<(f64, GpHyper)> = None;
    for &l in candidates {
        let h = GpHyper { length_scale: l, ..hyper };
        let lml = fit_gp(samples, h)?.log_marginal_likelihood();
        if best.is_none_or(|(b, _)| lml > b) {
            best = Some((lml, h));
        }
    }
    best.map(|(_, h)| h)
        .ok_or_else(|| Error::InvalidParameter("no length-scale candidates".into()))
}

/// Depth mean and deviation rasters over the FREE part of a map. Cell
/// `(i, j)` is centered at `(i * cell_size, j * cell_size)` meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathymetryGrid {
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    /// Row-major; `None` over OBSTACLE cells.
    pub mean: Vec<Option<f64>>,
    pub uncertainty: Vec<Option<f64>>,
}

impl BathymetryGrid {
    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(i as f64 * self.cell_size, j as f64 * self.cell_size)
    }

    pub fn mean_at(&self, i: usize, j: usize) -> Option<f64> {
        self.mean[j * self.width + i]
    }

    pub fn uncertainty_at(&self, i: usize, j: usize) -> Option<f64> {
        self.uncertainty[j * self.width + i]
    }

    /// `(min, max)` over present cells of a layer.
    pub fn range(layer: &[Option<f64>]) -> Option<(f64, f64)> {
        layer.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

pub fn predict_grid(model: &GpModel, map: &RiverMap, cell_size: f64) -> Result<BathymetryGrid> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::InvalidParameter(format!("cell_size = {cell_size} must be > 0")));
    }
    let res = map.resolution();
    let width = (((map.width() - 1) as f64 * res) / cell_size).floor() as usize + 1;
    let height = (((map.height() - 1) as f64 * res) / cell_size).floor() as usize + 1;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(height.max(1));
    let rows_per = height.div_ceil(threads);
    let mut mean = vec![None; width * height];
    let mut unc = vec![None; width * height];
    std::thread::scope(|s| {
        for (chunk, (m_rows, u_rows)) in mean
            .chunks_mut(rows_per * width)
            .zip(unc.chunks_mut(rows_per * width))
            .enumerate()
        {
            s.spawn(move || {
                for (k, (m, u)) in m_rows.iter_mut().zip(u_rows.iter_mut()).enumerate() {
                    let (i, j) = (k % width, chunk * rows_per + k / width);
                    let c = Point::new(i as f64 * cell_size, j as f64 * cell_size);
                    if map.is_free_point(c * (1.0 / res)) {
                        let (mu, sd) = model.predict(c);
                        *m = Some(mu);
                        *u = Some(sd);
                    }
                }
            });
        }
    });
    Ok(BathymetryGrid {
        cell_size,
        width,
        height,
        mean,
        uncertainty: unc,
    })
}

/// Synthetic truth for tests and demos: `base + amplitude * sin(x / wavelength)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidDepth {
    pub base: f64,
    pub amplitude: f64,
    /// Meters per radian.
    pub wavelength: f64,
}

impl Default for SinusoidDepth {
    fn default() -> Self {
        SinusoidDepth {
            base: 3.0,
            amplitude: 2.0,
            wavelength: 50.0,
        }
    }
}

impl SinusoidDepth {
    pub fn depth(&self, p: Point) -> f64 {
        self.base + self.amplitude * (p.x / self.wavelength).sin()
    }
}

/// Soundings along a track, one every `ping_interval` seconds: depth at the
/// true position, logged at the GPS position. Pings logged outside the
/// water are dropped.
pub fn samples_from_track(
    track: &ExecutedTrack,
    field: &SinusoidDepth,
    ping_interval: f64,
    map: &RiverMap,
) -> Vec<DepthSample> {
    let res = map.resolution();
    let mut out = Vec::new();
    let mut next = 0.0;
    for s in &track.samples {
        if s.t + 1e-9 < next {
            continue;
        }
        next = s.t + ping_interval;
        let logged = s.gps();
        if map.is_free_point(logged * (1.0 / res)) {
            out.push(DepthSample {
                x: logged.x,
                y: logged.y,
                depth: field.depth(s.position()),
            });
        }
    }
    out
}

/// Depth of the nearest sample; the baseline the GP is compared with.
pub fn nearest_neighbor_depth(samples: &[DepthSample], p: Point) -> Option<f64> {
    samples
        .iter()
        .min_by(|a, b| a.position().dist(p).total_cmp(&b.position().dist(p)))
        .map(|s| s.depth)
}

/// RMSE of `predict` against `truth` at `points`.
pub fn rmse_at(points: &[Point], truth: impl Fn(Point) -> f64, predict: impl Fn(Point) -> f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let s: f64 = points.iter().map(|p| (predict(*p) - truth(*p)).powi(2)).sum();
    (s / points.len() as f64).sqrt()
}

/// CSV soundings `t,x,y,depth` with a header; `t` is ignored.
pub fn parse_samples_csv(text: &str) -> Result<Vec<DepthSample>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (n == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Malformed(format!("samples line {}: {e}", n + 1)))?;
        if f.len() != 4 {
            return Err(Error::Malformed(format!("samples line {}: expected 4 fields", n + 1)));
        }
        out.push(DepthSample {
            x: f[1],
            y: f[2],
            depth: f[3],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyper(l: f64) -> GpHyper {
        GpHyper {
            length_scale: l,
            signal_variance: 1.0,
            noise_variance: 0.01,
        }
    }

    #[test]
    fn constant_field_is_reproduced() {
        let s: Vec<DepthSample> = (0..30)
            .map(|i| DepthSample {
                x: (i % 6) as f64 * 7.0,
                y: (i / 6) as f64 * 5.0,
                depth: 5.0,
            })
            .collect();
        let m = fit_gp(&s, hyper(10.0)).unwrap();
        let (mu, _) = m.predict(Point::new(14.0, 10.0));
        assert!((mu - 5.0).abs() <= 5e-6, "{mu}");
    }

    #[test]
    fn single_sample_reverts_to_prior() {
        let s = [DepthSample { x: 0.0, y: 0.0, depth: 4.0 }];
        let m = fit_gp(&s, hyper(5.0)).unwrap();
        assert!((m.predict(Point::new(0.0, 0.0)).0 - 4.0).abs() < 1e-12);
        let far = m.predict(Point::new(500.0, 0.0)).1;
        assert!((far / m.prior_sd() - 1.0).abs() < 0.01);
    }

    #[test]
    fn thinning_respects_cap() {
        let s: Vec<DepthSample> = (0..2000)
            .map(|i| DepthSample {
                x: (i % 50) as f64,
                y: (i / 50) as f64,
                depth: 1.0 + (i % 7) as f64,
            })
            .collect();
        let t = thin_samples(&s, 300);
        assert!(t.len() <= 300 && t.len() > 50, "{}", t.len());
        let m = fit_gp_capped(&s, hyper(5.0), 300).unwrap();
        assert_eq!(m.samples.len(), t.len());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_gp(&[], hyper(1.0)).is_err());
        assert!(fit_gp(&[DepthSample { x: 0.0, y: 0.0, depth: 0.0 }], hyper(1.0)).is_err());
        assert!(fit_gp(&[DepthSample { x: 0.0, y: 0.0, depth: 1.0 }], hyper(-1.0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = parse_samples_csv("t,x,y,depth\n0,1.5,2,3.25\n1,4,5,6\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], DepthSample { x: 1.5, y: 2.0, depth: 3.25 });
        assert!(parse_samples_csv("0,1,2\n").is_err());
    }
}
