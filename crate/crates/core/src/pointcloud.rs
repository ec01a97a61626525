//! Point clouds: CSV ingestion, synthetic generators, subsampling, and
//! pairwise distance matrices.
//!
//! All generators are pure functions of their arguments; randomness comes
//! from a ChaCha8 stream seeded with the caller's seed, so identical inputs
//! reproduce identical clouds on every platform.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::util::atomic_write;

/// A finite set of points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    label: Option<String>,
}

impl PointCloud {
    /// Builds a cloud from row vectors, checking that every point has the
    /// same dimension and finite coordinates.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::argument("point cloud must contain at least one point"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::argument("points must have at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::argument(format!(
                    "point {} has {} coordinates, expected {}",
                    i,
                    row.len(),
                    dim
                )));
            }
            for &c in row {
                if !c.is_finite() {
                    return Err(Error::argument(format!("point {} has non-finite coordinate", i)));
                }
                coords.push(c);
            }
        }
        Ok(PointCloud { coords, dim, label: None })
    }

    pub fn from_flat(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::argument("flat coordinate buffer length must be a positive multiple of dim"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::argument("non-finite coordinate"));
        }
        Ok(PointCloud { coords, dim, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Symmetric matrix of pairwise distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Largest entry; zero for a single point.
    pub fn max_distance(&self) -> f64 {
        self.entries.iter().cloned().fold(0.0, f64::max)
    }

    /// Full symmetric matrix, one row per line.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(i, j));
            }
            out.push('\n');
        }
        atomic_write(path, out.as_bytes())
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean distances between all pairs of points.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(cloud.point(i), cloud.point(j));
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { n, entries }
}

/// Reads a point cloud from CSV: one point per line, coordinates
/// comma-separated. `header` skips the first line. Blank lines are ignored.
pub fn load_point_cloud(path: &Path, header: bool) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (idx, line) in text.lines().enumerate() {
        if header && idx == 0 {
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("not a number: {:?}", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: "non-finite coordinate".into(),
                });
            }
            row.push(v);
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: format!("expected {} coordinates, found {}", d, row.len()),
                });
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    PointCloud::from_rows(rows)
}

/// Writes a cloud in the same CSV format `load_point_cloud` reads.
pub fn save_point_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in cloud.points() {
        for (j, c) in p.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", c);
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

fn noise_dist(noise_sd: f64) -> Result<Normal<f64>> {
    if noise_sd < 0.0 || !noise_sd.is_finite() {
        return Err(Error::argument("noise_sd must be a finite value >= 0"));
    }
    Normal::new(0.0, noise_sd).map_err(|e| Error::argument(format!("noise model: {}", e)))
}

fn add_outliers(rows: &mut Vec<Vec<f64>>, ideal: &[Vec<f64>], outliers: usize, rng: &mut ChaCha8Rng) {
    if outliers == 0 {
        return;
    }
    let dim = ideal[0].len();
    // Uniform in the bounding box of the ideal (noise-free) sample.
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in ideal {
        for (c, (l, h)) in p.iter().zip(lo.iter_mut().zip(hi.iter_mut())) {
            *l = l.min(*c);
            *h = h.max(*c);
        }
    }
    for _ in 0..outliers {
        let mut p = Vec::with_capacity(dim);
        for c in 0..dim {
            if hi[c] > lo[c] {
                p.push(rng.sample(Uniform::new_inclusive(lo[c], hi[c])));
            } else {
                p.push(lo[c]);
            }
        }
        rows.push(p);
    }
}

/// `n` points at equally spaced angles on a circle of the given radius,
/// perturbed by isotropic Gaussian noise, plus `outliers` uniform points in
/// the bounding box of the noise-free circle.
pub fn sample_circle(n: usize, radius: f64, noise_sd: f64, outliers: usize, seed: u64) -> Result<PointCloud> {
    if n < 1 {
        return Err(Error::argument("n must be >= 1"));
    }
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::argument("radius must be > 0"));
    }
    let noise = noise_dist(noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ideal = Vec::with_capacity(n);
    for i in 0..n {
        let theta = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
        ideal.push(vec![radius * theta.cos(), radius * theta.sin()]);
    }
    let mut rows: Vec<Vec<f64>> = ideal
        .iter()
        .map(|p| p.iter().map(|c| c + noise.sample(&mut rng)).collect())
        .collect();
    add_outliers(&mut rows, &ideal, outliers, &mut rng);
    PointCloud::from_rows(rows)
}

/// Ideal (noise-free) sample positions for a wedge of `counts.len()` circles
/// tangent at the origin. For one circle this is the plain circle; for two,
/// the circles sit on opposite sides of the tangent line in the plane; for
/// three or more, each circle lives in its own plane through the common
/// tangent line, which requires a third coordinate.
fn wedge_ideal(counts: &[usize], radius: f64) -> Vec<Vec<f64>> {
    let k = counts.len();
    if k == 1 {
        return (0..counts[0])
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * (i as f64) / (counts[0] as f64);
                vec![radius * theta.cos(), radius * theta.sin()]
            })
            .collect();
    }
    let dim = if k <= 2 { 2 } else { 3 };
    let mut rows = Vec::with_capacity(counts.iter().sum());
    for (c, &n_c) in counts.iter().enumerate() {
        let phi = 2.0 * std::f64::consts::PI * (c as f64) / (k as f64);
        // Unit normal to the tangent line (the x-axis) for this circle's plane.
        let normal = if dim == 2 {
            vec![0.0, phi.cos()]
        } else {
            vec![0.0, phi.cos(), phi.sin()]
        };
        for j in 0..n_c {
            // Half-step offset keeps sample points off the shared tangency point.
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / (n_c as f64);
            let mut p = vec![0.0; dim];
            p[0] = radius * theta.sin();
            for (d, nrm) in normal.iter().enumerate() {
                p[d] += radius * (1.0 - theta.cos()) * nrm;
            }
            rows.push(p);
        }
    }
    rows
}

/// Wedge of circles with an explicit per-circle sample count.
pub fn sample_wedge_with_counts(
    counts: &[usize],
    radius: f64,
    noise_sd: f64,
    outliers: usize,
    seed: u64,
) -> Result<PointCloud> {
    if counts.is_empty() {
        return Err(Error::argument("wedge needs at least one circle"));
    }
    if counts.len() >= 2 && counts.iter().any(|&c| c < 3) {
        return Err(Error::argument("n_per_circle must be >= 3"));
    }
    if counts.len() == 1 && counts[0] < 1 {
        return Err(Error::argument("n must be >= 1"));
    }
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::argument("radius must be > 0"));
    }
    let noise = noise_dist(noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ideal = wedge_ideal(counts, radius);
    let mut rows: Vec<Vec<f64>> = ideal
        .iter()
        .map(|p| p.iter().map(|c| c + noise.sample(&mut rng)).collect())
        .collect();
    add_outliers(&mut rows, &ideal, outliers, &mut rng);
    PointCloud::from_rows(rows)
}

/// `k` circles tangent at a common point, `n_per_circle` points each.
pub fn sample_wedge_of_circles(
    k: usize,
    n_per_circle: usize,
    radius: f64,
    noise_sd: f64,
    outliers: usize,
    seed: u64,
) -> Result<PointCloud> {
    if k < 1 {
        return Err(Error::argument("k must be >= 1"));
    }
    sample_wedge_with_counts(&vec![n_per_circle; k], radius, noise_sd, outliers, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsampleStrategy {
    Random,
    MaxMin,
}

/// Picks `m` of the cloud's points. `Random` keeps input order; `MaxMin`
/// starts from a seed-selected point and greedily adds the point farthest
/// from everything chosen so far (ties broken by lowest index), returning
/// points in selection order.
pub fn subsample(cloud: &PointCloud, m: usize, strategy: SubsampleStrategy, seed: u64) -> Result<PointCloud> {
    let n = cloud.len();
    if m < 1 || m > n {
        return Err(Error::argument(format!("subsample size {} out of range 1..={}", m, n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<usize> = match strategy {
        SubsampleStrategy::Random => {
            let mut idx = index::sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            idx
        }
        SubsampleStrategy::MaxMin => {
            let start = rng.gen_range(0..n);
            let mut chosen = vec![start];
            let mut min_dist: Vec<f64> = (0..n)
                .map(|i| euclidean(cloud.point(i), cloud.point(start)))
                .collect();
            while chosen.len() < m {
                let mut best = 0;
                let mut best_d = f64::NEG_INFINITY;
                for (i, &d) in min_dist.iter().enumerate() {
                    if d > best_d {
                        best = i;
                        best_d = d;
                    }
                }
                chosen.push(best);
                for i in 0..n {
                    let d = euclidean(cloud.point(i), cloud.point(best));
                    if d < min_dist[i] {
                        min_dist[i] = d;
                    }
                }
            }
            chosen
        }
    };
    let rows: Vec<Vec<f64>> = chosen.iter().map(|&i| cloud.point(i).to_vec()).collect();
    let mut out = PointCloud::from_rows(rows)?;
    if let Some(l) = cloud.label() {
        out = out.with_label(l);
    }
    Ok(out)
}
