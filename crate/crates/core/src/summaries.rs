//! Diagram summaries: death vectors and persistence landscapes, their grid
//! vectorization, and group averaging.
//!
//! Landscapes are computed exactly as piecewise-linear functions by peeling
//! upper envelopes off the multiset of tent functions; evaluating on a grid
//! is a separate presentation step.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;
use crate::util::atomic_write;

/// Finite degree-0 death values, sorted descending. Entries are ≥ 0;
/// zeros appear only through padding.
#[derive(Debug, Clone, PartialEq)]
pub struct DeathVector {
    deaths: Vec<f64>,
}

impl DeathVector {
    pub fn new(deaths: Vec<f64>) -> Result<Self> {
        if deaths.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::argument("death vector entries must be finite and >= 0"));
        }
        if deaths.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::argument("death vector must be nonincreasing"));
        }
        Ok(DeathVector { deaths })
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    pub fn len(&self) -> usize {
        self.deaths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deaths.is_empty()
    }

    pub fn to_feature_vector(&self) -> FeatureVector {
        FeatureVector {
            values: self.deaths.clone(),
            kind: FeatureKind::Death,
            grid: None,
        }
    }
}

/// Descending order statistic of the finite degree-0 deaths; the essential
/// class is excluded. Errors on a nonzero birth, which signals a diagram
/// that did not come from a Vietoris-Rips filtration.
pub fn death_vector(diagram: &PersistenceDiagram) -> Result<DeathVector> {
    if diagram.degree != 0 {
        return Err(Error::argument(format!(
            "death vector needs a degree-0 diagram, got degree {}",
            diagram.degree
        )));
    }
    if let Some(&(b, _)) = diagram.points.iter().find(|&&(b, _)| b != 0.0) {
        return Err(Error::argument(format!(
            "degree-0 diagram has nonzero birth {}; not a Vietoris-Rips diagram",
            b
        )));
    }
    let mut deaths: Vec<f64> = diagram.points.iter().map(|&(_, d)| d).collect();
    deaths.sort_by(|a, b| b.total_cmp(a));
    DeathVector::new(deaths)
}

/// Drops the `drop_first` largest entries, then pads with zeros or cuts to
/// exactly `keep` entries so vectors align across clouds.
pub fn truncate_death_vector(dv: &DeathVector, drop_first: usize, keep: usize) -> DeathVector {
    let mut deaths: Vec<f64> = dv.deaths.iter().skip(drop_first).copied().collect();
    deaths.truncate(keep);
    deaths.resize(keep, 0.0);
    DeathVector { deaths }
}

/// The tent function of a diagram point: rises from (b, 0) to the midpoint,
/// falls back to (d, 0), zero outside [b, d].
pub fn triangle_function(b: f64, d: f64, t: f64) -> Result<f64> {
    if b >= d {
        return Err(Error::argument(format!("tent needs b < d, got b={} d={}", b, d)));
    }
    let mid = (b + d) / 2.0;
    Ok(if t < b || t >= d {
        0.0
    } else if t < mid {
        t - b
    } else {
        d - t
    })
}

/// A decreasing sequence of piecewise-linear functions λ_1 ≥ λ_2 ≥ …, each
/// stored as strictly t-increasing critical points with value 0 outside
/// their span.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceLandscape {
    functions: Vec<Vec<(f64, f64)>>,
}

fn eval_piecewise(level: &[(f64, f64)], t: f64) -> f64 {
    if level.is_empty() || t < level[0].0 || t > level[level.len() - 1].0 {
        return 0.0;
    }
    let i = level.partition_point(|&(x, _)| x <= t);
    if i == 0 {
        return 0.0;
    }
    if i == level.len() {
        return level[i - 1].1;
    }
    let (x0, y0) = level[i - 1];
    let (x1, y1) = level[i];
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}

impl PersistenceLandscape {
    pub fn from_functions(functions: Vec<Vec<(f64, f64)>>) -> Self {
        PersistenceLandscape { functions }
    }

    /// Number of functions that are not identically zero.
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Critical points of each λ_k, outermost index k−1.
    pub fn functions(&self) -> &[Vec<(f64, f64)>] {
        &self.functions
    }

    /// λ_k(t) with 1-based k; zero beyond the stored functions.
    pub fn evaluate(&self, k: usize, t: f64) -> f64 {
        if k == 0 || k > self.functions.len() {
            return 0.0;
        }
        eval_piecewise(&self.functions[k - 1], t)
    }
}

/// Order for the peeling queue: birth ascending, death descending.
fn tent_order(a: &(f64, f64), b: &(f64, f64)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1))
}

/// Exact landscape of a diagram's finite points: λ_k(t) is the k-th largest
/// tent value at t. Each pass peels the upper envelope off the remaining
/// tents; the overlap left under a crossing re-enters the queue for lower
/// levels, and tents nested inside the current one are skipped untouched.
pub fn landscape(diagram: &PersistenceDiagram) -> PersistenceLandscape {
    let mut queue: Vec<(f64, f64)> = diagram
        .points
        .iter()
        .copied()
        .filter(|&(b, d)| d > b)
        .collect();
    queue.sort_by(tent_order);
    let mut functions = Vec::new();
    while !queue.is_empty() {
        let (b0, d0) = queue.remove(0);
        let (mut b, mut d) = (b0, d0);
        let mut level = vec![(b, 0.0), ((b + d) / 2.0, (d - b) / 2.0)];
        let mut p = 0;
        loop {
            let Some(q) = (p..queue.len()).find(|&q| queue[q].1 > d) else {
                level.push((d, 0.0));
                break;
            };
            let (b2, d2) = queue.remove(q);
            p = q;
            if b2 > d {
                level.push((d, 0.0));
                level.push((b2, 0.0));
            } else if b2 == d {
                level.push((d, 0.0));
            } else {
                // Tents cross: the envelope switches at the intersection,
                // and the part below it is the tent (b2, d) for later levels.
                level.push(((b2 + d) / 2.0, (d - b2) / 2.0));
                let leftover = (b2, d);
                let pos = (p..queue.len())
                    .find(|&r| tent_order(&leftover, &queue[r]) == std::cmp::Ordering::Less)
                    .unwrap_or(queue.len());
                queue.insert(pos, leftover);
            }
            level.push(((b2 + d2) / 2.0, (d2 - b2) / 2.0));
            b = b2;
            d = d2;
        }
        let _ = b;
        functions.push(level);
    }
    PersistenceLandscape { functions }
}

/// Removes λ_1…λ_{drop_first}; the remainder is still pointwise decreasing.
pub fn drop_landscape_functions(
    ls: &PersistenceLandscape,
    drop_first: usize,
) -> PersistenceLandscape {
    PersistenceLandscape {
        functions: ls.functions.iter().skip(drop_first).cloned().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Death,
    Landscape,
    Concatenated,
}

/// Evaluation grid: t = a, a+delta, …, a+m·delta for functions λ_1…λ_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: usize,
    pub a: f64,
    pub delta: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn t(&self, g: usize) -> f64 {
        self.a + (g as f64) * self.delta
    }

    pub fn len(&self) -> usize {
        self.k * (self.m + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A flat real vector fed to the statistics and classification stages.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: FeatureKind,
    pub grid: Option<GridSpec>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates λ_1…λ_K on the grid and concatenates k-major: the result has
/// length exactly K·(m+1) no matter how many functions the landscape has.
pub fn vectorize_landscape(
    ls: &PersistenceLandscape,
    k: usize,
    a: f64,
    delta: f64,
    m: usize,
) -> Result<FeatureVector> {
    if k < 1 {
        return Err(Error::argument("vectorization needs K >= 1"));
    }
    if !(delta > 0.0) || !delta.is_finite() || !a.is_finite() {
        return Err(Error::argument("vectorization needs finite a and delta > 0"));
    }
    let grid = GridSpec { k, a, delta, m };
    let mut values = Vec::with_capacity(grid.len());
    for level in 1..=k {
        for g in 0..=m {
            values.push(ls.evaluate(level, grid.t(g)));
        }
    }
    Ok(FeatureVector { values, kind: FeatureKind::Landscape, grid: Some(grid) })
}

/// Coordinatewise arithmetic mean; metadata is taken from the first vector.
pub fn mean_vectors(group: &[FeatureVector]) -> Result<FeatureVector> {
    let first = group
        .first()
        .ok_or_else(|| Error::argument("mean of an empty group"))?;
    let len = first.len();
    if group.iter().any(|v| v.len() != len) {
        return Err(Error::argument("mean over vectors of different lengths"));
    }
    let mut values = vec![0.0; len];
    for v in group {
        for (acc, x) in values.iter_mut().zip(&v.values) {
            *acc += x;
        }
    }
    let n = group.len() as f64;
    for acc in &mut values {
        *acc /= n;
    }
    Ok(FeatureVector { values, kind: first.kind, grid: first.grid })
}

/// Coordinatewise a − b.
pub fn diff_vectors(a: &FeatureVector, b: &FeatureVector) -> Result<FeatureVector> {
    if a.len() != b.len() {
        return Err(Error::argument(format!(
            "difference of vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    Ok(FeatureVector { values, kind: a.kind, grid: a.grid })
}

/// Landscape critical points as JSON: an array of functions, each an array
/// of [t, value] pairs.
pub fn write_landscape_json(ls: &PersistenceLandscape, path: &Path) -> Result<()> {
    let data: Vec<Vec<[f64; 2]>> = ls
        .functions
        .iter()
        .map(|f| f.iter().map(|&(t, v)| [t, v]).collect())
        .collect();
    let mut text = serde_json::to_string(&data)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_landscape_json(path: &Path) -> Result<PersistenceLandscape> {
    let text = std::fs::read_to_string(path)?;
    let data: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text)?;
    Ok(PersistenceLandscape {
        functions: data
            .into_iter()
            .map(|f| f.into_iter().map(|[t, v]| (t, v)).collect())
            .collect(),
    })
}

/// Vectorized landscape as `k,t,value` rows in k-major grid order.
pub fn write_landscape_grid_csv(fv: &FeatureVector, path: &Path) -> Result<()> {
    let grid = fv
        .grid
        .ok_or_else(|| Error::argument("grid CSV needs a vector with grid metadata"))?;
    if fv.len() != grid.len() {
        return Err(Error::argument("vector length does not match its grid"));
    }
    let mut out = String::new();
    for level in 0..grid.k {
        for g in 0..=grid.m {
            let v = fv.values[level * (grid.m + 1) + g];
            let _ = writeln!(out, "{},{},{}", level + 1, grid.t(g), v);
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a `k,t,value` grid CSV back into a feature vector, reconstructing
/// the grid from the row structure (a and delta are informational).
pub fn read_landscape_grid_csv(path: &Path) -> Result<FeatureVector> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, found {}", fields.len())));
        }
        let k: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad k: {:?}", fields[0])))?;
        let t: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad t: {:?}", fields[1])))?;
        let v: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad value: {:?}", fields[2])))?;
        rows.push((k, t, v));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let kmax = rows.iter().map(|r| r.0).max().unwrap();
    if kmax == 0 || rows.len() % kmax != 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "rows do not form equal per-k blocks".into(),
        });
    }
    let block = rows.len() / kmax;
    let mut values = Vec::with_capacity(rows.len());
    for (i, &(k, t, v)) in rows.iter().enumerate() {
        let expect_k = i / block + 1;
        if k != expect_k {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected k {} in k-major order, found {}", expect_k, k),
            });
        }
        if rows[i % block].1 != t {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "t grid differs between k blocks".into(),
            });
        }
        values.push(v);
    }
    let a = rows[0].1;
    let delta = if block > 1 { rows[1].1 - rows[0].1 } else { 1.0 };
    Ok(FeatureVector {
        values,
        kind: FeatureKind::Landscape,
        grid: Some(GridSpec { k: kmax, a, delta, m: block - 1 }),
    })
}

/// Death vector as one value per line, descending.
pub fn write_death_csv(dv: &DeathVector, path: &Path) -> Result<()> {
    write_values_csv(dv.deaths(), path)
}

/// Plain one-value-per-line output (used for death vectors and their
/// group means/differences).
pub fn write_values_csv(values: &[f64], path: &Path) -> Result<()> {
    let mut out = String::new();
    for v in values {
        let _ = writeln!(out, "{}", v);
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a one-value-per-line death vector; an empty file is the empty
/// vector (a one-point cloud has no finite deaths).
pub fn read_death_csv(path: &Path) -> Result<DeathVector> {
    let text = std::fs::read_to_string(path)?;
    let mut deaths = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: format!("not a number: {:?}", line),
        })?;
        deaths.push(v);
    }
    DeathVector::new(deaths).map_err(|e| match e {
        Error::Argument(msg) => Error::Parse { path: path.to_path_buf(), line: 1, msg },
        other => other,
    })
}

/// Diagram scatter plot data: `birth,death` per finite point.
pub fn write_diagram_scatter_csv(diagram: &PersistenceDiagram, path: &Path) -> Result<()> {
    let mut out = String::new();
    for &(b, d) in &diagram.points {
        let _ = writeln!(out, "{},{}", b, d);
    }
    atomic_write(path, out.as_bytes())
}

/// Landscape plot data: critical points as `k,t,value` polylines.
pub fn write_landscape_polyline_csv(ls: &PersistenceLandscape, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (i, f) in ls.functions.iter().enumerate() {
        for &(t, v) in f {
            let _ = writeln!(out, "{},{},{}", i + 1, t, v);
        }
    }
    atomic_write(path, out.as_bytes())
}
