//! Simplicial complexes: Vietoris-Rips filtrations built from distance
//! matrices, plus a small brute-force Čech complex used as a geometric
//! cross-check in tests.
//!
//! Filtration values are on the DIAMETER scale: the value of a simplex is
//! the maximum pairwise distance among its vertices. The ball-radius scale
//! used by the Čech construction relates by value = 2·radius.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pointcloud::{DistanceMatrix, PointCloud};
use crate::util::atomic_write;

/// Relative tolerance for radius comparisons in the Čech oracle.
const REL_TOL: f64 = 1e-9;

fn leq_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(1.0)
}

/// An abstract simplex: a strictly increasing list of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<usize>,
}

impl Simplex {
    /// Sorts the vertices; duplicates or an empty list are rejected.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::argument("simplex needs at least one vertex"));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::argument("simplex has repeated vertices"));
        }
        Ok(Simplex { vertices })
    }

    pub fn vertex(v: usize) -> Self {
        Simplex { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-1 faces (empty for a vertex), each obtained by deleting
    /// one vertex; emitted in order of the deleted position.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.dim() == 0 {
            return Vec::new();
        }
        (0..self.vertices.len())
            .map(|skip| {
                let vertices = self
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                Simplex { vertices }
            })
            .collect()
    }
}

/// An ordered simplicial filtration: values nondecreasing, faces before
/// cofaces, no duplicates. Construction sorts by (value, dimension,
/// lexicographic vertices) and then validates.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    cells: Vec<(f64, Simplex)>,
}

impl Filtration {
    pub fn new(mut cells: Vec<(f64, Simplex)>) -> Result<Self> {
        for (v, s) in &cells {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::argument(format!(
                    "filtration value {} for simplex {:?} must be finite and >= 0",
                    v,
                    s.vertices()
                )));
            }
        }
        cells.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| a.1.dim().cmp(&b.1.dim()))
                .then_with(|| a.1.vertices().cmp(b.1.vertices()))
        });
        let mut index: HashMap<&Simplex, usize> = HashMap::with_capacity(cells.len());
        for (i, (_, s)) in cells.iter().enumerate() {
            if index.insert(s, i).is_some() {
                return Err(Error::argument(format!(
                    "simplex {:?} appears more than once",
                    s.vertices()
                )));
            }
        }
        for (i, (_, s)) in cells.iter().enumerate() {
            for f in s.facets() {
                match index.get(&f) {
                    Some(&j) if j < i => {}
                    Some(_) => {
                        return Err(Error::InconsistentFiltration(format!(
                            "face {:?} of {:?} has a larger filtration value",
                            f.vertices(),
                            s.vertices()
                        )));
                    }
                    None => {
                        return Err(Error::InconsistentFiltration(format!(
                            "face {:?} of {:?} is missing",
                            f.vertices(),
                            s.vertices()
                        )));
                    }
                }
            }
        }
        Ok(Filtration { cells })
    }

    pub fn empty() -> Self {
        Filtration { cells: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.cells[i].0
    }

    pub fn simplex(&self, i: usize) -> &Simplex {
        &self.cells[i].1
    }

    pub fn cells(&self) -> &[(f64, Simplex)] {
        &self.cells
    }

    /// Largest simplex dimension present, if any.
    pub fn max_dim(&self) -> Option<usize> {
        self.cells.iter().map(|(_, s)| s.dim()).max()
    }

    /// Debug export: one line `value,dim,v0 v1 … vk` per simplex, in
    /// filtration order.
    pub fn write_debug_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (v, s) in &self.cells {
            let verts: Vec<String> = s.vertices().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{},{},{}", v, s.dim(), verts.join(" "));
        }
        atomic_write(path, out.as_bytes())
    }
}

/// All simplices of dimension ≤ `max_dim` whose diameter is ≤ `max_value`,
/// valued by diameter (vertices at 0), in filtration order.
pub fn vietoris_rips(dm: &DistanceMatrix, max_dim: usize, max_value: f64) -> Result<Filtration> {
    if !max_value.is_finite() || max_value < 0.0 {
        return Err(Error::argument("max_value must be finite and >= 0"));
    }
    let n = dm.n();
    // Forward neighbor lists: u > v with d(u, v) within threshold.
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|v| ((v + 1)..n).filter(|&u| dm.get(v, u) <= max_value).collect())
        .collect();
    let mut cells: Vec<(f64, Simplex)> = Vec::new();
    let mut stack_simplex: Vec<usize> = Vec::new();

    fn expand(
        dm: &DistanceMatrix,
        neighbors: &[Vec<usize>],
        simplex: &mut Vec<usize>,
        value: f64,
        candidates: &[usize],
        max_dim: usize,
        cells: &mut Vec<(f64, Simplex)>,
    ) {
        for (ci, &u) in candidates.iter().enumerate() {
            let ext_value = simplex
                .iter()
                .map(|&w| dm.get(w, u))
                .fold(value, f64::max);
            simplex.push(u);
            cells.push((
                ext_value,
                Simplex { vertices: simplex.clone() },
            ));
            if simplex.len() <= max_dim {
                // Shared forward neighbors of the extended simplex.
                let rest: Vec<usize> = candidates[(ci + 1)..]
                    .iter()
                    .copied()
                    .filter(|w| neighbors[u].binary_search(w).is_ok())
                    .collect();
                if !rest.is_empty() {
                    expand(dm, neighbors, simplex, ext_value, &rest, max_dim, cells);
                }
            }
            simplex.pop();
        }
    }

    for v in 0..n {
        cells.push((0.0, Simplex::vertex(v)));
        if max_dim >= 1 {
            stack_simplex.clear();
            stack_simplex.push(v);
            let cands = neighbors[v].clone();
            expand(dm, &neighbors, &mut stack_simplex, 0.0, &cands, max_dim, &mut cells);
        }
    }
    Filtration::new(cells)
}

#[derive(Debug, Clone)]
struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        let d = dist(&self.center, p);
        leq_tol(d, self.radius)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Circumball of affinely independent points: the unique sphere through all
/// of them with center in their affine hull. `None` when degenerate.
fn circumball(pts: &[&[f64]]) -> Option<Ball> {
    let p0 = pts[0];
    let dim = p0.len();
    let k = pts.len() - 1;
    if k == 0 {
        return Some(Ball { center: p0.to_vec(), radius: 0.0 });
    }
    // Solve 2·G·x = b with G the Gram matrix of v_i = p_i − p0 and
    // b_i = |v_i|²; the center is p0 + Σ x_i v_i.
    let vs: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * vs[i].iter().zip(&vs[j]).map(|(x, y)| x * y).sum::<f64>();
        }
        a[i][k] = vs[i].iter().map(|x| x * x).sum::<f64>();
    }
    // Gaussian elimination with partial pivoting on the k×k system.
    let scale = a
        .iter()
        .flat_map(|row| row[..k].iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    for col in 0..k {
        let piv = (col..k).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale.max(1.0) {
            return None;
        }
        a.swap(col, piv);
        for r in (col + 1)..k {
            let f = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = a[row][k];
        for c in (row + 1)..k {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    let mut center = p0.to_vec();
    for (xi, v) in x.iter().zip(&vs) {
        for d in 0..dim {
            center[d] += xi * v[d];
        }
    }
    let radius = dist(&center, p0);
    Some(Ball { center, radius })
}

/// Smallest ball enclosing `boundary` computed by brute force over subsets
/// (at most dim+1 points, so at most 15 subsets). Robust to collinear or
/// coincident boundary sets.
fn min_boundary_ball(boundary: &[&[f64]]) -> Option<Ball> {
    if boundary.is_empty() {
        return None;
    }
    let m = boundary.len();
    let mut best: Option<Ball> = None;
    for mask in 1u32..(1 << m) {
        let subset: Vec<&[f64]> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| boundary[i]).collect();
        if let Some(ball) = circumball(&subset) {
            if boundary.iter().all(|p| ball.contains(p))
                && best.as_ref().map_or(true, |b| ball.radius < b.radius)
            {
                best = Some(ball);
            }
        }
    }
    best
}

fn welzl<'a>(pts: &[&'a [f64]], boundary: &mut Vec<&'a [f64]>, dim: usize) -> Option<Ball> {
    if pts.is_empty() || boundary.len() == dim + 1 {
        return min_boundary_ball(boundary);
    }
    let p = pts[0];
    let ball = welzl(&pts[1..], boundary, dim);
    if let Some(ref b) = ball {
        if b.contains(p) {
            return ball;
        }
    }
    boundary.push(p);
    let ball = welzl(&pts[1..], boundary, dim);
    boundary.pop();
    ball
}

/// Center and radius of the smallest ball containing all points.
/// Supports ambient dimension ≤ 3 (geometric-oracle scope).
pub fn smallest_enclosing_ball(points: &[&[f64]]) -> Result<(Vec<f64>, f64)> {
    if points.is_empty() {
        return Err(Error::argument("enclosing ball of an empty point set"));
    }
    let dim = points[0].len();
    if dim > 3 {
        return Err(Error::Scope(format!("enclosing ball supports dimension <= 3, got {}", dim)));
    }
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::argument("points of mixed dimension"));
    }
    let mut boundary = Vec::with_capacity(dim + 1);
    let ball = welzl(points, &mut boundary, dim)
        .ok_or_else(|| Error::argument("enclosing ball computation failed"))?;
    Ok((ball.center, ball.radius))
}

/// Whether the closed `eps`-balls around the simplex's vertices share a
/// common point, i.e. the smallest enclosing ball has radius ≤ eps.
pub fn cech_membership(cloud: &PointCloud, simplex: &Simplex, eps: f64) -> Result<bool> {
    if cloud.dim() > 3 {
        return Err(Error::Scope(format!(
            "Čech oracle supports dimension <= 3, got {}",
            cloud.dim()
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::argument("eps must be finite and >= 0"));
    }
    if simplex.vertices().iter().any(|&v| v >= cloud.len()) {
        return Err(Error::argument("simplex vertex out of range"));
    }
    let pts: Vec<&[f64]> = simplex.vertices().iter().map(|&v| cloud.point(v)).collect();
    let (_, r) = smallest_enclosing_ball(&pts)?;
    Ok(leq_tol(r, eps))
}

/// All simplices of dimension ≤ `max_dim` whose vertex balls of radius
/// `eps` intersect, sorted by (dimension, vertices). Brute-force oracle:
/// n ≤ 32 and ambient dimension ≤ 3.
pub fn cech_complex(cloud: &PointCloud, eps: f64, max_dim: usize) -> Result<Vec<Simplex>> {
    let n = cloud.len();
    if n > 32 {
        return Err(Error::Scope(format!("Čech oracle supports n <= 32, got {}", n)));
    }
    if cloud.dim() > 3 {
        return Err(Error::Scope(format!(
            "Čech oracle supports dimension <= 3, got {}",
            cloud.dim()
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::argument("eps must be finite and >= 0"));
    }
    let mut result: Vec<Simplex> = (0..n).map(Simplex::vertex).collect();
    let mut current: Vec<Simplex> = result.clone();
    for _ in 1..=max_dim {
        let prev: HashSet<&Simplex> = current.iter().collect();
        let mut next: Vec<Simplex> = Vec::new();
        for s in &current {
            let last = *s.vertices().last().unwrap();
            for u in (last + 1)..n {
                let mut verts = s.vertices().to_vec();
                verts.push(u);
                let cand = Simplex { vertices: verts };
                // The nerve is downward closed, so all facets must already
                // be present; this prunes before the ball test.
                if !cand.facets().iter().all(|f| prev.contains(f)) {
                    continue;
                }
                if cech_membership(cloud, &cand, eps)? {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        result.extend(next.iter().cloned());
        current = next;
    }
    result.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.vertices().cmp(b.vertices())));
    Ok(result)
}
