//! Persistent homology over Z/2 by boundary-matrix reduction.
//!
//! The reduction processes dimensions from the top down and uses the
//! clearing optimization: when a column of dimension d acquires pivot row
//! i, simplex i (dimension d−1) is a birth simplex whose own column would
//! reduce to zero, so it is skipped entirely in the next pass.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::complex::Filtration;
use crate::error::{Error, Result};
use crate::util::atomic_write;

/// Sparse Z/2 boundary operator of a filtration: column j holds the sorted
/// positions of the codimension-1 faces of simplex j.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl BoundaryMatrix {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }
}

pub fn boundary_matrix(filtration: &Filtration) -> Result<BoundaryMatrix> {
    let n = filtration.len();
    let mut index = HashMap::with_capacity(n);
    for i in 0..n {
        index.insert(filtration.simplex(i), i);
    }
    let mut columns = Vec::with_capacity(n);
    let mut dims = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let s = filtration.simplex(j);
        let mut col = Vec::with_capacity(s.vertices().len());
        for f in s.facets() {
            match index.get(&f) {
                Some(&i) if i < j => col.push(i),
                _ => {
                    return Err(Error::InconsistentFiltration(format!(
                        "face {:?} of simplex {} not found earlier in the filtration",
                        f.vertices(),
                        j
                    )));
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
        dims.push(s.dim());
        values.push(filtration.value(j));
    }
    Ok(BoundaryMatrix { columns, dims, values })
}

/// Symmetric difference of two sorted index sets (addition over Z/2).
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Outcome of the reduction: birth/death simplex pairs plus simplices whose
/// classes never die.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// (birth simplex index, death simplex index), sorted by birth index.
    pub pairs: Vec<(usize, usize)>,
    /// Unpaired simplex indices, ascending.
    pub essential: Vec<usize>,
}

pub fn reduce(matrix: &BoundaryMatrix) -> Reduction {
    let n = matrix.len();
    // Row index -> column currently holding that row as its pivot. Row
    // dimensions are unique, so one global array serves every pass.
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pairs = Vec::new();
    let mut essential = Vec::new();
    let max_dim = (0..n).map(|j| matrix.dim(j)).max().unwrap_or(0);

    for d in (0..=max_dim).rev() {
        for j in 0..n {
            if matrix.dim(j) != d || cleared[j] {
                continue;
            }
            let mut col = matrix.column(j).to_vec();
            while let Some(&low) = col.last() {
                match pivot_of_row[low] {
                    Some(k) => col = add_columns(&col, &reduced[k]),
                    None => break,
                }
            }
            match col.last() {
                Some(&low) => {
                    pivot_of_row[low] = Some(j);
                    cleared[low] = true;
                    pairs.push((low, j));
                    reduced[j] = col;
                }
                None => essential.push(j),
            }
        }
    }
    pairs.sort_unstable();
    essential.sort_unstable();
    Reduction { pairs, essential }
}

/// Per-degree persistence diagram: finite (birth, death) points with
/// death > birth strictly, plus birth values of classes that never die.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub degree: usize,
    pub points: Vec<(f64, f64)>,
    pub essentials: Vec<f64>,
}

impl PersistenceDiagram {
    pub fn empty(degree: usize) -> Self {
        PersistenceDiagram { degree, points: Vec::new(), essentials: Vec::new() }
    }
}

/// Persistence diagrams for degrees 0..=max_degree. Zero-persistence pairs
/// (birth value = death value) are dropped. Degrees above the filtration's
/// dimension come back empty; note that classes in the filtration's top
/// dimension reflect the truncated complex.
pub fn diagrams(filtration: &Filtration, max_degree: usize) -> Result<Vec<PersistenceDiagram>> {
    let mut out: Vec<PersistenceDiagram> =
        (0..=max_degree).map(PersistenceDiagram::empty).collect();
    if filtration.is_empty() {
        return Ok(out);
    }
    let matrix = boundary_matrix(filtration)?;
    let red = reduce(&matrix);
    for &(i, j) in &red.pairs {
        let degree = matrix.dim(i);
        if degree > max_degree {
            continue;
        }
        let (birth, death) = (matrix.value(i), matrix.value(j));
        if death > birth {
            out[degree].points.push((birth, death));
        }
    }
    for &i in &red.essential {
        let degree = matrix.dim(i);
        if degree > max_degree {
            continue;
        }
        out[degree].essentials.push(matrix.value(i));
    }
    for d in &mut out {
        d.points
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        d.essentials.sort_by(f64::total_cmp);
    }
    Ok(out)
}

/// Number of classes alive at scale eps: born at or before eps and not yet
/// dead (death > eps), essentials included.
pub fn betti_number(diagram: &PersistenceDiagram, eps: f64) -> usize {
    diagram
        .points
        .iter()
        .filter(|&&(b, d)| b <= eps && eps < d)
        .count()
        + diagram.essentials.iter().filter(|&&b| b <= eps).count()
}

/// Rank of the map on homology induced by inclusion of the complex at scale
/// s into the complex at scale t: classes born by s and still alive after t.
pub fn persistent_betti(diagram: &PersistenceDiagram, s: f64, t: f64) -> Result<usize> {
    if s > t {
        return Err(Error::argument(format!("persistent Betti needs s <= t, got {} > {}", s, t)));
    }
    Ok(diagram
        .points
        .iter()
        .filter(|&&(b, d)| b <= s && d > t)
        .count()
        + diagram.essentials.iter().filter(|&&b| b <= s).count())
}

/// Diagram multiplicity of the grid cell (grid[i], grid[j]) via the
/// alternating sum of persistent Betti numbers:
/// β_{i−1}^j − β_i^j + β_i^{j−1} − β_{i−1}^{j−1}.
pub fn multiplicity(
    diagram: &PersistenceDiagram,
    i: usize,
    j: usize,
    grid: &[f64],
) -> Result<i64> {
    let m = grid.len().saturating_sub(1);
    if !(0 < i && i < j && j <= m) {
        return Err(Error::argument(format!(
            "multiplicity indices need 0 < i < j <= {}, got i={} j={}",
            m, i, j
        )));
    }
    let pb = |s: f64, t: f64| persistent_betti(diagram, s, t).map(|v| v as i64);
    Ok(pb(grid[i - 1], grid[j])? - pb(grid[i], grid[j])? + pb(grid[i], grid[j - 1])?
        - pb(grid[i - 1], grid[j - 1])?)
}

/// Writes diagrams as `degree,birth,death` lines (death `inf` for
/// essentials), sorted by (degree, birth, death).
pub fn write_diagrams_csv(diagrams: &[PersistenceDiagram], path: &Path) -> Result<()> {
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for d in diagrams {
        rows.extend(d.points.iter().map(|&(b, dd)| (d.degree, b, dd)));
        rows.extend(d.essentials.iter().map(|&b| (d.degree, b, f64::INFINITY)));
    }
    rows.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    let mut out = String::new();
    for (deg, b, d) in rows {
        let _ = writeln!(out, "{},{},{}", deg, b, d);
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a diagram CSV back into per-degree diagrams covering degree 0 up
/// to the highest degree present (an empty file yields an empty list).
pub fn read_diagrams_csv(path: &Path) -> Result<Vec<PersistenceDiagram>> {
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
        let degree: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad degree: {:?}", fields[0])))?;
        let birth: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad birth: {:?}", fields[1])))?;
        let death: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad death: {:?}", fields[2])))?;
        if !birth.is_finite() || (death != f64::INFINITY && !death.is_finite()) {
            return Err(parse_err("non-finite birth or death".into()));
        }
        if death <= birth {
            return Err(parse_err(format!("death {} not greater than birth {}", death, birth)));
        }
        rows.push((degree, birth, death));
    }
    let max_degree = match rows.iter().map(|r| r.0).max() {
        Some(m) => m,
        None => return Ok(Vec::new()),
    };
    let mut out: Vec<PersistenceDiagram> =
        (0..=max_degree).map(PersistenceDiagram::empty).collect();
    for (deg, b, d) in rows {
        if d.is_infinite() {
            out[deg].essentials.push(b);
        } else {
            out[deg].points.push((b, d));
        }
    }
    for d in &mut out {
        d.points
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        d.essentials.sort_by(f64::total_cmp);
    }
    Ok(out)
}
