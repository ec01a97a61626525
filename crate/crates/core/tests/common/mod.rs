//! Independent reference implementations ("oracles") used by the acceptance
//! suite. Everything here recomputes results from first principles — dense
//! GF(2) linear algebra on explicit chain groups, union-find, k-th-largest
//! scans — sharing no code path with the library's optimized algorithms.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topovec::complex::{Filtration, Simplex};
use topovec::persistence::PersistenceDiagram;
use topovec::pointcloud::{DistanceMatrix, PointCloud};

// ---------------------------------------------------------------------------
// GF(2) linear algebra
// ---------------------------------------------------------------------------

/// Dense matrix over GF(2).
#[derive(Clone)]
pub struct BitMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Vec<bool>>,
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, data: vec![vec![false; cols]; rows] }
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r][c] = true;
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r][c]
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let hit = (pivot_row..self.rows).find(|&r| self.data[r][col]);
            let Some(r) = hit else { continue };
            self.data.swap(pivot_row, r);
            for other in 0..self.rows {
                if other != pivot_row && self.data[other][col] {
                    for c in col..self.cols {
                        self.data[other][c] ^= self.data[pivot_row][c];
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// A basis of the right kernel, one length-`cols` vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<bool>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![false; self.cols];
            v[free] = true;
            for (row, &pc) in pivots.iter().enumerate() {
                if m.data[row][free] {
                    v[pc] = true;
                }
            }
            basis.push(v);
        }
        basis
    }
}

// ---------------------------------------------------------------------------
// Brute-force persistent Betti numbers and diagram reconstruction
// ---------------------------------------------------------------------------

/// Simplices of dimension `dim` present at filtration value ≤ `v`,
/// in filtration order.
fn simplices_at(filtration: &Filtration, dim: usize, v: f64) -> Vec<Simplex> {
    filtration
        .cells()
        .iter()
        .filter(|(value, s)| *value <= v && s.dim() == dim)
        .map(|(_, s)| s.clone())
        .collect()
}

fn index_of(list: &[Simplex]) -> std::collections::HashMap<Vec<usize>, usize> {
    list.iter()
        .enumerate()
        .map(|(i, s)| (s.vertices().to_vec(), i))
        .collect()
}

/// The boundary matrix of dimension-`dim` simplices at value ≤ `v`,
/// with rows indexed by the given (dim−1)-simplex list.
fn boundary_at(
    filtration: &Filtration,
    dim: usize,
    v: f64,
    row_index: &std::collections::HashMap<Vec<usize>, usize>,
    n_rows: usize,
) -> BitMatrix {
    let cols = simplices_at(filtration, dim, v);
    let mut m = BitMatrix::zero(n_rows, cols.len());
    for (j, s) in cols.iter().enumerate() {
        for facet in s.facets() {
            let r = row_index[facet.vertices()];
            m.set(r, j);
        }
    }
    m
}

/// Persistent Betti number β_degree(s, t): the rank of the map on homology
/// induced by including the complex at value s into the complex at value t,
/// computed as dim Z(s) − dim(Z(s) ∩ B(t)) from explicit chain groups.
pub fn brute_persistent_betti(filtration: &Filtration, degree: usize, s: f64, t: f64) -> usize {
    assert!(s <= t);
    let p_at_s = simplices_at(filtration, degree, s);
    let p_at_t = simplices_at(filtration, degree, t);
    if p_at_s.is_empty() {
        return 0;
    }
    let p_index_t = index_of(&p_at_t);

    // Cycle space Z_degree(K_s): kernel of the boundary leaving degree-p
    // simplices of K_s. For degree 0 that boundary is the zero map.
    let z_basis: Vec<Vec<bool>> = if degree == 0 {
        (0..p_at_s.len())
            .map(|i| {
                let mut v = vec![false; p_at_s.len()];
                v[i] = true;
                v
            })
            .collect()
    } else {
        let faces = simplices_at(filtration, degree - 1, s);
        let face_index = index_of(&faces);
        boundary_at(filtration, degree, s, &face_index, faces.len()).kernel_basis()
    };

    // Boundary space B_degree(K_t): image of the boundary of (p+1)-simplices
    // of K_t, expressed in the K_t chain basis.
    let d_up = boundary_at(filtration, degree + 1, t, &p_index_t, p_at_t.len());
    let b_dim = d_up.rank();

    // dim(Z + B) via the rank of [Z basis | boundary columns], with the
    // K_s cycles embedded into the K_t chain coordinates.
    let up_cols = d_up.cols;
    let mut joint = BitMatrix::zero(p_at_t.len(), z_basis.len() + up_cols);
    for (j, z) in z_basis.iter().enumerate() {
        for (i, &bit) in z.iter().enumerate() {
            if bit {
                let row = p_index_t[p_at_s[i].vertices()];
                joint.set(row, j);
            }
        }
    }
    for c in 0..up_cols {
        for r in 0..p_at_t.len() {
            if d_up.get(r, c) {
                joint.set(r, z_basis.len() + c);
            }
        }
    }
    let z_dim = z_basis.len();
    let union_dim = joint.rank();
    // β = z − dim(Z∩B) = z − (z + b − dim(Z+B)).
    z_dim + union_dim - z_dim - b_dim
}

/// Full diagrams reconstructed from persistent Betti numbers alone, via the
/// inclusion–exclusion multiplicity formula over the grid of distinct
/// filtration values (with a sentinel value below the first, where the
/// complex is empty).
pub fn oracle_diagrams(filtration: &Filtration, max_degree: usize) -> Vec<PersistenceDiagram> {
    let mut values: Vec<f64> = filtration.cells().iter().map(|(v, _)| *v).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.is_empty() {
        return (0..=max_degree).map(PersistenceDiagram::empty).collect();
    }
    let mut grid = vec![values[0] - 1.0];
    grid.extend(values);
    let m = grid.len() - 1;

    (0..=max_degree)
        .map(|degree| {
            let mut beta = vec![vec![0usize; m + 1]; m + 1];
            for i in 0..=m {
                for j in i..=m {
                    beta[i][j] = if i == 0 {
                        0
                    } else {
                        brute_persistent_betti(filtration, degree, grid[i], grid[j])
                    };
                }
            }
            let mut points = Vec::new();
            for i in 1..=m {
                for j in (i + 1)..=m {
                    let mu = beta[i][j - 1] as i64 - beta[i][j] as i64 - beta[i - 1][j - 1] as i64
                        + beta[i - 1][j] as i64;
                    assert!(mu >= 0, "negative multiplicity at ({i},{j}) degree {degree}");
                    for _ in 0..mu {
                        points.push((grid[i], grid[j]));
                    }
                }
            }
            let mut essentials = Vec::new();
            for i in 1..=m {
                let mu = beta[i][m] as i64 - beta[i - 1][m] as i64;
                assert!(mu >= 0);
                for _ in 0..mu {
                    essentials.push(grid[i]);
                }
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            essentials.sort_by(f64::total_cmp);
            PersistenceDiagram { degree, points, essentials }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Union-find oracle for degree-0 deaths
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Positive component-merge heights when edges up to `max_value` arrive in
/// increasing distance order, plus the number of components remaining.
/// The multiset of merge heights is order-independent, so this is a valid
/// reference for the finite degree-0 deaths.
pub fn h0_merge_deaths(dm: &DistanceMatrix, max_value: f64) -> (Vec<f64>, usize) {
    let n = dm.n();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dm.get(i, j);
            if d <= max_value {
                edges.push((d, i, j));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uf = UnionFind::new(n);
    let mut deaths = Vec::new();
    let mut components = n;
    for (d, i, j) in edges {
        if uf.union(i, j) {
            components -= 1;
            if d > 0.0 {
                deaths.push(d);
            }
        }
    }
    deaths.sort_by(f64::total_cmp);
    (deaths, components)
}

// ---------------------------------------------------------------------------
// Landscape reference: k-th largest tent value
// ---------------------------------------------------------------------------

pub fn tent(b: f64, d: f64, t: f64) -> f64 {
    (t - b).min(d - t).max(0.0)
}

/// All tent values at t, sorted descending — λ_k(t) is entry k−1.
pub fn tent_values_desc(diagram: &PersistenceDiagram, t: f64) -> Vec<f64> {
    let mut vals: Vec<f64> = diagram.points.iter().map(|&(b, d)| tent(b, d, t)).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

// ---------------------------------------------------------------------------
// Seeded random inputs
// ---------------------------------------------------------------------------

/// n points uniform in [0,1]^dim.
pub fn random_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    PointCloud::from_rows(rows).expect("random cloud is valid")
}

/// A diagram with up to `max_points` strictly positive-persistence points.
pub fn random_diagram(max_points: usize, degree: usize, seed: u64) -> PersistenceDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_points);
    let mut points: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let b = rng.gen_range(0.0..5.0);
            let p = rng.gen_range(0.01..3.0);
            (b, b + p)
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    PersistenceDiagram { degree, points, essentials: Vec::new() }
}
