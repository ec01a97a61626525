//! Two-sample permutation tests on feature vectors.
//!
//! The statistic is a norm of the difference of group means. Splits are
//! enumerated exhaustively when the number of distinct label assignments is
//! small enough, otherwise sampled. To make tie counting reliable, every
//! split is scored through one canonical code path on a scaled statistic
//! (see below), and comparisons against the observed split carry a relative
//! tolerance that absorbs floating-point dust without blurring real gaps.
//!
//! Scaling: with N = n_a + n_b pooled vectors x_i and y_i = N·x_i − Σx, the
//! difference of group means for a subset S of size n_a equals
//! (Σ_{i∈S} y_i) / (n_a·n_b). Norm comparisons across splits can therefore
//! use D_S = Σ_{i∈S} y_i directly; for the L2 norm, ‖D_S‖² is a double sum
//! over the Gram matrix of the y_i, evaluated in a fixed index order so
//! identical subsets always produce bit-identical scores.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::summaries::{FeatureKind, FeatureVector};

/// Exhaustive enumeration engages when the number of distinct splits is at
/// most this (covers 10-vs-10 groups: C(20,10) = 184756).
pub const EXHAUSTIVE_THRESHOLD: u64 = 200_000;

/// Relative tie tolerance on the scaled statistic.
const TIE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Euclidean norm of the difference of group means.
    L2MeanDiff,
    /// Sup (max absolute coordinate) norm of the difference of group means.
    SupMeanDiff,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::L2MeanDiff => "l2_mean_diff",
            Statistic::SupMeanDiff => "sup_mean_diff",
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2_mean_diff" => Ok(Statistic::L2MeanDiff),
            "sup_mean_diff" => Ok(Statistic::SupMeanDiff),
            other => Err(Error::argument(format!(
                "unknown statistic {:?}; expected l2_mean_diff or sup_mean_diff",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationTestResult {
    pub observed_statistic: f64,
    pub p_value: f64,
    pub n_permutations: u64,
    pub exhaustive: bool,
    pub seed: u64,
}

/// C(n, k) if it is ≤ cap, else None.
fn n_splits_capped(n: u64, k: u64, cap: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (n - k + i) as u128 / i as u128;
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as u64)
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Visits every size-k subset of 0..n in lexicographic order. The callback
/// receives (removed, added) index slices relative to the previous subset
/// followed by the current subset.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize], &[usize], &[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    visit(&[], &idx.clone(), &idx);
    loop {
        // Rightmost position that can advance.
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let removed: Vec<usize> = idx[i - 1..].to_vec();
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
        let added: Vec<usize> = idx[i - 1..].to_vec();
        visit(&removed, &added, &idx);
    }
}

/// Scores one subset through the canonical path: for L2, the Gram double
/// sum ‖D_S‖²; for sup, max |coordinate| of the incrementally maintained D.
struct Scorer<'a> {
    statistic: Statistic,
    gram: Vec<Vec<f64>>,
    ys: &'a [Vec<f64>],
    d: Vec<f64>,
}

impl<'a> Scorer<'a> {
    fn new(statistic: Statistic, ys: &'a [Vec<f64>]) -> Self {
        let dim = ys.first().map_or(0, |y| y.len());
        let gram = match statistic {
            Statistic::L2MeanDiff => ys
                .iter()
                .map(|yi| ys.iter().map(|yj| dot(yi, yj)).collect())
                .collect(),
            Statistic::SupMeanDiff => Vec::new(),
        };
        Scorer { statistic, gram, ys, d: vec![0.0; dim] }
    }

    /// Bound on the magnitude of subset scores, for the tie tolerance.
    fn scale_bound(&self, n_a: usize) -> f64 {
        match self.statistic {
            Statistic::L2MeanDiff => {
                let gmax = self
                    .gram
                    .iter()
                    .flatten()
                    .fold(0.0f64, |m, &g| m.max(g.abs()));
                (n_a * n_a) as f64 * gmax
            }
            Statistic::SupMeanDiff => {
                let ymax = self
                    .ys
                    .iter()
                    .flatten()
                    .fold(0.0f64, |m, &y| m.max(y.abs()));
                n_a as f64 * ymax
            }
        }
    }

    fn apply_change(&mut self, removed: &[usize], added: &[usize]) {
        if self.statistic == Statistic::SupMeanDiff {
            for &r in removed {
                for (dg, yg) in self.d.iter_mut().zip(&self.ys[r]) {
                    *dg -= yg;
                }
            }
            for &a in added {
                for (dg, yg) in self.d.iter_mut().zip(&self.ys[a]) {
                    *dg += yg;
                }
            }
        }
    }

    fn score(&self, subset: &[usize]) -> f64 {
        match self.statistic {
            Statistic::L2MeanDiff => {
                let mut q = 0.0;
                for &i in subset {
                    for &j in subset {
                        q += self.gram[i][j];
                    }
                }
                q
            }
            Statistic::SupMeanDiff => sup_norm(&self.d),
        }
    }

    /// Canonical from-scratch score of a sorted subset (no incremental state).
    fn score_fresh(&self, subset: &[usize]) -> f64 {
        match self.statistic {
            Statistic::L2MeanDiff => self.score(subset),
            Statistic::SupMeanDiff => {
                let mut d = vec![0.0; self.d.len()];
                for &i in subset {
                    for (dg, yg) in d.iter_mut().zip(&self.ys[i]) {
                        *dg += yg;
                    }
                }
                sup_norm(&d)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-sample permutation test of equal means. The reported statistic is
/// the chosen norm of mean(group_a) − mean(group_b) computed directly; the
/// p-value counts splits whose (scaled) statistic reaches the observed
/// split's, exhaustively over all label assignments when their number is at
/// most `EXHAUSTIVE_THRESHOLD`, otherwise by seeded Monte Carlo with the
/// add-one correction p = (1 + #{≥ observed}) / (1 + n_permutations).
pub fn permutation_test(
    group_a: &[FeatureVector],
    group_b: &[FeatureVector],
    statistic: Statistic,
    n_permutations: usize,
    seed: u64,
) -> Result<PermutationTestResult> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(Error::argument("permutation test needs two nonempty groups"));
    }
    if n_permutations < 1 {
        return Err(Error::argument("n_permutations must be >= 1"));
    }
    let dim = group_a[0].len();
    if group_a.iter().chain(group_b).any(|v| v.len() != dim) {
        return Err(Error::argument("permutation test needs vectors of equal length"));
    }
    let (n_a, n_b) = (group_a.len(), group_b.len());
    let n = n_a + n_b;

    // Reported statistic straight from the definition: identical groups
    // give componentwise-zero difference, hence exactly 0.
    let observed_statistic = {
        let mean = |g: &[FeatureVector]| -> Vec<f64> {
            let mut m = vec![0.0; dim];
            for v in g {
                for (acc, x) in m.iter_mut().zip(&v.values) {
                    *acc += x;
                }
            }
            m.iter_mut().for_each(|x| *x /= g.len() as f64);
            m
        };
        let (ma, mb) = (mean(group_a), mean(group_b));
        let diff: Vec<f64> = ma.iter().zip(&mb).map(|(a, b)| a - b).collect();
        match statistic {
            Statistic::L2MeanDiff => l2_norm(&diff),
            Statistic::SupMeanDiff => sup_norm(&diff),
        }
    };

    // Pooled, centered, integer-scaled vectors: y_i = N·x_i − Σx.
    let pooled: Vec<&FeatureVector> = group_a.iter().chain(group_b).collect();
    let mut total = vec![0.0; dim];
    for v in &pooled {
        for (acc, x) in total.iter_mut().zip(&v.values) {
            *acc += x;
        }
    }
    let ys: Vec<Vec<f64>> = pooled
        .iter()
        .map(|v| {
            v.values
                .iter()
                .zip(&total)
                .map(|(x, t)| n as f64 * x - t)
                .collect()
        })
        .collect();

    let mut scorer = Scorer::new(statistic, &ys);
    let observed_subset: Vec<usize> = (0..n_a).collect();
    let observed_score = scorer.score_fresh(&observed_subset);
    let tol = TIE_REL_TOL * scorer.scale_bound(n_a);
    let cutoff = observed_score - tol;

    match n_splits_capped(n as u64, n_a as u64, EXHAUSTIVE_THRESHOLD) {
        Some(total_splits) => {
            let mut hits: u64 = 0;
            for_each_subset(n, n_a, |removed, added, subset| {
                scorer.apply_change(removed, added);
                if scorer.score(subset) >= cutoff {
                    hits += 1;
                }
            });
            Ok(PermutationTestResult {
                observed_statistic,
                p_value: hits as f64 / total_splits as f64,
                n_permutations: total_splits,
                exhaustive: true,
                seed,
            })
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits: u64 = 0;
            for _ in 0..n_permutations {
                let mut subset = rand::seq::index::sample(&mut rng, n, n_a).into_vec();
                subset.sort_unstable();
                if scorer.score_fresh(&subset) >= cutoff {
                    hits += 1;
                }
            }
            Ok(PermutationTestResult {
                observed_statistic,
                p_value: (1 + hits) as f64 / (1 + n_permutations) as f64,
                n_permutations: n_permutations as u64,
                exhaustive: false,
                seed,
            })
        }
    }
}

/// Noise-coordinate exclusion applied before testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionMode {
    /// Remove the first k (largest) death-vector coordinates.
    DropDeathCoords(usize),
    /// Remove the first k landscape functions, i.e. k whole blocks of m+1
    /// grid values from each vectorized landscape.
    DropLandscapeFunctions(usize),
}

pub fn preprocess_exclusion(
    vectors: &[FeatureVector],
    mode: ExclusionMode,
) -> Result<Vec<FeatureVector>> {
    vectors
        .iter()
        .map(|v| match mode {
            ExclusionMode::DropDeathCoords(k) => {
                if v.kind != FeatureKind::Death {
                    return Err(Error::argument(
                        "drop_death_coords needs death-vector features",
                    ));
                }
                if k > v.len() {
                    return Err(Error::argument(format!(
                        "cannot drop {} coordinates from a length-{} death vector",
                        k,
                        v.len()
                    )));
                }
                Ok(FeatureVector {
                    values: v.values[k..].to_vec(),
                    kind: v.kind,
                    grid: None,
                })
            }
            ExclusionMode::DropLandscapeFunctions(k) => {
                let grid = v.grid.filter(|_| v.kind == FeatureKind::Landscape).ok_or_else(
                    || Error::argument("drop_landscape_functions needs vectorized landscapes"),
                )?;
                if k > grid.k {
                    return Err(Error::argument(format!(
                        "cannot drop {} of {} landscape functions",
                        k, grid.k
                    )));
                }
                let block = grid.m + 1;
                Ok(FeatureVector {
                    values: v.values[k * block..].to_vec(),
                    kind: v.kind,
                    grid: Some(crate::summaries::GridSpec { k: grid.k - k, ..grid }),
                })
            }
        })
        .collect()
}
