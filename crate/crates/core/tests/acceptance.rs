//! Acceptance suite: one test per release criterion, each cross-checked
//! against the independent oracles in `common` and printing a summary line
//! (visible with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;

use topovec::cli::derive_seed;
use topovec::complex::{cech_complex, vietoris_rips};
use topovec::persistence::diagrams;
use topovec::pointcloud::{pairwise_distances, sample_wedge_with_counts, PointCloud};
use topovec::stats::{permutation_test, preprocess_exclusion, ExclusionMode, Statistic};
use topovec::summaries::{
    drop_landscape_functions, landscape, vectorize_landscape, FeatureKind, FeatureVector,
};

fn pass(name: &str, started: Instant) {
    println!("criterion {name}: PASS ({:.2?})", started.elapsed());
}

fn budget(name: &str, started: Instant, seconds: u64) {
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < seconds,
        "{name} exceeded its {seconds}s budget: {elapsed:.2?}"
    );
}

/// 1. Diagrams from boundary-matrix reduction equal diagrams reconstructed
/// from brute-force persistent-Betti ranks, as exact multisets, on 50 seeded
/// random planar clouds of up to 7 points. Degree-0 deaths are additionally
/// cross-checked against union-find merge heights.
#[test]
fn criterion_1_reduction_matches_brute_force_ranks() {
    let start = Instant::now();
    for seed in 0..50u64 {
        let n = 2 + (seed as usize * 7 + 3) % 6; // 2..=7
        let cloud = common::random_cloud(n, 2, 1000 + seed);
        let dm = pairwise_distances(&cloud);
        let filtration = vietoris_rips(&dm, 3, dm.max_distance()).unwrap();
        let got = diagrams(&filtration, 2).unwrap();
        let want = common::oracle_diagrams(&filtration, 2);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.degree, w.degree);
            assert_eq!(g.points, w.points, "seed {seed} degree {} points", g.degree);
            assert_eq!(g.essentials, w.essentials, "seed {seed} degree {}", g.degree);
        }

        let (merge_deaths, components) = common::h0_merge_deaths(&dm, dm.max_distance());
        let mut got_deaths: Vec<f64> = got[0].points.iter().map(|&(_, d)| d).collect();
        got_deaths.sort_by(f64::total_cmp);
        assert_eq!(got_deaths, merge_deaths, "seed {seed} union-find deaths");
        assert_eq!(got[0].essentials.len(), components, "seed {seed} components");
    }
    budget("criterion 1", start, 60);
    pass("1 (reduction = brute-force persistent-Betti ranks, 50 clouds)", start);
}

/// 2. The unit square: degree-0 finite deaths {1,1,1} plus one essential
/// class, and degree 1 exactly {(1, √2)}, within 1e-9 on the diameter scale.
#[test]
fn criterion_2_unit_square_instance() {
    let start = Instant::now();
    let cloud = PointCloud::from_rows(vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
    ])
    .unwrap();
    let dm = pairwise_distances(&cloud);
    let filtration = vietoris_rips(&dm, 2, dm.max_distance()).unwrap();
    let diags = diagrams(&filtration, 1).unwrap();

    let h0 = &diags[0];
    assert_eq!(h0.points.len(), 3);
    for &(b, d) in &h0.points {
        assert!((b - 0.0).abs() < 1e-9 && (d - 1.0).abs() < 1e-9, "H0 point ({b},{d})");
    }
    assert_eq!(h0.essentials.len(), 1);
    assert!((h0.essentials[0] - 0.0).abs() < 1e-9);

    let h1 = &diags[1];
    assert_eq!(h1.points.len(), 1);
    let (b, d) = h1.points[0];
    assert!((b - 1.0).abs() < 1e-9, "H1 birth {b}");
    assert!((d - 2f64.sqrt()).abs() < 1e-9, "H1 death {d}");
    assert!(h1.essentials.is_empty());
    budget("criterion 2", start, 1);
    pass("2 (unit-square instance)", start);
}

/// 3. Sandwich: with the radius↔diameter dictionary (the Rips complex at
/// radius ε is the diameter-2ε complex), C_ε ⊆ R_ε ⊆ C_2ε simplex-by-simplex
/// for 20 seeded planar clouds of up to 10 points and 10 ε values each.
#[test]
fn criterion_3_cech_rips_sandwich() {
    let start = Instant::now();
    for seed in 0..20u64 {
        let n = 3 + (seed as usize * 5 + 1) % 8; // 3..=10
        let cloud = common::random_cloud(n, 2, 2000 + seed);
        let dm = pairwise_distances(&cloud);
        let reach = dm.max_distance();
        for j in 1..=10 {
            let eps = 0.06 * j as f64 * reach;
            let set_of = |simplices: &[topovec::complex::Simplex]| -> HashSet<Vec<usize>> {
                simplices.iter().map(|s| s.vertices().to_vec()).collect()
            };
            let c_eps = set_of(&cech_complex(&cloud, eps, 3).unwrap());
            let c_2eps = set_of(&cech_complex(&cloud, 2.0 * eps, 3).unwrap());
            let r_eps: HashSet<Vec<usize>> = vietoris_rips(&dm, 3, 2.0 * eps)
                .unwrap()
                .cells()
                .iter()
                .map(|(_, s)| s.vertices().to_vec())
                .collect();
            for s in &c_eps {
                assert!(r_eps.contains(s), "seed {seed} eps {eps}: Čech ⊄ Rips at {s:?}");
            }
            for s in &r_eps {
                assert!(c_2eps.contains(s), "seed {seed} eps {eps}: Rips ⊄ Čech(2ε) at {s:?}");
            }
        }
    }
    budget("criterion 3", start, 30);
    pass("3 (Čech/Rips sandwich, 20 clouds × 10 ε)", start);
}

/// 4. Exact landscapes agree with dense k-th-largest-tent evaluation within
/// 1e-12 at 4001 grid points for 100 seeded random diagrams, and are
/// pointwise decreasing in k and 1-Lipschitz in t.
#[test]
fn criterion_4_landscape_exactness() {
    let start = Instant::now();
    for seed in 0..100u64 {
        let diagram = common::random_diagram(20, 1, 3000 + seed);
        let ls = landscape(&diagram);
        let lo = diagram.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - 0.5;
        let hi = diagram.points.iter().map(|p| p.1).fold(0.0, f64::max) + 0.5;
        let step = (hi - lo) / 4000.0;
        let mut prev: Vec<f64> = Vec::new();
        for g in 0..=4000usize {
            let t = lo + g as f64 * step;
            let reference = common::tent_values_desc(&diagram, t);
            let mut row = Vec::with_capacity(ls.len() + 2);
            for k in 1..=(ls.len() + 2) {
                let got = ls.evaluate(k, t);
                let want = reference.get(k - 1).copied().unwrap_or(0.0);
                assert!(
                    (got - want).abs() <= 1e-12,
                    "seed {seed} λ_{k}({t}) = {got}, want {want}"
                );
                row.push(got);
            }
            for k in 1..row.len() {
                assert!(row[k] <= row[k - 1] + 1e-12, "λ not decreasing in k at t={t}");
            }
            if !prev.is_empty() {
                for k in 0..row.len() {
                    assert!(
                        (row[k] - prev[k]).abs() <= step + 1e-12,
                        "λ_{} not 1-Lipschitz near t={t}",
                        k + 1
                    );
                }
            }
            prev = row;
        }
    }
    budget("criterion 4", start, 30);
    pass("4 (exact landscapes = dense kmax, 100 diagrams × 4001 points)", start);
}

/// 5. The default grid (60 functions × 401 points) vectorizes to exactly
/// 24060 values; dropping 20 landscape functions leaves 16040.
#[test]
fn criterion_5_vectorization_shape() {
    let start = Instant::now();
    let diagram = common::random_diagram(20, 1, 4000);
    let ls = landscape(&diagram);
    let fv = vectorize_landscape(&ls, 60, 0.0, 0.1, 400).unwrap();
    assert_eq!(fv.values.len(), 24060);
    assert_eq!(fv.kind, FeatureKind::Landscape);

    let dropped = preprocess_exclusion(&[fv], ExclusionMode::DropLandscapeFunctions(20)).unwrap();
    assert_eq!(dropped[0].values.len(), 16040);
    assert_eq!(dropped[0].grid.unwrap().k, 40);

    // The same count falls out of dropping before vectorizing.
    let fewer = vectorize_landscape(&drop_landscape_functions(&ls, 20), 40, 0.0, 0.1, 400).unwrap();
    assert_eq!(fewer.values.len(), 16040);
    budget("criterion 5", start, 1);
    pass("5 (vector lengths 24060 / 16040)", start);
}

fn constant_vector(values: &[f64]) -> FeatureVector {
    FeatureVector { values: values.to_vec(), kind: FeatureKind::Death, grid: None }
}

/// 6. Permutation test: 5-vs-5 fully separated groups score exactly the
/// brute-force 2/252; identical groups give p = 1; the 10-vs-10 exhaustive
/// path over 184756 splits completes.
#[test]
fn criterion_6_permutation_test_correctness() {
    let start = Instant::now();
    let a: Vec<FeatureVector> = (0..5).map(|_| constant_vector(&[1.0, 0.0])).collect();
    let b: Vec<FeatureVector> = (0..5).map(|_| constant_vector(&[0.0, 1.0])).collect();
    for statistic in [Statistic::L2MeanDiff, Statistic::SupMeanDiff] {
        let r = permutation_test(&a, &b, statistic, 999, 1).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.n_permutations, 252);
        assert_eq!(r.p_value, 2.0 / 252.0, "{statistic:?}");

        let r = permutation_test(&a, &a, statistic, 999, 1).unwrap();
        assert_eq!(r.p_value, 1.0, "{statistic:?} identical groups");
        assert_eq!(r.observed_statistic, 0.0);
    }

    let big_a: Vec<FeatureVector> = (0..10)
        .map(|i| constant_vector(&[i as f64, (i * i) as f64 % 7.0, 1.0]))
        .collect();
    let big_b: Vec<FeatureVector> = (0..10)
        .map(|i| constant_vector(&[i as f64 + 0.5, (i * 3) as f64 % 5.0, 0.0]))
        .collect();
    let r = permutation_test(&big_a, &big_b, Statistic::L2MeanDiff, 999, 1).unwrap();
    assert!(r.exhaustive);
    assert_eq!(r.n_permutations, 184756);
    assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    budget("criterion 6", start, 120);
    pass("6 (permutation test exact 2/252, p=1, 184756-split exhaustive)", start);
}

/// Degree-1 landscape grid vector of one wedge cloud, as used by the
/// calibration study below.
fn wedge_landscape_vector(counts: &[usize], seed: u64) -> FeatureVector {
    let cloud = sample_wedge_with_counts(counts, 1.0, 0.05, 0, seed).unwrap();
    let dm = pairwise_distances(&cloud);
    let filtration = vietoris_rips(&dm, 2, 2.0).unwrap();
    let diags = diagrams(&filtration, 1).unwrap();
    vectorize_landscape(&landscape(&diags[1]), 10, 0.0, 0.05, 60).unwrap()
}

/// 7. Null calibration: both groups from the same wedge-of-2 generator,
/// 200 replications with distinct seeds, exhaustive 10-vs-10 tests; the
/// empirical rejection rate at α = 0.05 must lie in [0.01, 0.12].
#[test]
fn criterion_7_null_calibration() {
    let start = Instant::now();
    let master = 0xACCE_u64;
    let rejections: usize = (0..200u64)
        .into_par_iter()
        .map(|rep| {
            let vectors: Vec<FeatureVector> = (0..20)
                .map(|c| wedge_landscape_vector(&[30, 30], derive_seed(master, rep * 32 + c)))
                .collect();
            let r = permutation_test(
                &vectors[..10],
                &vectors[10..],
                Statistic::L2MeanDiff,
                1000,
                derive_seed(master, rep * 32 + 31),
            )
            .unwrap();
            assert!(r.exhaustive, "10v10 must enumerate all splits");
            usize::from(r.p_value <= 0.05)
        })
        .sum();
    let rate = rejections as f64 / 200.0;
    assert!(
        (0.01..=0.12).contains(&rate),
        "null rejection rate {rate} outside [0.01, 0.12]"
    );
    budget("criterion 7", start, 600);
    pass(
        &format!("7 (null calibration, rejection rate {rate:.3} over 200 replications)"),
        start,
    );
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(Path::parent)
        .expect("core crate lives two levels below the workspace root")
        .to_path_buf()
}

fn run_pipeline(out_dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_topovec"))
        .arg("pipeline")
        .arg("--config")
        .arg(workspace_root().join("demo.json"))
        .arg("--out-dir")
        .arg(out_dir)
        .status()
        .expect("pipeline binary runs");
    assert!(status.success(), "pipeline exited with {status}");
}

/// 8. Signal detection on the bundled demo config: wedge-of-2 vs wedge-of-3
/// groups (10 clouds each, 100 points, noise 0.05, 5 outliers), degree-1
/// landscape vectors, exhaustive permutation test → p ≤ 0.01; 10-fold CV
/// linear SVM on concatenated features → accuracy ≥ 0.9.
#[test]
fn criterion_8_signal_detection() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    run_pipeline(&out);

    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["exhaustive"], serde_json::Value::Bool(true));
    let p = result["p_value"].as_f64().unwrap();
    assert!(p <= 0.01, "demo p-value {p} above 0.01");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("cv_report.json")).unwrap())
            .unwrap();
    let acc = report["mean_accuracy"].as_f64().unwrap();
    assert!(acc >= 0.9, "demo CV accuracy {acc} below 0.9");
    budget("criterion 8", start, 300);
    pass(&format!("8 (signal detection: p = {p:.2e}, CV accuracy = {acc})"), start);
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

/// 9. Rerunning the bundled pipeline config reproduces every output file
/// byte-for-byte, manifest included.
#[test]
fn criterion_9_pipeline_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    run_pipeline(&out);
    let first = snapshot(&out);
    assert!(
        first.iter().any(|(p, _)| p == Path::new("manifest.json")),
        "manifest missing"
    );
    run_pipeline(&out);
    let second = snapshot(&out);
    assert_eq!(first.len(), second.len());
    for ((pa, ba), (pb, bb)) in first.iter().zip(&second) {
        assert_eq!(pa, pb);
        assert_eq!(ba, bb, "{} changed between reruns", pa.display());
    }
    budget("criterion 9", start, 300);
    pass(&format!("9 (bit-identical rerun, {} files)", first.len()), start);
}
