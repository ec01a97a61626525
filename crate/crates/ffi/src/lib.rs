//! C ABI for the topovec pipeline: opaque handles, integer status codes,
//! and a thread-local last-error message. Every function is panic-safe and
//! null-safe; no Rust type crosses the boundary.
//!
//! Ownership: constructors hand out `*mut` handles the caller must release
//! with the matching `*_free`; buffers are caller-allocated and written up
//! to the reported length.

#![allow(non_camel_case_types)]
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use topovec::complex::vietoris_rips;
use topovec::persistence::{diagrams, PersistenceDiagram};
use topovec::pointcloud::{
    load_point_cloud, pairwise_distances, sample_circle, sample_wedge_of_circles, subsample,
    PointCloud, SubsampleStrategy,
};
use topovec::stats::{permutation_test, Statistic};
use topovec::summaries::{
    death_vector, landscape, vectorize_landscape, FeatureKind, FeatureVector,
    PersistenceLandscape,
};
use topovec::classify::{cross_validate, LabeledDataset};
use topovec::Error;

/// Result of every fallible call. Non-zero means failure; the reason is
/// available from `tv_last_error_message` on the same thread.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum tv_status {
    TV_OK = 0,
    /// Invalid argument or precondition violation.
    TV_ARGUMENT = 1,
    /// Unreadable, malformed, or empty input data.
    TV_DATA = 2,
    /// Internal invariant failure.
    TV_INTERNAL = 3,
    /// A required pointer was null.
    TV_NULL_POINTER = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn fail(err: &Error) -> tv_status {
    set_error(&err.to_string());
    match err.exit_code() {
        1 => tv_status::TV_ARGUMENT,
        2 => tv_status::TV_DATA,
        _ => tv_status::TV_INTERNAL,
    }
}

fn null_arg(name: &str) -> tv_status {
    set_error(&format!("{name} must not be null"));
    tv_status::TV_NULL_POINTER
}

/// Run a fallible body, converting panics into TV_INTERNAL.
fn guard(f: impl FnOnce() -> tv_status) -> tv_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            tv_status::TV_INTERNAL
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

/// Opaque point-cloud handle.
pub struct tv_cloud {
    inner: PointCloud,
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> tv_status {
    if out.is_null() {
        return null_arg("out");
    }
    *out = Box::into_raw(Box::new(value));
    tv_status::TV_OK
}

/// Load a point cloud from a CSV file of comma-separated coordinates,
/// one point per row. `skip_header` skips the first row.
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_load(
    path: *const c_char,
    skip_header: bool,
    out: *mut *mut tv_cloud,
) -> tv_status {
    guard(|| {
        if path.is_null() {
            return null_arg("path");
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8");
                return tv_status::TV_ARGUMENT;
            }
        };
        match load_point_cloud(Path::new(path), skip_header) {
            Ok(cloud) => write_handle(out, tv_cloud { inner: cloud }),
            Err(e) => {
                let status = fail(&e);
                set_error(&format!("{path}: {e}"));
                status
            }
        }
    })
}

/// Build a cloud from a row-major coordinate buffer of
/// `n_points * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_from_coords(
    coords: *const f64,
    n_points: usize,
    dim: usize,
    out: *mut *mut tv_cloud,
) -> tv_status {
    guard(|| {
        if coords.is_null() {
            return null_arg("coords");
        }
        let flat = std::slice::from_raw_parts(coords, n_points * dim).to_vec();
        match PointCloud::from_flat(flat, dim) {
            Ok(cloud) => write_handle(out, tv_cloud { inner: cloud }),
            Err(e) => fail(&e),
        }
    })
}

/// Sample a noisy circle with optional uniform outliers (seeded).
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_sample_circle(
    n: usize,
    radius: f64,
    noise_sd: f64,
    outliers: usize,
    seed: u64,
    out: *mut *mut tv_cloud,
) -> tv_status {
    guard(|| match sample_circle(n, radius, noise_sd, outliers, seed) {
        Ok(cloud) => write_handle(out, tv_cloud { inner: cloud }),
        Err(e) => fail(&e),
    })
}

/// Sample a wedge of `k` circles, `n_per` points on each.
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_sample_wedge(
    k: usize,
    n_per: usize,
    radius: f64,
    noise_sd: f64,
    outliers: usize,
    seed: u64,
    out: *mut *mut tv_cloud,
) -> tv_status {
    guard(|| match sample_wedge_of_circles(k, n_per, radius, noise_sd, outliers, seed) {
        Ok(cloud) => write_handle(out, tv_cloud { inner: cloud }),
        Err(e) => fail(&e),
    })
}

/// Number of points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_len(cloud: *const tv_cloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.len())
}

/// Ambient dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_dim(cloud: *const tv_cloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.dim())
}

/// Subsample strategy selector: 0 = uniform random, 1 = greedy max-min.
pub const TV_SUBSAMPLE_RANDOM: u32 = 0;
pub const TV_SUBSAMPLE_MAXMIN: u32 = 1;

/// Subsample `m` points into a new cloud handle.
#[no_mangle]
pub unsafe extern "C" fn tv_cloud_subsample(
    cloud: *const tv_cloud,
    m: usize,
    strategy: u32,
    seed: u64,
    out: *mut *mut tv_cloud,
) -> tv_status {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            return null_arg("cloud");
        };
        let strategy = match strategy {
            TV_SUBSAMPLE_RANDOM => SubsampleStrategy::Random,
            TV_SUBSAMPLE_MAXMIN => SubsampleStrategy::MaxMin,
            _ => {
                set_error("strategy must be 0 (random) or 1 (maxmin)");
                return tv_status::TV_ARGUMENT;
            }
        };
        match subsample(&cloud.inner, m, strategy, seed) {
            Ok(sub) => write_handle(out, tv_cloud { inner: sub }),
            Err(e) => fail(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn tv_cloud_free(cloud: *mut tv_cloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

// ---------------------------------------------------------------------------
// Persistence diagrams
// ---------------------------------------------------------------------------

/// Opaque handle to the persistence diagrams of one filtration,
/// one diagram per homology degree.
pub struct tv_diagram_set {
    inner: Vec<PersistenceDiagram>,
}

/// Compute Vietoris-Rips persistence diagrams for degrees 0..=max_degree.
/// Filtration values are simplex diameters (largest pairwise distance).
/// A negative `max_value` means the cloud's largest pairwise distance.
#[no_mangle]
pub unsafe extern "C" fn tv_persistence(
    cloud: *const tv_cloud,
    max_dim: usize,
    max_value: f64,
    max_degree: usize,
    out: *mut *mut tv_diagram_set,
) -> tv_status {
    guard(|| {
        let Some(cloud) = cloud.as_ref() else {
            return null_arg("cloud");
        };
        let dm = pairwise_distances(&cloud.inner);
        let cutoff = if max_value < 0.0 { dm.max_distance() } else { max_value };
        let result = vietoris_rips(&dm, max_dim, cutoff).and_then(|f| diagrams(&f, max_degree));
        match result {
            Ok(diags) => write_handle(out, tv_diagram_set { inner: diags }),
            Err(e) => fail(&e),
        }
    })
}

fn diagram_of(set: &tv_diagram_set, degree: usize) -> Option<&PersistenceDiagram> {
    set.inner.iter().find(|d| d.degree == degree)
}

/// Number of finite (birth, death) pairs in one degree; 0 if the degree
/// was not computed.
#[no_mangle]
pub unsafe extern "C" fn tv_diagram_point_count(
    set: *const tv_diagram_set,
    degree: usize,
) -> usize {
    set.as_ref()
        .and_then(|s| diagram_of(s, degree))
        .map_or(0, |d| d.points.len())
}

/// Copy the finite pairs of one degree into `buffer` as birth,death pairs
/// (2 doubles per point). `capacity` is the buffer length in doubles;
/// `written` receives the number of doubles written.
#[no_mangle]
pub unsafe extern "C" fn tv_diagram_points(
    set: *const tv_diagram_set,
    degree: usize,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> tv_status {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return null_arg("set");
        };
        if buffer.is_null() {
            return null_arg("buffer");
        }
        let points = diagram_of(set, degree).map_or(&[][..], |d| &d.points);
        let needed = 2 * points.len();
        if capacity < needed {
            set_error(&format!("buffer holds {capacity} doubles, need {needed}"));
            return tv_status::TV_ARGUMENT;
        }
        let out = std::slice::from_raw_parts_mut(buffer, needed);
        for (i, &(b, d)) in points.iter().enumerate() {
            out[2 * i] = b;
            out[2 * i + 1] = d;
        }
        if !written.is_null() {
            *written = needed;
        }
        tv_status::TV_OK
    })
}

/// Number of essential (never-dying) classes in one degree.
#[no_mangle]
pub unsafe extern "C" fn tv_diagram_essential_count(
    set: *const tv_diagram_set,
    degree: usize,
) -> usize {
    set.as_ref()
        .and_then(|s| diagram_of(s, degree))
        .map_or(0, |d| d.essentials.len())
}

#[no_mangle]
pub unsafe extern "C" fn tv_diagram_set_free(set: *mut tv_diagram_set) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Copy the descending degree-0 death vector into `buffer`. When `buffer`
/// is null, only reports the required length through `written`.
#[no_mangle]
pub unsafe extern "C" fn tv_death_vector(
    set: *const tv_diagram_set,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> tv_status {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return null_arg("set");
        };
        let empty = PersistenceDiagram::empty(0);
        let d0 = diagram_of(set, 0).unwrap_or(&empty);
        let dv = match death_vector(d0) {
            Ok(dv) => dv,
            Err(e) => return fail(&e),
        };
        if buffer.is_null() {
            if written.is_null() {
                return null_arg("written");
            }
            *written = dv.len();
            return tv_status::TV_OK;
        }
        if capacity < dv.len() {
            set_error(&format!("buffer holds {capacity} doubles, need {}", dv.len()));
            return tv_status::TV_ARGUMENT;
        }
        std::slice::from_raw_parts_mut(buffer, dv.len()).copy_from_slice(dv.deaths());
        if !written.is_null() {
            *written = dv.len();
        }
        tv_status::TV_OK
    })
}

// ---------------------------------------------------------------------------
// Persistence landscapes
// ---------------------------------------------------------------------------

/// Opaque handle to the persistence landscape of one diagram.
pub struct tv_landscape {
    inner: PersistenceLandscape,
}

/// Build the exact piecewise-linear landscape of one homology degree.
#[no_mangle]
pub unsafe extern "C" fn tv_landscape_build(
    set: *const tv_diagram_set,
    degree: usize,
    out: *mut *mut tv_landscape,
) -> tv_status {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return null_arg("set");
        };
        let empty = PersistenceDiagram::empty(degree);
        let diagram = diagram_of(set, degree).unwrap_or(&empty);
        write_handle(out, tv_landscape { inner: landscape(diagram) })
    })
}

/// Number of nonzero landscape functions.
#[no_mangle]
pub unsafe extern "C" fn tv_landscape_count(ls: *const tv_landscape) -> usize {
    ls.as_ref().map_or(0, |l| l.inner.len())
}

/// λ_k(t) for 1-based k; 0 beyond the last function or for a null handle.
#[no_mangle]
pub unsafe extern "C" fn tv_landscape_evaluate(
    ls: *const tv_landscape,
    k: usize,
    t: f64,
) -> f64 {
    ls.as_ref().map_or(0.0, |l| l.inner.evaluate(k, t))
}

/// Evaluate λ_1..λ_k on the grid t = a, a+delta, …, a+m·delta and write the
/// k·(m+1) values function-by-function into `buffer`.
#[no_mangle]
pub unsafe extern "C" fn tv_landscape_vectorize(
    ls: *const tv_landscape,
    k: usize,
    a: f64,
    delta: f64,
    m: usize,
    buffer: *mut f64,
    capacity: usize,
) -> tv_status {
    guard(|| {
        let Some(ls) = ls.as_ref() else {
            return null_arg("ls");
        };
        if buffer.is_null() {
            return null_arg("buffer");
        }
        let fv = match vectorize_landscape(&ls.inner, k, a, delta, m) {
            Ok(fv) => fv,
            Err(e) => return fail(&e),
        };
        if capacity < fv.values.len() {
            set_error(&format!(
                "buffer holds {capacity} doubles, need {}",
                fv.values.len()
            ));
            return tv_status::TV_ARGUMENT;
        }
        std::slice::from_raw_parts_mut(buffer, fv.values.len()).copy_from_slice(&fv.values);
        tv_status::TV_OK
    })
}

#[no_mangle]
pub unsafe extern "C" fn tv_landscape_free(ls: *mut tv_landscape) {
    if !ls.is_null() {
        drop(Box::from_raw(ls));
    }
}

// ---------------------------------------------------------------------------
// Statistics and classification
// ---------------------------------------------------------------------------

/// Statistic selector: 0 = L2 norm of the mean difference, 1 = sup norm.
pub const TV_STAT_L2_MEAN_DIFF: u32 = 0;
pub const TV_STAT_SUP_MEAN_DIFF: u32 = 1;

/// Outcome of a two-sample permutation test.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct tv_test_result {
    /// Observed statistic between the two groups as given.
    pub statistic: f64,
    /// Proportion of splits scoring at least the observed statistic.
    pub p_value: f64,
    /// Splits evaluated (all of them when exhaustive is nonzero).
    pub n_permutations: u64,
    /// 1 when every split was enumerated, 0 for Monte Carlo sampling.
    pub exhaustive: i32,
    pub seed: u64,
}

fn feature_rows(vectors: &[f64], rows: usize, dim: usize) -> Vec<FeatureVector> {
    (0..rows)
        .map(|i| FeatureVector {
            values: vectors[i * dim..(i + 1) * dim].to_vec(),
            kind: FeatureKind::Concatenated,
            grid: None,
        })
        .collect()
}

/// Two-sample permutation test over row-major feature vectors: the first
/// `n_a` rows form group A, the next `n_b` rows group B, each of `dim`
/// doubles. Exhaustive over all splits when feasible, else seeded Monte
/// Carlo with `n_permutations` draws.
#[no_mangle]
pub unsafe extern "C" fn tv_permutation_test(
    vectors: *const f64,
    n_a: usize,
    n_b: usize,
    dim: usize,
    statistic: u32,
    n_permutations: usize,
    seed: u64,
    out: *mut tv_test_result,
) -> tv_status {
    guard(|| {
        if vectors.is_null() {
            return null_arg("vectors");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let statistic = match statistic {
            TV_STAT_L2_MEAN_DIFF => Statistic::L2MeanDiff,
            TV_STAT_SUP_MEAN_DIFF => Statistic::SupMeanDiff,
            _ => {
                set_error("statistic must be 0 (l2) or 1 (sup)");
                return tv_status::TV_ARGUMENT;
            }
        };
        let flat = std::slice::from_raw_parts(vectors, (n_a + n_b) * dim);
        let rows = feature_rows(flat, n_a + n_b, dim);
        match permutation_test(&rows[..n_a], &rows[n_a..], statistic, n_permutations, seed) {
            Ok(r) => {
                *out = tv_test_result {
                    statistic: r.observed_statistic,
                    p_value: r.p_value,
                    n_permutations: r.n_permutations,
                    exhaustive: i32::from(r.exhaustive),
                    seed: r.seed,
                };
                tv_status::TV_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Stratified k-fold cross-validated linear SVM accuracy over row-major
/// feature vectors with 0/1 labels. Writes the mean held-out accuracy.
#[no_mangle]
pub unsafe extern "C" fn tv_cross_validate(
    vectors: *const f64,
    labels: *const u8,
    rows: usize,
    dim: usize,
    folds: usize,
    lambda: f64,
    epochs: usize,
    seed: u64,
    out_accuracy: *mut f64,
) -> tv_status {
    guard(|| {
        if vectors.is_null() {
            return null_arg("vectors");
        }
        if labels.is_null() {
            return null_arg("labels");
        }
        if out_accuracy.is_null() {
            return null_arg("out_accuracy");
        }
        let flat = std::slice::from_raw_parts(vectors, rows * dim);
        let ys = std::slice::from_raw_parts(labels, rows);
        let data = match LabeledDataset::new(
            feature_rows(flat, rows, dim),
            ys.iter().map(|&b| b != 0).collect(),
        ) {
            Ok(d) => d,
            Err(e) => return fail(&e),
        };
        match cross_validate(&data, folds, lambda, epochs, seed) {
            Ok(report) => {
                *out_accuracy = report.mean_accuracy;
                tv_status::TV_OK
            }
            Err(e) => return fail(&e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    unsafe fn square_cloud() -> *mut tv_cloud {
        let coords = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let mut cloud: *mut tv_cloud = ptr::null_mut();
        let status = tv_cloud_from_coords(coords.as_ptr(), 4, 2, &mut cloud);
        assert_eq!(status, tv_status::TV_OK);
        cloud
    }

    #[test]
    fn cloud_roundtrip_and_persistence() {
        unsafe {
            let cloud = square_cloud();
            assert_eq!(tv_cloud_len(cloud), 4);
            assert_eq!(tv_cloud_dim(cloud), 2);

            let mut set: *mut tv_diagram_set = ptr::null_mut();
            assert_eq!(tv_persistence(cloud, 2, -1.0, 1, &mut set), tv_status::TV_OK);
            assert_eq!(tv_diagram_point_count(set, 0), 3);
            assert_eq!(tv_diagram_essential_count(set, 0), 1);
            assert_eq!(tv_diagram_point_count(set, 1), 1);

            let mut buf = [0.0f64; 2];
            let mut written = 0usize;
            assert_eq!(
                tv_diagram_points(set, 1, buf.as_mut_ptr(), 2, &mut written),
                tv_status::TV_OK
            );
            assert_eq!(written, 2);
            assert!((buf[0] - 1.0).abs() < 1e-12);
            assert!((buf[1] - 2f64.sqrt()).abs() < 1e-12);

            let mut needed = 0usize;
            assert_eq!(
                tv_death_vector(set, ptr::null_mut(), 0, &mut needed),
                tv_status::TV_OK
            );
            assert_eq!(needed, 3);
            let mut deaths = [0.0f64; 3];
            assert_eq!(
                tv_death_vector(set, deaths.as_mut_ptr(), 3, &mut needed),
                tv_status::TV_OK
            );
            assert_eq!(deaths, [1.0, 1.0, 1.0]);

            tv_diagram_set_free(set);
            tv_cloud_free(cloud);
        }
    }

    #[test]
    fn landscape_evaluation_and_vectorization() {
        unsafe {
            let cloud = square_cloud();
            let mut set: *mut tv_diagram_set = ptr::null_mut();
            assert_eq!(tv_persistence(cloud, 2, -1.0, 1, &mut set), tv_status::TV_OK);
            let mut ls: *mut tv_landscape = ptr::null_mut();
            assert_eq!(tv_landscape_build(set, 1, &mut ls), tv_status::TV_OK);
            assert_eq!(tv_landscape_count(ls), 1);
            let mid = (1.0 + 2f64.sqrt()) / 2.0;
            let peak = (2f64.sqrt() - 1.0) / 2.0;
            assert!((tv_landscape_evaluate(ls, 1, mid) - peak).abs() < 1e-12);
            assert_eq!(tv_landscape_evaluate(ls, 2, mid), 0.0);

            let mut grid = [0.0f64; 6];
            assert_eq!(
                tv_landscape_vectorize(ls, 2, 1.0, 0.2071, 2, grid.as_mut_ptr(), 6),
                tv_status::TV_OK
            );
            assert!(grid[1] > 0.0, "midpoint sample nonzero");
            assert_eq!(grid[3..6], [0.0, 0.0, 0.0], "second function absent");

            // Undersized buffer is an argument error with a message.
            assert_eq!(
                tv_landscape_vectorize(ls, 2, 1.0, 0.2071, 2, grid.as_mut_ptr(), 3),
                tv_status::TV_ARGUMENT
            );
            let msg = CStr::from_ptr(tv_last_error_message());
            assert!(msg.to_str().unwrap().contains("need 6"));

            tv_landscape_free(ls);
            tv_diagram_set_free(set);
            tv_cloud_free(cloud);
        }
    }

    #[test]
    fn permutation_test_exact_answer() {
        unsafe {
            let mut rows = Vec::new();
            for _ in 0..5 {
                rows.extend_from_slice(&[1.0, 0.0]);
            }
            for _ in 0..5 {
                rows.extend_from_slice(&[0.0, 1.0]);
            }
            let mut result = tv_test_result {
                statistic: 0.0,
                p_value: 0.0,
                n_permutations: 0,
                exhaustive: 0,
                seed: 0,
            };
            let status = tv_permutation_test(
                rows.as_ptr(),
                5,
                5,
                2,
                TV_STAT_L2_MEAN_DIFF,
                999,
                1,
                &mut result,
            );
            assert_eq!(status, tv_status::TV_OK);
            assert_eq!(result.exhaustive, 1);
            assert_eq!(result.n_permutations, 252);
            assert_eq!(result.p_value, 2.0 / 252.0);
        }
    }

    #[test]
    fn cross_validation_separable() {
        unsafe {
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for i in 0..20 {
                let center = if i % 2 == 0 { -2.0 } else { 2.0 };
                rows.push(center + 0.01 * i as f64);
                labels.push((i % 2) as u8);
            }
            let mut acc = 0.0f64;
            let status = tv_cross_validate(
                rows.as_ptr(),
                labels.as_ptr(),
                20,
                1,
                5,
                1e-3,
                60,
                3,
                &mut acc,
            );
            assert_eq!(status, tv_status::TV_OK);
            assert_eq!(acc, 1.0);
        }
    }

    #[test]
    fn null_and_error_paths() {
        unsafe {
            let mut cloud: *mut tv_cloud = ptr::null_mut();
            assert_eq!(
                tv_cloud_from_coords(ptr::null(), 4, 2, &mut cloud),
                tv_status::TV_NULL_POINTER
            );
            let coords = [0.0, 0.0, 1.0];
            assert_eq!(
                tv_cloud_from_coords(coords.as_ptr(), 1, 0, &mut cloud),
                tv_status::TV_ARGUMENT
            );
            assert_eq!(
                tv_cloud_load(b"/no/such/file.csv\0".as_ptr() as *const c_char, false, &mut cloud),
                tv_status::TV_DATA
            );
            assert_eq!(tv_cloud_len(ptr::null()), 0);
            tv_cloud_free(ptr::null_mut());

            let c = square_cloud();
            let mut sub: *mut tv_cloud = ptr::null_mut();
            assert_eq!(
                tv_cloud_subsample(c, 9, TV_SUBSAMPLE_MAXMIN, 0, &mut sub),
                tv_status::TV_ARGUMENT,
                "cannot subsample 9 from 4"
            );
            assert_eq!(
                tv_cloud_subsample(c, 2, 7, 0, &mut sub),
                tv_status::TV_ARGUMENT,
                "unknown strategy"
            );
            assert_eq!(
                tv_cloud_subsample(c, 2, TV_SUBSAMPLE_RANDOM, 0, &mut sub),
                tv_status::TV_OK
            );
            assert_eq!(tv_cloud_len(sub), 2);
            tv_cloud_free(sub);
            tv_cloud_free(c);

            assert!(!tv_version().is_null());
        }
    }

    #[test]
    fn generated_header_exists_and_mentions_api() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("topovec.h");
        let text = std::fs::read_to_string(header).expect("header generated by build script");
        for symbol in [
            "tv_status",
            "tv_cloud_load",
            "tv_persistence",
            "tv_landscape_evaluate",
            "tv_permutation_test",
            "tv_cross_validate",
            "tv_last_error_message",
        ] {
            assert!(text.contains(symbol), "header missing {symbol}");
        }
    }
}
