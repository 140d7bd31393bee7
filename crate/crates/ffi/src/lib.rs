//! C ABI over the rotforge library.
//!
//! Objects cross the boundary as opaque handles created by `rf_*_load`,
//! `rf_*_build` or `rf_*_fit` and released with the matching `rf_*_free`.
//! Every fallible function returns an [`RfStatus`]; on failure the message
//! is kept per thread and can be read with [`rf_last_error_message`].
//! Handles are not synchronised: share one between threads only for
//! read-only calls.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use rotforge::budget::{fit_timing_model, TimeUnit, TimingModel, TimingObservation};
use rotforge::data::{load_any, ColumnSelector};
use rotforge::forests::{build_forest, Transform};
use rotforge::stats::{friedman, paired_t, wilcoxon_signed_rank, Orientation, ResultsMatrix};
use rotforge::{Dataset, Error, ForestConfig, ForestModel, TreeKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    NotFound = 3,
    Io = 4,
    Parse = 5,
    InvalidInput = 6,
    InvalidConfig = 7,
    Unfitted = 8,
    Stats = 9,
    BufferTooSmall = 10,
    Panic = 11,
    Other = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfForestKind {
    RotationForest = 0,
    RandomForest = 1,
    /// Uses `base` and `transform` of the config.
    Hybrid = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfTreeKind {
    C45 = 0,
    RandomTree = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfTransform {
    Bag = 0,
    BagPca = 1,
    Pca = 2,
}

/// Forest settings. Fill with `rf_forest_config_default` and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfForestConfig {
    pub kind: RfForestKind,
    pub base: RfTreeKind,
    pub transform: RfTransform,
    pub trees: usize,
    pub group_size: usize,
    pub sample_proportion: f64,
    /// Attributes per tree; 0 means all.
    pub max_attributes: usize,
    pub seed: u64,
}

pub struct RfDataset(Dataset);
pub struct RfForest(ForestModel);
pub struct RfTimingModel(TimingModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RfStatus {
    match e {
        Error::DatasetNotFound(_) => RfStatus::NotFound,
        Error::Io { .. } => RfStatus::Io,
        Error::Parse { .. }
        | Error::UnsupportedAttribute { .. }
        | Error::MissingValue { .. }
        | Error::NonNumeric { .. }
        | Error::RaggedRow { .. }
        | Error::Serde(_)
        | Error::Csv(_)
        | Error::Schema(_) => RfStatus::Parse,
        Error::SingleClass(_)
        | Error::InvalidDataset(_)
        | Error::DimensionMismatch { .. }
        | Error::QuotaExceedsClass { .. }
        | Error::NonFinite
        | Error::TooFewObservations { .. }
        | Error::RankDeficient => RfStatus::InvalidInput,
        Error::InvalidConfig(_) | Error::UnknownClassifier(_) => RfStatus::InvalidConfig,
        Error::Unfitted => RfStatus::Unfitted,
        Error::Stats(_) => RfStatus::Stats,
        Error::TimerResolution(_) => RfStatus::Other,
    }
}

enum Failure {
    Status(RfStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Status(RfStatus::NullPointer, "null pointer argument".into())
}

/// Runs `body`, converting errors and panics into a status and recording
/// the message.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_error();
            RfStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(RfStatus::InvalidUtf8, "string argument is not UTF-8".into()))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to fit) and returns the length of the full
/// message excluding the terminator; 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Loads an ARFF file, or a CSV file with a header row. `class_column` is a
/// column index, name or `last`; null means `last` (CSV only).
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_load(path: *const c_char, class_column: *const c_char, out: *mut *mut RfDataset) -> RfStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path)?);
        let selector = if class_column.is_null() {
            ColumnSelector::Last
        } else {
            str_arg(class_column)?.parse().expect("infallible")
        };
        put(out, RfDataset(load_any(&path, &selector)?))
    })
}

/// Dataset from row-major `n × m` values and labels in `0..n_classes`.
///
/// # Safety
/// `values` must hold `n * m` doubles, `labels` `n` entries; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_from_arrays(
    values: *const f64,
    n: usize,
    m: usize,
    labels: *const usize,
    n_classes: usize,
    out: *mut *mut RfDataset,
) -> RfStatus {
    guard(|| {
        let total = n
            .checked_mul(m)
            .ok_or_else(|| Failure::Status(RfStatus::InvalidInput, "n * m overflows".into()))?;
        let values = slice_arg(values, total)?.to_vec();
        let labels = slice_arg(labels, n)?.to_vec();
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Failure::Status(RfStatus::InvalidInput, format!("label {bad} out of range")));
        }
        let d = Dataset::new(
            "arrays",
            (0..m).map(|j| format!("x{j}")).collect(),
            values,
            labels,
            (0..n_classes).map(|c| c.to_string()).collect(),
        )?;
        put(out, RfDataset(d))
    })
}

/// # Safety
/// `d` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_n_cases(d: *const RfDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_cases())
}

/// # Safety
/// `d` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_n_attributes(d: *const RfDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_attributes())
}

/// # Safety
/// `d` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_n_classes(d: *const RfDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_classes())
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_free(d: *mut RfDataset) {
    free(d)
}

/// Default settings for a forest kind: rotation forest 200 trees, groups
/// of 3, proportion 0.5; random forest 500 random trees with bagging.
#[no_mangle]
pub extern "C" fn rf_forest_config_default(kind: RfForestKind) -> RfForestConfig {
    let base = match kind {
        RfForestKind::RandomForest => ForestConfig::random_forest(),
        _ => ForestConfig::rotation_forest(),
    };
    RfForestConfig {
        kind,
        base: match base.base {
            TreeKind::C45 => RfTreeKind::C45,
            TreeKind::RandomTree => RfTreeKind::RandomTree,
        },
        transform: match base.transform {
            Transform::Bag => RfTransform::Bag,
            Transform::BagPca => RfTransform::BagPca,
            Transform::Pca => RfTransform::Pca,
        },
        trees: base.trees,
        group_size: base.rotation.group_size,
        sample_proportion: base.rotation.sample_proportion,
        max_attributes: 0,
        seed: 0,
    }
}

fn forest_config(c: &RfForestConfig) -> ForestConfig {
    let mut cfg = match c.kind {
        RfForestKind::RotationForest => ForestConfig::rotation_forest(),
        RfForestKind::RandomForest => ForestConfig::random_forest(),
        RfForestKind::Hybrid => ForestConfig::hybrid(
            match c.base {
                RfTreeKind::C45 => TreeKind::C45,
                RfTreeKind::RandomTree => TreeKind::RandomTree,
            },
            match c.transform {
                RfTransform::Bag => Transform::Bag,
                RfTransform::BagPca => Transform::BagPca,
                RfTransform::Pca => Transform::Pca,
            },
        ),
    };
    cfg.trees = c.trees;
    cfg.rotation.group_size = c.group_size;
    cfg.rotation.sample_proportion = c.sample_proportion;
    cfg.max_attributes_per_tree = (c.max_attributes > 0).then_some(c.max_attributes);
    cfg.seed = c.seed;
    cfg
}

/// # Safety
/// `train` and `config` must be live pointers; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_build(train: *const RfDataset, config: *const RfForestConfig, out: *mut *mut RfForest) -> RfStatus {
    guard(|| {
        let train = handle(train)?;
        let cfg = forest_config(handle(config)?);
        put(out, RfForest(build_forest(&train.0, &cfg)?))
    })
}

/// # Safety
/// `f` must be null or a live forest handle.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_n_trees(f: *const RfForest) -> usize {
    f.as_ref().map_or(0, |f| f.0.members.len())
}

/// # Safety
/// `f` must be null or a live forest handle.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_n_classes(f: *const RfForest) -> usize {
    f.as_ref().map_or(0, |f| f.0.n_classes())
}

/// # Safety
/// `f` must be null or a live forest handle.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_n_attributes(f: *const RfForest) -> usize {
    f.as_ref().map_or(0, |f| f.0.n_attributes)
}

/// Class probabilities of one case. `out` receives `n_classes` doubles.
///
/// # Safety
/// `x` must hold `m` doubles and `out` `n_classes` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_predict_proba(
    f: *const RfForest,
    x: *const f64,
    m: usize,
    out: *mut f64,
    n_classes: usize,
) -> RfStatus {
    guard(|| {
        let f = handle(f)?;
        let p = f.0.predict_proba(slice_arg(x, m)?)?;
        if n_classes < p.len() {
            return Err(Failure::Status(
                RfStatus::BufferTooSmall,
                format!("output holds {n_classes} values, need {}", p.len()),
            ));
        }
        if out.is_null() {
            return Err(null());
        }
        ptr::copy_nonoverlapping(p.as_ptr(), out, p.len());
        Ok(())
    })
}

/// Predicted class index of one case (largest probability, lowest index on
/// ties).
///
/// # Safety
/// `x` must hold `m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_predict(f: *const RfForest, x: *const f64, m: usize, out: *mut usize) -> RfStatus {
    guard(|| {
        let class = handle(f)?.0.predict(slice_arg(x, m)?)?;
        *out.as_mut().ok_or_else(null)? = class;
        Ok(())
    })
}

/// # Safety
/// `f` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_save(f: *const RfForest, path: *const c_char) -> RfStatus {
    guard(|| Ok(handle(f)?.0.save(str_arg(path)?)?))
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_load(path: *const c_char, out: *mut *mut RfForest) -> RfStatus {
    guard(|| put(out, RfForest(ForestModel::load(str_arg(path)?)?)))
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_forest_free(f: *mut RfForest) {
    free(f)
}

/// The published timing model (hours).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_timing_published(out: *mut *mut RfTimingModel) -> RfStatus {
    guard(|| put(out, RfTimingModel(TimingModel::published())))
}

/// Fits the timing model to `len` observed full builds, times in seconds.
///
/// # Safety
/// `n`, `m` and `seconds` must each hold `len` entries; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_timing_fit(
    n: *const usize,
    m: *const usize,
    seconds: *const f64,
    len: usize,
    include_nlogn: bool,
    out: *mut *mut RfTimingModel,
) -> RfStatus {
    guard(|| {
        let (n, m, s) = (slice_arg(n, len)?, slice_arg(m, len)?, slice_arg(seconds, len)?);
        let obs: Vec<TimingObservation> = (0..len)
            .map(|i| TimingObservation {
                dataset: String::new(),
                n: n[i],
                m: m[i],
                seconds: s[i],
            })
            .collect();
        put(out, RfTimingModel(fit_timing_model(&obs, include_nlogn, TimeUnit::Seconds)?))
    })
}

/// Point prediction in seconds.
///
/// # Safety
/// `tm` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_timing_predict_seconds(tm: *const RfTimingModel, n: f64, m: f64, out: *mut f64) -> RfStatus {
    guard(|| {
        *out.as_mut().ok_or_else(null)? = handle(tm)?.0.predict_seconds(n, m);
        Ok(())
    })
}

/// Two-sided `1 − alpha` prediction interval in seconds. Fails with
/// `UNFITTED` for models without a design matrix.
///
/// # Safety
/// `tm` must be live; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_timing_interval_seconds(
    tm: *const RfTimingModel,
    n: f64,
    m: f64,
    alpha: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> RfStatus {
    guard(|| {
        let tm = &handle(tm)?.0;
        let (a, b) = tm.prediction_interval(n, m, alpha)?;
        let unit = tm.time_unit.seconds();
        *lo.as_mut().ok_or_else(null)? = a * unit;
        *hi.as_mut().ok_or_else(null)? = b * unit;
        Ok(())
    })
}

/// # Safety
/// `tm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_timing_free(tm: *mut RfTimingModel) {
    free(tm)
}

/// Two-sided Wilcoxon signed-rank p-value of paired samples.
///
/// # Safety
/// `x` and `y` must hold `len` doubles; `p` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_stats_wilcoxon(x: *const f64, y: *const f64, len: usize, p: *mut f64) -> RfStatus {
    guard(|| {
        let r = wilcoxon_signed_rank(slice_arg(x, len)?, slice_arg(y, len)?)?;
        *p.as_mut().ok_or_else(null)? = r.p_value;
        Ok(())
    })
}

/// Two-sided paired t-test p-value.
///
/// # Safety
/// `x` and `y` must hold `len` doubles; `p` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_stats_paired_t(x: *const f64, y: *const f64, len: usize, p: *mut f64) -> RfStatus {
    guard(|| {
        let r = paired_t(slice_arg(x, len)?, slice_arg(y, len)?)?;
        *p.as_mut().ok_or_else(null)? = r.p_value;
        Ok(())
    })
}

/// Friedman test on a row-major `n_datasets × n_classifiers` matrix.
/// `mean_ranks` may be null or receive `n_classifiers` doubles.
///
/// # Safety
/// `values` must hold `n_datasets * n_classifiers` doubles; outputs
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rf_stats_friedman(
    values: *const f64,
    n_datasets: usize,
    n_classifiers: usize,
    lower_is_better: bool,
    statistic: *mut f64,
    p: *mut f64,
    mean_ranks: *mut f64,
) -> RfStatus {
    guard(|| {
        let total = n_datasets
            .checked_mul(n_classifiers)
            .ok_or_else(|| Failure::Status(RfStatus::InvalidInput, "matrix size overflows".into()))?;
        let v = slice_arg(values, total)?;
        let rows: Vec<Vec<f64>> = if n_classifiers == 0 {
            Vec::new()
        } else {
            v.chunks(n_classifiers).map(<[f64]>::to_vec).collect()
        };
        let orientation = if lower_is_better {
            Orientation::LowerIsBetter
        } else {
            Orientation::HigherIsBetter
        };
        let matrix = ResultsMatrix::new(
            (0..n_classifiers).map(|c| c.to_string()).collect(),
            (0..n_datasets).map(|d| d.to_string()).collect(),
            rows,
            orientation,
        )?;
        let f = friedman(&matrix)?;
        *statistic.as_mut().ok_or_else(null)? = f.statistic;
        *p.as_mut().ok_or_else(null)? = f.p_value;
        if !mean_ranks.is_null() {
            ptr::copy_nonoverlapping(f.mean_ranks.as_ptr(), mean_ranks, n_classifiers);
        }
        Ok(())
    })
}
