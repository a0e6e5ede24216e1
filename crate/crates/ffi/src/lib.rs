//! C ABI for termminer.
//!
//! Objects cross the boundary as opaque handles created by `tm_*_new` or
//! `tm_*_load_*` and released with the matching `tm_*_free`. Every fallible
//! call returns a [`TmStatus`]; on failure `tm_last_error_message` describes
//! the error for the calling thread. Borrowed pointers handed out by
//! accessors stay valid until the owning handle is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use termminer::leader::ScanOrder;
use termminer::pipeline::read_corpus;
use termminer::segmentation::merge_sorted_into;
use termminer::{
    io, leader_cluster, levenshtein, mine_pairs, normalized_levenshtein, ClusteringResult, Error, MiningConfig,
    MiningParams, ScoringScheme, SubsequenceBag, TracebackMode, Unit, UnitSequence,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    InvalidParameter = 1,
    InvalidInput = 2,
    Io = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    IndexOutOfRange = 6,
    Internal = 7,
    Panic = 8,
}

impl From<&Error> for TmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => TmStatus::InvalidParameter,
            Error::Io { .. } | Error::MissingInput(_) => TmStatus::Io,
            Error::Invariant(_) => TmStatus::Internal,
            _ => TmStatus::InvalidInput,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: TmStatus, msg: impl Into<String>) -> TmStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> TmStatus {
    let status = TmStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`TmStatus::Panic`].
fn guard(f: impl FnOnce() -> TmStatus) -> TmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TmStatus::Panic, msg)
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(TmStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// # Safety
/// `ptr` must point to `len` readable values unless `len` is 0.
unsafe fn slice<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// # Safety
/// `s` must be a valid NUL-terminated string.
unsafe fn utf8<'a>(s: *const c_char, what: &str) -> Result<&'a str, TmStatus> {
    CStr::from_ptr(s).to_str().map_err(|_| fail(TmStatus::InvalidInput, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn tm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- distances

/// Edit distance between two unit sequences.
///
/// # Safety
/// `x` and `y` must point to `x_len` and `y_len` units; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tm_levenshtein(
    x: *const u32,
    x_len: usize,
    y: *const u32,
    y_len: usize,
    out: *mut usize,
) -> TmStatus {
    guard(|| {
        non_null!(out);
        let (Some(x), Some(y)) = (slice(x, x_len), slice(y, y_len)) else {
            return fail(TmStatus::NullPointer, "sequence pointer is null");
        };
        *out = levenshtein(x, y);
        TmStatus::Ok
    })
}

/// Length-normalized edit distance `b*L/sqrt(|x|^2+|y|^2)`.
///
/// # Safety
/// As [`tm_levenshtein`].
#[no_mangle]
pub unsafe extern "C" fn tm_normalized_levenshtein(
    x: *const u32,
    x_len: usize,
    y: *const u32,
    y_len: usize,
    b: f64,
    out: *mut f64,
) -> TmStatus {
    guard(|| {
        non_null!(out);
        let (Some(x), Some(y)) = (slice(x, x_len), slice(y, y_len)) else {
            return fail(TmStatus::NullPointer, "sequence pointer is null");
        };
        if !(b > 0.0 && b.is_finite()) {
            return fail(TmStatus::InvalidParameter, "scale b must be positive");
        }
        match normalized_levenshtein(x, y, b) {
            Ok(d) => {
                *out = d;
                TmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Merges pooled boundary times (ms, any order): times no more than
/// `window_ms` apart are chained and replaced by their mean.
///
/// `*out_len` receives the number of merged boundaries. When it exceeds
/// `out_cap` nothing is written to `out` and `BufferTooSmall` is returned.
///
/// # Safety
/// `times` must point to `len` values, `out` to `out_cap` writable values,
/// `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_merge_boundaries(
    times: *const f64,
    len: usize,
    window_ms: f64,
    out: *mut f64,
    out_cap: usize,
    out_len: *mut usize,
) -> TmStatus {
    guard(|| {
        non_null!(out_len);
        let Some(times) = slice(times, len) else {
            return fail(TmStatus::NullPointer, "`times` is null");
        };
        if !(window_ms > 0.0 && window_ms.is_finite()) {
            return fail(TmStatus::InvalidParameter, "window must be positive");
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return fail(TmStatus::InvalidInput, "boundary times must be finite and non-negative");
        }
        let mut sorted = times.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut merged = Vec::new();
        merge_sorted_into(&sorted, window_ms, &mut merged);
        *out_len = merged.len();
        if merged.len() > out_cap {
            return fail(TmStatus::BufferTooSmall, format!("need room for {} boundaries", merged.len()));
        }
        if !merged.is_empty() {
            non_null!(out);
            ptr::copy_nonoverlapping(merged.as_ptr(), out, merged.len());
        }
        TmStatus::Ok
    })
}

// ---------------------------------------------------------------- corpus

/// Collection of pseudo transcriptions.
pub struct TmCorpus {
    seqs: Vec<UnitSequence>,
}

#[no_mangle]
pub extern "C" fn tm_corpus_new() -> *mut TmCorpus {
    Box::into_raw(Box::new(TmCorpus { seqs: Vec::new() }))
}

/// Appends one utterance.
///
/// # Safety
/// `corpus` must be a live handle, `utt_id` a NUL-terminated string and
/// `units` must point to `len` units.
#[no_mangle]
pub unsafe extern "C" fn tm_corpus_push(
    corpus: *mut TmCorpus,
    utt_id: *const c_char,
    units: *const u32,
    len: usize,
) -> TmStatus {
    guard(|| {
        non_null!(corpus, utt_id);
        let id = match utf8(utt_id, "utterance id") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let Some(units) = slice(units, len) else {
            return fail(TmStatus::NullPointer, "`units` is null");
        };
        (*corpus).seqs.push(UnitSequence::from_units(id, units.to_vec()));
        TmStatus::Ok
    })
}

/// Loads pseudo transcriptions from a JSON lines file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_corpus_load_jsonl(path: *const c_char, out: *mut *mut TmCorpus) -> TmStatus {
    guard(|| {
        non_null!(path, out);
        let p = match utf8(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(s) => return s,
        };
        let seqs = match read_corpus(&p) {
            Ok(v) => v,
            Err(e) => return from_error(e),
        };
        *out = Box::into_raw(Box::new(TmCorpus { seqs }));
        TmStatus::Ok
    })
}

/// # Safety
/// `corpus` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_corpus_len(corpus: *const TmCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.seqs.len())
}

/// # Safety
/// `corpus` must have come from this library and not been freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn tm_corpus_free(corpus: *mut TmCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

// ---------------------------------------------------------------- mining

pub const TM_TRACEBACK_LAST_ROW: u32 = 0;
pub const TM_TRACEBACK_GLOBAL: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TmMiningParams {
    pub match_score: f64,
    pub mismatch_score: f64,
    pub gap_score: f64,
    /// `TM_TRACEBACK_LAST_ROW` or `TM_TRACEBACK_GLOBAL`.
    pub traceback: u32,
    pub min_length: usize,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

#[no_mangle]
pub extern "C" fn tm_mining_params_default() -> TmMiningParams {
    let d = MiningParams::default();
    TmMiningParams {
        match_score: d.scoring.match_score,
        mismatch_score: d.scoring.mismatch_score,
        gap_score: d.scoring.gap_score,
        traceback: TM_TRACEBACK_LAST_ROW,
        min_length: d.min_length,
        jobs: 0,
    }
}

impl TryFrom<&TmMiningParams> for MiningParams {
    type Error = TmStatus;

    fn try_from(p: &TmMiningParams) -> Result<Self, TmStatus> {
        let traceback = match p.traceback {
            TM_TRACEBACK_LAST_ROW => TracebackMode::LastRow,
            TM_TRACEBACK_GLOBAL => TracebackMode::Global,
            other => return Err(fail(TmStatus::InvalidParameter, format!("unknown traceback mode {other}"))),
        };
        Ok(MiningParams {
            scoring: ScoringScheme {
                match_score: p.match_score,
                mismatch_score: p.mismatch_score,
                gap_score: p.gap_score,
            },
            traceback,
            min_length: p.min_length,
            jobs: (p.jobs > 0).then_some(p.jobs),
        })
    }
}

/// Deduplicated subsequences mined from utterance pairs.
pub struct TmBag {
    bag: SubsequenceBag,
}

/// Aligns every pair of utterances and collects the subsequence bag.
///
/// # Safety
/// `corpus` must be a live handle, `params` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_mine_pairs(
    corpus: *const TmCorpus,
    params: *const TmMiningParams,
    out: *mut *mut TmBag,
) -> TmStatus {
    guard(|| {
        non_null!(corpus, params, out);
        let params = match MiningParams::try_from(&*params) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match mine_pairs(&(*corpus).seqs, &params) {
            Ok(bag) => {
                *out = Box::into_raw(Box::new(TmBag { bag }));
                TmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads a bag written by `tm_bag_write_jsonl` or the CLI.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_bag_load_jsonl(path: *const c_char, out: *mut *mut TmBag) -> TmStatus {
    guard(|| {
        non_null!(path, out);
        let p = match utf8(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(s) => return s,
        };
        match io::read_bag(&p) {
            Ok(bag) => {
                *out = Box::into_raw(Box::new(TmBag { bag }));
                TmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `bag` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_bag_len(bag: *const TmBag) -> usize {
    bag.as_ref().map_or(0, |b| b.bag.len())
}

/// Borrows the units of entry `index`.
///
/// # Safety
/// `bag` must be a live handle; `units` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_bag_entry_units(
    bag: *const TmBag,
    index: usize,
    units: *mut *const u32,
    len: *mut usize,
) -> TmStatus {
    guard(|| {
        non_null!(bag, units, len);
        let Some(e) = (*bag).bag.entries().get(index) else {
            return fail(TmStatus::IndexOutOfRange, format!("bag has no entry {index}"));
        };
        *units = e.units.as_ptr();
        *len = e.units.len();
        TmStatus::Ok
    })
}

/// # Safety
/// `bag` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tm_bag_write_jsonl(bag: *const TmBag, path: *const c_char) -> TmStatus {
    guard(|| {
        non_null!(bag, path);
        let p = match utf8(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(s) => return s,
        };
        match io::write_bag(&p, &(*bag).bag) {
            Ok(()) => TmStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// As [`tm_corpus_free`].
#[no_mangle]
pub unsafe extern "C" fn tm_bag_free(bag: *mut TmBag) {
    if !bag.is_null() {
        drop(Box::from_raw(bag));
    }
}

// ---------------------------------------------------------------- clustering

pub const TM_SCAN_FREQUENCY: u32 = 0;
pub const TM_SCAN_LENGTH: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TmClusterConfig {
    pub radius_t: f64,
    pub sep_a: f64,
    pub norm_b: f64,
    pub max_rounds: usize,
    /// `TM_SCAN_FREQUENCY` or `TM_SCAN_LENGTH`.
    pub scan_order: u32,
}

#[no_mangle]
pub extern "C" fn tm_cluster_config_default() -> TmClusterConfig {
    let d = MiningConfig::default();
    TmClusterConfig {
        radius_t: d.radius_t,
        sep_a: d.sep_a,
        norm_b: d.norm_b,
        max_rounds: termminer::leader::DEFAULT_MAX_ROUNDS,
        scan_order: TM_SCAN_FREQUENCY,
    }
}

/// Keyword clusters over a bag.
pub struct TmClustering {
    result: ClusteringResult,
}

/// Leader clustering of `bag`.
///
/// # Safety
/// `bag` must be a live handle, `config` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_leader_cluster(
    bag: *const TmBag,
    config: *const TmClusterConfig,
    out: *mut *mut TmClustering,
) -> TmStatus {
    guard(|| {
        non_null!(bag, config, out);
        let c = &*config;
        let scan_order = match c.scan_order {
            TM_SCAN_FREQUENCY => ScanOrder::Frequency,
            TM_SCAN_LENGTH => ScanOrder::Length,
            other => return fail(TmStatus::InvalidParameter, format!("unknown scan order {other}")),
        };
        let cfg =
            MiningConfig { radius_t: c.radius_t, sep_a: c.sep_a, norm_b: c.norm_b, scan_order, ..Default::default() };
        match leader_cluster(&(*bag).bag, &cfg, c.max_rounds) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(TmClustering { result }));
                TmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of clusters.
///
/// # Safety
/// `cl` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_len(cl: *const TmClustering) -> usize {
    cl.as_ref().map_or(0, |c| c.result.clusters.len())
}

/// # Safety
/// `cl` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_rounds(cl: *const TmClustering) -> usize {
    cl.as_ref().map_or(0, |c| c.result.rounds_run)
}

/// Number of bag entries outside every cluster.
///
/// # Safety
/// `cl` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_unassigned_len(cl: *const TmClustering) -> usize {
    cl.as_ref().map_or(0, |c| c.result.unassigned.len())
}

/// Borrows the centroid (medoid) units of cluster `index`.
///
/// # Safety
/// `cl` must be a live handle; `units` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_centroid(
    cl: *const TmClustering,
    index: usize,
    units: *mut *const u32,
    len: *mut usize,
) -> TmStatus {
    guard(|| {
        non_null!(cl, units, len);
        let cl = &*cl;
        let Some(c) = cl.result.clusters.get(index) else {
            return fail(TmStatus::IndexOutOfRange, format!("no cluster {index}"));
        };
        *units = c.centroid.as_ptr();
        *len = c.centroid.len();
        TmStatus::Ok
    })
}

/// Borrows the bag indices of the members of cluster `index`, ascending.
///
/// # Safety
/// `cl` must be a live handle; `members` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_members(
    cl: *const TmClustering,
    index: usize,
    members: *mut *const usize,
    len: *mut usize,
) -> TmStatus {
    guard(|| {
        non_null!(cl, members, len);
        let cl = &*cl;
        let Some(c) = cl.result.clusters.get(index) else {
            return fail(TmStatus::IndexOutOfRange, format!("no cluster {index}"));
        };
        *members = c.members.as_ptr();
        *len = c.members.len();
        TmStatus::Ok
    })
}

/// Writes the clusters in the CLI's `clusters.json` format.
///
/// # Safety
/// `cl` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_write_json(cl: *const TmClustering, path: *const c_char) -> TmStatus {
    guard(|| {
        non_null!(cl, path);
        let p = match utf8(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(s) => return s,
        };
        match io::write_clusters(&p, &(*cl).result) {
            Ok(()) => TmStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// As [`tm_corpus_free`].
#[no_mangle]
pub unsafe extern "C" fn tm_clustering_free(cl: *mut TmClustering) {
    if !cl.is_null() {
        drop(Box::from_raw(cl));
    }
}

const _: () = assert!(std::mem::size_of::<Unit>() == std::mem::size_of::<u32>());
