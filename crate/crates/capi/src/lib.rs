//! C ABI for the bcmnet library.
//!
//! Every handle type is opaque; callers create them through `bcmnet_*`
//! constructors, pass them by pointer, and release them with the matching
//! `*_free` function. Functions return a [`BcmnetStatus`] code; on any
//! non-OK status, [`bcmnet_last_error_message`] returns a thread-local,
//! NUL-terminated description of the failure (valid until the next failing
//! call on the same thread).

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::path::PathBuf;

use libc::{c_char, size_t};

use bcmnet::budget::{generate_schedule, schedule_csv, PipelineConfig, Schedule};
use bcmnet::data::{
    load_csv, model_cost, sample_costs, CostProfile, FeatureId, RawDataset, SchemaFile,
};
use bcmnet::net::{Optimizer, TrainConfig};
use bcmnet::prune::PruneConfig;
use bcmnet::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcmnetStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Training = 6,
    BudgetInfeasible = 7,
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let cstring = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = cstring);
}

fn fail(status: BcmnetStatus, msg: impl std::fmt::Display) -> BcmnetStatus {
    set_error(msg.to_string());
    status
}

fn status_of(e: &Error) -> BcmnetStatus {
    match e {
        Error::Io { .. } => BcmnetStatus::Io,
        Error::Csv { .. }
        | Error::InvalidSchema(_)
        | Error::MalformedNetwork(_)
        | Error::HeaderMismatch(_)
        | Error::LabelColumnMissing(_) => BcmnetStatus::Parse,
        Error::UnknownFeature(_)
        | Error::UnknownCategory { .. }
        | Error::DimensionMismatch { .. }
        | Error::DatasetTooSmall { .. }
        | Error::EmptyDataset
        | Error::EmptyFeatureSet
        | Error::InvalidParam(_)
        | Error::InvalidConfig(_) => BcmnetStatus::InvalidArgument,
        Error::SingleClass
        | Error::OneClassTraining { .. }
        | Error::NonFiniteLoss { .. }
        | Error::EscalationLimit { .. } => BcmnetStatus::Training,
        Error::BudgetInfeasible { .. } => BcmnetStatus::BudgetInfeasible,
    }
}

fn fail_with(e: Error) -> BcmnetStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

/// Message of the most recent failure on this thread; empty string when no
/// call has failed yet. The pointer stays valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn bcmnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, BcmnetStatus> {
    if ptr.is_null() {
        return Err(fail(BcmnetStatus::NullArgument, "path is NULL"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(BcmnetStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

macro_rules! nonnull {
    ($ptr:expr, $name:literal) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return fail(BcmnetStatus::NullArgument, concat!($name, " is NULL")),
        }
    };
}

/// Opaque: a parsed schema file (features, label, zero-cost ids).
pub struct BcmnetSchema {
    file: SchemaFile,
}

/// Opaque: a loaded dataset, preprocessed against its schema.
pub struct BcmnetDataset {
    data: RawDataset,
}

/// Opaque: per-feature measurement costs.
pub struct BcmnetCostProfile {
    profile: CostProfile,
}

/// Opaque: a budget-sorted list of models.
pub struct BcmnetSchedule {
    schedule: Schedule,
    // Kept for feature-name lookups when rendering CSV.
    schema: bcmnet::data::FeatureSchema,
}

/// Parses a TOML schema file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
/// On success `*out` owns a schema that must be released with
/// [`bcmnet_schema_free`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schema_load(
    path: *const c_char,
    out: *mut *mut BcmnetSchema,
) -> BcmnetStatus {
    if out.is_null() {
        return fail(BcmnetStatus::NullArgument, "out is NULL");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match SchemaFile::load(&path) {
        Ok(file) => {
            *out = Box::into_raw(Box::new(BcmnetSchema { file }));
            BcmnetStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// # Safety
/// `schema` must come from [`bcmnet_schema_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schema_free(schema: *mut BcmnetSchema) {
    if !schema.is_null() {
        drop(Box::from_raw(schema));
    }
}

/// Number of logical features the schema declares; 0 for NULL input.
///
/// # Safety
/// `schema` must be NULL or a pointer from [`bcmnet_schema_load`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schema_feature_count(schema: *const BcmnetSchema) -> size_t {
    schema.as_ref().map_or(0, |s| s.file.schema.n_features())
}

/// Loads a CSV dataset against a schema. Rows with missing or unparseable
/// cells are dropped (count them with [`bcmnet_dataset_dropped_rows`]).
///
/// # Safety
/// Pointer arguments must be valid; `*out` must be released with
/// [`bcmnet_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_dataset_load(
    path: *const c_char,
    schema: *const BcmnetSchema,
    out: *mut *mut BcmnetDataset,
) -> BcmnetStatus {
    if out.is_null() {
        return fail(BcmnetStatus::NullArgument, "out is NULL");
    }
    let schema = nonnull!(schema, "schema");
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_csv(&path, &schema.file.schema) {
        Ok(data) => {
            *out = Box::into_raw(Box::new(BcmnetDataset { data }));
            BcmnetStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// # Safety
/// `dataset` must come from [`bcmnet_dataset_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_dataset_free(dataset: *mut BcmnetDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Usable rows after preprocessing; 0 for NULL input.
///
/// # Safety
/// `dataset` must be NULL or a pointer from [`bcmnet_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_dataset_rows(dataset: *const BcmnetDataset) -> size_t {
    dataset.as_ref().map_or(0, |d| d.data.n_rows())
}

/// Rows dropped as outliers while loading; 0 for NULL input.
///
/// # Safety
/// `dataset` must be NULL or a pointer from [`bcmnet_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_dataset_dropped_rows(dataset: *const BcmnetDataset) -> size_t {
    dataset.as_ref().map_or(0, |d| d.data.dropped_rows())
}

/// Draws a uniform integer cost in `[lo, hi]` for every feature, except the
/// `n_zero` ids in `zero_ids` which cost 0. Deterministic per seed.
///
/// # Safety
/// `zero_ids` must point to `n_zero` readable u16 values (or be NULL when
/// `n_zero == 0`); `*out` must be released with [`bcmnet_cost_profile_free`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_cost_profile_sample(
    schema: *const BcmnetSchema,
    lo: u32,
    hi: u32,
    zero_ids: *const u16,
    n_zero: size_t,
    seed: u64,
    out: *mut *mut BcmnetCostProfile,
) -> BcmnetStatus {
    if out.is_null() {
        return fail(BcmnetStatus::NullArgument, "out is NULL");
    }
    let schema = nonnull!(schema, "schema");
    if zero_ids.is_null() && n_zero > 0 {
        return fail(BcmnetStatus::NullArgument, "zero_ids is NULL but n_zero > 0");
    }
    let exempt: BTreeSet<FeatureId> = if n_zero == 0 {
        BTreeSet::new()
    } else {
        std::slice::from_raw_parts(zero_ids, n_zero).iter().map(|&i| FeatureId(i)).collect()
    };
    match sample_costs(&schema.file.schema, lo, hi, &exempt, seed) {
        Ok(profile) => {
            *out = Box::into_raw(Box::new(BcmnetCostProfile { profile }));
            BcmnetStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Reads a `feature_name,cost` CSV profile.
///
/// # Safety
/// As for [`bcmnet_cost_profile_sample`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_cost_profile_load(
    path: *const c_char,
    schema: *const BcmnetSchema,
    out: *mut *mut BcmnetCostProfile,
) -> BcmnetStatus {
    if out.is_null() {
        return fail(BcmnetStatus::NullArgument, "out is NULL");
    }
    let schema = nonnull!(schema, "schema");
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match CostProfile::read_csv(&path, &schema.file.schema) {
        Ok(profile) => {
            *out = Box::into_raw(Box::new(BcmnetCostProfile { profile }));
            BcmnetStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// # Safety
/// `profile` must come from a profile constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_cost_profile_free(profile: *mut BcmnetCostProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Sums the costs of `n_ids` feature ids into `*out_cost`.
///
/// # Safety
/// `ids` must point to `n_ids` readable u16 values; `out_cost` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_model_cost(
    profile: *const BcmnetCostProfile,
    ids: *const u16,
    n_ids: size_t,
    out_cost: *mut u64,
) -> BcmnetStatus {
    let profile = nonnull!(profile, "profile");
    if out_cost.is_null() || (ids.is_null() && n_ids > 0) {
        return fail(BcmnetStatus::NullArgument, "ids/out_cost is NULL");
    }
    let features: BTreeSet<FeatureId> = if n_ids == 0 {
        BTreeSet::new()
    } else {
        std::slice::from_raw_parts(ids, n_ids).iter().map(|&i| FeatureId(i)).collect()
    };
    match model_cost(&features, &profile.profile) {
        Ok(cost) => {
            *out_cost = cost;
            BcmnetStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Parameters of a schedule generation run. `hidden_layers` points to
/// `n_hidden` layer widths (at least two).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BcmnetScheduleParams {
    pub b_max: u64,
    pub d: u64,
    pub p_min: f64,
    pub k: u32,
    pub seed: u64,
    pub hidden_layers: *const u32,
    pub n_hidden: size_t,
    pub epochs: u32,
    pub batch_size: u32,
    pub learning_rate: f64,
    pub momentum: f64,
    pub prune_c0: f64,
    pub prune_max_rounds: u32,
    pub independent_levels: bool,
}

/// Generates a budget-sorted list of models.
///
/// # Safety
/// All pointers must be valid; `params->hidden_layers` must point to
/// `params->n_hidden` readable u32 values. `*out` must be released with
/// [`bcmnet_schedule_free`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schedule_generate(
    dataset: *const BcmnetDataset,
    schema: *const BcmnetSchema,
    profile: *const BcmnetCostProfile,
    params: *const BcmnetScheduleParams,
    out: *mut *mut BcmnetSchedule,
) -> BcmnetStatus {
    if out.is_null() {
        return fail(BcmnetStatus::NullArgument, "out is NULL");
    }
    let dataset = nonnull!(dataset, "dataset");
    let schema = nonnull!(schema, "schema");
    let profile = nonnull!(profile, "profile");
    let params = nonnull!(params, "params");
    if params.hidden_layers.is_null() {
        return fail(BcmnetStatus::NullArgument, "params->hidden_layers is NULL");
    }
    let hidden: Vec<usize> = std::slice::from_raw_parts(params.hidden_layers, params.n_hidden)
        .iter()
        .map(|&w| w as usize)
        .collect();
    let pc = PipelineConfig {
        hidden_layers: hidden,
        k: params.k as usize,
        train: TrainConfig {
            epochs: params.epochs as usize,
            batch_size: params.batch_size as usize,
            learning_rate: params.learning_rate,
            optimizer: Optimizer::Momentum,
            momentum: params.momentum,
            seed: params.seed,
        },
        prune: PruneConfig { c0: params.prune_c0, max_rounds: params.prune_max_rounds },
        fold_seed: params.seed ^ 0x666F_6C64,
    };
    match generate_schedule(
        &dataset.data,
        &schema.file.schema,
        &profile.profile,
        params.b_max,
        params.d,
        params.p_min,
        &pc,
        params.independent_levels,
    ) {
        Ok(schedule) => {
            *out = Box::into_raw(Box::new(BcmnetSchedule {
                schedule,
                schema: schema.file.schema.clone(),
            }));
            BcmnetStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// # Safety
/// `schedule` must come from [`bcmnet_schedule_generate`] and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schedule_free(schedule: *mut BcmnetSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Number of models in the schedule; 0 for NULL input.
///
/// # Safety
/// `schedule` must be NULL or a pointer from [`bcmnet_schedule_generate`].
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schedule_len(schedule: *const BcmnetSchedule) -> size_t {
    schedule.as_ref().map_or(0, |s| s.schedule.entries.len())
}

/// Budget, accuracy, and model cost of entry `index` (NULL outputs are
/// skipped).
///
/// # Safety
/// Non-NULL output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schedule_entry(
    schedule: *const BcmnetSchedule,
    index: size_t,
    out_budget: *mut u64,
    out_accuracy: *mut f64,
    out_model_cost: *mut u64,
) -> BcmnetStatus {
    let schedule = nonnull!(schedule, "schedule");
    let Some(bcm) = schedule.schedule.entries.get(index) else {
        return fail(
            BcmnetStatus::InvalidArgument,
            format!("index {index} out of range ({} entries)", schedule.schedule.entries.len()),
        );
    };
    if !out_budget.is_null() {
        *out_budget = bcm.budget;
    }
    if !out_accuracy.is_null() {
        *out_accuracy = bcm.accuracy;
    }
    if !out_model_cost.is_null() {
        *out_model_cost = bcm.model_cost;
    }
    BcmnetStatus::Ok
}

/// Copies entry `index`'s feature ids into `out_ids` (up to `cap` values)
/// and stores the full count in `*out_len`. Call with `cap == 0` to query
/// the count first.
///
/// # Safety
/// `out_ids` must point to `cap` writable u16 slots (or be NULL when
/// `cap == 0`); `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schedule_entry_features(
    schedule: *const BcmnetSchedule,
    index: size_t,
    out_ids: *mut u16,
    cap: size_t,
    out_len: *mut size_t,
) -> BcmnetStatus {
    let schedule = nonnull!(schedule, "schedule");
    if out_len.is_null() || (out_ids.is_null() && cap > 0) {
        return fail(BcmnetStatus::NullArgument, "out_ids/out_len is NULL");
    }
    let Some(bcm) = schedule.schedule.entries.get(index) else {
        return fail(
            BcmnetStatus::InvalidArgument,
            format!("index {index} out of range ({} entries)", schedule.schedule.entries.len()),
        );
    };
    *out_len = bcm.features.len();
    if cap > 0 {
        let out = std::slice::from_raw_parts_mut(out_ids, cap);
        for (slot, &id) in out.iter_mut().zip(bcm.features.iter()) {
            *slot = id.0;
        }
    }
    BcmnetStatus::Ok
}

/// Writes the schedule's CSV table to `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bcmnet_schedule_write_csv(
    schedule: *const BcmnetSchedule,
    path: *const c_char,
) -> BcmnetStatus {
    let schedule = nonnull!(schedule, "schedule");
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let csv = match schedule_csv(&schedule.schedule, &schedule.schema) {
        Ok(csv) => csv,
        Err(e) => return fail_with(e),
    };
    match std::fs::write(&path, csv) {
        Ok(()) => BcmnetStatus::Ok,
        Err(e) => fail(BcmnetStatus::Io, format!("write {}: {e}", path.display())),
    }
}
