//! C ABI over the planning library.
//!
//! Every function returns a [`BiStatus`]; results come back through out-pointers. Objects
//! are opaque handles released with their `*_free` function. On failure the message is
//! kept per thread and read with [`bi_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bridge_inspect::cli::run_planner;
use bridge_inspect::gtsp::{self, GtspInstance, SolverBudget};
use bridge_inspect::scenario;
use bridge_inspect::summary::Planner;
use bridge_inspect::world::inspectable_set;
use bridge_inspect::{MissionLog, MissionOptions, ScenarioConfig, WorldModel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Scenario or instance text was rejected.
    ParseError = 3,
    MissionFailed = 4,
    InvalidArgument = 5,
    /// The caller's buffer is too small; the required size was written.
    BufferTooSmall = 6,
    SolverError = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiPlanner {
    Gatsbi = 0,
    Frontier = 1,
}

/// A loaded world with its mission parameters.
pub struct BiScenario {
    world: WorldModel,
    config: ScenarioConfig,
}

/// The record of a finished mission.
pub struct BiMissionLog {
    log: MissionLog,
}

pub struct BiGtspInstance {
    instance: GtspInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

type Res<T> = Result<T, (BiStatus, String)>;

fn guard(f: impl FnOnce() -> Res<()>) -> BiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BiStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BiStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Res<&'a str> {
    if p.is_null() {
        return Err((BiStatus::NullPointer, "string argument is null".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (BiStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Res<&'a T> {
    p.as_ref()
        .ok_or_else(|| (BiStatus::NullPointer, "handle is null".into()))
}

unsafe fn out<'a, T>(p: *mut T) -> Res<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| (BiStatus::NullPointer, "output pointer is null".into()))
}

/// Copies `s` plus a terminating nul into `buf`. `needed` receives the full size.
unsafe fn copy_out(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Res<()> {
    *out(needed)? = s.len() + 1;
    if buf.is_null() || cap < s.len() + 1 {
        return Err((BiStatus::BufferTooSmall, format!("need {} bytes", s.len() + 1)));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Message of the last failed call on this thread, empty after a success. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn bi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn bi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a nul-terminated string and `out_scenario` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_scenario_load(toml: *const c_char, out_scenario: *mut *mut BiScenario) -> BiStatus {
    guard(|| {
        let slot = out(out_scenario)?;
        let (world, config) =
            scenario::load_world(text(toml)?).map_err(|e| (BiStatus::ParseError, e.to_string()))?;
        *slot = Box::into_raw(Box::new(BiScenario { world, config }));
        Ok(())
    })
}

/// Loads one of the bundled scenarios by name.
///
/// # Safety
/// `name` must be a nul-terminated string and `out_scenario` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_scenario_load_bundled(name: *const c_char, out_scenario: *mut *mut BiScenario) -> BiStatus {
    guard(|| {
        let slot = out(out_scenario)?;
        let name = text(name)?;
        let (world, config) =
            scenario::load_bundled(name).map_err(|e| (BiStatus::InvalidArgument, e.to_string()))?;
        *slot = Box::into_raw(Box::new(BiScenario { world, config }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn bi_scenario_set_seed(scenario: *mut BiScenario, seed: u64) -> BiStatus {
    guard(|| {
        out(scenario)?.config.rng_seed = seed;
        Ok(())
    })
}

/// Number of bridge voxels that can be inspected at all.
///
/// # Safety
/// `scenario` must be a valid handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_scenario_inspectable_count(scenario: *const BiScenario, out_count: *mut usize) -> BiStatus {
    guard(|| {
        let s = handle(scenario)?;
        *out(out_count)? = inspectable_set(&s.world, &s.config.view).len();
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bi_scenario_free(scenario: *mut BiScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a full mission with default options.
///
/// # Safety
/// `scenario` must be a valid handle and `out_log` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_run_mission(
    scenario: *const BiScenario,
    planner: BiPlanner,
    out_log: *mut *mut BiMissionLog,
) -> BiStatus {
    guard(|| {
        let s = handle(scenario)?;
        let slot = out(out_log)?;
        let planner = match planner {
            BiPlanner::Gatsbi => Planner::Gatsbi,
            BiPlanner::Frontier => Planner::Frontier,
        };
        let log = run_planner(planner, &s.world, &s.config, MissionOptions::default())
            .map_err(|e| (BiStatus::MissionFailed, e.to_string()))?;
        *slot = Box::into_raw(Box::new(BiMissionLog { log }));
        Ok(())
    })
}

/// Final fraction of inspectable voxels inspected, in [0, 1].
///
/// # Safety
/// `log` must be a valid handle and `out_pct` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_log_final_pct(log: *const BiMissionLog, out_pct: *mut f64) -> BiStatus {
    guard(|| {
        *out(out_pct)? = handle(log)?.log.final_pct();
        Ok(())
    })
}

/// Number of timeline rows.
///
/// # Safety
/// `log` must be a valid handle and `out_rows` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_log_row_count(log: *const BiMissionLog, out_rows: *mut usize) -> BiStatus {
    guard(|| {
        *out(out_rows)? = handle(log)?.log.timeline.len();
        Ok(())
    })
}

/// Writes the timeline CSV into `buf`. Call with a null `buf` to query the size.
///
/// # Safety
/// `buf` must hold `cap` bytes (or be null); `out_needed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bi_log_timeline_csv(
    log: *const BiMissionLog,
    buf: *mut c_char,
    cap: usize,
    out_needed: *mut usize,
) -> BiStatus {
    guard(|| copy_out(&handle(log)?.log.timeline_csv(), buf, cap, out_needed))
}

/// Writes the timing CSV into `buf`, like [`bi_log_timeline_csv`].
///
/// # Safety
/// As for [`bi_log_timeline_csv`].
#[no_mangle]
pub unsafe extern "C" fn bi_log_timing_csv(
    log: *const BiMissionLog,
    buf: *mut c_char,
    cap: usize,
    out_needed: *mut usize,
) -> BiStatus {
    guard(|| copy_out(&handle(log)?.log.timing_csv(), buf, cap, out_needed))
}

/// # Safety
/// `log` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bi_log_free(log: *mut BiMissionLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Parses an instance in GTSPLIB text form.
///
/// # Safety
/// `gtsplib` must be a nul-terminated string and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bi_gtsp_parse(gtsplib: *const c_char, out_instance: *mut *mut BiGtspInstance) -> BiStatus {
    guard(|| {
        let slot = out(out_instance)?;
        let instance =
            gtsp::from_gtsplib(text(gtsplib)?).map_err(|e| (BiStatus::ParseError, e.to_string()))?;
        *slot = Box::into_raw(Box::new(BiGtspInstance { instance }));
        Ok(())
    })
}

/// # Safety
/// `instance` must be a valid handle and `out_vertices`, `out_clusters` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bi_gtsp_size(
    instance: *const BiGtspInstance,
    out_vertices: *mut usize,
    out_clusters: *mut usize,
) -> BiStatus {
    guard(|| {
        let inst = &handle(instance)?.instance;
        *out(out_vertices)? = inst.vertex_count();
        *out(out_clusters)? = inst.cluster_count();
        Ok(())
    })
}

unsafe fn write_tour(tour: &gtsp::Tour, cost: *mut f64, vertices: *mut usize, cap: usize, len: *mut usize) -> Res<()> {
    *out(cost)? = tour.total_cost;
    *out(len)? = tour.vertices.len();
    if vertices.is_null() || cap < tour.vertices.len() {
        return Err((BiStatus::BufferTooSmall, format!("need {} vertices", tour.vertices.len())));
    }
    std::ptr::copy_nonoverlapping(tour.vertices.as_ptr(), vertices, tour.vertices.len());
    Ok(())
}

/// Solves the instance heuristically. The tour starts with vertex 0 and visits one vertex
/// per cluster; `max_iterations` of 0 returns the construction only.
///
/// # Safety
/// `instance` must be a valid handle; `out_vertices` must hold `cap` entries;
/// `out_cost` and `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bi_gtsp_solve(
    instance: *const BiGtspInstance,
    seed: u64,
    max_iterations: usize,
    out_cost: *mut f64,
    out_vertices: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> BiStatus {
    guard(|| {
        let inst = &handle(instance)?.instance;
        let budget = SolverBudget {
            max_iterations,
            ..SolverBudget::default()
        };
        let tour = gtsp::solve(inst, budget, seed).map_err(|e| (BiStatus::SolverError, e.to_string()))?;
        write_tour(&tour, out_cost, out_vertices, cap, out_len)
    })
}

/// Exact optimum by enumeration; fails with `InvalidArgument` on instances too large.
///
/// # Safety
/// As for [`bi_gtsp_solve`].
#[no_mangle]
pub unsafe extern "C" fn bi_gtsp_brute_force(
    instance: *const BiGtspInstance,
    out_cost: *mut f64,
    out_vertices: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> BiStatus {
    guard(|| {
        let inst = &handle(instance)?.instance;
        let tour = gtsp::brute_force(inst).map_err(|e| (BiStatus::InvalidArgument, e.to_string()))?;
        write_tour(&tour, out_cost, out_vertices, cap, out_len)
    })
}

/// # Safety
/// `instance` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bi_gtsp_free(instance: *mut BiGtspInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}
