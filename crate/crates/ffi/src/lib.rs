//! C ABI over the `loadshift` scheduling engine.
//!
//! Objects cross the boundary as opaque handles created by constructors such
//! as `ls_scenario_from_json` and released with the matching `ls_*_free`. Every fallible
//! call returns an [`LsStatus`]; on failure the message is available from
//! [`ls_last_error`] until the next call on the same thread.
//!
//! Schedules are exchanged as row-major byte arrays of `appliances × 24`
//! entries, each 0 (OFF) or 1 (ON).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use loadshift::{ga, metrics, oracle, pv, reference, runner, Error, GaRun, Scenario, ScenarioConfig, Schedule, SLOTS};

/// Slots per day, for sizing schedule buffers.
pub const LS_SLOTS: usize = 24;

const _: () = assert!(LS_SLOTS == SLOTS);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidScenario = 4,
    Dimension = 5,
    UndefinedPar = 6,
    SearchSpaceTooLarge = 7,
    Io = 8,
    InvalidArgument = 9,
    Panic = 10,
}

/// Opaque validated scenario.
pub struct LsScenario {
    inner: Scenario,
}

/// Opaque result of a GA run.
pub struct LsGaRun {
    inner: GaRun,
}

/// Evaluation of one schedule.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LsMetrics {
    /// Total energy consumed, kWh.
    pub energy_kwh: f64,
    /// Bill with no local generation.
    pub cost: f64,
    /// Bill for the grid share after PV dispatch; equals `cost` without PV.
    pub grid_cost: f64,
    /// Peak grid draw in any slot, kWh.
    pub peak_kwh: f64,
    /// Peak-to-average ratio of the grid draw; 0 when the grid supplies nothing.
    pub par: f64,
    /// GA fitness: grid cost plus demand-limit penalty.
    pub fitness: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> LsStatus {
    match err {
        Error::InvalidScenario(_) => LsStatus::InvalidScenario,
        Error::Parse(_) => LsStatus::Parse,
        Error::Io { .. } | Error::MissingArtifact(_) => LsStatus::Io,
        Error::Dimension { .. } => LsStatus::Dimension,
        Error::UndefinedPar => LsStatus::UndefinedPar,
        Error::TournamentSize { .. } => LsStatus::InvalidArgument,
        Error::SearchSpaceTooLarge { .. } => LsStatus::SearchSpaceTooLarge,
    }
}

fn fail(status: LsStatus, message: impl Into<String>) -> LsStatus {
    set_error(message.into());
    status
}

/// Runs `body`, mapping library errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), LsStatus>) -> LsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(LsStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, LsStatus>;
}

impl<T> OrStatus<T> for Result<T, Error> {
    fn or_status(self) -> Result<T, LsStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, LsStatus> {
    if p.is_null() {
        return Err(fail(LsStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LsStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, LsStatus> {
    p.as_ref()
        .ok_or_else(|| fail(LsStatus::NullPointer, "null handle"))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, LsStatus> {
    p.as_mut()
        .ok_or_else(|| fail(LsStatus::NullPointer, "null output pointer"))
}

unsafe fn schedule_arg(scenario: &Scenario, bits: *const u8, len: usize) -> Result<Schedule, LsStatus> {
    if bits.is_null() {
        return Err(fail(LsStatus::NullPointer, "null schedule buffer"));
    }
    let bytes = std::slice::from_raw_parts(bits, len);
    if bytes.iter().any(|b| *b > 1) {
        return Err(fail(LsStatus::InvalidArgument, "schedule entries must be 0 or 1"));
    }
    Schedule::from_bits(scenario.appliance_count(), bytes.iter().map(|b| *b == 1).collect()).or_status()
}

unsafe fn write_schedule(schedule: &Schedule, out: *mut u8, len: usize) -> Result<(), LsStatus> {
    if out.is_null() {
        return Err(fail(LsStatus::NullPointer, "null schedule buffer"));
    }
    if len != schedule.bits().len() {
        return Err(fail(
            LsStatus::Dimension,
            format!("schedule buffer needs {} bytes, got {len}", schedule.bits().len()),
        ));
    }
    let dst = std::slice::from_raw_parts_mut(out, len);
    for (d, b) in dst.iter_mut().zip(schedule.bits()) {
        *d = u8::from(*b);
    }
    Ok(())
}

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next `ls_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a scenario JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_json(json: *const c_char, out: *mut *mut LsScenario) -> LsStatus {
    guard(|| {
        let out = out_arg(out)?;
        let config = ScenarioConfig::from_json(str_arg(json)?).or_status()?;
        let inner = Scenario::new(config).or_status()?;
        *out = Box::into_raw(Box::new(LsScenario { inner }));
        Ok(())
    })
}

/// The bundled six-appliance reference household.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_reference(out: *mut *mut LsScenario) -> LsStatus {
    guard(|| {
        *out_arg(out)? = Box::into_raw(Box::new(LsScenario {
            inner: reference::reference_scenario(),
        }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_free(scenario: *mut LsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of appliance rows; schedule buffers hold this many × 24 bytes.
///
/// # Safety
/// `scenario` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_appliance_count(scenario: *const LsScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.appliance_count())
}

/// Replaces the GA seed.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_set_seed(scenario: *mut LsScenario, seed: u64) -> LsStatus {
    guard(|| {
        let s = scenario
            .as_mut()
            .ok_or_else(|| fail(LsStatus::NullPointer, "null handle"))?;
        let mut ga = s.inner.ga.clone();
        ga.seed = seed;
        s.inner = s.inner.with_ga(ga).or_status()?;
        Ok(())
    })
}

/// Evaluates a schedule against the scenario.
///
/// # Safety
/// `bits` must point to `len` readable bytes, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_evaluate(
    scenario: *const LsScenario,
    bits: *const u8,
    len: usize,
    out: *mut LsMetrics,
) -> LsStatus {
    guard(|| {
        let sc = &ref_arg(scenario)?.inner;
        let out = out_arg(out)?;
        let schedule = schedule_arg(sc, bits, len)?;
        let case = runner::CaseProfile::evaluate(&schedule, sc).or_status()?;
        *out = LsMetrics {
            energy_kwh: case.load.total(),
            cost: metrics::total_cost(&schedule, &sc.appliances, &sc.price).or_status()?,
            grid_cost: case.cost(),
            peak_kwh: case.grid.peak(),
            par: case.par(),
            fitness: ga::fitness(&ga::Chromosome::from_schedule(schedule), sc).or_status()?,
        };
        Ok(())
    })
}

/// Repairs a schedule in place so only demand-limit violations remain.
/// Empty CL rows are placed using a generator seeded with `seed`.
///
/// # Safety
/// `bits` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ls_repair(scenario: *const LsScenario, bits: *mut u8, len: usize, seed: u64) -> LsStatus {
    guard(|| {
        let sc = &ref_arg(scenario)?.inner;
        let schedule = schedule_arg(sc, bits, len)?;
        let mut rng = ga::rng_from_seed(seed);
        let fixed = loadshift::repair(&schedule, sc, &mut rng).or_status()?;
        write_schedule(&fixed, bits, len)
    })
}

/// Number of structural violations (all kinds) of a schedule.
///
/// # Safety
/// `bits` must point to `len` readable bytes, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_violation_count(
    scenario: *const LsScenario,
    bits: *const u8,
    len: usize,
    out: *mut usize,
) -> LsStatus {
    guard(|| {
        let sc = &ref_arg(scenario)?.inner;
        let out = out_arg(out)?;
        let schedule = schedule_arg(sc, bits, len)?;
        *out = loadshift::check_feasibility(&schedule, sc).or_status()?.len();
        Ok(())
    })
}

/// Runs the genetic algorithm with the scenario's settings.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_evolve(scenario: *const LsScenario, out: *mut *mut LsGaRun) -> LsStatus {
    guard(|| {
        let sc = &ref_arg(scenario)?.inner;
        let out = out_arg(out)?;
        *out = Box::into_raw(Box::new(LsGaRun {
            inner: ga::evolve(sc),
        }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`ls_evolve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ls_ga_run_free(run: *mut LsGaRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle or NULL (returns NaN).
#[no_mangle]
pub unsafe extern "C" fn ls_ga_run_best_fitness(run: *const LsGaRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.inner.best_fitness)
}

/// # Safety
/// `run` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ls_ga_run_generations(run: *const LsGaRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.generations_executed)
}

/// 1 when the run stopped on stagnation, 0 when it used every generation.
///
/// # Safety
/// `run` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ls_ga_run_stagnated(run: *const LsGaRun) -> i32 {
    run.as_ref()
        .map_or(0, |r| i32::from(r.inner.terminated_by == loadshift::Termination::Stagnation))
}

/// Copies the best schedule into `out`.
///
/// # Safety
/// `out` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ls_ga_run_schedule(run: *const LsGaRun, out: *mut u8, len: usize) -> LsStatus {
    guard(|| write_schedule(&ref_arg(run)?.inner.best_schedule, out, len))
}

/// Exhaustive optimum; refuses with `SearchSpaceTooLarge` above `cap`.
///
/// # Safety
/// `out_bits` must point to `len` writable bytes and `out_cost` be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_brute_force(
    scenario: *const LsScenario,
    cap: u64,
    out_bits: *mut u8,
    len: usize,
    out_cost: *mut f64,
) -> LsStatus {
    guard(|| {
        let sc = &ref_arg(scenario)?.inner;
        let cost = out_arg(out_cost)?;
        let result = oracle::brute_force_optimum(sc, u128::from(cap)).or_status()?;
        write_schedule(&result.best_schedule, out_bits, len)?;
        *cost = result.best_cost;
        Ok(())
    })
}

/// PV generation for `slot` under a Gaussian profile.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_pv_generation(
    sigma: f64,
    delta: f64,
    scale: f64,
    day_start: u32,
    day_end: u32,
    slot: u32,
    out: *mut f64,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out)?;
        if slot as usize >= SLOTS || sigma.is_nan() || sigma <= 0.0 || day_start > day_end || day_end as usize >= SLOTS {
            return Err(fail(LsStatus::InvalidArgument, "invalid PV profile or slot"));
        }
        let profile = loadshift::PvProfile {
            sigma,
            delta,
            scale,
            day_start: day_start as usize,
            day_end: day_end as usize,
        };
        *out = pv::pv_generation(slot as usize, &profile);
        Ok(())
    })
}

/// Runs the baseline-versus-GA comparison and returns the summary as a JSON
/// string to be released with [`ls_string_free`].
///
/// # Safety
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_compare(scenario: *const LsScenario, no_pv: bool, out_json: *mut *mut c_char) -> LsStatus {
    guard(|| {
        let sc = &ref_arg(scenario)?.inner;
        let out = out_arg(out_json)?;
        let (summary, _) = runner::execute(sc, no_pv).or_status()?;
        let json = serde_json::to_string(&summary).expect("serializable");
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping_covers_errors() {
        assert_eq!(status_of(&Error::UndefinedPar), LsStatus::UndefinedPar);
        assert_eq!(
            status_of(&Error::SearchSpaceTooLarge { size: 2, cap: 1 }),
            LsStatus::SearchSpaceTooLarge
        );
    }
}
