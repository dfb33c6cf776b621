//! C ABI for `nash-seek`.
//!
//! Every fallible function returns an [`NsStatus`]. On failure the message is
//! available from [`ns_last_error_message`] on the same thread until the next
//! failing call. Trajectories are opaque handles released with
//! [`ns_trajectory_free`]. Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nash_seek::analysis::{self, BoundConstants, NoiseTail};
use nash_seek::game::{self, PerturbationParams, StepSchedule};
use nash_seek::harness::{self, ExperimentConfig, Game};
use nash_seek::seeker::{self, Trajectory};
use nash_seek::wireless::{self, WirelessParams};
use nash_seek::{Error, ErrorClass};

/// Result of a call. Input, numerical and infeasibility failures use the
/// same numbers as the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    Infeasible = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsScheduleKind {
    /// `lambda_k = lambda0 / (k + 1)`.
    Vanishing = 0,
    Constant = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsSchedule {
    pub kind: NsScheduleKind,
    pub lambda: f64,
}

/// Scalar parameters of the power-control game. The `nodes x nodes` mean
/// gain matrix `E|h_ij|^2` (transmitter `i`, receiver `j`) is passed
/// separately.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsWirelessParams {
    pub nodes: usize,
    pub bandwidth: f64,
    pub price: f64,
    pub noise_power: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsBoundConstants {
    pub lipschitz: f64,
    pub action_bound: f64,
    pub window: f64,
    pub payoff_at_origin: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsNoiseTail {
    pub sum_squares: f64,
    pub edge_rate: f64,
    pub sup_delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NsTrackingBound {
    pub c_t: f64,
    pub k: f64,
    pub growth: f64,
    pub edge_term: f64,
    pub bound: f64,
}

/// A learner run together with the dither that produced it.
pub struct NsTrajectory {
    trajectory: Trajectory,
    perturbation: PerturbationParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer for `{name}`"));
            NsStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            match e.class() {
                ErrorClass::Input => NsStatus::InvalidInput,
                ErrorClass::Numerical => NsStatus::Numerical,
                ErrorClass::Infeasible => NsStatus::Infeasible,
            }
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            NsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn reference<'a, T>(p: *const T, name: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn string<'a>(p: *const c_char, name: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::invalid(name, "not valid UTF-8").into())
}

unsafe fn wireless_params(
    params: *const NsWirelessParams,
    variance: *const f64,
) -> FfiResult<WirelessParams> {
    let p = reference(params, "params")?;
    let n = p.nodes;
    let flat = slice(
        variance,
        n.checked_mul(n)
            .ok_or(Error::invalid("nodes", "too large"))?,
        "variance",
    )?;
    let wp = WirelessParams {
        bandwidth: p.bandwidth,
        price: p.price,
        noise_power: p.noise_power,
        variance: flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect(),
    };
    wp.validate()?;
    Ok(wp)
}

fn schedule(s: NsSchedule) -> FfiResult<StepSchedule> {
    Ok(match s.kind {
        NsScheduleKind::Vanishing => StepSchedule::vanishing(s.lambda)?,
        NsScheduleKind::Constant => StepSchedule::constant(s.lambda)?,
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Checks that the dither frequencies are positive, pairwise distinct and
/// free of sum relations.
///
/// # Safety
/// `omegas` must point to `count` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_validate_frequencies(omegas: *const f64, count: usize) -> NsStatus {
    guard(|| Ok(game::validate_frequencies(slice(omegas, count, "omegas")?)?))
}

/// `amplitude * sin(frequency * khat + phase)`.
#[no_mangle]
pub extern "C" fn ns_perturbation_signal(
    amplitude: f64,
    frequency: f64,
    phase: f64,
    khat: f64,
) -> f64 {
    amplitude * (frequency * khat + phase).sin()
}

/// Clock value `khat(k) = lambda_1 + ... + lambda_k`.
///
/// # Safety
/// `khat` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn ns_khat(s: NsSchedule, k: usize, khat: *mut f64) -> NsStatus {
    guard(|| {
        let v = schedule(s)?.khat(k);
        *out(khat, "khat")? = v;
        Ok(())
    })
}

/// Solves the mean-gain first-order system for the equilibrium powers.
///
/// # Safety
/// `variance` must hold `nodes * nodes` doubles and `power` room for `nodes`.
#[no_mangle]
pub unsafe extern "C" fn ns_wireless_equilibrium(
    params: *const NsWirelessParams,
    variance: *const f64,
    power: *mut f64,
) -> NsStatus {
    guard(|| {
        let wp = wireless_params(params, variance)?;
        let sol = wireless::analytic_equilibrium(&wp)?;
        slice_mut(power, wp.node_count(), "power")?.copy_from_slice(&sol.power);
        Ok(())
    })
}

/// Stationary point of the payoffs averaged over Rayleigh fading.
///
/// # Safety
/// As for [`ns_wireless_equilibrium`].
#[no_mangle]
pub unsafe extern "C" fn ns_wireless_fading_equilibrium(
    params: *const NsWirelessParams,
    variance: *const f64,
    power: *mut f64,
) -> NsStatus {
    guard(|| {
        let wp = wireless_params(params, variance)?;
        let p = wireless::exact_expected_equilibrium(&wp)?;
        slice_mut(power, wp.node_count(), "power")?.copy_from_slice(&p);
        Ok(())
    })
}

/// Row margins `E g_jj - sum_{i != j} E g_ij` and whether all are positive.
///
/// # Safety
/// `variance` must hold `nodes * nodes` doubles, `margins` room for `nodes`,
/// and `dominant` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_diagonal_dominance(
    params: *const NsWirelessParams,
    variance: *const f64,
    margins: *mut f64,
    dominant: *mut bool,
) -> NsStatus {
    guard(|| {
        let wp = wireless_params(params, variance)?;
        let r = wireless::diagonal_dominance_check(&wp);
        slice_mut(margins, wp.node_count(), "margins")?.copy_from_slice(&r.margins);
        *out(dominant, "dominant")? = r.dominant;
        Ok(())
    })
}

fn constants(c: &NsBoundConstants) -> BoundConstants {
    BoundConstants {
        lipschitz: c.lipschitz,
        action_bound: c.action_bound,
        window: c.window,
        payoff_at_origin: c.payoff_at_origin,
    }
}

/// `C_T = |r(0)| + L (C0 + |r(0)| T) e^{LT}`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_c_t(c: *const NsBoundConstants, value: *mut f64) -> NsStatus {
    guard(|| {
        let k = constants(reference(c, "constants")?);
        k.validate()?;
        *out(value, "value")? = k.c_t();
        Ok(())
    })
}

/// Finite-window tracking bound and its components.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_tracking_bound(
    c: *const NsBoundConstants,
    tail: *const NsNoiseTail,
    result: *mut NsTrackingBound,
) -> NsStatus {
    guard(|| {
        let t = reference(tail, "tail")?;
        let b = analysis::tracking_bound(
            &constants(reference(c, "constants")?),
            &NoiseTail {
                sum_squares: t.sum_squares,
                edge_rate: t.edge_rate,
                sup_delta: t.sup_delta,
            },
        )?;
        *out(result, "result")? = NsTrackingBound {
            c_t: b.c_t,
            k: b.k,
            growth: b.growth,
            edge_term: b.edge_term,
            bound: b.bound,
        };
        Ok(())
    })
}

/// Time for the envelope `amplitude e^{-decay t} delta0` to reach `eps`;
/// zero when it starts within precision.
///
/// # Safety
/// `time` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ns_convergence_time(
    delta0: f64,
    amplitude: f64,
    decay: f64,
    eps: f64,
    time: *mut f64,
) -> NsStatus {
    guard(|| {
        let t = analysis::convergence_time(delta0, amplitude, decay, eps)?;
        *out(time, "time")? = t.time;
        Ok(())
    })
}

fn run_config(cfg: &ExperimentConfig) -> FfiResult<Box<NsTrajectory>> {
    cfg.validate()?;
    let seeker_cfg = cfg.seeker_config()?;
    let trajectory = match cfg.game.build()? {
        Game::Wireless(g) => seeker::run(&g, &seeker_cfg)?,
        Game::Quadratic(g) => seeker::run(&g, &seeker_cfg)?,
    };
    Ok(Box::new(NsTrajectory {
        trajectory,
        perturbation: seeker_cfg.perturbation,
    }))
}

/// Runs the learner described by an experiment config (TOML text). Writes
/// no files.
///
/// # Safety
/// `config` must be a NUL-terminated string and `handle` valid. On success
/// `*handle` owns a trajectory to be released with [`ns_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn ns_run_config(
    config: *const c_char,
    handle: *mut *mut NsTrajectory,
) -> NsStatus {
    guard(|| {
        let slot = out(handle, "handle")?;
        let cfg = ExperimentConfig::from_toml(string(config, "config")?)?;
        *slot = Box::into_raw(run_config(&cfg)?);
        Ok(())
    })
}

/// Runs the two-pair power-control reference experiment with the given seed
/// and horizon.
///
/// # Safety
/// `handle` must be valid; see [`ns_run_config`].
#[no_mangle]
pub unsafe extern "C" fn ns_run_reference(
    seed: u64,
    horizon: usize,
    handle: *mut *mut NsTrajectory,
) -> NsStatus {
    guard(|| {
        let slot = out(handle, "handle")?;
        let mut cfg = ExperimentConfig::wireless_reference();
        cfg.seeker.seed = seed;
        cfg.seeker.horizon = horizon;
        *slot = Box::into_raw(run_config(&cfg)?);
        Ok(())
    })
}

/// Number of records (horizon + 1), or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_trajectory_len(t: *const NsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.trajectory.len())
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_trajectory_nodes(t: *const NsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.trajectory.node_count())
}

/// Copies record `k`. Any output pointer may be null to skip it; array
/// outputs need room for `ns_trajectory_nodes` doubles.
///
/// # Safety
/// `t` must be a live handle and non-null outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ns_trajectory_record(
    t: *const NsTrajectory,
    k: usize,
    khat: *mut f64,
    lambda: *mut f64,
    hat_a: *mut f64,
    a: *mut f64,
    payoff: *mut f64,
) -> NsStatus {
    guard(|| {
        let t = reference(t, "trajectory")?;
        let r = t.trajectory.records.get(k).ok_or_else(|| {
            Error::invalid(
                "k",
                format!("record {k} out of range (len {})", t.trajectory.len()),
            )
        })?;
        if let Some(v) = khat.as_mut() {
            *v = r.khat;
        }
        if let Some(v) = lambda.as_mut() {
            *v = r.lambda;
        }
        let n = r.hat_a.len();
        for (dst, src) in [(hat_a, &r.hat_a), (a, &r.a), (payoff, &r.payoff)] {
            if !dst.is_null() {
                slice_mut(dst, n, "output")?.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Mean of the intermediary actions over the last `fraction` of records,
/// optionally trimmed to a whole number of the slowest dither period.
///
/// # Safety
/// `t` must be a live handle and `mean` have room for the node count.
#[no_mangle]
pub unsafe extern "C" fn ns_trajectory_windowed_mean(
    t: *const NsTrajectory,
    fraction: f64,
    align_periods: bool,
    mean: *mut f64,
) -> NsStatus {
    guard(|| {
        let t = reference(t, "trajectory")?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(
                Error::invalid("fraction", format!("must be in (0, 1], got {fraction}")).into(),
            );
        }
        let traj = &t.trajectory;
        let width = ((traj.len() as f64) * fraction).ceil() as usize;
        let period = align_periods.then(|| t.perturbation.longest_period());
        let start = traj.window_start(width.max(1), period);
        slice_mut(mean, traj.node_count(), "mean")?.copy_from_slice(&traj.mean_hat_a_from(start));
        Ok(())
    })
}

/// Writes the trajectory CSV (`k,khat`, per node `hat_a_j,a_j,r_j`, then
/// `lambda`).
///
/// # Safety
/// `t` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ns_trajectory_write_csv(
    t: *const NsTrajectory,
    path: *const c_char,
) -> NsStatus {
    guard(|| {
        let t = reference(t, "trajectory")?;
        let file = File::create(string(path, "path")?).map_err(Error::from)?;
        Ok(harness::write_trajectory(
            &t.trajectory,
            BufWriter::new(file),
        )?)
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ns_trajectory_free(t: *mut NsTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
