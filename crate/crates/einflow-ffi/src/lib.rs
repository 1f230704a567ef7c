//! C ABI over the flow laboratory. All functions return an [`EfStatus`];
//! results come back through out-pointers. Handles are opaque and must be
//! released with their matching `_free`.

use einflow::catalog;
use einflow::geometry::{asymptotic_summary, reconstruct};
use einflow::invariants::{invariance_audit, set_defect, SetName};
use einflow::model::{
    constraint_defects, curvature_terms, jacobian, vector_field, LambdaMode, ModelParams,
    PhaseState,
};
use einflow::shooting::{shoot, ShootFamily, ShootOptions, ShootSpec, TerminationEvent, Trajectory};
use einflow::spectrum::eigen_at;
use libc::{c_char, c_int, size_t};
use std::cell::RefCell;
use std::ffi::CStr;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    Unresolved = 3,
}

/// Termination kinds reported for a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfTermination {
    Converged = 0,
    ExitedRegion = 1,
    BudgetExhausted = 2,
    StepUnderflow = 3,
}

/// Opaque model handle.
pub struct EfModel {
    params: ModelParams,
}

/// Opaque trajectory handle.
pub struct EfTrajectory {
    traj: Trajectory,
    params: ModelParams,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: EfStatus, msg: impl Into<String>) -> EfStatus {
    set_error(msg);
    status
}

fn status_of(err: &einflow::Error) -> EfStatus {
    use einflow::Error::*;
    match err {
        StepUnderflow { .. } | ProjectionFailed { .. } | NegativeWsq { .. }
        | SamplerExhausted { .. } | SeedOutsideRegion(_) | Reconstruction(_) => {
            EfStatus::NumericalFailure
        }
        Unresolved(_) => EfStatus::Unresolved,
        _ => EfStatus::InvalidArgument,
    }
}

/// Copy the last error message (thread-local) into `buf`; returns the number
/// of bytes written, not counting the terminator.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes (or be null, in which
/// case the required length is returned).
#[no_mangle]
pub unsafe extern "C" fn ef_last_error(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if buf.is_null() || len == 0 {
            return bytes.len();
        }
        let n = bytes.len().min(len - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
        *buf.add(n) = 0;
        n
    })
}

/// Static version string of the underlying crate.
#[no_mangle]
pub extern "C" fn ef_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create a model handle. `negative_mode = false` restricts the flow to the
/// Ricci-flat boundary subsystem.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ef_model_new(m: u32, negative_mode: bool, out: *mut *mut EfModel) -> EfStatus {
    if out.is_null() {
        return fail(EfStatus::InvalidArgument, "out pointer is null");
    }
    let mode = if negative_mode { LambdaMode::Negative } else { LambdaMode::RicciFlat };
    match ModelParams::new(m, mode) {
        Ok(params) => {
            *out = Box::into_raw(Box::new(EfModel { params }));
            EfStatus::Ok
        }
        Err(e) => fail(EfStatus::InvalidArgument, e.to_string()),
    }
}

/// # Safety
/// `model` must come from [`ef_model_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ef_model_free(model: *mut EfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn state_from(ptr: *const f64) -> PhaseState {
    let s = std::slice::from_raw_parts(ptr, 6);
    PhaseState::new(s[0], s[1], s[2], s[3], s[4], s[5])
}

/// Evaluate the flow derivative at a 6-component state.
///
/// # Safety
/// `state` points to 6 readable doubles, `out` to 6 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ef_vector_field(
    model: *const EfModel,
    state: *const f64,
    out: *mut f64,
) -> EfStatus {
    if model.is_null() || state.is_null() || out.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let v = vector_field(&state_from(state), &(*model).params);
    std::ptr::copy_nonoverlapping(v.as_slice().as_ptr(), out, 6);
    EfStatus::Ok
}

/// Analytic Jacobian, written row-major into a 36-element buffer.
///
/// # Safety
/// `state` points to 6 readable doubles, `out` to 36 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ef_jacobian(
    model: *const EfModel,
    state: *const f64,
    out: *mut f64,
) -> EfStatus {
    if model.is_null() || state.is_null() || out.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let j = jacobian(&state_from(state), &(*model).params);
    for r in 0..6 {
        for c in 0..6 {
            *out.add(r * 6 + c) = j[(r, c)];
        }
    }
    EfStatus::Ok
}

/// Curvature scalars (R1, R2, R3, Rs, G, Wsq).
///
/// # Safety
/// `state` points to 6 readable doubles, `out` to 6 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ef_curvature_terms(
    model: *const EfModel,
    state: *const f64,
    out: *mut f64,
) -> EfStatus {
    if model.is_null() || state.is_null() || out.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let d = curvature_terms(&state_from(state), &(*model).params);
    for (i, v) in [d.r1, d.r2, d.r3, d.rs, d.g, d.wsq].into_iter().enumerate() {
        *out.add(i) = v;
    }
    EfStatus::Ok
}

/// Hyperplane and conservation defects.
///
/// # Safety
/// `state` points to 6 readable doubles; the out-pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn ef_constraint_defects(
    model: *const EfModel,
    state: *const f64,
    h_out: *mut f64,
    rf_out: *mut f64,
) -> EfStatus {
    if model.is_null() || state.is_null() || h_out.is_null() || rf_out.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let (h, rf) = constraint_defects(&state_from(state), &(*model).params);
    *h_out = h;
    *rf_out = rf;
    EfStatus::Ok
}

/// Labeled defects of a named invariant set. Writes at most `eq_cap` /
/// `ineq_cap` values and stores the true counts.
///
/// # Safety
/// Buffers must match their stated capacities; `set_name` is a C string.
#[no_mangle]
pub unsafe extern "C" fn ef_set_defect(
    model: *const EfModel,
    set_name: *const c_char,
    state: *const f64,
    eq_out: *mut f64,
    eq_cap: size_t,
    eq_len: *mut size_t,
    ineq_out: *mut f64,
    ineq_cap: size_t,
    ineq_len: *mut size_t,
) -> EfStatus {
    if model.is_null() || set_name.is_null() || state.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let Ok(name) = CStr::from_ptr(set_name).to_str() else {
        return fail(EfStatus::InvalidArgument, "set name is not utf-8");
    };
    let set = match SetName::parse(name) {
        Ok(s) => s,
        Err(e) => return fail(EfStatus::InvalidArgument, e.to_string()),
    };
    match set_defect(set, &state_from(state), &(*model).params) {
        Ok((eq, ineq)) => {
            if !eq_len.is_null() {
                *eq_len = eq.len();
            }
            if !ineq_len.is_null() {
                *ineq_len = ineq.len();
            }
            if !eq_out.is_null() {
                for (i, v) in eq.iter().take(eq_cap).enumerate() {
                    *eq_out.add(i) = *v;
                }
            }
            if !ineq_out.is_null() {
                for (i, v) in ineq.iter().take(ineq_cap).enumerate() {
                    *ineq_out.add(i) = *v;
                }
            }
            EfStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Number of catalog critical points for this model (family entries counted
/// through a 5-point lattice).
///
/// # Safety
/// `model` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ef_catalog_len(model: *const EfModel) -> size_t {
    if model.is_null() {
        return 0;
    }
    catalog::catalog(&(*model).params)
        .iter()
        .map(|e| e.sample_points(5).len())
        .sum()
}

/// Coordinates and residual of the `idx`-th catalog point. `coords_out`
/// receives 6 doubles; `residual_out` one.
///
/// # Safety
/// Buffers must be writable as stated; `name_out` takes up to `name_cap`
/// bytes including the terminator.
#[no_mangle]
pub unsafe extern "C" fn ef_catalog_point(
    model: *const EfModel,
    idx: size_t,
    coords_out: *mut f64,
    residual_out: *mut f64,
    name_out: *mut c_char,
    name_cap: size_t,
) -> EfStatus {
    if model.is_null() {
        return fail(EfStatus::InvalidArgument, "null model");
    }
    let params = (*model).params;
    let points: Vec<_> = catalog::catalog(&params)
        .iter()
        .flat_map(|e| e.sample_points(5))
        .collect();
    let Some(p) = points.get(idx) else {
        return fail(EfStatus::InvalidArgument, format!("index {idx} out of range"));
    };
    if !coords_out.is_null() {
        for (i, v) in [p.coords.x1, p.coords.x2, p.coords.x3, p.coords.y1, p.coords.y2, p.coords.y3]
            .into_iter()
            .enumerate()
        {
            *coords_out.add(i) = v;
        }
    }
    if !residual_out.is_null() {
        *residual_out = catalog::verify_critical(p, &params).residual;
    }
    if !name_out.is_null() && name_cap > 0 {
        let bytes = p.name.as_bytes();
        let n = bytes.len().min(name_cap - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), name_out as *mut u8, n);
        *name_out.add(n) = 0;
    }
    EfStatus::Ok
}

/// Full 6x6 spectrum at a named critical point: 6 (re, im) pairs plus
/// per-vector tangency flags against the two constraint normals.
///
/// # Safety
/// `values_out` holds 12 doubles; the flag buffers 6 bytes each.
#[no_mangle]
pub unsafe extern "C" fn ef_eigen(
    model: *const EfModel,
    point_name: *const c_char,
    values_out: *mut f64,
    tangent_e_out: *mut u8,
    tangent_boundary_out: *mut u8,
) -> EfStatus {
    if model.is_null() || point_name.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let Ok(name) = CStr::from_ptr(point_name).to_str() else {
        return fail(EfStatus::InvalidArgument, "point name is not utf-8");
    };
    let params = (*model).params;
    let point = match catalog::by_name(name, &params) {
        Ok(p) => p,
        Err(e) => return fail(EfStatus::InvalidArgument, e.to_string()),
    };
    let rep = eigen_at(&point, &params);
    for i in 0..6 {
        if !values_out.is_null() {
            *values_out.add(2 * i) = f64::NAN;
            *values_out.add(2 * i + 1) = f64::NAN;
        }
        if !tangent_e_out.is_null() {
            *tangent_e_out.add(i) = 0;
        }
        if !tangent_boundary_out.is_null() {
            *tangent_boundary_out.add(i) = 0;
        }
    }
    for (i, pair) in rep.pairs.iter().take(6).enumerate() {
        if !values_out.is_null() {
            *values_out.add(2 * i) = pair.re;
            *values_out.add(2 * i + 1) = pair.im;
        }
        if !tangent_e_out.is_null() {
            *tangent_e_out.add(i) = pair.tangent_to_e as u8;
        }
        if !tangent_boundary_out.is_null() {
            *tangent_boundary_out.add(i) = pair.tangent_to_boundary as u8;
        }
    }
    EfStatus::Ok
}

/// Integrate one shooting spec. `family`: 0 = zeta, 1 = gamma,
/// 2 = gamma-singular. Pass `eta_budget <= 0` or `rtol <= 0` for defaults.
///
/// # Safety
/// `s` points to 3 readable doubles; `out` receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn ef_shoot(
    model: *const EfModel,
    family: c_int,
    s: *const f64,
    epsilon: f64,
    eta_budget: f64,
    rtol: f64,
    out: *mut *mut EfTrajectory,
) -> EfStatus {
    if model.is_null() || s.is_null() || out.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let params = (*model).params;
    let fam = match family {
        0 => ShootFamily::Zeta,
        1 => ShootFamily::Gamma,
        2 => ShootFamily::GammaSingular,
        _ => return fail(EfStatus::InvalidArgument, format!("unknown family code {family}")),
    };
    let sv = std::slice::from_raw_parts(s, 3);
    let eps = if epsilon > 0.0 { epsilon } else { einflow::shooting::DEFAULT_EPSILON };
    let spec = match ShootSpec::with_options(fam, [sv[0], sv[1], sv[2]], params, eps, false) {
        Ok(sp) => sp,
        Err(e) => return fail(EfStatus::InvalidArgument, e.to_string()),
    };
    let mut opts = ShootOptions::default();
    if eta_budget > 0.0 {
        opts.eta_budget = eta_budget;
    }
    if rtol > 0.0 {
        opts.rtol = rtol;
    }
    match shoot(&spec, &opts) {
        Ok(traj) => {
            *out = Box::into_raw(Box::new(EfTrajectory { traj, params }));
            EfStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// # Safety
/// `traj` must come from [`ef_shoot`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ef_trajectory_free(traj: *mut EfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// `traj` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ef_trajectory_len(traj: *const EfTrajectory) -> size_t {
    if traj.is_null() {
        0
    } else {
        (*traj).traj.samples.len()
    }
}

/// Copy sample `idx` as (eta, X1, X2, X3, Y1, Y2, Y3, Wsq, h_defect,
/// rf_defect) into a 10-double buffer.
///
/// # Safety
/// `out` points to 10 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ef_trajectory_sample(
    traj: *const EfTrajectory,
    idx: size_t,
    out: *mut f64,
) -> EfStatus {
    if traj.is_null() || out.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let samples = &(*traj).traj.samples;
    let Some(s) = samples.get(idx) else {
        return fail(EfStatus::InvalidArgument, format!("sample index {idx} out of range"));
    };
    let row = [
        s.eta, s.state.x1, s.state.x2, s.state.x3, s.state.y1, s.state.y2, s.state.y3, s.wsq,
        s.h_defect, s.rf_defect,
    ];
    std::ptr::copy_nonoverlapping(row.as_ptr(), out, 10);
    EfStatus::Ok
}

/// Termination record of a trajectory: kind code, eta, the limit-point name
/// (empty unless converged), and y1 (NaN unless the hyperbolic line).
///
/// # Safety
/// Out-pointers must be writable as stated; `point_out` takes up to
/// `point_cap` bytes including the terminator.
#[no_mangle]
pub unsafe extern "C" fn ef_trajectory_termination(
    traj: *const EfTrajectory,
    kind_out: *mut EfTermination,
    eta_out: *mut f64,
    y1_out: *mut f64,
    point_out: *mut c_char,
    point_cap: size_t,
) -> EfStatus {
    if traj.is_null() {
        return fail(EfStatus::InvalidArgument, "null trajectory");
    }
    let term = &(*traj).traj.termination;
    let (kind, eta, y1, point) = match term {
        TerminationEvent::Converged { point, eta, y1, .. } => {
            (EfTermination::Converged, *eta, y1.unwrap_or(f64::NAN), point.clone())
        }
        TerminationEvent::ExitedRegion { face, eta, .. } => {
            (EfTermination::ExitedRegion, *eta, f64::NAN, face.clone())
        }
        TerminationEvent::BudgetExhausted { eta, .. } => {
            (EfTermination::BudgetExhausted, *eta, f64::NAN, String::new())
        }
        TerminationEvent::StepUnderflow { eta, .. } => {
            (EfTermination::StepUnderflow, *eta, f64::NAN, String::new())
        }
    };
    if !kind_out.is_null() {
        *kind_out = kind;
    }
    if !eta_out.is_null() {
        *eta_out = eta;
    }
    if !y1_out.is_null() {
        *y1_out = y1;
    }
    if !point_out.is_null() && point_cap > 0 {
        let bytes = point.as_bytes();
        let n = bytes.len().min(point_cap - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), point_out as *mut u8, n);
        *point_out.add(n) = 0;
    }
    EfStatus::Ok
}

/// Reconstruct the metric profile and report the asymptotic class:
/// 0 = AC, 1 = ALC, 2 = AH, 3 = unresolved. `beta_out` and `a_inf_out`
/// receive NaN when not applicable.
///
/// # Safety
/// Out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_asymptotics(
    traj: *const EfTrajectory,
    kind_out: *mut c_int,
    beta_out: *mut f64,
    a_inf_out: *mut f64,
) -> EfStatus {
    if traj.is_null() {
        return fail(EfStatus::InvalidArgument, "null trajectory");
    }
    let params = (*traj).params;
    let profile = match reconstruct(&(*traj).traj, &params) {
        Ok(p) => p,
        Err(e) => return fail(status_of(&e), e.to_string()),
    };
    match asymptotic_summary(&(*traj).traj, &profile, &params) {
        Ok(sum) => {
            if !kind_out.is_null() {
                *kind_out = match sum.kind {
                    einflow::geometry::AsymptoticKind::Ac => 0,
                    einflow::geometry::AsymptoticKind::Alc => 1,
                    einflow::geometry::AsymptoticKind::Ah => 2,
                    einflow::geometry::AsymptoticKind::Unresolved => 3,
                };
            }
            if !beta_out.is_null() {
                *beta_out = sum.beta.unwrap_or(f64::NAN);
            }
            if !a_inf_out.is_null() {
                *a_inf_out = sum.a_inf.unwrap_or(f64::NAN);
            }
            EfStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Run a flow-invariance audit; `verdict_out` is 1 on pass, 0 on fail.
/// `min_face_out` receives NaN when the set has no audited faces.
///
/// # Safety
/// `set_name` is a C string; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_audit(
    model: *const EfModel,
    set_name: *const c_char,
    samples: size_t,
    seed: u64,
    max_eq_out: *mut f64,
    min_face_out: *mut f64,
    verdict_out: *mut c_int,
) -> EfStatus {
    if model.is_null() || set_name.is_null() {
        return fail(EfStatus::InvalidArgument, "null pointer");
    }
    let Ok(name) = CStr::from_ptr(set_name).to_str() else {
        return fail(EfStatus::InvalidArgument, "set name is not utf-8");
    };
    let set = match SetName::parse(name) {
        Ok(s) => s,
        Err(e) => return fail(EfStatus::InvalidArgument, e.to_string()),
    };
    match invariance_audit(set, &(*model).params, samples, seed) {
        Ok(rep) => {
            if !max_eq_out.is_null() {
                *max_eq_out = rep.max_eq_defect;
            }
            if !min_face_out.is_null() {
                *min_face_out = rep.min_face_derivative.unwrap_or(f64::NAN);
            }
            if !verdict_out.is_null() {
                *verdict_out = rep.passed() as c_int;
            }
            EfStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn model_lifecycle_and_vector_field() {
        unsafe {
            let mut model: *mut EfModel = std::ptr::null_mut();
            assert_eq!(ef_model_new(1, false, &mut model), EfStatus::Ok);
            // P0 is critical
            let p0 = [1.0 / 3.0, 1.0 / 3.0, 0.0, 2.0_f64.sqrt(), 2.0_f64.sqrt() / 3.0, 0.0];
            let mut out = [1.0; 6];
            assert_eq!(ef_vector_field(model, p0.as_ptr(), out.as_mut_ptr()), EfStatus::Ok);
            assert!(out.iter().all(|v| v.abs() < 1e-14));
            let mut jac = [0.0; 36];
            assert_eq!(ef_jacobian(model, p0.as_ptr(), jac.as_mut_ptr()), EfStatus::Ok);
            assert!((jac[35] - 2.0 / 3.0).abs() > 0.0 || jac[35] != 0.0);
            ef_model_free(model);
        }
    }

    #[test]
    fn invalid_m_is_rejected_with_message() {
        unsafe {
            let mut model: *mut EfModel = std::ptr::null_mut();
            assert_eq!(ef_model_new(0, false, &mut model), EfStatus::InvalidArgument);
            let mut buf = [0i8; 128];
            let n = ef_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
        }
    }

    #[test]
    fn shoot_and_walk_trajectory() {
        unsafe {
            let mut model: *mut EfModel = std::ptr::null_mut();
            ef_model_new(1, false, &mut model);
            let s = [1.0, 0.0, 0.0];
            let mut traj: *mut EfTrajectory = std::ptr::null_mut();
            let st = ef_shoot(model, 0, s.as_ptr(), 1e-6, 150.0, 1e-10, &mut traj);
            assert_eq!(st, EfStatus::Ok);
            let n = ef_trajectory_len(traj);
            assert!(n > 100);
            let mut row = [0.0; 10];
            assert_eq!(ef_trajectory_sample(traj, n - 1, row.as_mut_ptr()), EfStatus::Ok);
            let mut kind = EfTermination::BudgetExhausted;
            let mut eta = 0.0;
            let mut y1 = 0.0;
            let mut name = [0i8; 32];
            ef_trajectory_termination(traj, &mut kind, &mut eta, &mut y1, name.as_mut_ptr(), 32);
            assert_eq!(kind, EfTermination::Converged);
            let name = CStr::from_ptr(name.as_ptr()).to_str().unwrap();
            assert_eq!(name, "PAC2");
            let mut ac_kind: c_int = -1;
            let mut beta = 0.0;
            let mut a_inf = 0.0;
            assert_eq!(ef_asymptotics(traj, &mut ac_kind, &mut beta, &mut a_inf), EfStatus::Ok);
            assert_eq!(ac_kind, 0); // AC
            assert!((beta - 0.6).abs() < 1e-4);
            ef_trajectory_free(traj);
            ef_model_free(model);
        }
    }

    #[test]
    fn audit_through_the_abi() {
        unsafe {
            let mut model: *mut EfModel = std::ptr::null_mut();
            ef_model_new(1, true, &mut model);
            let name = CString::new("S").unwrap();
            let mut max_eq = -1.0;
            let mut min_face = 0.0;
            let mut verdict = -1;
            let st = ef_audit(model, name.as_ptr(), 500, 7, &mut max_eq, &mut min_face, &mut verdict);
            assert_eq!(st, EfStatus::Ok);
            assert_eq!(verdict, 1);
            assert!(max_eq < 1e-9);
            // Spin(7) audit with the wrong mode is a clean error
            let spin = CString::new("BSpin7minus").unwrap();
            let st = ef_audit(model, spin.as_ptr(), 10, 7, &mut max_eq, &mut min_face, &mut verdict);
            assert_eq!(st, EfStatus::InvalidArgument);
            ef_model_free(model);
        }
    }

    #[test]
    fn set_defects_and_catalog_walk() {
        unsafe {
            let mut model: *mut EfModel = std::ptr::null_mut();
            ef_model_new(1, true, &mut model);
            let n = ef_catalog_len(model);
            assert!(n > 10);
            let mut coords = [0.0; 6];
            let mut res = 1.0;
            let mut name = [0i8; 32];
            for i in 0..n {
                assert_eq!(
                    ef_catalog_point(model, i, coords.as_mut_ptr(), &mut res, name.as_mut_ptr(), 32),
                    EfStatus::Ok
                );
                assert!(res < 1e-10);
            }
            let s_name = CString::new("S").unwrap();
            let p0 = [1.0 / 3.0, 1.0 / 3.0, 0.0, 2.0_f64.sqrt(), 2.0_f64.sqrt() / 3.0, 0.0];
            let mut eq = [0.0; 4];
            let mut ineq = [0.0; 12];
            let (mut eq_len, mut ineq_len) = (0usize, 0usize);
            assert_eq!(
                ef_set_defect(
                    model, s_name.as_ptr(), p0.as_ptr(),
                    eq.as_mut_ptr(), 4, &mut eq_len,
                    ineq.as_mut_ptr(), 12, &mut ineq_len
                ),
                EfStatus::Ok
            );
            assert_eq!(eq_len, 1);
            assert_eq!(ineq_len, 10);
            ef_model_free(model);
        }
    }
}
