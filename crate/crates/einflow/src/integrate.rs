//! Adaptive Dormand-Prince 5(4) integration of the flow, with Newton
//! renormalization onto the constraint surfaces for boundary-restricted runs.

use crate::error::{Error, Result};
use crate::model::{
    constraint_defects, normal_boundary, normal_hyperplane, vector_field, ModelParams, PhaseState,
};
use nalgebra::{DMatrix, DVector, Vector6};
use serde::{Deserialize, Serialize};

/// Butcher tableau of the Dormand-Prince 5(4) pair (the flow is autonomous,
/// so the stage abscissae are not needed).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub const H_MIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub safety: f64,
    pub beta: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions { rtol: 1e-10, atol: 1e-12, h_max: 1.0, safety: 0.9, beta: 0.04 }
    }
}

/// One fixed Dormand-Prince step; returns (y1, err_estimate, f_at_y1).
/// `f1` must be the derivative at `y`.
pub fn dopri5_step<F>(f: &F, y: &Vector6<f64>, f1: &Vector6<f64>, h: f64) -> (Vector6<f64>, Vector6<f64>, Vector6<f64>)
where
    F: Fn(&Vector6<f64>) -> Vector6<f64>,
{
    let mut k = [Vector6::zeros(); 7];
    k[0] = *f1;
    for i in 1..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            if A[i][j] != 0.0 {
                yi += *kj * (h * A[i][j]);
            }
        }
        k[i] = f(&yi);
    }
    let mut y1 = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        if A[6][j] != 0.0 {
            y1 += *kj * (h * A[6][j]);
        }
    }
    let mut err = Vector6::zeros();
    for (j, kj) in k.iter().enumerate() {
        if E[j] != 0.0 {
            err += *kj * (h * E[j]);
        }
    }
    // FSAL: k7 is f(y1)
    (y1, err, k[6])
}

/// Adaptive driver state.
pub struct Dopri5<'a> {
    params: &'a ModelParams,
    pub opts: StepOptions,
    pub eta: f64,
    pub y: Vector6<f64>,
    f_cur: Vector6<f64>,
    pub h: f64,
    err_old: f64,
    pub n_accepted: u64,
    pub n_rejected: u64,
}

/// Result of one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct Accepted {
    pub eta_prev: f64,
    pub eta: f64,
    pub y_prev: Vector6<f64>,
    pub y: Vector6<f64>,
    pub f_prev: Vector6<f64>,
    pub f: Vector6<f64>,
}

impl<'a> Dopri5<'a> {
    pub fn new(params: &'a ModelParams, y0: Vector6<f64>, eta0: f64, opts: StepOptions) -> Self {
        let f0 = vector_field(&PhaseState::from_vector(&y0), params);
        // conservative initial step from the derivative scale
        let scale = f0.amax().max(1e-8);
        let h = (0.01 / scale).min(opts.h_max).max(1e-8);
        Dopri5 {
            params,
            opts,
            eta: eta0,
            y: y0,
            f_cur: f0,
            h,
            err_old: 1e-4,
            n_accepted: 0,
            n_rejected: 0,
        }
    }

    /// Re-evaluate the cached derivative (after an external projection).
    pub fn resync(&mut self) {
        self.f_cur = vector_field(&PhaseState::from_vector(&self.y), self.params);
    }

    pub fn state(&self) -> PhaseState {
        PhaseState::from_vector(&self.y)
    }

    /// Advance by one accepted step, not exceeding `eta_end`.
    pub fn advance(&mut self, eta_end: f64) -> Result<Accepted> {
        let params = self.params;
        let f = |v: &Vector6<f64>| vector_field(&PhaseState::from_vector(v), params);
        loop {
            let h = self.h.min(eta_end - self.eta).min(self.opts.h_max);
            if h < H_MIN {
                return Err(Error::StepUnderflow { eta: self.eta, h });
            }
            let (y1, err_vec, f1) = dopri5_step(&f, &self.y, &self.f_cur, h);
            let mut err = 0.0;
            for i in 0..6 {
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y1[i].abs());
                let q = err_vec[i] / sc;
                err += q * q;
            }
            err = (err / 6.0).sqrt();

            // PI step-size controller
            let expo1 = 0.2 - self.opts.beta * 0.75;
            let facold = self.err_old.max(1e-4);
            let fac11 = err.max(1e-300).powf(expo1);
            let fac = (fac11 / facold.powf(self.opts.beta) / self.opts.safety).clamp(0.2, 5.0);
            let h_new = h / fac;

            if err <= 1.0 {
                let out = Accepted {
                    eta_prev: self.eta,
                    eta: self.eta + h,
                    y_prev: self.y,
                    y: y1,
                    f_prev: self.f_cur,
                    f: f1,
                };
                self.eta += h;
                self.y = y1;
                self.f_cur = f1;
                self.err_old = err.max(1e-4);
                self.h = h_new.min(self.opts.h_max);
                self.n_accepted += 1;
                return Ok(out);
            }
            self.h = h_new;
            self.n_rejected += 1;
        }
    }
}

/// Equality constraints re-imposed when renormalizing a boundary-restricted
/// trajectory. The conservation-surface and hyperplane rows are always
/// present; a subsystem lock adds its defining equalities so that rounding
/// noise cannot excite the transverse unstable modes of a symmetric seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsystemLock {
    None,
    /// a^2 = 2 b^2 imposed: X1 = X2, Y1 = sqrt(2)
    RoundFiber,
    /// b^2 = 2 c^2 imposed: X2 = X3, 2 Y2 = Y3
    FubiniStudy,
}

/// Newton projection onto {h = 0, 1 - G - R_s = 0} (plus lock equalities),
/// correcting along the constraint gradients.
pub fn project_onto_boundary(
    y: &Vector6<f64>,
    params: &ModelParams,
    lock: SubsystemLock,
) -> Result<Vector6<f64>> {
    let mut s = *y;
    for _ in 0..50 {
        let st = PhaseState::from_vector(&s);
        let (h, rf) = constraint_defects(&st, params);
        let mut cons: Vec<f64> = vec![h, -rf];
        let mut grads: Vec<Vector6<f64>> = vec![normal_hyperplane(params), normal_boundary(&st, params)];
        match lock {
            SubsystemLock::None => {}
            SubsystemLock::RoundFiber => {
                cons.push(st.x1 - st.x2);
                grads.push(Vector6::new(1.0, -1.0, 0.0, 0.0, 0.0, 0.0));
                cons.push(st.y1 - std::f64::consts::SQRT_2);
                grads.push(Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0));
            }
            SubsystemLock::FubiniStudy => {
                cons.push(st.x2 - st.x3);
                grads.push(Vector6::new(0.0, 1.0, -1.0, 0.0, 0.0, 0.0));
                cons.push(2.0 * st.y2 - st.y3);
                grads.push(Vector6::new(0.0, 0.0, 0.0, 0.0, 2.0, -1.0));
            }
        }
        let worst = cons.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        if worst < 1e-14 {
            return Ok(s);
        }
        let k = cons.len();
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = grads[i].dot(&grads[j]);
            }
        }
        let rhs = DVector::from_iterator(k, cons.iter().map(|c| -c));
        let sol = gram
            .lu()
            .solve(&rhs)
            .ok_or(Error::ProjectionFailed { residual: worst })?;
        for (i, g) in grads.iter().enumerate() {
            s += g * sol[i];
        }
    }
    let st = PhaseState::from_vector(&s);
    let (h, rf) = constraint_defects(&st, params);
    let worst = h.abs().max(rf.abs());
    if worst < 1e-12 {
        Ok(s)
    } else {
        Err(Error::ProjectionFailed { residual: worst })
    }
}

/// Cubic Hermite evaluation on one step of an accepted segment.
pub fn hermite(seg: &Accepted, eta: f64) -> Vector6<f64> {
    let h = seg.eta - seg.eta_prev;
    let s = ((eta - seg.eta_prev) / h).clamp(0.0, 1.0);
    let s2 = s * s;
    let s3 = s2 * s;
    seg.y_prev * (2.0 * s3 - 3.0 * s2 + 1.0)
        + seg.f_prev * (h * (s3 - 2.0 * s2 + s))
        + seg.y * (-2.0 * s3 + 3.0 * s2)
        + seg.f * (h * (s3 - s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LambdaMode;

    #[test]
    fn fixed_step_order_at_least_four() {
        // frozen-X subproblem: y' = c * y with c = X1 - X2 constant
        let c = -2.0;
        let f = |v: &Vector6<f64>| Vector6::new(c * v[0], 0.0, 0.0, 0.0, 0.0, 0.0);
        let y0 = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let t_end = 2.0;
        let exact = (c * t_end).exp();
        let mut errs = Vec::new();
        for &n in &[8_usize, 16, 32, 64] {
            let h = t_end / n as f64;
            let mut y = y0;
            let mut fy = f(&y);
            for _ in 0..n {
                let (y1, _, f1) = dopri5_step(&f, &y, &fy, h);
                y = y1;
                fy = f1;
            }
            errs.push((y[0] - exact).abs());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 4.0, "observed order {order:.2} (errors {errs:?})");
        }
    }

    #[test]
    fn adaptive_tolerance_is_respected() {
        // integrate around P0 on the boundary and check the defect stays tiny
        let params = ModelParams::new(1, LambdaMode::RicciFlat).unwrap();
        let p0 = crate::catalog::p0(&params).coords;
        let mut y0 = p0.to_vector();
        y0[4] += 1e-3; // push slightly along Y2
        let y0 = project_onto_boundary(&y0, &params, SubsystemLock::None).unwrap();
        let mut drv = Dopri5::new(&params, y0, 0.0, StepOptions::default());
        let mut worst: f64 = 0.0;
        while drv.eta < 2.0 {
            drv.advance(2.0).unwrap();
            let (h, rf) = constraint_defects(&drv.state(), &params);
            worst = worst.max(h.abs()).max(rf.abs());
        }
        assert!(drv.n_accepted > 10);
        assert!(worst < 1e-8, "max defect {worst:.2e}");
    }

    #[test]
    fn projection_fixes_defects_and_respects_locks() {
        let params = ModelParams::new(2, LambdaMode::RicciFlat).unwrap();
        let p = crate::catalog::p0(&params).coords;
        let mut v = p.to_vector();
        v[0] += 3e-4;
        v[3] += 2e-4;
        let proj = project_onto_boundary(&v, &params, SubsystemLock::RoundFiber).unwrap();
        let st = PhaseState::from_vector(&proj);
        let (h, rf) = constraint_defects(&st, &params);
        assert!(h.abs() < 1e-13 && rf.abs() < 1e-13);
        assert!((st.x1 - st.x2).abs() < 1e-13);
        assert!((st.y1 - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn hermite_interpolation_matches_endpoints() {
        let params = ModelParams::new(1, LambdaMode::Negative).unwrap();
        let y0 = Vector6::new(0.2, 0.2, 0.05, 1.0, 0.3, 0.2);
        let mut drv = Dopri5::new(&params, y0, 0.0, StepOptions::default());
        let seg = drv.advance(1.0).unwrap();
        assert!((hermite(&seg, seg.eta_prev) - seg.y_prev).amax() < 1e-14);
        assert!((hermite(&seg, seg.eta) - seg.y).amax() < 1e-12);
    }
}
