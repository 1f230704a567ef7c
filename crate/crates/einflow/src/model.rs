//! Phase space, curvature scalars, the polynomial vector field and its
//! analytic Jacobian.
//!
//! The flow lives on the 6-dimensional space (X1, X2, X3, Y1, Y2, Y3). The
//! conserved surface is E = {1 - G - R_s >= 0, X1 + 2X2 + 4mX3 = 1}; its
//! boundary (W = 0) carries the Ricci-flat subsystem.

use crate::error::{Error, Result};
use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

/// Sign choice for the Einstein constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// Lambda = 0; flow restricted to the boundary surface W = 0.
    RicciFlat,
    /// Lambda = -(4m+3), the homothety-fixing normalization.
    Negative,
}

impl std::fmt::Display for LambdaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaMode::RicciFlat => write!(f, "ricci-flat"),
            LambdaMode::Negative => write!(f, "negative"),
        }
    }
}

/// Fiber dimension index m (principal orbit S^{4m+3}) plus the Einstein-constant mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: u32,
    pub lambda_mode: LambdaMode,
}

impl ModelParams {
    pub fn new(m: u32, lambda_mode: LambdaMode) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParams("m must be >= 1".into()));
        }
        Ok(ModelParams { m, lambda_mode })
    }

    pub fn ricci_flat(m: u32) -> Result<Self> {
        Self::new(m, LambdaMode::RicciFlat)
    }

    pub fn negative(m: u32) -> Result<Self> {
        Self::new(m, LambdaMode::Negative)
    }

    /// The Einstein constant: 0 or -(4m+3).
    pub fn lambda(&self) -> f64 {
        match self.lambda_mode {
            LambdaMode::RicciFlat => 0.0,
            LambdaMode::Negative => -(4.0 * self.m as f64 + 3.0),
        }
    }

    pub fn mf(&self) -> f64 {
        self.m as f64
    }
}

/// A point of the 6-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl PhaseState {
    pub fn new(x1: f64, x2: f64, x3: f64, y1: f64, y2: f64, y3: f64) -> Self {
        PhaseState { x1, x2, x3, y1, y2, y3 }
    }

    pub fn zeros() -> Self {
        PhaseState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn to_vector(self) -> Vector6<f64> {
        Vector6::new(self.x1, self.x2, self.x3, self.y1, self.y2, self.y3)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        PhaseState::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn distance(&self, other: &PhaseState) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }

    /// Distance to the line {(c,c,c, y1, 0, 0) : y1 free} with c = 1/(4m+3),
    /// i.e. the invariant set of hyperbolic limits.
    pub fn distance_to_ah_line(&self, params: &ModelParams) -> f64 {
        let c = 1.0 / (4.0 * params.mf() + 3.0);
        let dx = [self.x1 - c, self.x2 - c, self.x3 - c];
        (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2] + self.y2 * self.y2 + self.y3 * self.y3)
            .sqrt()
    }
}

impl std::ops::Index<usize> for PhaseState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x1,
            1 => &self.x2,
            2 => &self.x3,
            3 => &self.y1,
            4 => &self.y2,
            5 => &self.y3,
            _ => panic!("phase state index out of range: {i}"),
        }
    }
}

/// Scalar curvature quantities of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScalars {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub rs: f64,
    pub g: f64,
    /// W^2 = (1 - G - R_s) / (-(4m+2) Lambda) in negative mode; 0 in Ricci-flat mode.
    pub wsq: f64,
}

impl DerivedScalars {
    /// W = sqrt(Wsq), clamping round-off negatives within `tol` to zero.
    pub fn w(&self, tol: f64) -> Result<f64> {
        if self.wsq >= 0.0 {
            Ok(self.wsq.sqrt())
        } else if self.wsq > -tol {
            Ok(0.0)
        } else {
            Err(Error::NegativeWsq { wsq: self.wsq })
        }
    }
}

/// Default tolerance for constraint-surface membership checks.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Curvature scalars R1, R2, R3, R_s, G and W^2 of a state.
pub fn curvature_terms(s: &PhaseState, params: &ModelParams) -> DerivedScalars {
    let m = params.mf();
    let y1sq = s.y1 * s.y1;
    let y2sq = s.y2 * s.y2;
    let y3sq = s.y3 * s.y3;
    let r1 = 0.5 * y1sq * y2sq + 0.25 * m * y1sq * y3sq;
    let r2 = 2.0 * y2sq - 0.5 * y1sq * y2sq + 0.5 * m * y3sq;
    let r3 = (m + 2.0) * s.y2 * s.y3 - 0.125 * y1sq * y3sq - 0.5 * y3sq;
    let rs = r1 + 2.0 * r2 + 4.0 * m * r3;
    let g = s.x1 * s.x1 + 2.0 * s.x2 * s.x2 + 4.0 * m * s.x3 * s.x3;
    let wsq = match params.lambda_mode {
        LambdaMode::RicciFlat => 0.0,
        LambdaMode::Negative => (1.0 - g - rs) / (-(4.0 * m + 2.0) * params.lambda()),
    };
    DerivedScalars { r1, r2, r3, rs, g, wsq }
}

/// Lambda * W^2 as a polynomial in the state: (G + R_s - 1)/(4m+2) in negative
/// mode, identically 0 in Ricci-flat mode. This is the form in which the
/// vector field and Jacobian consume W; no clamping is applied.
pub fn lambda_wsq(s: &PhaseState, params: &ModelParams) -> f64 {
    match params.lambda_mode {
        LambdaMode::RicciFlat => 0.0,
        LambdaMode::Negative => {
            let d = curvature_terms(s, params);
            (d.g + d.rs - 1.0) / (4.0 * params.mf() + 2.0)
        }
    }
}

/// Hyperplane and conservation defects: (X1 + 2X2 + 4mX3 - 1, 1 - G - R_s).
pub fn constraint_defects(s: &PhaseState, params: &ModelParams) -> (f64, f64) {
    let m = params.mf();
    let d = curvature_terms(s, params);
    let h = s.x1 + 2.0 * s.x2 + 4.0 * m * s.x3 - 1.0;
    (h, 1.0 - d.g - d.rs)
}

/// The flow derivative of a state.
pub fn vector_field(s: &PhaseState, params: &ModelParams) -> Vector6<f64> {
    let d = curvature_terms(s, params);
    let u = match params.lambda_mode {
        LambdaMode::RicciFlat => 0.0,
        LambdaMode::Negative => (d.g + d.rs - 1.0) / (4.0 * params.mf() + 2.0),
    };
    let q = d.g + u;
    Vector6::new(
        s.x1 * (q - 1.0) + d.r1 - u,
        s.x2 * (q - 1.0) + d.r2 - u,
        s.x3 * (q - 1.0) + d.r3 - u,
        s.y1 * (s.x1 - s.x2),
        s.y2 * (q - s.x2),
        s.y3 * (q + s.x2 - 2.0 * s.x3),
    )
}

/// Normal of the hyperplane {X1 + 2X2 + 4mX3 = 1}.
pub fn normal_hyperplane(params: &ModelParams) -> Vector6<f64> {
    Vector6::new(1.0, 2.0, 4.0 * params.mf(), 0.0, 0.0, 0.0)
}

/// Gradient of G + R_s, the normal of the surface {1 - G - R_s = 0}.
pub fn normal_boundary(s: &PhaseState, params: &ModelParams) -> Vector6<f64> {
    let m = params.mf();
    let y1sq = s.y1 * s.y1;
    Vector6::new(
        2.0 * s.x1,
        4.0 * s.x2,
        8.0 * m * s.x3,
        -s.y1 * s.y2 * s.y2 - 0.5 * m * s.y1 * s.y3 * s.y3,
        8.0 * s.y2 - y1sq * s.y2 + 4.0 * m * (m + 2.0) * s.y3,
        -0.5 * m * y1sq * s.y3 - 2.0 * m * s.y3 + 4.0 * m * (m + 2.0) * s.y2,
    )
}

/// Analytic Jacobian of `vector_field`, treating W^2 as the polynomial
/// (G + R_s - 1)/((4m+2) Lambda) of the state in negative mode and as 0 in
/// Ricci-flat mode.
pub fn jacobian(s: &PhaseState, params: &ModelParams) -> Matrix6<f64> {
    let m = params.mf();
    let d = curvature_terms(s, params);
    let u = lambda_wsq(s, params);
    let q = d.g + u;
    let (y1, y2, y3) = (s.y1, s.y2, s.y3);
    let y1sq = y1 * y1;

    let dg = Vector6::new(2.0 * s.x1, 4.0 * s.x2, 8.0 * m * s.x3, 0.0, 0.0, 0.0);
    let du = match params.lambda_mode {
        LambdaMode::RicciFlat => Vector6::zeros(),
        LambdaMode::Negative => normal_boundary(s, params) / (4.0 * m + 2.0),
    };
    let dr = [
        Vector6::new(0.0, 0.0, 0.0, y1 * y2 * y2 + 0.5 * m * y1 * y3 * y3, y1sq * y2, 0.5 * m * y1sq * y3),
        Vector6::new(0.0, 0.0, 0.0, -y1 * y2 * y2, 4.0 * y2 - y1sq * y2, m * y3),
        Vector6::new(0.0, 0.0, 0.0, -0.25 * y1 * y3 * y3, (m + 2.0) * y3, (m + 2.0) * y2 - 0.25 * y1sq * y3 - y3),
    ];

    let mut j = Matrix6::zeros();
    let x = [s.x1, s.x2, s.x3];
    for i in 0..3 {
        let row = x[i] * (dg + du) + dr[i] - du;
        j.set_row(i, &row.transpose());
        j[(i, i)] += q - 1.0;
    }
    j.set_row(3, &Vector6::new(y1, -y1, 0.0, s.x1 - s.x2, 0.0, 0.0).transpose());
    let mut row4 = y2 * (dg + du);
    row4[1] -= y2;
    row4[4] += q - s.x2;
    j.set_row(4, &row4.transpose());
    let mut row5 = y3 * (dg + du);
    row5[1] += y3;
    row5[2] -= 2.0 * y3;
    row5[5] += q + s.x2 - 2.0 * s.x3;
    j.set_row(5, &row5.transpose());
    j
}

/// Central-difference Jacobian, the independent oracle for `jacobian`.
pub fn jacobian_fd(s: &PhaseState, params: &ModelParams, h: f64) -> Matrix6<f64> {
    let mut j = Matrix6::zeros();
    let v = s.to_vector();
    for col in 0..6 {
        let mut vp = v;
        let mut vm = v;
        vp[col] += h;
        vm[col] -= h;
        let fp = vector_field(&PhaseState::from_vector(&vp), params);
        let fm = vector_field(&PhaseState::from_vector(&vm), params);
        j.set_column(col, &((fp - fm) / (2.0 * h)));
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn curvature_at_p0() {
        // direct substitution of P0 = (1/3, 1/3, 0, sqrt2, sqrt2/3, 0)
        for m in 1..=4 {
            let params = ModelParams::negative(m).unwrap();
            let p0 = PhaseState::new(1.0 / 3.0, 1.0 / 3.0, 0.0, SQRT2, SQRT2 / 3.0, 0.0);
            let d = curvature_terms(&p0, &params);
            assert_abs_diff_eq!(d.g, 1.0 / 3.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.r1, 2.0 / 9.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.r2, 2.0 / 9.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.r3, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.rs, 2.0 / 3.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.g + d.rs, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.wsq, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn curvature_at_pac1_m1() {
        let params = ModelParams::negative(1).unwrap();
        let p = PhaseState::new(1.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0, SQRT2, SQRT2 / 7.0, 2.0 * SQRT2 / 7.0);
        let d = curvature_terms(&p, &params);
        assert_abs_diff_eq!(d.g, 1.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.r1, 6.0 / 49.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.r2, 6.0 / 49.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.r3, 6.0 / 49.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.rs, 6.0 / 7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.wsq, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn curvature_at_origin() {
        // all quadratics vanish at zero; Wsq = 1/((4m+2)(4m+3)) with Lambda = -(4m+3)
        for m in 1..=3 {
            let params = ModelParams::negative(m).unwrap();
            let d = curvature_terms(&PhaseState::zeros(), &params);
            assert_eq!((d.r1, d.r2, d.r3, d.rs, d.g), (0.0, 0.0, 0.0, 0.0, 0.0));
            let mf = m as f64;
            assert_abs_diff_eq!(d.wsq, 1.0 / ((4.0 * mf + 2.0) * (4.0 * mf + 3.0)), epsilon = 1e-16);
        }
    }

    #[test]
    fn vector_field_vanishes_at_p0_both_modes() {
        let p0 = PhaseState::new(1.0 / 3.0, 1.0 / 3.0, 0.0, SQRT2, SQRT2 / 3.0, 0.0);
        for m in 1..=4 {
            for params in [ModelParams::ricci_flat(m).unwrap(), ModelParams::negative(m).unwrap()] {
                assert!(vector_field(&p0, &params).amax() < 1e-15);
            }
        }
    }

    #[test]
    fn vector_field_vanishes_on_ah_line() {
        for m in 1..=3 {
            let params = ModelParams::negative(m).unwrap();
            let c = 1.0 / (4.0 * m as f64 + 3.0);
            for y1 in [0.0, 0.3, 1.0, SQRT2] {
                let p = PhaseState::new(c, c, c, y1, 0.0, 0.0);
                assert!(vector_field(&p, &params).amax() < 1e-15);
            }
        }
    }

    #[test]
    fn y1_zero_locus_preserved() {
        let params = ModelParams::negative(2).unwrap();
        let s = PhaseState::new(0.3, -0.1, 0.2, 0.0, 0.7, 0.4);
        assert_eq!(vector_field(&s, &params)[3], 0.0);
    }

    #[test]
    fn defects_examples() {
        let params = ModelParams::negative(1).unwrap();
        let p0 = PhaseState::new(1.0 / 3.0, 1.0 / 3.0, 0.0, SQRT2, SQRT2 / 3.0, 0.0);
        let (h, rf) = constraint_defects(&p0, &params);
        assert_abs_diff_eq!(h, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rf, 0.0, epsilon = 1e-15);

        let (h, rf) = constraint_defects(&PhaseState::zeros(), &params);
        assert_eq!((h, rf), (-1.0, 1.0));

        // P_AH(sqrt2), m = 1: G = 1/7, Rs = 0
        let c = 1.0 / 7.0;
        let (h, rf) = constraint_defects(&PhaseState::new(c, c, c, SQRT2, 0.0, 0.0), &params);
        assert_abs_diff_eq!(h, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rf, 6.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_matches_displayed_matrix_at_p0() {
        // the negative-mode linearization at P0, entrywise within 1e-12
        for m in 1..=4u32 {
            let mf = m as f64;
            let params = ModelParams::negative(m).unwrap();
            let p0 = PhaseState::new(1.0 / 3.0, 1.0 / 3.0, 0.0, SQRT2, SQRT2 / 3.0, 0.0);
            let j = jacobian(&p0, &params);
            let d = 18.0 * mf + 9.0;
            #[rustfmt::skip]
            let expected = Matrix6::from_row_slice(&[
                -(8.0*mf+6.0)/d, 8.0*mf/d, 0.0, (12.0*mf+8.0)*SQRT2/(3.0*d), 4.0*mf*SQRT2/(6.0*mf+3.0), -4.0*mf*(mf+2.0)*SQRT2/d,
                4.0*mf/d, -(4.0*mf+6.0)/d, 0.0, -(12.0*mf+4.0)*SQRT2/(3.0*d), 4.0*mf*SQRT2/(6.0*mf+3.0), -4.0*mf*(mf+2.0)*SQRT2/d,
                -1.0/(6.0*mf+3.0), -2.0/(6.0*mf+3.0), -2.0/3.0, SQRT2/d, -SQRT2/(2.0*mf+1.0), (mf+2.0)*SQRT2/(6.0*mf+3.0),
                SQRT2, -SQRT2, 0.0, 0.0, 0.0, 0.0,
                (4.0*mf+3.0)*SQRT2/d, (2.0*mf+3.0)*SQRT2/d, 0.0, -2.0/(3.0*d), 2.0/(6.0*mf+3.0), 4.0*mf*(mf+2.0)/d,
                0.0, 0.0, 0.0, 0.0, 0.0, 2.0/3.0,
            ]);
            assert!((j - expected).amax() < 1e-12, "m = {m}: max dev {}", (j - expected).amax());
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let m = rng.gen_range(1..=4);
            let mode = if rng.gen_bool(0.5) { LambdaMode::RicciFlat } else { LambdaMode::Negative };
            let params = ModelParams::new(m, mode).unwrap();
            let v = Vector6::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let s = PhaseState::from_vector(&v);
            let ja = jacobian(&s, &params);
            let jf = jacobian_fd(&s, &params, 1e-6);
            let scale = ja.amax().max(1.0);
            assert!((ja - jf).amax() / scale < 1e-6);
        }
    }

    #[test]
    fn jacobian_at_pah_matches_displayed_matrix() {
        for m in 1..=3u32 {
            let mf = m as f64;
            let params = ModelParams::negative(m).unwrap();
            let c = 1.0 / (4.0 * mf + 3.0);
            let y1 = 0.7;
            let j = jacobian(&PhaseState::new(c, c, c, y1, 0.0, 0.0), &params);
            let mut expected = Matrix6::zeros();
            expected[(0, 0)] = -1.0;
            expected[(1, 1)] = -1.0;
            expected[(2, 2)] = -1.0;
            expected[(3, 0)] = y1;
            expected[(3, 1)] = -y1;
            expected[(4, 4)] = -c;
            expected[(5, 5)] = -c;
            assert!((j - expected).amax() < 1e-13);
        }
    }

    #[test]
    fn boundary_flow_identity() {
        // d(G+Rs)/deta along the field equals 2(G+Rs-1)(G + Lambda W^2)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let m = rng.gen_range(1..=4);
            let params = ModelParams::negative(m).unwrap();
            // the identity holds on the hyperplane
            let mut v = Vector6::from_fn(|_, _| rng.gen_range(-1.5..1.5));
            v[0] = 1.0 - 2.0 * v[1] - 4.0 * m as f64 * v[2];
            let s = PhaseState::from_vector(&v);
            let d = curvature_terms(&s, &params);
            let u = lambda_wsq(&s, &params);
            let lhs = normal_boundary(&s, &params).dot(&vector_field(&s, &params));
            let rhs = 2.0 * (d.g + d.rs - 1.0) * (d.g + u);
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() / scale < 1e-8, "identity violated: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn x_equations_share_one_scalar() {
        // regression fixture: each Xi' = Xi*(G + LW^2 - 1) + Ri - LW^2
        let params = ModelParams::negative(2).unwrap();
        let s = PhaseState::new(0.2, 0.1, -0.3, 0.9, 0.4, 1.1);
        let d = curvature_terms(&s, &params);
        let u = lambda_wsq(&s, &params);
        let f = vector_field(&s, &params);
        let q = d.g + u - 1.0;
        assert_abs_diff_eq!(f[0], s.x1 * q + d.r1 - u, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], s.x2 * q + d.r2 - u, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], s.x3 * q + d.r3 - u, epsilon = 1e-15);
    }

    #[test]
    fn w_accessor_clamps_and_errors() {
        let d = DerivedScalars { r1: 0.0, r2: 0.0, r3: 0.0, rs: 0.0, g: 0.0, wsq: -1e-12 };
        assert_eq!(d.w(1e-9).unwrap(), 0.0);
        let d = DerivedScalars { wsq: -1e-6, ..d };
        assert!(d.w(1e-9).is_err());
    }

    #[test]
    fn pqk_is_critical_in_negative_mode_only() {
        let m = 1;
        let pqk = catalog::catalog(&ModelParams::negative(m).unwrap())
            .into_iter()
            .find(|e| e.name() == "PQK")
            .unwrap();
        let p = pqk.representative().coords;
        assert!(vector_field(&p, &ModelParams::negative(m).unwrap()).amax() < 1e-15);
        assert!(vector_field(&p, &ModelParams::ricci_flat(m).unwrap()).amax() > 1e-3);
    }
}
