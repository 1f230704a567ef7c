//! Signed defect functions for the named invariant sets, on-set samplers, and
//! numerical flow-invariance audits (Lie derivatives on equality strata,
//! inward derivatives on boundary faces).

use crate::error::{Error, Result};
use crate::model::{
    curvature_terms, lambda_wsq, normal_boundary, normal_hyperplane, vector_field, LambdaMode,
    ModelParams, PhaseState,
};
use nalgebra::Vector6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Default audit tolerance for equality-stratum Lie derivatives.
pub const AUDIT_EQ_TOL: f64 = 1e-9;
/// Inward face derivatives must exceed -AUDIT_FACE_TOL.
pub const AUDIT_FACE_TOL: f64 = 1e-9;
/// Strictness margin kept on inactive constraints while sampling a face.
const FACE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetName {
    S,
    E,
    P,
    BRf,
    BRd,
    BFs,
    BAlc,
    BKe,
    BQk,
    BSpin7Minus,
    BSpin7Plus,
}

impl SetName {
    pub fn parse(s: &str) -> Result<SetName> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Ok(SetName::S),
            "E" => Ok(SetName::E),
            "P" => Ok(SetName::P),
            "BRF" => Ok(SetName::BRf),
            "BRD" => Ok(SetName::BRd),
            "BFS" => Ok(SetName::BFs),
            "BALC" => Ok(SetName::BAlc),
            "BKE" => Ok(SetName::BKe),
            "BQK" => Ok(SetName::BQk),
            "BSPIN7MINUS" | "BSPIN7-" => Ok(SetName::BSpin7Minus),
            "BSPIN7PLUS" | "BSPIN7+" => Ok(SetName::BSpin7Plus),
            other => Err(Error::UnknownSet(other.into())),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SetName::S => "S",
            SetName::E => "E",
            SetName::P => "P",
            SetName::BRf => "BRF",
            SetName::BRd => "BRd",
            SetName::BFs => "BFS",
            SetName::BAlc => "BALC",
            SetName::BKe => "BKE",
            SetName::BQk => "BQK",
            SetName::BSpin7Minus => "BSpin7minus",
            SetName::BSpin7Plus => "BSpin7plus",
        }
    }

    pub fn all() -> [SetName; 11] {
        [
            SetName::S,
            SetName::E,
            SetName::P,
            SetName::BRf,
            SetName::BRd,
            SetName::BFs,
            SetName::BAlc,
            SetName::BKe,
            SetName::BQk,
            SetName::BSpin7Minus,
            SetName::BSpin7Plus,
        ]
    }
}

impl std::fmt::Display for SetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Structural description of a set: labeled equality and inequality defects
/// plus any mode/dimension restriction.
#[derive(Debug, Clone, Serialize)]
pub struct SetDescriptor {
    pub name: SetName,
    pub equalities: Vec<&'static str>,
    pub inequalities: Vec<&'static str>,
    pub mode_restriction: Option<LambdaMode>,
    pub m_restriction: Option<u32>,
}

pub fn descriptor(name: SetName) -> SetDescriptor {
    let (equalities, inequalities, mode_restriction, m_restriction): (
        Vec<&'static str>,
        Vec<&'static str>,
        Option<LambdaMode>,
        Option<u32>,
    ) = match name {
        SetName::E => (vec!["h"], vec!["rf"], None, None),
        SetName::P => (vec![], vec!["Y1", "Y2", "Y3"], None, None),
        SetName::S => (
            vec!["h"],
            vec![
                "X2-X1",
                "2-Y1^2",
                "2Y2-Y3",
                "mix", // (sqrt2/2)(2Y2-Y3)+X3-X2
                "1/2-X2",
                "X3",
                "Y1",
                "Y2",
                "Y3",
                "rf",
            ],
            None,
            None,
        ),
        SetName::BRf => (vec!["h", "rf"], vec!["Y1", "Y2", "Y3"], None, None),
        SetName::BRd => (
            vec!["h", "X1-X2", "Y1^2-2"],
            vec!["rf", "Y1", "Y2", "Y3"],
            None,
            None,
        ),
        SetName::BFs => (
            vec!["h", "2Y2-Y3", "X2-X3"],
            vec!["rf", "Y1", "Y2", "Y3"],
            None,
            None,
        ),
        SetName::BAlc => (
            vec!["h", "rf", "Y1", "X1"],
            vec!["Y2", "Y3"],
            Some(LambdaMode::RicciFlat),
            None,
        ),
        SetName::BKe => (
            vec!["h", "2Y2-Y3", "X2-X3", "X3-Y1Y3/4"],
            vec!["rf", "Y1", "Y2", "Y3"],
            None,
            None,
        ),
        SetName::BQk => (
            vec!["h", "X1-X2", "Y1^2-2", "X3-Y1Y3/4", "qk"],
            vec!["rf", "Y2", "Y3"],
            Some(LambdaMode::Negative),
            None,
        ),
        SetName::BSpin7Minus => (
            vec!["h", "rf", "F1", "F2", "F3"],
            vec!["Y1", "Y2", "Y3"],
            Some(LambdaMode::RicciFlat),
            Some(1),
        ),
        SetName::BSpin7Plus => (
            vec!["h", "rf", "H1", "H2", "H3"],
            vec!["Y1", "Y2", "Y3"],
            Some(LambdaMode::RicciFlat),
            Some(1),
        ),
    };
    SetDescriptor { name, equalities, inequalities, mode_restriction, m_restriction }
}

fn check_restrictions(desc: &SetDescriptor, params: &ModelParams) -> Result<()> {
    if let Some(m) = desc.m_restriction {
        if params.m != m {
            return Err(Error::SetModeRestriction {
                set: desc.name.to_string(),
                m: params.m,
                mode: params.lambda_mode.to_string(),
            });
        }
    }
    if let Some(mode) = desc.mode_restriction {
        if params.lambda_mode != mode {
            return Err(Error::SetModeRestriction {
                set: desc.name.to_string(),
                m: params.m,
                mode: params.lambda_mode.to_string(),
            });
        }
    }
    Ok(())
}

/// First-order reduction defects of negative chirality (fiber dimension 1).
pub fn spin7_f(s: &PhaseState) -> [f64; 3] {
    [
        s.x1 - 0.5 * s.y1 * s.y2 + 0.5 * s.y1 * s.y3,
        s.x2 - SQRT2 * s.y2 + 0.5 * SQRT2 * s.y3 + 0.5 * s.y1 * s.y2,
        s.x3 - 0.5 * SQRT2 * s.y3 - 0.25 * s.y1 * s.y3,
    ]
}

/// Opposite-chirality defects: the F-defects with the sign of Y1 flipped.
pub fn spin7_h(s: &PhaseState) -> [f64; 3] {
    [
        s.x1 + 0.5 * s.y1 * s.y2 - 0.5 * s.y1 * s.y3,
        s.x2 - SQRT2 * s.y2 + 0.5 * SQRT2 * s.y3 - 0.5 * s.y1 * s.y2,
        s.x3 - 0.5 * SQRT2 * s.y3 + 0.25 * s.y1 * s.y3,
    ]
}

fn quaternionic_defect(s: &PhaseState, params: &ModelParams) -> f64 {
    let u = lambda_wsq(s, params); // Lambda W^2
    s.y3 * s.y3 - 2.0 * s.y2 * s.y3 + 2.0 / (params.mf() + 3.0) * u
}

/// Evaluate the labeled equality and inequality defects of a set at a state.
/// Inequalities are oriented so that membership means defect >= 0.
pub fn set_defect(
    name: SetName,
    s: &PhaseState,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let desc = descriptor(name);
    check_restrictions(&desc, params)?;
    let d = curvature_terms(s, params);
    let h = s.x1 + 2.0 * s.x2 + 4.0 * params.mf() * s.x3 - 1.0;
    let rf = 1.0 - d.g - d.rs;
    let (eq, ineq): (Vec<f64>, Vec<f64>) = match name {
        SetName::E => (vec![h], vec![rf]),
        SetName::P => (vec![], vec![s.y1, s.y2, s.y3]),
        SetName::S => (
            vec![h],
            vec![
                s.x2 - s.x1,
                2.0 - s.y1 * s.y1,
                2.0 * s.y2 - s.y3,
                0.5 * SQRT2 * (2.0 * s.y2 - s.y3) + s.x3 - s.x2,
                0.5 - s.x2,
                s.x3,
                s.y1,
                s.y2,
                s.y3,
                rf,
            ],
        ),
        SetName::BRf => (vec![h, rf], vec![s.y1, s.y2, s.y3]),
        SetName::BRd => (
            vec![h, s.x1 - s.x2, s.y1 * s.y1 - 2.0],
            vec![rf, s.y1, s.y2, s.y3],
        ),
        SetName::BFs => (
            vec![h, 2.0 * s.y2 - s.y3, s.x2 - s.x3],
            vec![rf, s.y1, s.y2, s.y3],
        ),
        SetName::BAlc => (vec![h, rf, s.y1, s.x1], vec![s.y2, s.y3]),
        SetName::BKe => (
            vec![h, 2.0 * s.y2 - s.y3, s.x2 - s.x3, s.x3 - 0.25 * s.y1 * s.y3],
            vec![rf, s.y1, s.y2, s.y3],
        ),
        SetName::BQk => (
            vec![
                h,
                s.x1 - s.x2,
                s.y1 * s.y1 - 2.0,
                s.x3 - 0.25 * s.y1 * s.y3,
                quaternionic_defect(s, params),
            ],
            vec![rf, s.y2, s.y3],
        ),
        SetName::BSpin7Minus => {
            let f = spin7_f(s);
            (vec![h, rf, f[0], f[1], f[2]], vec![s.y1, s.y2, s.y3])
        }
        SetName::BSpin7Plus => {
            let hh = spin7_h(s);
            (vec![h, rf, hh[0], hh[1], hh[2]], vec![s.y1, s.y2, s.y3])
        }
    };
    Ok((eq, ineq))
}

/// Thresholded membership test.
pub fn membership(name: SetName, s: &PhaseState, params: &ModelParams, tol: f64) -> Result<bool> {
    let (eq, ineq) = set_defect(name, s, params)?;
    Ok(eq.iter().all(|d| d.abs() <= tol) && ineq.iter().all(|d| *d >= -tol))
}

/// Minimum S-membership defect (equalities folded in as -|h|).
pub fn min_s_defect(s: &PhaseState, params: &ModelParams) -> f64 {
    let (eq, ineq) = set_defect(SetName::S, s, params).expect("S has no restrictions");
    let mut min = -eq[0].abs();
    for d in ineq {
        min = min.min(d);
    }
    min
}

/// Labels aligned with `min_s_defect`'s scan order.
pub fn s_defect_labels() -> Vec<&'static str> {
    let mut v = vec!["h"];
    v.extend(descriptor(SetName::S).inequalities);
    v
}

/// Most negative S inequality defect with its face label.
pub fn worst_s_face(s: &PhaseState, params: &ModelParams) -> (&'static str, f64) {
    let desc = descriptor(SetName::S);
    let (_, ineq) = set_defect(SetName::S, s, params).unwrap();
    let mut worst = (desc.inequalities[0], ineq[0]);
    for (label, d) in desc.inequalities.iter().zip(ineq.iter()) {
        if *d < worst.1 {
            worst = (label, *d);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// gradients of the equality defects (for Lie derivatives)
// ---------------------------------------------------------------------------

fn eq_gradient(name: SetName, label: &str, s: &PhaseState, params: &ModelParams) -> Vector6<f64> {
    let m = params.mf();
    match label {
        "h" => normal_hyperplane(params),
        "rf" => -normal_boundary(s, params),
        "Y1" => Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0),
        "X1" => Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        "X1-X2" => Vector6::new(1.0, -1.0, 0.0, 0.0, 0.0, 0.0),
        "X2-X3" => Vector6::new(0.0, 1.0, -1.0, 0.0, 0.0, 0.0),
        "Y1^2-2" => Vector6::new(0.0, 0.0, 0.0, 2.0 * s.y1, 0.0, 0.0),
        "2Y2-Y3" => Vector6::new(0.0, 0.0, 0.0, 0.0, 2.0, -1.0),
        "X3-Y1Y3/4" => Vector6::new(0.0, 0.0, 1.0, -0.25 * s.y3, 0.0, -0.25 * s.y1),
        "qk" => {
            // Y3^2 - 2 Y2 Y3 + 2/(m+3) * Lambda W^2, with Lambda W^2 = (G+Rs-1)/(4m+2)
            let c = 2.0 / ((m + 3.0) * (4.0 * m + 2.0));
            Vector6::new(0.0, 0.0, 0.0, 0.0, -2.0 * s.y3, 2.0 * s.y3 - 2.0 * s.y2)
                + c * normal_boundary(s, params)
        }
        "F1" => Vector6::new(1.0, 0.0, 0.0, 0.5 * (s.y3 - s.y2), -0.5 * s.y1, 0.5 * s.y1),
        "F2" => Vector6::new(0.0, 1.0, 0.0, 0.5 * s.y2, -SQRT2 + 0.5 * s.y1, 0.5 * SQRT2),
        "F3" => Vector6::new(0.0, 0.0, 1.0, -0.25 * s.y3, 0.0, -0.5 * SQRT2 - 0.25 * s.y1),
        "H1" => Vector6::new(1.0, 0.0, 0.0, 0.5 * (s.y2 - s.y3), 0.5 * s.y1, -0.5 * s.y1),
        "H2" => Vector6::new(0.0, 1.0, 0.0, -0.5 * s.y2, -SQRT2 - 0.5 * s.y1, 0.5 * SQRT2),
        "H3" => Vector6::new(0.0, 0.0, 1.0, 0.25 * s.y3, 0.0, -0.5 * SQRT2 + 0.25 * s.y1),
        other => unreachable!("no gradient for equality `{other}` of {name}"),
    }
}

fn face_gradient(label: &str, s: &PhaseState, params: &ModelParams) -> Vector6<f64> {
    match label {
        "X2-X1" => Vector6::new(-1.0, 1.0, 0.0, 0.0, 0.0, 0.0),
        "2-Y1^2" => Vector6::new(0.0, 0.0, 0.0, -2.0 * s.y1, 0.0, 0.0),
        "2Y2-Y3" => Vector6::new(0.0, 0.0, 0.0, 0.0, 2.0, -1.0),
        "mix" => Vector6::new(0.0, -1.0, 1.0, 0.0, SQRT2, -0.5 * SQRT2),
        "1/2-X2" => Vector6::new(0.0, -1.0, 0.0, 0.0, 0.0, 0.0),
        "X3" => Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
        "Y1" => Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0),
        "Y2" => Vector6::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
        "Y3" => Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        "rf" => -normal_boundary(s, params),
        other => unreachable!("no face gradient for `{other}`"),
    }
}

// ---------------------------------------------------------------------------
// samplers
// ---------------------------------------------------------------------------

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    // splitmix-style decorrelation so samples are indexed, not raced
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Solve the conservation equality for Y2 >= 0 given the other coordinates;
/// returns None when no nonnegative root exists.
fn solve_y2_on_boundary(x: [f64; 3], y1: f64, y3: f64, params: &ModelParams) -> Option<f64> {
    let m = params.mf();
    let g = x[0] * x[0] + 2.0 * x[1] * x[1] + 4.0 * m * x[2] * x[2];
    let a = 4.0 - 0.5 * y1 * y1;
    let b = 4.0 * m * (m + 2.0) * y3;
    let c = g - m * y3 * y3 - 0.25 * m * y1 * y1 * y3 * y3 - 1.0;
    if a <= 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let y2 = (-b + disc.sqrt()) / (2.0 * a);
    (y2 >= 0.0).then_some(y2)
}

/// Draw one state on the given set, or None if this attempt failed.
fn sample_once(name: SetName, params: &ModelParams, rng: &mut ChaCha8Rng) -> Option<PhaseState> {
    let m = params.mf();
    match name {
        SetName::S | SetName::E | SetName::P => {
            let x2 = rng.gen_range(0.0..0.5);
            let x3 = rng.gen_range(0.0..(0.5 / m));
            let x1 = 1.0 - 2.0 * x2 - 4.0 * m * x3;
            let y1 = rng.gen_range(0.0..SQRT2);
            let y2: f64 = rng.gen_range(0.0..0.6);
            let y3 = rng.gen_range(0.0..(2.0 * y2).min(1.5));
            let s = PhaseState::new(x1, x2, x3, y1, y2, y3);
            membership(name, &s, params, 0.0).ok()?.then_some(s)
        }
        SetName::BRf => {
            let x2 = rng.gen_range(0.0..0.5);
            let x3 = rng.gen_range(0.0..(0.5 / m));
            let x1 = 1.0 - 2.0 * x2 - 4.0 * m * x3;
            let y1 = rng.gen_range(0.0..1.5);
            let y3 = rng.gen_range(0.0..1.5);
            let y2 = solve_y2_on_boundary([x1, x2, x3], y1, y3, params)?;
            (y2 <= 1.5).then(|| PhaseState::new(x1, x2, x3, y1, y2, y3))
        }
        SetName::BRd => {
            let x2 = rng.gen_range(-0.2..0.55);
            let x3 = (1.0 - 3.0 * x2) / (4.0 * m);
            let y2 = rng.gen_range(0.0..1.5);
            let y3 = rng.gen_range(0.0..1.5);
            let s = PhaseState::new(x2, x2, x3, SQRT2, y2, y3);
            let (_, rf) = crate::model::constraint_defects(&s, params);
            (rf >= 0.0).then_some(s)
        }
        SetName::BFs => {
            let x2 = rng.gen_range(-0.2..0.55);
            let x1 = 1.0 - (4.0 * m + 2.0) * x2;
            let y1 = rng.gen_range(0.0..1.5);
            let y2 = rng.gen_range(0.0..1.5);
            let s = PhaseState::new(x1, x2, x2, y1, y2, 2.0 * y2);
            let (_, rf) = crate::model::constraint_defects(&s, params);
            (rf >= 0.0).then_some(s)
        }
        SetName::BAlc => {
            let x2 = rng.gen_range(0.0..0.6);
            let x3 = (1.0 - 2.0 * x2) / (4.0 * m);
            let y3 = rng.gen_range(0.0..1.5);
            let y2 = solve_y2_on_boundary([0.0, x2, x3], 0.0, y3, params)?;
            (y2 <= 1.5).then(|| PhaseState::new(0.0, x2, x3, 0.0, y2, y3))
        }
        SetName::BKe => {
            let y1 = rng.gen_range(0.0..1.5);
            let y3 = rng.gen_range(0.0..1.5);
            let x3 = 0.25 * y1 * y3;
            let x1 = 1.0 - (4.0 * m + 2.0) * x3;
            let s = PhaseState::new(x1, x3, x3, y1, 0.5 * y3, y3);
            let (_, rf) = crate::model::constraint_defects(&s, params);
            (rf >= 0.0).then_some(s)
        }
        SetName::BQk => {
            // the linear branch of the defining relation: Y2 = (2m+3)Y3/3 - sqrt2/3
            let y3_min = SQRT2 / (2.0 * m + 3.0);
            let y3 = rng.gen_range(y3_min..1.2);
            let y2 = (2.0 * m + 3.0) / 3.0 * y3 - SQRT2 / 3.0;
            let x3 = 0.25 * SQRT2 * y3;
            let x12 = (1.0 - 4.0 * m * x3) / 3.0;
            let s = PhaseState::new(x12, x12, x3, SQRT2, y2, y3);
            let (_, rf) = crate::model::constraint_defects(&s, params);
            (rf >= 0.0 && y2 <= 1.5).then_some(s)
        }
        SetName::BSpin7Minus => {
            let y1 = rng.gen_range(0.0..1.5);
            let y2 = rng.gen_range(0.0..0.8);
            let y3 = (1.0 + 0.5 * y1 * y2 - 2.0 * SQRT2 * y2) / (SQRT2 + 0.5 * y1);
            if y3 < 0.0 {
                return None;
            }
            let x1 = 0.5 * y1 * y2 - 0.5 * y1 * y3;
            let x2 = SQRT2 * y2 - 0.5 * SQRT2 * y3 - 0.5 * y1 * y2;
            let x3 = 0.5 * SQRT2 * y3 + 0.25 * y1 * y3;
            Some(PhaseState::new(x1, x2, x3, y1, y2, y3))
        }
        SetName::BSpin7Plus => {
            let y1 = rng.gen_range(0.0..1.5);
            let y2 = rng.gen_range(0.0..0.8);
            let den = SQRT2 - 0.5 * y1;
            if den.abs() < 1e-6 {
                return None;
            }
            let y3 = (1.0 - 0.5 * y1 * y2 - 2.0 * SQRT2 * y2) / den;
            if y3 < 0.0 {
                return None;
            }
            let x1 = -0.5 * y1 * y2 + 0.5 * y1 * y3;
            let x2 = SQRT2 * y2 - 0.5 * SQRT2 * y3 + 0.5 * y1 * y2;
            let x3 = 0.5 * SQRT2 * y3 - 0.25 * y1 * y3;
            Some(PhaseState::new(x1, x2, x3, y1, y2, y3))
        }
    }
}

/// Draw `n` states on the set, deterministically indexed by (seed, i).
pub fn sample_on(name: SetName, params: &ModelParams, seed: u64, n: usize) -> Result<Vec<PhaseState>> {
    let desc = descriptor(name);
    check_restrictions(&desc, params)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = rng_for(seed, i as u64);
        let mut found = None;
        for _ in 0..10_000 {
            if let Some(s) = sample_once(name, params, &mut rng) {
                found = Some(s);
                break;
            }
        }
        match found {
            Some(s) => out.push(s),
            None => {
                return Err(Error::SamplerExhausted {
                    set: name.to_string(),
                    attempts: 10_000,
                    constraint: "feasibility rejection".into(),
                })
            }
        }
    }
    Ok(out)
}

/// Move an S-sample onto the given face (exact equality) while keeping the
/// hyperplane constraint; None if the move leaves the margin region.
fn sample_s_face(
    label: &str,
    params: &ModelParams,
    rng: &mut ChaCha8Rng,
) -> Option<PhaseState> {
    let m = params.mf();
    let base = sample_once(SetName::S, params, rng)?;
    let mut s = base;
    match label {
        "X2-X1" => {
            // X1 = X2, X3 re-solved from the hyperplane
            s.x1 = s.x2;
            s.x3 = (1.0 - 3.0 * s.x2) / (4.0 * m);
        }
        "2-Y1^2" => s.y1 = SQRT2,
        "2Y2-Y3" => s.y3 = 2.0 * s.y2,
        "mix" => {
            // X3 = X2 - (sqrt2/2)(2Y2 - Y3), X1 from the hyperplane
            s.x3 = s.x2 - 0.5 * SQRT2 * (2.0 * s.y2 - s.y3);
            s.x1 = 1.0 - 2.0 * s.x2 - 4.0 * m * s.x3;
        }
        "1/2-X2" => {
            // thin sliver: the mixed constraint forces 2Y2 - Y3 >= sqrt2 (1/2 - X3)
            // here, so the fiber coordinates concentrate near Y2 ~ 0.36, Y3 ~ 0
            s.x2 = 0.5;
            s.x3 = rng.gen_range(0.0..(0.02 / m));
            s.x1 = -4.0 * m * s.x3;
            s.y1 = rng.gen_range(0.0..SQRT2);
            s.y2 = rng.gen_range(0.33..0.45);
            s.y3 = rng.gen_range(0.0..(0.1 / m));
        }
        "X3" => {
            s.x3 = 0.0;
            s.x1 = 1.0 - 2.0 * s.x2;
        }
        "Y1" => s.y1 = 0.0,
        "Y2" => {
            s.y2 = 0.0;
            s.y3 = 0.0; // 2Y2 >= Y3 >= 0 forces both
        }
        "Y3" => s.y3 = 0.0,
        "rf" => {
            let y2 = solve_y2_on_boundary([s.x1, s.x2, s.x3], s.y1, s.y3, params)?;
            s.y2 = y2;
        }
        _ => unreachable!(),
    }
    // face exact, all other constraints strict by the margin
    let desc = descriptor(SetName::S);
    let (eq, ineq) = set_defect(SetName::S, &s, params).ok()?;
    if eq[0].abs() > 1e-12 {
        return None;
    }
    for (l, d) in desc.inequalities.iter().zip(ineq.iter()) {
        if *l == label {
            if d.abs() > 1e-10 {
                return None;
            }
        } else {
            if *d < -1e-12 {
                return None;
            }
            // constraints implied by the face itself are exempt from the margin
            let implied = matches!((label, *l), ("Y2", "Y3") | ("Y2", "2Y2-Y3") | ("2Y2-Y3", "mix"));
            if !implied && *d < FACE_MARGIN {
                return None;
            }
        }
    }
    Some(s)
}

// ---------------------------------------------------------------------------
// audits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub kind: String,
    pub label: String,
    pub value: f64,
    pub state: PhaseState,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub set: String,
    pub samples: usize,
    pub max_eq_defect: f64,
    pub min_face_derivative: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub verdict: String,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Audit flow-invariance of a set: Lie derivatives of every equality defect
/// over on-set samples must vanish; for the trapping region S the inequality
/// faces are sampled and their inward derivatives must be nonnegative.
pub fn invariance_audit(
    name: SetName,
    params: &ModelParams,
    n_samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    if n_samples < 1 {
        return Err(Error::InvalidParams("n_samples must be >= 1".into()));
    }
    let desc = descriptor(name);
    check_restrictions(&desc, params)?;

    let samples = sample_on(name, params, seed, n_samples)?;
    let mut max_eq: (f64, Option<Witness>) = (0.0, None);
    for s in &samples {
        let v = vector_field(s, params);
        for label in &desc.equalities {
            let lie = eq_gradient(name, label, s, params).dot(&v);
            if lie.abs() > max_eq.0 {
                max_eq = (
                    lie.abs(),
                    Some(Witness {
                        kind: "equality-lie".into(),
                        label: (*label).into(),
                        value: lie,
                        state: *s,
                    }),
                );
            }
        }
    }

    // face derivatives: only the trapping region carries audited faces
    let mut min_face: Option<(f64, Witness)> = None;
    if name == SetName::S {
        let faces = descriptor(SetName::S).inequalities;
        let per_face = (n_samples / faces.len()).max(16);
        for label in faces {
            let mut got = 0usize;
            let mut idx = 0u64;
            while got < per_face && idx < 200_000 {
                let mut rng = rng_for(seed ^ 0xFACE, idx.wrapping_add(got as u64 * 7919));
                idx += 1;
                let Some(s) = sample_s_face(label, params, &mut rng) else {
                    continue;
                };
                got += 1;
                let v = vector_field(&s, params);
                let inward = face_gradient(label, &s, params).dot(&v);
                if min_face.as_ref().is_none_or(|(mv, _)| inward < *mv) {
                    min_face = Some((
                        inward,
                        Witness {
                            kind: "face-inward-derivative".into(),
                            label: label.into(),
                            value: inward,
                            state: s,
                        },
                    ));
                }
            }
            if got == 0 {
                return Err(Error::SamplerExhausted {
                    set: name.to_string(),
                    attempts: 200_000,
                    constraint: label.into(),
                });
            }
        }
    }

    let eq_ok = max_eq.0 < AUDIT_EQ_TOL;
    let face_ok = min_face.as_ref().is_none_or(|(v, _)| *v >= -AUDIT_FACE_TOL);
    let mut witnesses = Vec::new();
    if let Some(w) = max_eq.1 {
        witnesses.push(w);
    }
    if let Some((_, w)) = &min_face {
        witnesses.push(w.clone());
    }
    Ok(AuditReport {
        set: name.to_string(),
        samples: n_samples,
        max_eq_defect: max_eq.0,
        min_face_derivative: min_face.as_ref().map(|(v, _)| *v),
        witnesses,
        verdict: if eq_ok && face_ok { "pass".into() } else { "fail".into() },
    })
}

/// Logarithm of the monotone functional Y2^{2m+3} Y3^{2m} / Y1.
pub fn bohm_log(s: &PhaseState, params: &ModelParams) -> f64 {
    let m = params.mf();
    (2.0 * m + 3.0) * s.y2.ln() + 2.0 * m * s.y3.ln() - s.y1.ln()
}

/// d/deta of the monotone functional divided by the functional itself:
/// (2m+3) Y2'/Y2 + 2m Y3'/Y3 - Y1'/Y1, which should equal (4m+3) G - 1.
pub fn bohm_log_derivative(s: &PhaseState, params: &ModelParams) -> f64 {
    let m = params.mf();
    let v = vector_field(s, params);
    (2.0 * m + 3.0) * v[4] / s.y2 + 2.0 * m * v[5] / s.y3 - v[3] / s.y1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn s_defects_at_p0_match_hand_computation() {
        let params = ModelParams::negative(1).unwrap();
        let p0 = catalog::p0(&params).coords;
        let (eq, ineq) = set_defect(SetName::S, &p0, &params).unwrap();
        assert_abs_diff_eq!(eq[0], 0.0, epsilon = 1e-15);
        let expect = [0.0, 0.0, 2.0 * SQRT2 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 0.0];
        for (got, want) in ineq.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(*got, *want, epsilon = 1e-14);
        }
        assert!(ineq.iter().all(|d| *d >= -1e-14));
    }

    #[test]
    fn spin7_f_vanishes_at_p0() {
        let params = ModelParams::ricci_flat(1).unwrap();
        let p0 = catalog::p0(&params).coords;
        for d in spin7_f(&p0) {
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn pqk_and_pac1_belong_to_bqk() {
        let params = ModelParams::negative(1).unwrap();
        let pqk = catalog::pqk(&params).coords;
        assert!(membership(SetName::BQk, &pqk, &params, 1e-10).unwrap());
        // the flat metric is the hyper-Kahler member, and it is also Kahler
        let pac1 = catalog::pac1(&params).coords;
        for set in [SetName::BQk, SetName::BKe] {
            let (eq, ineq) = set_defect(set, &pac1, &params).unwrap();
            for d in eq {
                assert!(d.abs() < 1e-10, "{set}");
            }
            for d in ineq {
                assert!(d >= -1e-10, "{set}");
            }
        }
    }

    #[test]
    fn membership_examples() {
        let params = ModelParams::negative(2).unwrap();
        let palc2 = catalog::palc2(&params).coords;
        assert!(membership(SetName::BRf, &palc2, &params, 1e-10).unwrap());
        let pah1 = catalog::pah(&params, 1.0).coords;
        assert!(!membership(SetName::BRf, &pah1, &params, 1e-10).unwrap());
    }

    #[test]
    fn spin7_sets_reject_wrong_m_and_mode() {
        let p = PhaseState::zeros();
        assert!(set_defect(SetName::BSpin7Minus, &p, &ModelParams::ricci_flat(2).unwrap()).is_err());
        assert!(set_defect(SetName::BSpin7Minus, &p, &ModelParams::negative(1).unwrap()).is_err());
        assert!(set_defect(SetName::BSpin7Minus, &p, &ModelParams::ricci_flat(1).unwrap()).is_ok());
    }

    #[test]
    fn samplers_land_on_their_sets() {
        for (name, params) in [
            (SetName::S, ModelParams::negative(1).unwrap()),
            (SetName::BRf, ModelParams::negative(2).unwrap()),
            (SetName::BRd, ModelParams::negative(1).unwrap()),
            (SetName::BFs, ModelParams::negative(3).unwrap()),
            (SetName::BAlc, ModelParams::ricci_flat(2).unwrap()),
            (SetName::BKe, ModelParams::negative(1).unwrap()),
            (SetName::BQk, ModelParams::negative(2).unwrap()),
            (SetName::BSpin7Minus, ModelParams::ricci_flat(1).unwrap()),
            (SetName::BSpin7Plus, ModelParams::ricci_flat(1).unwrap()),
        ] {
            let samples = sample_on(name, &params, 11, 200).unwrap();
            for s in samples {
                assert!(
                    membership(name, &s, &params, 1e-10).unwrap(),
                    "{name} sample off-set: {s:?}"
                );
            }
        }
    }

    #[test]
    fn audits_pass_for_all_defined_sets() {
        // quick version of the acceptance audit (1e3 samples)
        for m in [1u32, 2] {
            for name in [SetName::S, SetName::BRf, SetName::BRd, SetName::BFs, SetName::BKe] {
                let params = ModelParams::negative(m).unwrap();
                let rep = invariance_audit(name, &params, 1000, 7).unwrap();
                assert!(rep.passed(), "{name} m = {m}: {rep:?}");
            }
            let rep = invariance_audit(SetName::BQk, &ModelParams::negative(m).unwrap(), 1000, 7).unwrap();
            assert!(rep.passed(), "BQK m = {m}");
            let rep = invariance_audit(SetName::BAlc, &ModelParams::ricci_flat(m).unwrap(), 1000, 7).unwrap();
            assert!(rep.passed(), "BALC m = {m}");
        }
        for name in [SetName::BSpin7Minus, SetName::BSpin7Plus] {
            let rep = invariance_audit(name, &ModelParams::ricci_flat(1).unwrap(), 1000, 7).unwrap();
            assert!(rep.passed(), "{name}: {rep:?}");
        }
    }

    #[test]
    fn bqk_audit_rejected_in_rf_mode() {
        let err = invariance_audit(SetName::BQk, &ModelParams::ricci_flat(1).unwrap(), 10, 0);
        assert!(err.is_err());
    }

    #[test]
    fn bohm_identity_and_compactness_on_brf() {
        let params = ModelParams::negative(1).unwrap();
        let samples = sample_on(SetName::BRf, &params, 3, 2000).unwrap();
        for s in &samples {
            if s.y1 < 1e-6 || s.y2 < 1e-6 || s.y3 < 1e-6 {
                continue;
            }
            let d = curvature_terms(s, &params);
            let lhs = bohm_log_derivative(s, &params);
            let rhs = (4.0 * params.mf() + 3.0) * d.g - 1.0;
            assert!((lhs - rhs).abs() / rhs.abs().max(1.0) < 1e-9);
            assert!(rhs >= -1e-12, "monotonicity violated at {s:?}");
        }
        // compactness bound on S samples
        let s_samples = sample_on(SetName::S, &params, 5, 2000).unwrap();
        for s in &s_samples {
            assert!(s.y2 * s.y2 < 1.0 / 3.0 + 1e-12);
            // Y1' <= 0 in S
            let v = vector_field(s, &params);
            assert!(v[3] <= 1e-14);
        }
    }

    #[test]
    fn bke_consistency_form() {
        // the eliminated conservation form vanishes on BKE samples
        for m in [1u32, 3] {
            let params = ModelParams::negative(m).unwrap();
            let mf = params.mf();
            for s in sample_on(SetName::BKe, &params, 17, 500).unwrap() {
                let u = lambda_wsq(&s, &params);
                let form = 0.5 * (mf + 1.0) * s.y3 * s.y3
                    + (2.0 * mf + 1.0) / 8.0 * s.y1 * s.y1 * s.y3 * s.y3
                    - 0.5 * s.y1 * s.y3
                    - u;
                assert!(form.abs() < 1e-10, "form = {form:.3e} at {s:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn mirror_symmetry_of_chirality_defects(
            x1 in -1.0..1.0f64, x2 in -1.0..1.0f64, x3 in -1.0..1.0f64,
            y1 in 0.0..1.5f64, y2 in 0.0..1.5f64, y3 in 0.0..1.5f64,
        ) {
            let s = PhaseState::new(x1, x2, x3, y1, y2, y3);
            let mirrored = PhaseState::new(x1, x2, x3, -y1, y2, y3);
            let h = spin7_h(&s);
            let f = spin7_f(&mirrored);
            for i in 0..3 {
                prop_assert!((h[i] - f[i]).abs() < 1e-14);
            }
        }
    }
}
