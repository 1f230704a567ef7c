//! Catalog of the flow's critical points, their closed-form spectra, and the
//! displayed eigenbases used for seeding and for deterministic eigenvector
//! alignment.

use crate::error::{Error, Result};
use crate::model::{curvature_terms, vector_field, LambdaMode, ModelParams, PhaseState};
use nalgebra::Vector6;
use serde::Serialize;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A named equilibrium of the flow.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub name: String,
    pub coords: PhaseState,
    pub w_value: f64,
    pub on_boundary: bool,
}

impl CriticalPoint {
    fn new(name: impl Into<String>, coords: PhaseState, params: &ModelParams) -> Self {
        let d = curvature_terms(&coords, &ModelParams::negative(params.m).unwrap());
        let rf = 1.0 - d.g - d.rs;
        let on_boundary = rf.abs() < 1e-12;
        let w_value = if on_boundary { 0.0 } else { d.wsq.max(0.0).sqrt() };
        CriticalPoint { name: name.into(), coords, w_value, on_boundary }
    }
}

/// Max-norm residual of the vector field at a point, with the index of the
/// worst component.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalityReport {
    pub residual: f64,
    pub worst_component: usize,
}

pub fn verify_critical(point: &CriticalPoint, params: &ModelParams) -> CriticalityReport {
    let f = vector_field(&point.coords, params);
    let mut worst = 0;
    for i in 1..6 {
        if f[i].abs() > f[worst].abs() {
            worst = i;
        }
    }
    CriticalityReport { residual: f.amax(), worst_component: worst }
}

/// Either an isolated critical point or a 1-parameter family with a sampler.
#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Isolated(CriticalPoint),
    Family(PointFamily),
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        match self {
            CatalogEntry::Isolated(p) => &p.name,
            CatalogEntry::Family(f) => f.name,
        }
    }

    /// A single representative: the point itself, or the family midpoint.
    pub fn representative(&self) -> CriticalPoint {
        match self {
            CatalogEntry::Isolated(p) => p.clone(),
            CatalogEntry::Family(f) => f.at(0.5 * (f.range.0 + f.range.1)),
        }
    }

    /// All points this entry contributes to residual checks: the point, or a
    /// fixed lattice over the family parameter.
    pub fn sample_points(&self, n: usize) -> Vec<CriticalPoint> {
        match self {
            CatalogEntry::Isolated(p) => vec![p.clone()],
            CatalogEntry::Family(f) => f.lattice(n),
        }
    }
}

/// A 1-parameter family of critical points with a fixed-lattice sampler.
#[derive(Debug, Clone)]
pub struct PointFamily {
    pub name: &'static str,
    pub range: (f64, f64),
    params: ModelParams,
    gen: fn(&ModelParams, f64) -> CriticalPoint,
}

impl PointFamily {
    pub fn at(&self, t: f64) -> CriticalPoint {
        (self.gen)(&self.params, t)
    }

    pub fn lattice(&self, n: usize) -> Vec<CriticalPoint> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let t = self.range.0 + (self.range.1 - self.range.0) * k as f64 / (n - 1) as f64;
                self.at(t)
            })
            .collect()
    }
}

pub fn p0(params: &ModelParams) -> CriticalPoint {
    CriticalPoint::new(
        "P0",
        PhaseState::new(1.0 / 3.0, 1.0 / 3.0, 0.0, SQRT2, SQRT2 / 3.0, 0.0),
        params,
    )
}

pub fn pac1(params: &ModelParams) -> CriticalPoint {
    let c = 1.0 / (4.0 * params.mf() + 3.0);
    CriticalPoint::new(
        "PAC1",
        PhaseState::new(c, c, c, SQRT2, SQRT2 * c, 2.0 * SQRT2 * c),
        params,
    )
}

pub fn pac2(params: &ModelParams) -> CriticalPoint {
    let m = params.mf();
    let c = 1.0 / (4.0 * m + 3.0);
    let r = ((4.0 * m + 2.0) / ((2.0 * m + 3.0) * (2.0 * m + 3.0) + 2.0 * m)).sqrt();
    CriticalPoint::new(
        "PAC2",
        PhaseState::new(c, c, c, SQRT2, (2.0 * m + 3.0) * c * r, 2.0 * c * r),
        params,
    )
}

pub fn palc1(params: &ModelParams) -> CriticalPoint {
    let m = params.mf();
    let c = 1.0 / (4.0 * m + 2.0);
    let y3 = (1.0 / (2.0 * m + 1.0)) * ((4.0 * m + 1.0) / (2.0 * m + 2.0)).sqrt();
    CriticalPoint::new("PALC1", PhaseState::new(0.0, c, c, 0.0, 0.5 * y3, y3), params)
}

pub fn palc2(params: &ModelParams) -> CriticalPoint {
    let m = params.mf();
    let c = 1.0 / (4.0 * m + 2.0);
    let alpha = ((8.0 * m + 2.0) / ((m + 1.0) * (m + 1.0) + m)).sqrt();
    CriticalPoint::new(
        "PALC2",
        PhaseState::new(0.0, c, c, 0.0, 0.5 * (m + 1.0) * c * alpha, c * alpha),
        params,
    )
}

pub fn palc0(params: &ModelParams) -> CriticalPoint {
    CriticalPoint::new("PALC0", PhaseState::new(0.0, 0.5, 0.0, 0.0, SQRT2 / 4.0, 0.0), params)
}

/// The m <= 2 boundary point (0, -1/2, 1/(2m), 0, 0, sqrt((2-m)/2)/m).
pub fn p5(params: &ModelParams) -> Option<CriticalPoint> {
    let m = params.mf();
    if params.m > 2 {
        return None;
    }
    let y3 = ((2.0 - m) / 2.0).sqrt() / m;
    Some(CriticalPoint::new(
        "P5",
        PhaseState::new(0.0, -0.5, 1.0 / (2.0 * m), 0.0, 0.0, y3),
        params,
    ))
}

pub fn pah(params: &ModelParams, y1: f64) -> CriticalPoint {
    let c = 1.0 / (4.0 * params.mf() + 3.0);
    CriticalPoint::new(format!("PAH({y1:.4})"), PhaseState::new(c, c, c, y1, 0.0, 0.0), params)
}

pub fn pqk(params: &ModelParams) -> CriticalPoint {
    let m = params.mf();
    let c = 1.0 / (2.0 * m + 3.0);
    CriticalPoint::new(
        "PQK",
        PhaseState::new(c, c, 0.5 * c, SQRT2, 0.0, SQRT2 * c),
        params,
    )
}

/// Interior point ((m+2)/D, (2m+2)/D, (m+1)/D, 0, 0, sqrt(2/D)), D = 4(m+1)^2 + m + 2.
pub fn p3_interior(params: &ModelParams) -> CriticalPoint {
    let m = params.mf();
    let d = 4.0 * (m + 1.0) * (m + 1.0) + m + 2.0;
    CriticalPoint::new(
        "P3",
        PhaseState::new((m + 2.0) / d, (2.0 * m + 2.0) / d, (m + 1.0) / d, 0.0, 0.0, (2.0 / d).sqrt()),
        params,
    )
}

fn f6_point(params: &ModelParams, y1: f64, sign: f64) -> CriticalPoint {
    let m = params.mf();
    let disc = 24.0 * m * (2.0 * m + 1.0);
    let a = (3.0 + sign * disc.sqrt()) / (12.0 * m + 9.0);
    let b = (1.0 - 3.0 * a) / (4.0 * m);
    let tag = if sign > 0.0 { "+" } else { "-" };
    let mut p = CriticalPoint::new(format!("F6{tag}({y1:.4})"), PhaseState::new(a, a, b, y1, 0.0, 0.0), params);
    p.on_boundary = true; // G = 1, Rs = 0 exactly
    p
}

fn f7_point(params: &ModelParams, theta: f64) -> CriticalPoint {
    let m = params.mf();
    let c = 1.0 / (4.0 * m + 3.0);
    // Q-orthonormal basis of the plane {x1 + 2x2 + 4m x3 = 0}, Q = diag(1,2,4m)
    let e1 = Vector6::new(2.0, -1.0, 0.0, 0.0, 0.0, 0.0) / 6.0_f64.sqrt();
    let n2 = (48.0 * m * m + 36.0 * m).sqrt();
    let e2 = Vector6::new(4.0 * m, 4.0 * m, -3.0, 0.0, 0.0, 0.0) / n2;
    let r = ((4.0 * m + 2.0) / (4.0 * m + 3.0)).sqrt();
    let w = r * (theta.cos() * e1 + theta.sin() * e2);
    CriticalPoint::new(
        format!("F7({theta:.4})"),
        PhaseState::new(c + w[0], c + w[1], c + w[2], 0.0, 0.0, 0.0),
        params,
    )
}

fn pah_gen(params: &ModelParams, y1: f64) -> CriticalPoint {
    pah(params, y1)
}

fn f6_plus(params: &ModelParams, y1: f64) -> CriticalPoint {
    f6_point(params, y1, 1.0)
}

fn f6_minus(params: &ModelParams, y1: f64) -> CriticalPoint {
    f6_point(params, y1, -1.0)
}

/// All critical points of §-listing instantiated for the given parameters.
/// Boundary points are critical in both modes; the interior points (PAH, PQK,
/// P3) exist only in negative mode and are omitted when `params` is Ricci-flat.
pub fn catalog(params: &ModelParams) -> Vec<CatalogEntry> {
    let mut out = vec![
        CatalogEntry::Isolated(p0(params)),
        CatalogEntry::Isolated(pac1(params)),
        CatalogEntry::Isolated(pac2(params)),
        CatalogEntry::Isolated(palc1(params)),
        CatalogEntry::Isolated(palc2(params)),
        CatalogEntry::Isolated(palc0(params)),
    ];
    if let Some(p) = p5(params) {
        out.push(CatalogEntry::Isolated(p));
    }
    out.push(CatalogEntry::Family(PointFamily {
        name: "F6+",
        range: (0.25, 2.0),
        params: *params,
        gen: f6_plus,
    }));
    out.push(CatalogEntry::Family(PointFamily {
        name: "F6-",
        range: (0.25, 2.0),
        params: *params,
        gen: f6_minus,
    }));
    out.push(CatalogEntry::Family(PointFamily {
        name: "F7",
        range: (0.0, std::f64::consts::TAU),
        params: *params,
        gen: f7_point,
    }));
    if params.lambda_mode == LambdaMode::Negative {
        out.push(CatalogEntry::Family(PointFamily {
            name: "PAH",
            range: (0.0, SQRT2),
            params: *params,
            gen: pah_gen,
        }));
        out.push(CatalogEntry::Isolated(pqk(params)));
        out.push(CatalogEntry::Isolated(p3_interior(params)));
    }
    out
}

/// Look up a catalog point by name ("P0", "PAC1", ..., "PAH" takes the
/// family midpoint unless written as `PAH:y1`).
pub fn by_name(name: &str, params: &ModelParams) -> Result<CriticalPoint> {
    let up = name.to_ascii_uppercase();
    if let Some(rest) = up.strip_prefix("PAH:") {
        let y1: f64 = rest.parse().map_err(|_| Error::UnknownPoint(name.into()))?;
        return Ok(pah(params, y1));
    }
    match up.as_str() {
        "P0" => Ok(p0(params)),
        "PAC1" => Ok(pac1(params)),
        "PAC2" => Ok(pac2(params)),
        "PALC0" => Ok(palc0(params)),
        "PALC1" => Ok(palc1(params)),
        "PALC2" => Ok(palc2(params)),
        "PAH" => Ok(pah(params, SQRT2)),
        "PQK" => Ok(pqk(params)),
        "P3" => Ok(p3_interior(params)),
        "P5" => p5(params).ok_or_else(|| {
            Error::InvalidParams(format!("P5 exists only for m <= 2 (got m = {})", params.m))
        }),
        _ => Err(Error::UnknownPoint(name.into())),
    }
}

// ---------------------------------------------------------------------------
// closed-form spectra
// ---------------------------------------------------------------------------

/// Roots (larger, smaller) of A x^2 + B x + C.
fn quad_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * disc);
    let r1 = q / a;
    let r2 = c / q;
    if r1 >= r2 {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// Roots of the PAC2 quadratics: (rho1, rho2, sigma1, sigma2) with
/// rho2 < 0 < 2/(4m+3) < rho1 and sigma2 < sigma1 < 0.
pub fn pac2_quadratic_roots(m: u32) -> (f64, f64, f64, f64) {
    let m = m as f64;
    let a = 64.0 * m.powi(4) + 320.0 * m.powi(3) + 516.0 * m * m + 342.0 * m + 81.0;
    let b = 64.0 * m.powi(4) + 304.0 * m.powi(3) + 448.0 * m * m + 264.0 * m + 54.0;
    let c_rho = -(64.0 * m.powi(3) + 240.0 * m * m + 248.0 * m + 72.0);
    let c_sigma = 32.0 * m.powi(3) + 96.0 * m * m + 88.0 * m + 24.0;
    let (rho1, rho2) = quad_roots(a, b, c_rho);
    let (sigma1, sigma2) = quad_roots(a, b, c_sigma);
    (rho1, rho2, sigma1, sigma2)
}

/// Roots (rho1, rho2), rho1 < rho2 < 0, of the PALC2 quadratic.
pub fn palc2_quadratic_roots(m: u32) -> (f64, f64) {
    let m = m as f64;
    let a = 8.0 * m.powi(4) + 32.0 * m.powi(3) + 34.0 * m * m + 14.0 * m + 2.0;
    let b = 8.0 * m.powi(4) + 30.0 * m.powi(3) + 27.0 * m * m + 9.0 * m + 1.0;
    let c = 4.0 * m.powi(3) + 5.0 * m * m + m;
    let (hi, lo) = quad_roots(a, b, c);
    (lo, hi)
}

/// The closed-form eigenvalue lists. For P0, PAC1, PAC2 and PAH these are the
/// E-tangent spectra; for PALC2 the full six-value list (its E-tangent
/// spectrum drops one copy of -(4m+1)/(4m+2)).
pub fn closed_form_spectrum(name: &str, params: &ModelParams) -> Result<Vec<f64>> {
    let m = params.mf();
    match name.to_ascii_uppercase().as_str() {
        "P0" => Ok(vec![2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0, -4.0 / 3.0]),
        "PAC1" => {
            let l1 = 2.0 / (4.0 * m + 3.0);
            let l4 = -(4.0 * m + 4.0) / (4.0 * m + 3.0);
            Ok(vec![l1, l1, l1, l4, l4])
        }
        "PAC2" => {
            let (rho1, rho2, sigma1, sigma2) = pac2_quadratic_roots(params.m);
            Ok(vec![2.0 / (4.0 * m + 3.0), rho1, rho2, sigma1, sigma2])
        }
        "PALC2" => {
            let (rho1, rho2) = palc2_quadratic_roots(params.m);
            let l23 = -(4.0 * m + 1.0) / (4.0 * m + 2.0);
            Ok(vec![-1.0 / (4.0 * m + 2.0), l23, l23, rho1, rho2, 1.0 / (2.0 * m + 1.0)])
        }
        "PAH" => {
            let l23 = -1.0 / (4.0 * m + 3.0);
            Ok(vec![0.0, l23, l23, -1.0, -1.0])
        }
        other => Err(Error::UnknownPoint(other.into())),
    }
}

// ---------------------------------------------------------------------------
// displayed eigenbases
// ---------------------------------------------------------------------------

/// Unstable eigenbasis (eigenvalue 2/3) at P0, in display order v1, v2, v3.
/// v1, v2 are tangent to the boundary surface; v3 is transverse to it.
pub fn p0_unstable_basis(params: &ModelParams) -> [Vector6<f64>; 3] {
    let m = params.mf();
    [
        Vector6::new(
            -4.0 * m * (m + 2.0),
            -4.0 * m * (m + 2.0),
            3.0 * (m + 2.0),
            0.0,
            -2.0 * SQRT2 * m * (m + 2.0),
            6.0 * SQRT2,
        ),
        Vector6::new(-4.0, 2.0, 0.0, -9.0 * SQRT2, -SQRT2, 0.0),
        Vector6::new(-4.0 * m, -4.0 * m, 3.0, 0.0, -2.0 * (m + 1.0) * SQRT2, 0.0),
    ]
}

/// Stable eigenvectors at P0: (eigenvalue, vector) pairs.
pub fn p0_stable_basis(params: &ModelParams) -> [(f64, Vector6<f64>); 2] {
    let m = params.mf();
    [
        (-2.0 / 3.0, Vector6::new(-4.0 * m * SQRT2, -4.0 * m * SQRT2, 3.0 * SQRT2, 0.0, 4.0 * m, 0.0)),
        (-4.0 / 3.0, Vector6::new(-4.0 * SQRT2, 2.0 * SQRT2, 0.0, 9.0, 1.0, 0.0)),
    ]
}

/// Unstable eigenbasis (eigenvalue 2/(4m+3)) at PAC1, in order v1, v2, v3.
///
/// v2 differs from the displayed one: the display is an eigenvector but not
/// tangent to the boundary surface (the displayed normal at PAC1 drops a
/// factor 4m+3 on its Y-components). The tangent representative is
/// v2 - (4m+2) v3, and the factor 2 normalization makes the family label
/// (1, 2, 0)/sqrt(5) land on the chirality-flipped eight-dimensional special
/// holonomy curve, matching the catalog of recovered metrics.
pub fn pac1_unstable_basis(params: &ModelParams) -> [Vector6<f64>; 3] {
    let m = params.mf();
    let q = 4.0 * m + 3.0;
    [
        Vector6::new(
            -4.0 * m * SQRT2,
            -4.0 * m * SQRT2,
            3.0 * SQRT2,
            0.0,
            4.0 * m,
            -(8.0 * m + 12.0),
        ),
        2.0 * Vector6::new(-(4.0 * m + 2.0) * SQRT2, SQRT2, SQRT2, -q * q, -1.0, -2.0),
        Vector6::new(0.0, 0.0, 0.0, 0.0, -1.0, -2.0),
    ]
}

/// Stable eigenvectors at PAC1 (eigenvalue -(4m+4)/(4m+3)).
pub fn pac1_stable_basis(params: &ModelParams) -> [(f64, Vector6<f64>); 2] {
    let m = params.mf();
    let l = -(4.0 * m + 4.0) / (4.0 * m + 3.0);
    [
        (l, Vector6::new(-4.0 * SQRT2 * m * (m + 1.0), 0.0, SQRT2 * (m + 1.0), 2.0 * m * (4.0 * m + 3.0), 0.0, 2.0)),
        (l, Vector6::new(
            -4.0 * SQRT2 * (m + 1.0) * (m + 1.0),
            2.0 * SQRT2 * (m + 1.0),
            SQRT2 * (m + 1.0),
            (4.0 * m + 3.0) * (2.0 * m + 3.0),
            1.0,
            0.0,
        )),
    ]
}

/// The two seed vectors at PAC2: the slow unstable direction (eigenvalue
/// 2/(4m+3), transverse to the boundary) and the boundary-tangent unstable
/// direction (eigenvalue rho1).
pub fn pac2_seed_basis(params: &ModelParams) -> [Vector6<f64>; 2] {
    let m = params.mf();
    let (rho1, _, _, _) = pac2_quadratic_roots(params.m);
    let p = pac2(params).coords;
    [
        Vector6::new(0.0, 0.0, 0.0, 0.0, -(2.0 * m + 3.0), -2.0),
        Vector6::new(-2.0 * rho1, rho1, 0.0, -3.0 * SQRT2, -p.y2, p.y3),
    ]
}

/// The boundary-transverse eigenvector at PALC2 (eigenvalue 1/(2m+1)).
pub fn palc2_transverse_vector(params: &ModelParams) -> Vector6<f64> {
    let m = params.mf();
    let k = ((m + 1.0) * (m + 1.0) + m).sqrt();
    let r = (8.0 * m + 2.0).sqrt();
    Vector6::new(-(4.0 * m + 2.0) * k, k, k, 0.0, (m + 1.0) * (m + 1.0) * r, (2.0 * m + 2.0) * r)
}

/// Displayed eigenvectors grouped by eigenvalue, used to orient computed
/// eigenbases deterministically.
pub fn displayed_vectors(name: &str, params: &ModelParams) -> Vec<(f64, Vec<Vector6<f64>>)> {
    let m = params.mf();
    match name.to_ascii_uppercase().as_str() {
        "P0" => {
            let u = p0_unstable_basis(params);
            let s = p0_stable_basis(params);
            vec![
                (2.0 / 3.0, u.to_vec()),
                (s[0].0, vec![s[0].1]),
                (s[1].0, vec![s[1].1]),
            ]
        }
        "PAC1" => {
            let u = pac1_unstable_basis(params);
            let s = pac1_stable_basis(params);
            vec![
                (2.0 / (4.0 * m + 3.0), u.to_vec()),
                (s[0].0, vec![s[0].1, s[1].1]),
            ]
        }
        "PAC2" => {
            let (rho1, _, _, _) = pac2_quadratic_roots(params.m);
            let b = pac2_seed_basis(params);
            vec![(2.0 / (4.0 * m + 3.0), vec![b[0]]), (rho1, vec![b[1]])]
        }
        "PALC2" => vec![(1.0 / (2.0 * m + 1.0), vec![palc2_transverse_vector(params)])],
        s if s.starts_with("PAH") => {
            let y1 = pah_family_param(s).unwrap_or(SQRT2);
            vec![
                (0.0, vec![Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)]),
                (
                    -1.0 / (4.0 * m + 3.0),
                    vec![
                        Vector6::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
                        Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
                    ],
                ),
                (
                    -1.0,
                    vec![
                        Vector6::new(-2.0, 1.0, 0.0, 3.0 * y1, 0.0, 0.0),
                        Vector6::new(-4.0 * m, -4.0 * m, 3.0, 0.0, 0.0, 0.0),
                    ],
                ),
            ]
        }
        _ => vec![],
    }
}

fn pah_family_param(name: &str) -> Option<f64> {
    let inner = name.strip_prefix("PAH(")?.strip_suffix(')')?;
    inner.parse().ok()
}
