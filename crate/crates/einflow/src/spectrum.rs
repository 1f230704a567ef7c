//! Numeric eigen-decomposition of the linearization at critical points, with
//! constraint-tangency classification.
//!
//! Eigenvalues come from the real Schur form of the full 6x6 Jacobian;
//! eigenvectors from clustered inverse iteration. Within each repeated
//! eigenspace the basis is adapted to the constraint normals (the hyperplane
//! normal and the boundary-surface gradient), so that tangency is decided
//! per direction even when only a subspace of an eigenspace is tangent.

use crate::catalog::{self, CriticalPoint};
use crate::model::{jacobian, normal_boundary, normal_hyperplane, ModelParams};
use nalgebra::{Complex, Matrix6, Vector6};
use serde::Serialize;

type C64 = Complex<f64>;
type CVec6 = Vector6<C64>;
type CMat6 = Matrix6<C64>;

/// Cosine threshold under which an eigenvector counts as tangent to a
/// constraint surface.
pub const TANGENCY_TOL: f64 = 1e-9;

/// Eigenvalues closer than this are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-6;

/// Gap under which two distinct eigenvalues are flagged near-degenerate.
const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub re: f64,
    pub im: f64,
    pub vector_re: [f64; 6],
    pub vector_im: [f64; 6],
    /// |<v, N_E>| / |v||N_E| < TANGENCY_TOL
    pub tangent_to_e: bool,
    /// |<v, N_dE>| / |v||N_dE| < TANGENCY_TOL
    pub tangent_to_boundary: bool,
    /// residual |J v - lambda v| of the computed pair
    pub residual: f64,
}

impl EigenPair {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im.abs() < 1e-9
    }

    pub fn vector(&self) -> CVec6 {
        CVec6::from_fn(|i, _| C64::new(self.vector_re[i], self.vector_im[i]))
    }
}

/// Defectiveness record for one eigenvalue cluster.
#[derive(Debug, Clone, Serialize)]
pub struct DefectiveBlock {
    pub eigenvalue: f64,
    pub algebraic: usize,
    pub geometric: usize,
    /// dim ker (J - lambda I)^2, the generalized-eigenvector rank
    pub generalized: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub point: String,
    pub pairs: Vec<EigenPair>,
    /// (unstable, stable) counts among E-tangent directions
    pub saddle_type: (usize, usize),
    /// (unstable, stable) counts among directions tangent to both E and dE
    pub boundary_saddle_type: (usize, usize),
    pub near_degenerate: bool,
    pub defective: Vec<DefectiveBlock>,
}

impl SpectrumReport {
    /// Real parts of the E-tangent eigenvalues, descending.
    pub fn tangent_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .pairs
            .iter()
            .filter(|p| p.tangent_to_e)
            .map(|p| p.re)
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }
}

fn to_complex(m: &Matrix6<f64>) -> CMat6 {
    CMat6::from_fn(|i, j| C64::new(m[(i, j)], 0.0))
}

/// Modified Gram-Schmidt over complex vectors; drops near-null columns.
fn orthonormalize(vs: &mut Vec<CVec6>) {
    let mut out: Vec<CVec6> = Vec::with_capacity(vs.len());
    for v in vs.iter() {
        let mut w = *v;
        for u in &out {
            let c = u.dotc(&w);
            w -= *u * c;
        }
        let n = w.norm();
        if n > 1e-12 {
            out.push(w / C64::new(n, 0.0));
        }
    }
    *vs = out;
}

/// Inverse iteration for the eigenspace of a cluster around `lambda`.
fn eigenspace(jc: &CMat6, lambda: C64, dim: usize) -> Vec<CVec6> {
    let shift = lambda + C64::new(1e-11 * (1.0 + lambda.norm()), 0.0);
    let shifted = jc - CMat6::identity() * shift;
    let lu = shifted.lu();
    // fixed, deterministic starting block
    let mut basis: Vec<CVec6> = (0..dim)
        .map(|k| {
            CVec6::from_fn(|i, _| {
                let x = ((i * 7 + k * 13 + 3) % 11) as f64 / 11.0 - 0.45;
                C64::new(1.0 + x, 0.0)
            })
        })
        .collect();
    orthonormalize(&mut basis);
    for _ in 0..4 {
        let mut next: Vec<CVec6> = basis
            .iter()
            .map(|v| lu.solve(v).unwrap_or(*v))
            .collect();
        orthonormalize(&mut next);
        if next.len() == dim {
            basis = next;
        } else {
            // singular solve collapsed the block; restart from perturbed basis
            for (k, v) in basis.iter_mut().enumerate() {
                *v += CVec6::from_fn(|i, _| C64::new(1e-8 * ((i + k) as f64), 0.0));
            }
            orthonormalize(&mut basis);
        }
    }
    basis
}

/// Split `basis` into (tangent, transverse) parts with respect to the real
/// normal `n`, rotating within the span so the split is exact.
fn adapt_to_normal(basis: &[CVec6], n: &Vector6<f64>) -> (Vec<CVec6>, Vec<CVec6>) {
    let nc = CVec6::from_fn(|i, _| C64::new(n[i], 0.0));
    let nn = n.norm();
    if basis.is_empty() {
        return (vec![], vec![]);
    }
    // coefficients c_k = <n, b_k>; the transverse direction is sum c_k b_k
    let c: Vec<C64> = basis.iter().map(|b| nc.dotc(b)).collect();
    let cnorm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if cnorm / nn < TANGENCY_TOL {
        return (basis.to_vec(), vec![]);
    }
    let mut transverse = CVec6::zeros();
    for (b, ck) in basis.iter().zip(&c) {
        transverse += *b * *ck;
    }
    transverse /= C64::new(transverse.norm(), 0.0);
    let mut tangent: Vec<CVec6> = Vec::new();
    for b in basis {
        let mut w = *b - transverse * transverse.dotc(b);
        for u in &tangent {
            let q = u.dotc(&w);
            w -= *u * q;
        }
        let nw = w.norm();
        if nw > 1e-9 {
            tangent.push(w / C64::new(nw, 0.0));
        }
    }
    (tangent, vec![transverse])
}

/// Align an orthonormal basis to reference directions where given, then make
/// the remainder deterministic by pivot normalization.
fn align_basis(basis: &[CVec6], refs: &[Vector6<f64>]) -> Vec<CVec6> {
    let mut aligned: Vec<CVec6> = Vec::new();
    let span = basis.to_vec();
    for r in refs {
        let rc = CVec6::from_fn(|i, _| C64::new(r[i], 0.0));
        // project the reference into the span
        let mut proj = CVec6::zeros();
        for b in &span {
            proj += *b * b.dotc(&rc);
        }
        // orthogonalize against what we already picked
        for u in &aligned {
            let c = u.dotc(&proj);
            proj -= *u * c;
        }
        let n = proj.norm();
        if n > 1e-7 {
            aligned.push(proj / C64::new(n, 0.0));
        }
    }
    // fill out the span deterministically
    for b in &span {
        let mut w = *b;
        for u in &aligned {
            let c = u.dotc(&w);
            w -= *u * c;
        }
        let n = w.norm();
        if n > 1e-7 {
            aligned.push(pivot_normalize(&(w / C64::new(n, 0.0))));
        }
        if aligned.len() == span.len() {
            break;
        }
    }
    aligned
}

/// Rotate the phase so the largest-magnitude component is real positive.
fn pivot_normalize(v: &CVec6) -> CVec6 {
    let mut piv = 0;
    for i in 1..6 {
        if v[i].norm() > v[piv].norm() {
            piv = i;
        }
    }
    let z = v[piv];
    if z.norm() < 1e-14 {
        return *v;
    }
    v * (z.conj() / C64::new(z.norm(), 0.0))
}

fn rank_deficiency(j: &Matrix6<f64>, lambda: f64) -> usize {
    let a = j - Matrix6::identity() * lambda;
    let svd = a.svd(false, false);
    let smax = svd.singular_values[0].max(1.0);
    svd.singular_values.iter().filter(|s| **s < 1e-9 * smax).count()
}

/// Full spectrum of the linearization at a critical point, with tangency
/// flags against the hyperplane normal and the boundary-surface gradient.
pub fn eigen_at(point: &CriticalPoint, params: &ModelParams) -> SpectrumReport {
    let j = jacobian(&point.coords, params);
    let jc = to_complex(&j);
    let n_e = normal_hyperplane(params);
    let n_de = normal_boundary(&point.coords, params);

    let mut eigs: Vec<C64> = j.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.abs().partial_cmp(&b.im.abs()).unwrap())
    });

    // cluster
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for e in &eigs {
        match clusters.last_mut() {
            Some((rep, count)) if (*e - *rep).norm() < CLUSTER_TOL => {
                *rep = (*rep * C64::new(*count as f64, 0.0) + *e) / C64::new(*count as f64 + 1.0, 0.0);
                *count += 1;
            }
            _ => clusters.push((*e, 1)),
        }
    }

    let mut near_degenerate = false;
    for w in clusters.windows(2) {
        if (w[0].0 - w[1].0).norm() < DEGENERACY_GAP {
            near_degenerate = true;
        }
    }

    let displayed = catalog::displayed_vectors(&point.name, params);
    let mut pairs: Vec<EigenPair> = Vec::new();
    let mut defective: Vec<DefectiveBlock> = Vec::new();

    for (lambda, mult) in &clusters {
        let basis = eigenspace(&jc, *lambda, *mult);
        if lambda.im.abs() < 1e-9 {
            let geo = rank_deficiency(&j, lambda.re);
            if geo < *mult {
                let a = j - Matrix6::identity() * lambda.re;
                let a2 = a * a;
                let svd = a2.svd(false, false);
                let smax = svd.singular_values[0].max(1.0);
                let gen = svd.singular_values.iter().filter(|s| **s < 1e-8 * smax).count();
                defective.push(DefectiveBlock {
                    eigenvalue: lambda.re,
                    algebraic: *mult,
                    geometric: geo,
                    generalized: gen,
                });
            }
        }

        // adapt: split by E-tangency, then the tangent part by dE-tangency
        let (tan_e, trans_e) = adapt_to_normal(&basis, &n_e);
        let (tan_both, trans_de) = adapt_to_normal(&tan_e, &n_de);

        let refs: Vec<Vector6<f64>> = displayed
            .iter()
            .filter(|(l, _)| (l - lambda.re).abs() < 1e-6 && lambda.im.abs() < 1e-9)
            .flat_map(|(_, vs)| vs.iter().copied())
            .collect();

        for group in [tan_both, trans_de, trans_e] {
            let aligned = if refs.is_empty() { group.iter().map(pivot_normalize).collect() } else { align_basis(&group, &refs) };
            for v in aligned {
                let nc_e = CVec6::from_fn(|i, _| C64::new(n_e[i], 0.0));
                let nc_de = CVec6::from_fn(|i, _| C64::new(n_de[i], 0.0));
                let t_e = nc_e.dotc(&v).norm() / n_e.norm() < TANGENCY_TOL;
                let t_de = nc_de.dotc(&v).norm() / n_de.norm().max(1e-300) < TANGENCY_TOL;
                let jv = jc * v;
                let res = (jv - v * *lambda).norm();
                pairs.push(EigenPair {
                    re: lambda.re,
                    im: lambda.im,
                    vector_re: std::array::from_fn(|i| v[i].re),
                    vector_im: std::array::from_fn(|i| v[i].im),
                    tangent_to_e: t_e,
                    tangent_to_boundary: t_de,
                    residual: res,
                });
            }
        }
    }

    pairs.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());

    let zero_tol = 1e-9;
    let saddle_type = (
        pairs.iter().filter(|p| p.tangent_to_e && p.re > zero_tol).count(),
        pairs.iter().filter(|p| p.tangent_to_e && p.re < -zero_tol).count(),
    );
    let boundary_saddle_type = (
        pairs
            .iter()
            .filter(|p| p.tangent_to_e && p.tangent_to_boundary && p.re > zero_tol)
            .count(),
        pairs
            .iter()
            .filter(|p| p.tangent_to_e && p.tangent_to_boundary && p.re < -zero_tol)
            .count(),
    );

    SpectrumReport {
        point: point.name.clone(),
        pairs,
        saddle_type,
        boundary_saddle_type,
        near_degenerate,
        defective,
    }
}

/// Greedy multiset match of the numeric E-tangent spectrum against a
/// closed-form list. Every numeric value must find a distinct closed-form
/// partner within `tol`; returns the worst matched deviation.
pub fn match_tangent_spectrum(numeric: &[f64], closed: &[f64], tol: f64) -> Result<f64, String> {
    let mut used = vec![false; closed.len()];
    let mut worst: f64 = 0.0;
    for x in numeric {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in closed.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (x - c).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) if d <= tol => {
                used[i] = true;
                worst = worst.max(d);
            }
            Some((_, d)) => {
                return Err(format!("eigenvalue {x} unmatched (closest closed-form deviation {d:.3e})"))
            }
            None => return Err(format!("eigenvalue {x} unmatched (closed-form list exhausted)")),
        }
    }
    Ok(worst)
}
