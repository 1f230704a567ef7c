//! Unstable-manifold shooting: seed construction from the linearized
//! solutions, event-detecting integration, and classification of the
//! forward limit.

use crate::catalog::{self, CriticalPoint};
use crate::error::{Error, Result};
use crate::integrate::{hermite, project_onto_boundary, Dopri5, StepOptions, SubsystemLock};
use crate::invariants::{min_s_defect, worst_s_face};
use crate::model::{
    constraint_defects, curvature_terms, vector_field, LambdaMode, ModelParams, PhaseState,
};
use nalgebra::Vector6;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShootFamily {
    /// Curves from the bolt point P0.
    Zeta,
    /// Curves from the smooth nut point PAC1.
    Gamma,
    /// Curves from the Jensen-cone point PAC2 (conically singular origin).
    GammaSingular,
}

impl std::fmt::Display for ShootFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShootFamily::Zeta => write!(f, "zeta"),
            ShootFamily::Gamma => write!(f, "gamma"),
            ShootFamily::GammaSingular => write!(f, "gamma-singular"),
        }
    }
}

impl ShootFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zeta" => Ok(ShootFamily::Zeta),
            "gamma" => Ok(ShootFamily::Gamma),
            "gamma-singular" | "gammasingular" | "gamma_singular" => Ok(ShootFamily::GammaSingular),
            other => Err(Error::InvalidSpec(format!("unknown family `{other}`"))),
        }
    }
}

/// A shooting spec: family, parameter vector on the unit sphere (raw
/// coefficient pair for the singular family), seed offset and model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShootSpec {
    pub family: ShootFamily,
    pub s: [f64; 3],
    pub epsilon: f64,
    pub params: ModelParams,
    /// Exploration override: admit s2 < 0 seeds (completeness unknown there).
    pub allow_negative_s2: bool,
}

pub const DEFAULT_EPSILON: f64 = 1e-6;

impl ShootSpec {
    /// Build a validated spec. For zeta/gamma the parameter vector is
    /// normalized onto the unit sphere; the singular family keeps raw
    /// coefficients, since the slow direction dominates the expansion there
    /// and only the coefficient pair is well defined.
    pub fn new(family: ShootFamily, s: [f64; 3], params: ModelParams) -> Result<Self> {
        Self::with_options(family, s, params, DEFAULT_EPSILON, false)
    }

    pub fn with_options(
        family: ShootFamily,
        s: [f64; 3],
        params: ModelParams,
        epsilon: f64,
        allow_negative_s2: bool,
    ) -> Result<Self> {
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidSpec("epsilon must be positive".into()));
        }
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        let mut s = s;
        match family {
            ShootFamily::Zeta | ShootFamily::Gamma => {
                if norm < 1e-14 {
                    if family == ShootFamily::Zeta {
                        return Err(Error::InvalidSpec("zeta requires s1 > 0".into()));
                    }
                } else {
                    for si in &mut s {
                        *si /= norm;
                    }
                }
                if family == ShootFamily::Zeta && s[0] <= 0.0 {
                    return Err(Error::InvalidSpec(
                        "zeta requires s1 > 0 (the fiber coordinate must grow initially)".into(),
                    ));
                }
                if s[1] < 0.0 && !allow_negative_s2 {
                    return Err(Error::InvalidSpec(
                        "s2 < 0 rejected by default; pass the exploration override to allow it"
                            .into(),
                    ));
                }
                if family == ShootFamily::Gamma && s[0] < 0.0 && !allow_negative_s2 {
                    return Err(Error::InvalidSpec("gamma requires s1 >= 0".into()));
                }
                if s[2] < 0.0 {
                    return Err(Error::InvalidSpec("s3 must be >= 0".into()));
                }
                if s[2] > 0.0 && params.lambda_mode == LambdaMode::RicciFlat {
                    return Err(Error::InvalidSpec(
                        "s3 > 0 multiplies the boundary-transverse direction; it needs negative mode"
                            .into(),
                    ));
                }
            }
            ShootFamily::GammaSingular => {
                if norm < 1e-14 {
                    return Err(Error::InvalidSpec(
                        "gamma-singular needs a nonzero coefficient pair".into(),
                    ));
                }
                if s[2] != 0.0 {
                    return Err(Error::InvalidSpec(
                        "gamma-singular takes two coefficients (eps1, eps2)".into(),
                    ));
                }
            }
        }
        Ok(ShootSpec { family, s, epsilon, params, allow_negative_s2 })
    }

    /// The critical point the curve emanates from.
    pub fn base_point(&self) -> CriticalPoint {
        match self.family {
            ShootFamily::Zeta => catalog::p0(&self.params),
            ShootFamily::Gamma => catalog::pac1(&self.params),
            ShootFamily::GammaSingular => catalog::pac2(&self.params),
        }
    }

    /// Subsystem equalities the exact curve satisfies, re-imposed at
    /// renormalization time so rounding noise cannot excite the transverse
    /// unstable modes.
    pub fn lock(&self) -> SubsystemLock {
        match self.family {
            ShootFamily::Zeta | ShootFamily::Gamma if self.s[1] == 0.0 => SubsystemLock::RoundFiber,
            ShootFamily::Gamma if self.s[0] == 0.0 => SubsystemLock::FubiniStudy,
            _ => SubsystemLock::None,
        }
    }
}

/// Seed state on the unstable manifold: base + epsilon * (unit combination of
/// the unstable eigenbasis), Newton-corrected onto the boundary surface in
/// Ricci-flat mode.
pub fn seed_state(spec: &ShootSpec) -> Result<PhaseState> {
    let params = &spec.params;
    let base = spec.base_point().coords.to_vector();
    let dir: Vector6<f64> = match spec.family {
        ShootFamily::Zeta => {
            let [v1, v2, v3] = catalog::p0_unstable_basis(params);
            spec.s[0] * v1 + spec.s[1] * v2 + spec.s[2] * v3
        }
        ShootFamily::Gamma => {
            let [v1, v2, v3] = catalog::pac1_unstable_basis(params);
            spec.s[0] * v1 + spec.s[1] * v2 + spec.s[2] * v3
        }
        ShootFamily::GammaSingular => {
            let [u1, u2] = catalog::pac2_seed_basis(params);
            spec.s[0] * u1 + spec.s[1] * u2
        }
    };
    let n = dir.norm();
    if n < 1e-14 {
        // the all-zero gamma label: the seed is the base point itself
        return Ok(PhaseState::from_vector(&base));
    }
    let mut seed = base + dir * (spec.epsilon / n);
    if params.lambda_mode == LambdaMode::RicciFlat {
        seed = project_onto_boundary(&seed, params, spec.lock())?;
    }
    let st = PhaseState::from_vector(&seed);
    let worst = min_s_defect(&st, params);
    if worst < -1e-7 {
        return Err(Error::SeedOutsideRegion(format!(
            "S-defect {worst:.3e} at the seed (face {})",
            worst_s_face(&st, params).0
        )));
    }
    Ok(st)
}

// ---------------------------------------------------------------------------
// trajectories
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Sample {
    pub eta: f64,
    pub state: PhaseState,
    pub g: f64,
    pub rs: f64,
    pub wsq: f64,
    pub h_defect: f64,
    pub rf_defect: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub accepted: u64,
    pub rejected: u64,
    pub projections: u64,
    /// max |h| and |1-G-Rs| seen between renormalizations
    pub max_h_defect: f64,
    pub max_rf_defect: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationEvent {
    Converged {
        point: String,
        eta: f64,
        state: PhaseState,
        #[serde(skip_serializing_if = "Option::is_none")]
        y1: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        y2_over_y3: Option<f64>,
        distance: f64,
    },
    ExitedRegion {
        face: String,
        eta: f64,
        state: PhaseState,
    },
    BudgetExhausted {
        eta: f64,
        state: PhaseState,
        /// distances to the tracked limit points at the end
        candidates: Vec<(String, f64)>,
    },
    StepUnderflow {
        eta: f64,
        state: PhaseState,
    },
}

impl TerminationEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            TerminationEvent::Converged { .. } => "converged",
            TerminationEvent::ExitedRegion { .. } => "exited_S",
            TerminationEvent::BudgetExhausted { .. } => "eta_budget_exhausted",
            TerminationEvent::StepUnderflow { .. } => "step_underflow",
        }
    }

    pub fn converged_to(&self) -> Option<&str> {
        match self {
            TerminationEvent::Converged { point, .. } => Some(point),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub samples: Vec<Sample>,
    pub diagnostics: StepDiagnostics,
    pub termination: TerminationEvent,
}

impl Trajectory {
    pub fn terminal_state(&self) -> PhaseState {
        self.samples.last().expect("trajectory has samples").state
    }

    pub fn eta_span(&self) -> f64 {
        let s = &self.samples;
        s.last().map(|x| x.eta).unwrap_or(0.0) - s.first().map(|x| x.eta).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    pub eta_budget: f64,
    /// renormalize onto the boundary every this many accepted steps (RF mode)
    pub project_every: u32,
    pub conv_tol: f64,
    /// consecutive accepted steps below conv_tol before declaring convergence
    pub conv_window: u32,
    /// terminate when an S-defect drops below -exit_tol
    pub exit_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            rtol: 1e-10,
            atol: 1e-12,
            eta_budget: 200.0,
            project_every: 16,
            conv_tol: 1e-7,
            conv_window: 50,
            exit_tol: 1e-6,
        }
    }
}

struct Target {
    name: String,
    point: Option<PhaseState>, // None = the AH line
}

fn limit_targets(params: &ModelParams) -> Vec<Target> {
    let mut t = vec![
        Target { name: "PAC1".into(), point: Some(catalog::pac1(params).coords) },
        Target { name: "PAC2".into(), point: Some(catalog::pac2(params).coords) },
        Target { name: "PALC0".into(), point: Some(catalog::palc0(params).coords) },
        Target { name: "PALC1".into(), point: Some(catalog::palc1(params).coords) },
        Target { name: "PALC2".into(), point: Some(catalog::palc2(params).coords) },
    ];
    if params.lambda_mode == LambdaMode::Negative {
        t.push(Target { name: "PAH".into(), point: None });
    }
    t
}

fn target_distance(t: &Target, s: &PhaseState, params: &ModelParams) -> f64 {
    match &t.point {
        Some(p) => s.distance(p),
        None => s.distance_to_ah_line(params),
    }
}

fn make_sample(eta: f64, state: PhaseState, params: &ModelParams) -> Sample {
    let d = curvature_terms(&state, params);
    let (h, rf) = constraint_defects(&state, params);
    Sample { eta, state, g: d.g, rs: d.rs, wsq: d.wsq, h_defect: h, rf_defect: rf }
}

/// Integrate the flow from a seed with event detection.
pub fn integrate(seed: &PhaseState, params: &ModelParams, opts: &ShootOptions) -> Result<Trajectory> {
    integrate_locked(seed, params, opts, SubsystemLock::None)
}

/// Integrate with a subsystem lock applied at every renormalization.
pub fn integrate_locked(
    seed: &PhaseState,
    params: &ModelParams,
    opts: &ShootOptions,
    lock: SubsystemLock,
) -> Result<Trajectory> {
    if min_s_defect(seed, params) < -1e-6 {
        return Err(Error::SeedOutsideRegion(format!(
            "face {} at the seed",
            worst_s_face(seed, params).0
        )));
    }
    let step_opts = StepOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_max: 0.1, // keeps the sample grid dense enough for Hermite-grade resampling
        ..Default::default()
    };
    let mut drv = Dopri5::new(params, seed.to_vector(), 0.0, step_opts);
    let targets = limit_targets(params);
    let mut below: Vec<u32> = vec![0; targets.len()];
    let mut exit_streak = 0u32;
    let mut samples = vec![make_sample(0.0, *seed, params)];
    let mut diag = StepDiagnostics::default();
    let constant_seed = vector_field(seed, params).amax() < 1e-14;

    let termination = 'outer: loop {
        if constant_seed {
            // the seed is itself critical (e.g. the all-zero gamma label)
            let mut best = (String::new(), f64::INFINITY);
            for t in &targets {
                let d = target_distance(t, seed, params);
                if d < best.1 {
                    best = (t.name.clone(), d);
                }
            }
            break TerminationEvent::Converged {
                point: best.0,
                eta: 0.0,
                state: *seed,
                y1: None,
                y2_over_y3: None,
                distance: best.1,
            };
        }
        match drv.advance(opts.eta_budget) {
            Ok(_seg) => {}
            Err(Error::StepUnderflow { eta, .. }) => {
                break TerminationEvent::StepUnderflow { eta, state: drv.state() };
            }
            Err(e) => return Err(e),
        }
        let state = drv.state();
        let eta = drv.eta;
        if params.lambda_mode == LambdaMode::RicciFlat
            && drv.n_accepted.is_multiple_of(opts.project_every as u64)
        {
            let projected = project_onto_boundary(&drv.y, params, lock)?;
            drv.y = projected;
            drv.resync();
            diag.projections += 1;
        }
        let sample = make_sample(eta, drv.state(), params);
        diag.max_h_defect = diag.max_h_defect.max(sample.h_defect.abs());
        diag.max_rf_defect = diag.max_rf_defect.max(sample.rf_defect.abs());
        samples.push(sample);

        // exit detection
        let worst = min_s_defect(&state, params);
        if worst < -opts.exit_tol {
            exit_streak += 1;
            if exit_streak >= 3 {
                break TerminationEvent::ExitedRegion {
                    face: worst_s_face(&state, params).0.into(),
                    eta,
                    state,
                };
            }
        } else {
            exit_streak = 0;
        }

        // convergence windows
        for (i, t) in targets.iter().enumerate() {
            let d = target_distance(t, &state, params);
            if d < opts.conv_tol {
                below[i] += 1;
                if below[i] >= opts.conv_window {
                    let y1 = (t.point.is_none()).then_some(state.y1);
                    let ratio = (state.y3.abs() > 1e-30).then(|| state.y2 / state.y3);
                    break 'outer TerminationEvent::Converged {
                        point: t.name.clone(),
                        eta,
                        state,
                        y1,
                        y2_over_y3: ratio,
                        distance: d,
                    };
                }
            } else {
                below[i] = 0;
            }
        }

        if eta >= opts.eta_budget - 1e-9 {
            let mut candidates: Vec<(String, f64)> = targets
                .iter()
                .map(|t| (t.name.clone(), target_distance(t, &state, params)))
                .collect();
            candidates.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            break TerminationEvent::BudgetExhausted { eta, state, candidates };
        }
    };

    diag.accepted = drv.n_accepted;
    diag.rejected = drv.n_rejected;
    Ok(Trajectory { params: *params, samples, diagnostics: diag, termination })
}

/// Shoot a spec end to end: seed, integrate (with the spec's subsystem lock).
pub fn shoot(spec: &ShootSpec, opts: &ShootOptions) -> Result<Trajectory> {
    let seed = seed_state(spec)?;
    integrate_locked(&seed, &spec.params, opts, spec.lock())
}

/// Re-derive the limit classification from the trajectory tail. Used for
/// budget-exhausted runs and for trajectories loaded from disk.
pub fn classify_limit(traj: &Trajectory, params: &ModelParams, tol: f64) -> Result<TerminationEvent> {
    let last = traj.samples.last().ok_or_else(|| Error::Unresolved("empty trajectory".into()))?;
    let state = last.state;
    let c = 1.0 / (4.0 * params.mf() + 3.0);

    // hyperbolic limit: G -> 1/(4m+3), Rs -> 0, Y1 stabilized
    if params.lambda_mode == LambdaMode::Negative && (last.g - c).abs() < tol && last.rs.abs() < tol
    {
        let k = traj.samples.len();
        let back = &traj.samples[k.saturating_sub(50)];
        if (back.state.y1 - state.y1).abs() < 1e-6 {
            return Ok(TerminationEvent::Converged {
                point: "PAH".into(),
                eta: last.eta,
                state,
                y1: Some(state.y1),
                y2_over_y3: None,
                distance: state.distance_to_ah_line(params),
            });
        }
    }

    let targets = limit_targets(params);
    let mut dists: Vec<(String, f64)> = targets
        .iter()
        .map(|t| (t.name.clone(), target_distance(t, &state, params)))
        .collect();
    dists.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (best, second) = (&dists[0], &dists[1]);
    if best.1 < tol && second.1 / best.1.max(1e-300) >= 10.0 {
        let ratio = (state.y3.abs() > 1e-30).then(|| state.y2 / state.y3);
        return Ok(TerminationEvent::Converged {
            point: best.0.clone(),
            eta: last.eta,
            state,
            y1: None,
            y2_over_y3: ratio,
            distance: best.1,
        });
    }
    Ok(TerminationEvent::BudgetExhausted { eta: last.eta, state, candidates: dists })
}

// ---------------------------------------------------------------------------
// trajectory monitors
// ---------------------------------------------------------------------------

/// Most negative S-defect over all samples.
pub fn min_region_defect(traj: &Trajectory) -> f64 {
    traj.samples
        .iter()
        .map(|s| min_s_defect(&s.state, &traj.params))
        .fold(f64::INFINITY, f64::min)
}

/// Largest increase of Y1 between consecutive samples (monotone => <= 0).
pub fn max_y1_increase(traj: &Trajectory) -> f64 {
    traj.samples
        .windows(2)
        .map(|w| w[1].state.y1 - w[0].state.y1)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest decrease of W^2 between consecutive samples (negative mode).
pub fn max_wsq_decrease(traj: &Trajectory) -> f64 {
    traj.samples
        .windows(2)
        .map(|w| w[0].wsq - w[1].wsq)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest relative decrease of the monotone functional Y2^{2m+3} Y3^{2m}/Y1
/// between consecutive samples with all three coordinates positive.
pub fn max_bohm_decrease(traj: &Trajectory) -> f64 {
    let params = &traj.params;
    let mut worst = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    for s in &traj.samples {
        let st = &s.state;
        if st.y1 <= 1e-300 || st.y2 <= 1e-300 || st.y3 <= 1e-300 {
            prev = None;
            continue;
        }
        let b = crate::invariants::bohm_log(st, params);
        if let Some(p) = prev {
            worst = worst.max(p - b);
        }
        prev = Some(b);
    }
    worst
}

// ---------------------------------------------------------------------------
// trajectory I/O
// ---------------------------------------------------------------------------

pub const TRAJECTORY_HEADER: &str = "eta,X1,X2,X3,Y1,Y2,Y3,Wsq,h_defect,rf_defect";

/// Write the trajectory CSV (17 significant digits).
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        let st = &s.state;
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.eta, st.x1, st.x2, st.x3, st.y1, st.y2, st.y3, s.wsq, s.h_defect, s.rf_defect
        )?;
    }
    Ok(())
}

/// Read a trajectory CSV produced by `write_trajectory_csv`. The termination
/// record is not part of the CSV; the result carries a budget-exhausted
/// placeholder until re-classified.
pub fn read_trajectory_csv<R: BufRead>(r: R, params: &ModelParams) -> Result<Trajectory> {
    let mut samples = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != TRAJECTORY_HEADER {
                return Err(Error::Parse(format!("unexpected header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
            .collect::<Result<_>>()?;
        if fields.len() != 10 {
            return Err(Error::Parse(format!("line {}: expected 10 fields, got {}", i + 1, fields.len())));
        }
        let state = PhaseState::new(fields[1], fields[2], fields[3], fields[4], fields[5], fields[6]);
        let d = curvature_terms(&state, params);
        samples.push(Sample {
            eta: fields[0],
            state,
            g: d.g,
            rs: d.rs,
            wsq: fields[7],
            h_defect: fields[8],
            rf_defect: fields[9],
        });
    }
    if samples.is_empty() {
        return Err(Error::Parse("trajectory csv has no samples".into()));
    }
    let last = *samples.last().unwrap();
    Ok(Trajectory {
        params: *params,
        samples,
        diagnostics: StepDiagnostics::default(),
        termination: TerminationEvent::BudgetExhausted {
            eta: last.eta,
            state: last.state,
            candidates: vec![],
        },
    })
}

/// Hermite-interpolated state at a given eta from the recorded samples (the
/// exact flow derivatives are recomputed at the bracketing samples).
pub fn state_at(traj: &Trajectory, eta: f64) -> PhaseState {
    let ss = &traj.samples;
    let i = match ss.binary_search_by(|s| s.eta.partial_cmp(&eta).unwrap()) {
        Ok(i) => return ss[i].state,
        Err(i) => i.clamp(1, ss.len() - 1),
    };
    let (a, b) = (&ss[i - 1], &ss[i]);
    let seg = crate::integrate::Accepted {
        eta_prev: a.eta,
        eta: b.eta,
        y_prev: a.state.to_vector(),
        y: b.state.to_vector(),
        f_prev: vector_field(&a.state, &traj.params),
        f: vector_field(&b.state, &traj.params),
    };
    PhaseState::from_vector(&hermite(&seg, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gamma_zero_label_is_the_flat_metric() {
        let params = ModelParams::ricci_flat(2).unwrap();
        let spec = ShootSpec::new(ShootFamily::Gamma, [0.0, 0.0, 0.0], params).unwrap();
        let seed = seed_state(&spec).unwrap();
        let pac1 = catalog::pac1(&params).coords;
        assert_abs_diff_eq!(seed.distance(&pac1), 0.0, epsilon = 1e-15);
        let traj = shoot(&spec, &ShootOptions::default()).unwrap();
        assert_eq!(traj.termination.converged_to(), Some("PAC1"));
    }

    #[test]
    fn zeta_seed_newton_correction_is_second_order() {
        let params = ModelParams::ricci_flat(1).unwrap();
        for eps in [1e-4, 1e-5, 1e-6] {
            let spec =
                ShootSpec::with_options(ShootFamily::Zeta, [1.0, 0.0, 0.0], params, eps, false)
                    .unwrap();
            let seed = seed_state(&spec).unwrap();
            let [v1, _, _] = catalog::p0_unstable_basis(&params);
            let raw = catalog::p0(&params).coords.to_vector() + v1 * (eps / v1.norm());
            let correction = (seed.to_vector() - raw).norm();
            assert!(
                correction < 20.0 * eps * eps,
                "eps = {eps:.0e}: correction {correction:.3e}"
            );
        }
    }

    #[test]
    fn zeta_rejects_bad_signs() {
        let params = ModelParams::ricci_flat(1).unwrap();
        assert!(ShootSpec::new(ShootFamily::Zeta, [0.0, 1.0, 0.0], params).is_err());
        assert!(ShootSpec::new(ShootFamily::Zeta, [1.0, -0.5, 0.0], params).is_err());
        // the exploration override admits s2 < 0
        assert!(
            ShootSpec::with_options(ShootFamily::Zeta, [1.0, -0.5, 0.0], params, 1e-6, true)
                .is_ok()
        );
        // s3 > 0 needs negative mode
        assert!(ShootSpec::new(ShootFamily::Zeta, [0.8, 0.0, 0.6], params).is_err());
        assert!(ShootSpec::new(
            ShootFamily::Zeta,
            [0.8, 0.0, 0.6],
            ModelParams::negative(1).unwrap()
        )
        .is_ok());
    }

    #[test]
    fn spec_normalizes_the_parameter_vector() {
        let params = ModelParams::ricci_flat(1).unwrap();
        let spec = ShootSpec::new(ShootFamily::Zeta, [3.0, 4.0, 0.0], params).unwrap();
        assert_abs_diff_eq!(spec.s[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.s[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn locks_follow_the_spec_structure() {
        let rf = ModelParams::ricci_flat(1).unwrap();
        let neg = ModelParams::negative(1).unwrap();
        assert_eq!(ShootSpec::new(ShootFamily::Zeta, [1.0, 0.0, 0.0], rf).unwrap().lock(), SubsystemLock::RoundFiber);
        assert_eq!(ShootSpec::new(ShootFamily::Zeta, [0.6, 0.8, 0.0], rf).unwrap().lock(), SubsystemLock::None);
        assert_eq!(ShootSpec::new(ShootFamily::Gamma, [0.0, 1.0, 0.0], rf).unwrap().lock(), SubsystemLock::FubiniStudy);
        assert_eq!(ShootSpec::new(ShootFamily::Gamma, [0.0, 0.0, 1.0], neg).unwrap().lock(), SubsystemLock::RoundFiber);
    }

    #[test]
    fn csv_roundtrip_preserves_samples() {
        let params = ModelParams::negative(1).unwrap();
        let spec = ShootSpec::new(ShootFamily::Zeta, [0.8, 0.0, 0.6], params).unwrap();
        let opts = ShootOptions { eta_budget: 5.0, ..Default::default() };
        let traj = shoot(&spec, &opts).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let back = read_trajectory_csv(std::io::BufReader::new(buf.as_slice()), &params).unwrap();
        assert_eq!(back.samples.len(), traj.samples.len());
        for (a, b) in traj.samples.iter().zip(back.samples.iter()) {
            assert_eq!(a.eta, b.eta);
            assert_eq!(a.state.y2, b.state.y2);
        }
    }

    #[test]
    fn boundary_preserved_over_long_spans() {
        // |rf| and |h| stay below 1e-8 over an eta-span of 50 under the
        // standard renormalizing integration at rtol 1e-10
        let params = ModelParams::ricci_flat(1).unwrap();
        let seed = seed_state(
            &ShootSpec::new(ShootFamily::Zeta, [0.6, 0.8, 0.0], params).unwrap(),
        )
        .unwrap();
        let opts = ShootOptions { eta_budget: 50.0, conv_window: u32::MAX, ..Default::default() };
        let traj = integrate(&seed, &params, &opts).unwrap();
        assert!(traj.eta_span() >= 50.0 - 1e-9);
        assert!(traj.diagnostics.max_rf_defect < 1e-8, "{:?}", traj.diagnostics);
        assert!(traj.diagnostics.max_h_defect < 1e-8);
    }

    #[test]
    fn shape_ratios_positive_and_defects_bounded() {
        // X1, X2, X3 stay positive along trapped curves, and the recorded
        // defects stay under integrator tolerance x 100
        let params = ModelParams::ricci_flat(1).unwrap();
        let spec = ShootSpec::new(ShootFamily::Zeta, [0.6, 0.8, 0.0], params).unwrap();
        let opts = ShootOptions { eta_budget: 60.0, ..Default::default() };
        let traj = shoot(&spec, &opts).unwrap();
        for s in traj.samples.iter().filter(|s| s.eta > 0.0) {
            assert!(s.state.x1 > 0.0 && s.state.x2 > 0.0 && s.state.x3 > 0.0, "at eta {}", s.eta);
        }
        let bound = 100.0 * opts.rtol;
        assert!(traj.diagnostics.max_h_defect < bound);
        assert!(traj.diagnostics.max_rf_defect < bound);
    }

    #[test]
    fn seed_order_consistency_under_epsilon_halving() {
        // halving epsilon shifts the curve by ln 2 / lambda_unstable in eta
        let params = ModelParams::ricci_flat(1).unwrap();
        let opts = ShootOptions { eta_budget: 40.0, ..Default::default() };
        let spec1 = ShootSpec::with_options(ShootFamily::Zeta, [0.6, 0.8, 0.0], params, 1e-6, false).unwrap();
        let spec2 = ShootSpec::with_options(ShootFamily::Zeta, [0.6, 0.8, 0.0], params, 0.5e-6, false).unwrap();
        let t1 = shoot(&spec1, &opts).unwrap();
        let opts2 = ShootOptions { eta_budget: 42.0, ..opts };
        let t2 = shoot(&spec2, &opts2).unwrap();
        let shift = 2.0_f64.ln() / (2.0 / 3.0);
        let mut worst: f64 = 0.0;
        for s in t1.samples.iter().filter(|s| s.eta > 1.0 && s.eta + shift < 40.0) {
            let other = state_at(&t2, s.eta + shift);
            worst = worst.max((other.to_vector() - s.state.to_vector()).amax());
        }
        assert!(worst < 1e-5, "trace deviation {worst:.3e}");
    }
}
