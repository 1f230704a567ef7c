//! Deterministic parameter sweeps over the shooting families, fanned out to a
//! bounded worker pool. Rows are keyed by grid index, so the output is
//! byte-identical for any worker count.

use crate::error::Result;
use crate::geometry::{asymptotic_summary, reconstruct};
use crate::model::{LambdaMode, ModelParams};
use crate::shooting::{shoot, ShootFamily, ShootOptions, ShootSpec, TerminationEvent};
use serde::Serialize;
use std::io::Write;
use std::sync::Mutex;

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "EINSTEINFLOW_THREADS";

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub s: [f64; 3],
    pub kind: String,
    pub y1: Option<f64>,
    pub beta: Option<f64>,
    pub bdot_inf: Option<f64>,
    pub cdot_inf: Option<f64>,
    pub a_inf: Option<f64>,
    pub t_final: Option<f64>,
}

/// Evenly spread directions over the admissible parameter region:
/// the quarter arc (s3 = 0) in Ricci-flat mode, the golden-angle spiral over
/// the nonnegative octant in negative mode.
pub fn parameter_grid(family: ShootFamily, params: &ModelParams, n: usize) -> Vec<[f64; 3]> {
    let n = n.max(1);
    match family {
        ShootFamily::GammaSingular => (0..n)
            .map(|k| [1.0, 0.3 * (k as f64 + 0.5) / n as f64, 0.0])
            .collect(),
        _ => match params.lambda_mode {
            LambdaMode::RicciFlat => (0..n)
                .map(|k| {
                    let theta = std::f64::consts::FRAC_PI_2 * (k as f64 + 0.5) / n as f64;
                    [theta.cos(), theta.sin(), 0.0]
                })
                .collect(),
            LambdaMode::Negative => {
                let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
                (0..n)
                    .map(|k| {
                        let z = (k as f64 + 0.5) / n as f64;
                        let phi = std::f64::consts::FRAC_PI_2 * ((k as f64 * golden) % 1.0);
                        let r = (1.0 - z * z).sqrt();
                        [r * phi.cos(), r * phi.sin(), z]
                    })
                    .collect()
            }
        },
    }
}

fn run_one(
    family: ShootFamily,
    s: [f64; 3],
    params: &ModelParams,
    opts: &ShootOptions,
    epsilon: f64,
) -> SweepRow {
    let spec = match ShootSpec::with_options(family, s, *params, epsilon, false) {
        Ok(sp) => sp,
        Err(e) => {
            return SweepRow {
                s,
                kind: format!("invalid: {e}"),
                y1: None,
                beta: None,
                bdot_inf: None,
                cdot_inf: None,
                a_inf: None,
                t_final: None,
            }
        }
    };
    match shoot(&spec, opts) {
        Ok(traj) => {
            let (kind, y1) = match &traj.termination {
                TerminationEvent::Converged { point, y1, .. } => (point.clone(), *y1),
                other => (other.kind().to_string(), None),
            };
            let mut row = SweepRow {
                s: spec.s,
                kind,
                y1,
                beta: None,
                bdot_inf: None,
                cdot_inf: None,
                a_inf: None,
                t_final: None,
            };
            if let Ok(profile) = reconstruct(&traj, params) {
                row.t_final = profile.t.last().copied();
                if let Ok(summary) = asymptotic_summary(&traj, &profile, params) {
                    row.beta = summary.beta;
                    row.a_inf = summary.a_inf;
                    row.bdot_inf = summary.limits.get("bdot").copied();
                    row.cdot_inf = summary.limits.get("cdot").copied();
                }
            }
            row
        }
        Err(e) => SweepRow {
            s: spec.s,
            kind: format!("error: {e}"),
            y1: None,
            beta: None,
            bdot_inf: None,
            cdot_inf: None,
            a_inf: None,
            t_final: None,
        },
    }
}

pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Run the sweep; rows come back in grid order regardless of scheduling.
pub fn run_sweep(
    family: ShootFamily,
    params: &ModelParams,
    grid: usize,
    opts: &ShootOptions,
    epsilon: f64,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    let specs = parameter_grid(family, params, grid);
    let n = specs.len();
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; n]);
    let next: Mutex<usize> = Mutex::new(0);
    let workers = workers.clamp(1, n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    let i = *guard;
                    if i >= n {
                        break;
                    }
                    *guard += 1;
                    i
                };
                let row = run_one(family, specs[idx], params, opts, epsilon);
                rows.lock().unwrap()[idx] = Some(row);
            });
        }
    });
    Ok(rows.into_inner().unwrap().into_iter().map(|r| r.unwrap()).collect())
}

fn opt(v: &Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub const SWEEP_HEADER: &str = "s1,s2,s3,kind,y1,beta,bdot_inf,cdot_inf,a_inf,t_final";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{},{},{},{},{},{}",
            r.s[0],
            r.s[1],
            r.s[2],
            r.kind,
            opt(&r.y1),
            opt(&r.beta),
            opt(&r.bdot_inf),
            opt(&r.cdot_inf),
            opt(&r.a_inf),
            opt(&r.t_final),
        )?;
    }
    Ok(())
}
