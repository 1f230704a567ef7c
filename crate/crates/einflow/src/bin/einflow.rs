//! Command-line front end: catalog listing, spectra, shooting runs, sweeps,
//! invariance audits and metric reconstruction, with file-based outputs and
//! rerunnable manifests.

use clap::{Args, Parser, Subcommand};
use einflow::catalog::{self, verify_critical};
use einflow::geometry::{
    asymptotic_summary, einstein_residuals, reconstruct, verify_initial_condition,
    InitialConditionKind,
};
use einflow::invariants::{invariance_audit, SetName};
use einflow::model::{LambdaMode, ModelParams};
use einflow::shooting::{
    classify_limit, read_trajectory_csv, shoot, write_trajectory_csv, ShootFamily, ShootOptions,
    ShootSpec, TerminationEvent,
};
use einflow::spectrum::eigen_at;
use einflow::sweep::{run_sweep, worker_count, write_sweep_csv};
use einflow::Error;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "einflow", version, about = "Cohomogeneity-one Einstein flow laboratory")]
struct Cli {
    /// Key = value file; explicit flags win over config entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files and manifests
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Fiber dimension index (principal orbit S^{4m+3})
    #[arg(long)]
    m: Option<u32>,

    /// ricci-flat or negative
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List the critical points with criticality residuals
    Catalog {
        #[command(flatten)]
        model: ModelArgs,
        /// json or table
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Numeric spectrum at a named point, with closed-form deltas
    Eigen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        point: String,
    },
    /// Integrate one unstable-manifold trajectory
    Shoot {
        #[command(flatten)]
        model: ModelArgs,
        /// zeta, gamma or gamma-singular
        #[arg(long)]
        family: Option<String>,
        /// comma-separated parameter triple, e.g. 1,0,0
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        eta_budget: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
        /// output file prefix
        #[arg(long)]
        out: Option<String>,
    },
    /// Classify a grid of shooting specs; one CSV row per spec
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        eta_budget: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Flow-invariance audit of a named set
    Audit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Rebuild the metric profile and summary from a stored trajectory
    Reconstruct {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: Option<String>,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::StepUnderflow { .. }
        | Error::Unresolved(_)
        | Error::ProjectionFailed { .. }
        | Error::NegativeWsq { .. }
        | Error::SamplerExhausted { .. }
        | Error::SeedOutsideRegion(_)
        | Error::Reconstruction(_) => 2,
        _ => 1,
    }
}

/// key = value lines ('#' starts a comment), or a manifest written by a
/// previous run (the resolved options are reused).
fn load_config(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        if let Some(opts) = v.get("options").and_then(|o| o.as_object()) {
            for (k, val) in opts {
                if let Some(sv) = val.as_str() {
                    map.insert(k.clone(), sv.to_string());
                }
            }
        }
        return Ok(map);
    }
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line without `=`: {line}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    config: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    fn new(config: BTreeMap<String, String>) -> Self {
        Resolver { config, resolved: BTreeMap::new() }
    }

    /// flag value if given, else config entry, else default
    fn get<T: std::str::FromStr + std::fmt::Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, Error> {
        let v = match flag {
            Some(v) => v,
            None => match self.config.get(key) {
                Some(raw) => raw
                    .parse::<T>()
                    .map_err(|_| Error::Parse(format!("config key `{key}`: bad value `{raw}`")))?,
                None => default,
            },
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }
}

fn parse_mode(s: &str) -> Result<LambdaMode, Error> {
    match s.to_ascii_lowercase().as_str() {
        "ricci-flat" | "ricci_flat" | "rf" => Ok(LambdaMode::RicciFlat),
        "negative" | "neg" => Ok(LambdaMode::Negative),
        other => Err(Error::Parse(format!("unknown mode `{other}`"))),
    }
}

fn resolve_model(r: &mut Resolver, model: &ModelArgs, default_mode: &str) -> Result<ModelParams, Error> {
    let m = r.get("m", model.m, 1)?;
    let mode = r.get("mode", model.mode.clone(), default_mode.to_string())?;
    ModelParams::new(m, parse_mode(&mode)?)
}

fn require(v: String, flag: &str) -> Result<String, Error> {
    if v.is_empty() {
        Err(Error::Parse(format!("{flag} is required (flag or config entry)")))
    } else {
        Ok(v)
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], Error> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() > 3 || parts.is_empty() {
        return Err(Error::Parse(format!("expected up to three comma-separated values, got `{s}`")));
    }
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad parameter component `{p}`")))?;
    }
    Ok(out)
}

fn out_path(out_dir: &Option<PathBuf>, name: &str) -> PathBuf {
    match out_dir {
        Some(d) => d.join(name),
        None => PathBuf::from(name),
    }
}

fn write_manifest(
    out_dir: &Option<PathBuf>,
    prefix: &str,
    command: &str,
    resolved: &BTreeMap<String, String>,
) -> Result<(), Error> {
    let manifest = serde_json::json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "options": resolved,
    });
    let path = out_path(out_dir, &format!("{prefix}.manifest.json"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(())
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let mut r = Resolver::new(config);

    match cli.command {
        Command::Catalog { model, format } => {
            let params = resolve_model(&mut r, &model, "ricci-flat")?;
            let entries = catalog::catalog(&params);
            if format == "json" {
                let mut items = Vec::new();
                for e in &entries {
                    for p in e.sample_points(5) {
                        let rep = verify_critical(&p, &params);
                        items.push(serde_json::json!({
                            "name": p.name,
                            "coords": p.coords,
                            "w_value": p.w_value,
                            "on_boundary": p.on_boundary,
                            "residual": rep.residual,
                        }));
                    }
                }
                println!("{}", serde_json::to_string_pretty(&items).unwrap());
            } else {
                println!(
                    "{:<14} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}  {:>10} {:>5} {:>9}",
                    "point", "X1", "X2", "X3", "Y1", "Y2", "Y3", "residual", "bdry", "W"
                );
                for e in &entries {
                    for p in e.sample_points(3) {
                        let rep = verify_critical(&p, &params);
                        let c = &p.coords;
                        println!(
                            "{:<14} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}  {:>10.2e} {:>5} {:>9.5}",
                            p.name, c.x1, c.x2, c.x3, c.y1, c.y2, c.y3,
                            rep.residual, p.on_boundary, p.w_value
                        );
                    }
                }
            }
            Ok(0)
        }
        Command::Eigen { model, point } => {
            let params = resolve_model(&mut r, &model, "negative")?;
            r.note("point", &point);
            let p = catalog::by_name(&point, &params)?;
            let rep = eigen_at(&p, &params);
            let closed = catalog::closed_form_spectrum(&p.name, &params).ok();
            println!("# spectrum at {} (m = {}, {})", p.name, params.m, params.lambda_mode);
            println!(
                "{:>14} {:>14} {:>8} {:>8} {:>14}",
                "eigenvalue", "imag", "tan(E)", "tan(dE)", "closed-delta"
            );
            let mut remaining = closed.clone().unwrap_or_default();
            for pair in &rep.pairs {
                let delta = if pair.tangent_to_e {
                    // match against the nearest unused closed-form value
                    let mut best: Option<(usize, f64)> = None;
                    for (i, c) in remaining.iter().enumerate() {
                        let d = (pair.re - c).abs();
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((i, d));
                        }
                    }
                    best.map(|(i, d)| {
                        remaining.swap_remove(i);
                        format!("{d:>14.3e}")
                    })
                    .unwrap_or_else(|| "-".into())
                } else {
                    "-".into()
                };
                println!(
                    "{:>14.10} {:>14.3e} {:>8} {:>8} {:>14}",
                    pair.re, pair.im, pair.tangent_to_e, pair.tangent_to_boundary, delta
                );
            }
            println!(
                "# saddle type on E: ({}, {}); within the boundary subsystem: ({}, {})",
                rep.saddle_type.0, rep.saddle_type.1,
                rep.boundary_saddle_type.0, rep.boundary_saddle_type.1
            );
            Ok(0)
        }
        Command::Shoot { model, family, s, eps, eta_budget, rtol, out } => {
            let params = resolve_model(&mut r, &model, "ricci-flat")?;
            let family = ShootFamily::parse(&require(r.get("family", family, String::new())?, "--family")?)?;
            let svec = parse_triple(&require(r.get("s", s, String::new())?, "--s")?)?;
            let eps = r.get("eps", eps, einflow::shooting::DEFAULT_EPSILON)?;
            let opts = ShootOptions {
                eta_budget: r.get("eta-budget", eta_budget, 200.0)?,
                rtol: r.get("rtol", rtol, 1e-10)?,
                ..Default::default()
            };
            let spec = ShootSpec::with_options(family, svec, params, eps, false)?;
            let traj = shoot(&spec, &opts)?;
            println!(
                "termination: {} after eta = {:.3} ({} accepted / {} rejected steps)",
                match &traj.termination {
                    TerminationEvent::Converged { point, distance, .. } =>
                        format!("converged({point}), distance {distance:.3e}"),
                    other => other.kind().to_string(),
                },
                traj.samples.last().map(|s| s.eta).unwrap_or(0.0),
                traj.diagnostics.accepted,
                traj.diagnostics.rejected,
            );
            if let TerminationEvent::Converged { point, y1: Some(y1), .. } = &traj.termination {
                println!("limit point: {point} with y1 = {y1:.8}");
            }
            if let Some(prefix) = out {
                r.note("out", &prefix);
                let traj_path = out_path(&cli.out_dir, &format!("{prefix}.trajectory.csv"));
                if let Some(parent) = traj_path.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent)?;
                    }
                }
                write_trajectory_csv(&traj, fs::File::create(&traj_path)?)?;
                let term_path = out_path(&cli.out_dir, &format!("{prefix}.termination.json"));
                fs::write(&term_path, serde_json::to_string_pretty(&traj.termination).unwrap())?;
                match reconstruct(&traj, &params) {
                    Ok(profile) => {
                        let prof_path = out_path(&cli.out_dir, &format!("{prefix}.profile.csv"));
                        einflow::geometry::write_profile_csv(&profile, fs::File::create(&prof_path)?)?;
                        if let Ok(summary) = asymptotic_summary(&traj, &profile, &params) {
                            let sum_path = out_path(&cli.out_dir, &format!("{prefix}.summary.json"));
                            fs::write(&sum_path, serde_json::to_string_pretty(&summary).unwrap())?;
                        }
                    }
                    Err(e) => eprintln!("profile not written: {e}"),
                }
                write_manifest(&cli.out_dir, &prefix, "shoot", &r.resolved)?;
            }
            match &traj.termination {
                TerminationEvent::StepUnderflow { .. } => Ok(2),
                TerminationEvent::BudgetExhausted { .. } => {
                    match classify_limit(&traj, &params, 1e-6) {
                        Ok(TerminationEvent::Converged { .. }) => Ok(0),
                        _ => Ok(2),
                    }
                }
                _ => Ok(0),
            }
        }
        Command::Sweep { model, family, grid, eta_budget, rtol, out } => {
            let params = resolve_model(&mut r, &model, "ricci-flat")?;
            let family = ShootFamily::parse(&require(r.get("family", family, String::new())?, "--family")?)?;
            let grid = r.get("grid", grid, 16)?;
            let opts = ShootOptions {
                eta_budget: r.get("eta-budget", eta_budget, 200.0)?,
                rtol: r.get("rtol", rtol, 1e-10)?,
                ..Default::default()
            };
            let workers = worker_count();
            r.note("workers", workers);
            let rows = run_sweep(family, &params, grid, &opts, einflow::shooting::DEFAULT_EPSILON, workers)?;
            match out {
                Some(prefix) => {
                    r.note("out", &prefix);
                    let path = out_path(&cli.out_dir, &format!("{prefix}.sweep.csv"));
                    if let Some(parent) = path.parent() {
                        if !parent.as_os_str().is_empty() {
                            fs::create_dir_all(parent)?;
                        }
                    }
                    write_sweep_csv(&rows, fs::File::create(&path)?)?;
                    write_manifest(&cli.out_dir, &prefix, "sweep", &r.resolved)?;
                }
                None => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&rows, &mut buf)?;
                    std::io::stdout().write_all(&buf)?;
                }
            }
            Ok(0)
        }
        Command::Audit { model, set, samples, seed, out } => {
            let set = SetName::parse(&require(r.get("set", set, String::new())?, "--set")?)?;
            // sets with a mode restriction default to the mode they require
            let default_mode = match einflow::invariants::descriptor(set).mode_restriction {
                Some(LambdaMode::RicciFlat) => "ricci-flat",
                Some(LambdaMode::Negative) | None => "negative",
            };
            let params = resolve_model(&mut r, &model, default_mode)?;
            let samples = r.get("samples", samples, 10_000)?;
            let seed = r.get("seed", seed, 0)?;
            let report = invariance_audit(set, &params, samples, seed)?;
            let json = serde_json::to_string_pretty(&report).unwrap();
            match out {
                Some(prefix) => {
                    r.note("out", &prefix);
                    let path = out_path(&cli.out_dir, &format!("{prefix}.audit.json"));
                    if let Some(parent) = path.parent() {
                        if !parent.as_os_str().is_empty() {
                            fs::create_dir_all(parent)?;
                        }
                    }
                    fs::write(&path, &json)?;
                    write_manifest(&cli.out_dir, &prefix, "audit", &r.resolved)?;
                }
                None => println!("{json}"),
            }
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::Reconstruct { model, traj, out } => {
            let params = resolve_model(&mut r, &model, "ricci-flat")?;
            r.note("traj", traj.display());
            let file = fs::File::open(&traj)?;
            let mut trajectory = read_trajectory_csv(std::io::BufReader::new(file), &params)?;
            trajectory.termination = classify_limit(&trajectory, &params, 1e-6)?;
            let profile = reconstruct(&trajectory, &params)?;
            let summary = asymptotic_summary(&trajectory, &profile, &params)?;
            let residuals = einstein_residuals(&profile, &params)?;
            println!(
                "kind: {:?}; residuals: second-order {:.3e}, conservation {:.3e} ({} stencil points)",
                summary.kind, residuals.max_second_order, residuals.max_conservation,
                residuals.points_checked
            );
            // report the matching collapse tuple when one applies
            for kind in [
                InitialConditionKind::BoltGh,
                InitialConditionKind::TaubnutSmooth,
                InitialConditionKind::TaubnutJensen,
            ] {
                if let Ok(rep) = verify_initial_condition(&profile, kind, &params) {
                    if rep.pass {
                        println!("initial condition matches {:?} (max dev {:.2e})", kind, rep.max_deviation);
                    }
                }
            }
            if let Some(prefix) = out {
                r.note("out", &prefix);
                let prof_path = out_path(&cli.out_dir, &format!("{prefix}.profile.csv"));
                if let Some(parent) = prof_path.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent)?;
                    }
                }
                einflow::geometry::write_profile_csv(&profile, fs::File::create(&prof_path)?)?;
                let sum_path = out_path(&cli.out_dir, &format!("{prefix}.summary.json"));
                fs::write(&sum_path, serde_json::to_string_pretty(&summary).unwrap())?;
                write_manifest(&cli.out_dir, &prefix, "reconstruct", &r.resolved)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // die quietly when the consumer of a pipe goes away (e.g. `| head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
