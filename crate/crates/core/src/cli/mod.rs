//! Batch front end: `dstek <command> --config run.json --out dir`.
//!
//! Each command computes everything in memory, then writes CSV tables, a
//! JSON summary (config echo, version, wall time) and optional `.dat` plot
//! files. Exit codes: 0 success, 1 numerical failure, 2 invalid
//! configuration or violated assumption.

pub mod config;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::radial::{self, Polarization, RadialError};
use crate::scattering::{self, DetectionMethod, Noise, ScatteringError};
use crate::stekloff::{self, OperatorFlavor, StekloffError};
use crate::surface;

use config::DetectMethodConfig;
pub use config::RunConfig;
pub use output::Format;
use output::{complex_json, dat, num, Artifacts, CsvTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("assumption on k violated at degrees {0:?}")]
    Assumption(Vec<usize>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Assumption(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<RadialError> for CliError {
    fn from(e: RadialError) -> Self {
        match e {
            RadialError::InvalidMedium(_)
            | RadialError::InvalidWavenumber(_)
            | RadialError::ZeroDegree => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<StekloffError> for CliError {
    fn from(e: StekloffError) -> Self {
        match e {
            StekloffError::Radial(r) => r.into(),
            StekloffError::AssumptionViolated { degrees } => CliError::Assumption(degrees),
            StekloffError::InvalidDelta(_)
            | StekloffError::InvalidShift(_)
            | StekloffError::EmptyGrid
            | StekloffError::MediaMismatch(..)
            | StekloffError::ShiftIsEigenvalue { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ScatteringError> for CliError {
    fn from(e: ScatteringError) -> Self {
        match e {
            ScatteringError::Radial(r) => r.into(),
            ScatteringError::AssumptionViolated(l) => CliError::Assumption(vec![l]),
            ScatteringError::InvalidDelta(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dstek",
    version,
    about = "Delta-Stekloff eigenvalues of layered spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Seed for noise and random test media; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Per-degree TE eigenvalues with tail diagnostics.
    Eigs,
    /// Eigenvalue drift as delta goes to 0.
    SweepDelta,
    /// Eigenvalue distances along a permittivity family.
    Perturb,
    /// Eigenvalues recovered from modified far-field entries.
    Detect,
    /// Interior resonance check for the configured wavenumber.
    CheckK,
    /// Run the invariant suite.
    Selftest {
        /// Append an invariant that always fails.
        #[arg(long)]
        force_failure: bool,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelftestConfig {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    force_failure: bool,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dstek: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let started = Instant::now();
    if let Command::Selftest { force_failure } = cli.command {
        let mut lite = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<SelftestConfig>(&text)
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
            None => SelftestConfig::default(),
        };
        lite.seed = cli.seed.unwrap_or(lite.seed);
        lite.force_failure |= force_failure;
        let report = pool.install(|| selftest::run(lite.seed, lite.force_failure));
        let out = cli
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("dstek-out"));
        let arts = selftest_artifacts(&report, lite.seed, lite.force_failure, started)?;
        arts.write(&out, cli.format, false)?;
        for r in &report.invariants {
            println!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
        }
        return Ok(if report.all_passed { 0 } else { 1 });
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("dstek-out"));
    let (name, mut arts) = pool.install(|| -> Result<_, CliError> {
        Ok(match cli.command {
            Command::Eigs => ("eigs", cmd_eigs(&cfg)?),
            Command::SweepDelta => ("sweep_delta", cmd_sweep_delta(&cfg)?),
            Command::Perturb => ("perturb", cmd_perturb(&cfg)?),
            Command::Detect => ("detect", cmd_detect(&cfg)?),
            Command::CheckK => ("check_k", cmd_check_k(&cfg)?),
            Command::Selftest { .. } => unreachable!("handled above"),
        })
    })?;
    for (_, value) in arts.json.iter_mut() {
        wrap_summary(value, name, &cfg, started)?;
    }
    write_to(&arts, &out, cli.format, cfg.plots)?;
    Ok(0)
}

fn write_to(arts: &Artifacts, out: &Path, format: Format, plots: bool) -> Result<(), CliError> {
    arts.write(out, format, plots).map(|_| ())
}

fn wrap_summary(
    value: &mut Value,
    command: &str,
    cfg: &RunConfig,
    started: Instant,
) -> Result<(), CliError> {
    let results = value.take();
    *value = json!({
        "command": command,
        "version": VERSION,
        "config": serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "results": results,
    });
    Ok(())
}

fn selftest_artifacts(
    report: &selftest::SelftestReport,
    seed: u64,
    force_failure: bool,
    started: Instant,
) -> Result<Artifacts, CliError> {
    let mut table = CsvTable::new(&["name", "passed", "value", "threshold"]);
    for r in &report.invariants {
        table.push(vec![
            r.name.to_string(),
            r.passed.to_string(),
            num(r.value),
            num(r.threshold),
        ]);
    }
    let report_json = serde_json::to_value(report).map_err(|e| CliError::Io(e.to_string()))?;
    let summary = json!({
        "command": "selftest",
        "version": VERSION,
        "config": {"seed": seed, "force_failure": force_failure},
        "wall_time_s": started.elapsed().as_secs_f64(),
        "results": {"all_passed": report.all_passed, "report": "selftest_report.json"},
    });
    Ok(Artifacts {
        csv: vec![("selftest_report.csv".into(), table)],
        json: vec![
            ("selftest_report.json".into(), report_json),
            ("selftest.json".into(), summary),
        ],
        dat: Vec::new(),
    })
}

fn cmd_eigs(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let med = cfg.medium.build()?;
    let spec = stekloff::spectrum(&med, cfg.k, cfg.delta, cfg.l_max)?;
    let mut table = CsvTable::new(&["l", "multiplicity", "mu", "re_lambda", "im_lambda", "delta"]);
    for r in &spec.records {
        table.push(vec![
            r.degree.to_string(),
            r.multiplicity.to_string(),
            num(r.mu),
            num(r.lambda.re),
            num(r.lambda.im),
            num(r.delta),
        ]);
    }
    let excluded: Vec<Value> = spec
        .excluded
        .iter()
        .map(|e| json!({"l": e.degree, "reason": e.reason}))
        .collect();
    let mut results = json!({
        "eigenvalue_count": spec.records.len(),
        "excluded": excluded,
    });
    let mut arts = Artifacts::default();
    let shift = match cfg.shift {
        Some(z) => Ok(z),
        None => stekloff::default_shift(&spec.records),
    };
    let operator = shift.and_then(|z| {
        stekloff::psi_operator(&med, cfg.k, cfg.delta, z, cfg.l_max, OperatorFlavor::Psi)
    });
    match operator {
        Ok(op) => {
            let mut rows = Vec::new();
            for l in 1..=cfg.l_max {
                let tail = stekloff::tail_norm(&op, l * l - 1)?;
                rows.push(vec![surface::mu(med.outer_radius(), l), tail]);
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
            let diag = stekloff::trace_sum_diagnostic(&op);
            results["shift"] = json!(op.z);
            results["tail_slope"] = json!(stekloff::loglog_slope(&xs, &ys));
            results["trace_sum"] = json!({
                "converged": diag.converged,
                "final_relative_increment": diag.final_relative_increment,
                "partial_sums": diag.partial_sums,
            });
            arts.dat
                .push(("tail.dat".into(), dat(&["mu_M", "tail_norm"], &rows)));
        }
        Err(e) if cfg.shift.is_some() => return Err(e.into()),
        Err(e) => results["operator_error"] = json!(e.to_string()),
    }
    arts.csv.push(("spectrum.csv".into(), table));
    arts.json.push(("eigs.json".into(), results));
    Ok(arts)
}

fn cmd_sweep_delta(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let med = cfg.medium.build()?;
    let sweeps = cfg
        .sweep
        .degrees
        .par_iter()
        .map(|&l| stekloff::delta_sweep(&med, cfg.k, l, &cfg.sweep.deltas))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = CsvTable::new(&["l", "delta", "re_lambda", "im_lambda", "drift"]);
    let mut arts = Artifacts::default();
    let mut fits = Vec::new();
    for s in &sweeps {
        let mut rows = Vec::new();
        for r in &s.rows {
            table.push(vec![
                s.degree.to_string(),
                num(r.delta),
                num(r.lambda.re),
                num(r.lambda.im),
                num(r.drift),
            ]);
            rows.push(vec![r.delta, r.lambda.re, r.lambda.im, r.drift]);
        }
        fits.push(json!({
            "l": s.degree,
            "reference": complex_json(s.reference),
            "fitted_exponent": s.fitted_exponent,
        }));
        arts.dat.push((
            format!("sweep_l{}.dat", s.degree),
            dat(&["delta", "re_lambda", "im_lambda", "drift"], &rows),
        ));
    }
    arts.csv.push(("sweep_delta.csv".into(), table));
    arts.json
        .push(("sweep_delta.json".into(), json!({ "fits": fits })));
    Ok(arts)
}

fn cmd_perturb(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let base = cfg.medium.build()?;
    let members = cfg
        .perturb
        .offsets
        .iter()
        .map(|&t| Ok((t, cfg.perturb.family_member(&base, t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let reports = members
        .iter()
        .map(|(_, m)| stekloff::epsilon_perturb(&base, m, cfg.k, cfg.delta, cfg.l_max))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = CsvTable::new(&[
        "t",
        "l",
        "re_lambda0",
        "im_lambda0",
        "re_lambda_t",
        "im_lambda_t",
        "distance",
    ]);
    let mut summary = Vec::new();
    let mut plot = Vec::new();
    for ((t, _), rep) in members.iter().zip(&reports) {
        for row in &rep.rows {
            table.push(vec![
                num(*t),
                row.degree.to_string(),
                num(row.lambda0.re),
                num(row.lambda0.im),
                num(row.lambda1.re),
                num(row.lambda1.im),
                num(row.distance),
            ]);
        }
        summary.push(json!({
            "t": t,
            "max_distance": rep.max_distance,
            "hausdorff": rep.hausdorff,
            "eps_sup_distance": rep.eps_sup_distance,
            "eps_l6_distance": rep.eps_l6_distance,
        }));
        plot.push(vec![*t, rep.max_distance, rep.hausdorff]);
    }
    let ratios: Vec<f64> = reports
        .windows(2)
        .map(|w| w[0].max_distance / w[1].max_distance)
        .collect();
    let monotone = reports
        .windows(2)
        .all(|w| w[1].max_distance <= w[0].max_distance);
    Ok(Artifacts {
        csv: vec![("perturb.csv".into(), table)],
        json: vec![(
            "perturb.json".into(),
            json!({"family": summary, "successive_ratios": ratios, "monotone": monotone}),
        )],
        dat: vec![(
            "perturb.dat".into(),
            dat(&["t", "max_distance", "hausdorff"], &plot),
        )],
    })
}

fn cmd_detect(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let med = cfg.medium.build()?;
    let report = radial::check_assumption(&med, cfg.k, cfg.l_max)?;
    let tm = report.offending_degrees(Polarization::Tm);
    if !tm.is_empty() {
        return Err(CliError::Assumption(tm));
    }
    let te = report.offending_degrees(Polarization::Te);
    let method = match cfg.detect.method {
        DetectMethodConfig::Moebius => DetectionMethod::Moebius,
        DetectMethodConfig::Grid => DetectionMethod::GridRefine {
            lo: cfg.detect.window[0],
            hi: cfg.detect.window[1],
            points: cfg.detect.points,
        },
    };
    let noise = (cfg.detect.noise > 0.0).then_some(Noise {
        magnitude: cfg.detect.noise,
        seed: cfg.seed,
    });
    let degrees: Vec<usize> = (1..=cfg.l_max).filter(|l| !te.contains(l)).collect();
    let outcomes: Vec<_> = degrees
        .par_iter()
        .map(|&l| {
            let direct = stekloff::eigenvalue_te(&med, cfg.k, cfg.delta, l);
            let data = scattering::ModeData::measure(&med, cfg.k, cfg.delta, l, noise);
            (
                l,
                direct,
                data.and_then(|d| scattering::detect_from_data(&d, method)),
            )
        })
        .collect();
    let mut table = CsvTable::new(&[
        "l",
        "re_detected",
        "im_detected",
        "re_direct",
        "im_direct",
        "abs_error",
        "rel_error",
        "residual",
        "warning",
    ]);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut warnings = Vec::new();
    for (l, direct, found) in outcomes {
        let direct = match direct {
            Ok(r) => r.lambda,
            Err(StekloffError::Radial(RadialError::InteriorResonance { .. })) => {
                failures.push(json!({"l": l, "reason": "interior TE resonance"}));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        match found {
            Ok(d) => {
                let abs = (d.lambda - direct).norm();
                let rel = abs / (1.0 + direct.norm());
                worst = worst.max(rel);
                if d.lower_half_plane_warning {
                    warnings.push(l);
                }
                table.push(vec![
                    l.to_string(),
                    num(d.lambda.re),
                    num(d.lambda.im),
                    num(direct.re),
                    num(direct.im),
                    num(abs),
                    num(rel),
                    num(d.residual),
                    d.lower_half_plane_warning.to_string(),
                ]);
            }
            Err(
                e
                @ (ScatteringError::NoRootInWindow { .. } | ScatteringError::DegenerateMoebius(_)),
            ) => {
                failures.push(json!({"l": l, "reason": e.to_string()}));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let results = json!({
        "method": cfg.detect.method,
        "noise": cfg.detect.noise,
        "max_relative_error": worst,
        "lower_half_plane_warning": !warnings.is_empty(),
        "warning_degrees": warnings,
        "excluded_te_resonances": te,
        "failures": failures,
    });
    Ok(Artifacts {
        csv: vec![("detect.csv".into(), table)],
        json: vec![("detect.json".into(), results)],
        dat: Vec::new(),
    })
}

fn cmd_check_k(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let med = cfg.medium.build()?;
    let report = radial::check_assumption(&med, cfg.k, cfg.l_max)?;
    let mut table = CsvTable::new(&["l", "polarization", "relative_trace", "wavenumber_distance"]);
    for o in &report.offenders {
        let pol = match o.polarization {
            Polarization::Te => "te",
            Polarization::Tm => "tm",
        };
        table.push(vec![
            o.degree.to_string(),
            pol.into(),
            num(o.relative_trace),
            num(o.wavenumber_distance),
        ]);
    }
    let results = json!({
        "all_clear": report.all_clear(),
        "absorbing": report.absorbing,
        "tm_degrees": report.offending_degrees(Polarization::Tm),
        "te_degrees": report.offending_degrees(Polarization::Te),
    });
    Ok(Artifacts {
        csv: vec![("check_k.csv".into(), table)],
        json: vec![("check_k.json".into(), results)],
        dat: Vec::new(),
    })
}
