//! Runs a scenario and renders its time series and report.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use nlwave::diagnostics::{
    build_certificate, energy, phi_series, resolved_prefix_len, verify_concavity_inequality, BlowupCertificate,
    ConcavityReport, EnergyBreakdown, CONCAVITY_TOL, MIN_SERIES_LEN, RESOLVED_GROWTH_PER_SAMPLE,
};
use nlwave::nonlinearity::{
    check_blowup_growth, check_exactness, check_global_g_bound, check_global_g_power_bound, check_gradient_consistency,
    HypothesisReport,
};
use nlwave::solver::linear_exact;
use nlwave::{Execution, Outcome, SimulationResult, State};

use crate::config::{ConfigError, ExperimentConfig, HypothesisConfig, Scenario};

pub const EXIT_COMPLETED: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_CORRUPTED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical setup failed: {0}")]
    Numerical(#[from] nlwave::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Numerical(_) => EXIT_CONFIG,
            RunError::Io { .. } => EXIT_IO,
        }
    }
}

pub fn exit_code(outcome: &Outcome) -> i32 {
    match outcome {
        Outcome::Completed => EXIT_COMPLETED,
        Outcome::BlowupDetected { .. } => EXIT_BLOWUP,
        Outcome::Corrupted { .. } => EXIT_CORRUPTED,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupSummary {
    pub initial: f64,
    /// Over every step, including the one that tripped the guard.
    pub max: f64,
    /// Over the recorded snapshots only.
    pub max_recorded: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySummary {
    pub initial: EnergyBreakdown,
    pub last: EnergyBreakdown,
    /// `max |E(t) − E(0)| / max(1, |E(0)|)` over snapshots.
    pub relative_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevineCheck {
    pub bound: f64,
    pub t_detect: Option<f64>,
    /// `t_detect / bound`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavitySummary {
    /// Uniformly spaced `Φ` samples.
    pub samples: usize,
    /// Leading samples over which `Φ` changes by at most `growth_cap` per sample.
    pub resolved: usize,
    pub growth_cap: f64,
    /// Check on the resolved samples; absent when too few are resolved.
    pub report: Option<ConcavityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub outcome: Outcome,
    pub exit_code: i32,
    pub steps: usize,
    pub t_final: f64,
    pub sup: SupSummary,
    /// `[max |u1|, max |u2|]` over recorded and final states.
    pub visited: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BlowupCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levine: Option<LevineCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concavity: Option<ConcavitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_max_error: Option<f64>,
    pub hypotheses: Vec<HypothesisReport>,
    pub timing: Timing,
}

/// Everything a run produces; `csv` is the rendered time series.
pub struct RunOutput {
    pub report: RunReport,
    pub csv: String,
    pub scenario: Scenario,
    pub result: SimulationResult,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Executes a resolved config without touching the filesystem.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let start = Instant::now();
    let scenario = cfg.scenario()?;
    let Scenario {
        system,
        init,
        evolution,
        ..
    } = &scenario;
    let diag = &cfg.diagnostics;

    let certificate = diag
        .certificate
        .map(|c| build_certificate(init, c.nu, system))
        .transpose()?;
    let result = system.integrate(init, evolution)?;
    let snapshots = &result.snapshots;

    let energies = if diag.energy {
        Some(
            snapshots
                .iter()
                .map(|s| energy(s, system))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let energy_summary = energies.as_ref().and_then(|e| {
        let (first, last) = (e.first()?, e.last()?);
        let scale = first.total.abs().max(1.0);
        let drift = e
            .iter()
            .map(|x| (x.total - first.total).abs() / scale)
            .fold(0.0, f64::max);
        Some(EnergySummary {
            initial: *first,
            last: *last,
            relative_drift: drift,
        })
    });

    let certified = certificate.filter(BlowupCertificate::is_certified);
    let phi = match &certified {
        Some(cert) => Some(phi_series(snapshots, cert, system)?),
        None => None,
    };

    let oracle = if diag.oracle {
        let errors = snapshots
            .iter()
            .map(|s| {
                let exact = linear_exact(init, system.kernel1(), system.kernel2(), s.t)?;
                s.distance_sup(&exact)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Some(errors)
    } else {
        None
    };

    let t_detect = match result.outcome {
        Outcome::BlowupDetected { t_detect, .. } => Some(t_detect),
        _ => None,
    };
    let levine = certified.and_then(|c| c.levine_bound).map(|bound| LevineCheck {
        bound,
        t_detect,
        ratio: t_detect.map(|t| t / bound),
    });

    let concavity = match (&certified, &phi) {
        (Some(cert), Some(phi)) => {
            let h = evolution.dt * evolution.stride as f64;
            let uniform: Vec<f64> = phi
                .iter()
                .enumerate()
                .take_while(|(k, s)| (s.t - *k as f64 * h).abs() <= 1e-9 * h.max(s.t))
                .map(|(_, s)| s.phi)
                .collect();
            let resolved = resolved_prefix_len(&uniform, RESOLVED_GROWTH_PER_SAMPLE);
            let report = if resolved >= MIN_SERIES_LEN {
                Some(verify_concavity_inequality(
                    &uniform[..resolved],
                    cert.nu,
                    h,
                    CONCAVITY_TOL,
                )?)
            } else {
                None
            };
            Some(ConcavitySummary {
                samples: uniform.len(),
                resolved,
                growth_cap: RESOLVED_GROWTH_PER_SAMPLE,
                report,
            })
        }
        _ => None,
    };

    let visited = visited_range(snapshots.iter().chain(std::iter::once(&result.final_state)));
    let hypotheses = diag
        .hypotheses
        .iter()
        .map(|h| run_hypothesis(h, &scenario, visited))
        .collect();

    let sups = &result.sup_history;
    let recorded_max = snapshots.iter().map(State::sup_norm).fold(0.0, f64::max);
    let sup = SupSummary {
        initial: sups.first().map_or(0.0, |s| s.sup),
        max: sups.iter().map(|s| s.sup).fold(0.0, f64::max),
        max_recorded: recorded_max,
    };

    let csv = render_csv(
        snapshots,
        energies.as_deref(),
        phi.as_deref()
            .map(|p| p.iter().map(|s| s.phi).collect::<Vec<_>>())
            .as_deref(),
        oracle.as_deref(),
    );

    let report = RunReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        exit_code: exit_code(&result.outcome),
        outcome: result.outcome.clone(),
        steps: result.steps,
        t_final: result.final_state.t,
        sup,
        visited,
        energy: energy_summary,
        certificate,
        levine,
        concavity,
        oracle_max_error: oracle.map(|e| e.into_iter().fold(0.0, f64::max)),
        hypotheses,
        timing: Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    };
    Ok(RunOutput {
        report,
        csv,
        scenario,
        result,
    })
}

fn visited_range<'a>(states: impl Iterator<Item = &'a State>) -> [f64; 2] {
    let mut range = [0.0_f64; 2];
    for s in states.filter(|s| s.is_finite()) {
        range[0] = range[0].max(s.u1.sup_norm());
        range[1] = range[1].max(s.u2.sup_norm());
    }
    range
}

fn run_hypothesis(h: &HypothesisConfig, scenario: &Scenario, visited: [f64; 2]) -> HypothesisReport {
    let region = h.sample_box(visited).with_execution(Execution::Parallel);
    let nl = scenario.system.nonlinearity();
    let p = |name: &str| h.params[name];
    match h.check.as_str() {
        "exactness" => check_exactness(nl, &region, p("h"), p("tol")),
        "gradient_consistency" => check_gradient_consistency(nl, &region, p("h"), p("tol")),
        "blowup_growth" => check_blowup_growth(nl, p("nu"), &region),
        "global_g_bound" => check_global_g_bound(nl, p("k"), &region),
        "global_g_power_bound" => check_global_g_power_bound(nl, p("c"), p("k"), p("q1"), p("q2"), &region),
        other => unreachable!("check `{other}` survived validation"),
    }
}

/// One row per snapshot, every number as `{:.16e}` (17 significant digits).
pub fn render_csv(
    snapshots: &[State],
    energies: Option<&[EnergyBreakdown]>,
    phi: Option<&[f64]>,
    oracle: Option<&[f64]>,
) -> String {
    let mut out = String::from("t");
    if energies.is_some() {
        out.push_str(",E_total,kinetic1,kinetic2,potential");
    }
    out.push_str(",sup_u1,sup_u2");
    if phi.is_some() {
        out.push_str(",Phi");
    }
    if oracle.is_some() {
        out.push_str(",oracle_error");
    }
    out.push('\n');
    for (k, s) in snapshots.iter().enumerate() {
        let mut row = vec![s.t];
        if let Some(e) = energies {
            let e = e[k];
            row.extend([e.total, e.kinetic1, e.kinetic2, e.potential]);
        }
        row.extend([s.u1.sup_norm(), s.u2.sup_norm()]);
        row.extend(phi.map(|p| p[k]));
        row.extend(oracle.map(|o| o[k]));
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// Writes the CSV (unless disabled) and the JSON report into `dir`.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let names = &output.report.config.output;
    let mut written = Vec::new();
    if !names.csv.is_empty() {
        let path = dir.join(&names.csv);
        fs::write(&path, &output.csv).map_err(io_err(&path))?;
        written.push(path);
    }
    let path = dir.join(&names.report);
    let json = serde_json::to_string_pretty(&output.report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

/// Runs and writes; the exit code reflects the outcome.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutput, RunError> {
    let output = run_scenario(cfg)?;
    write_outputs(&output, dir)?;
    Ok(output)
}

/// Result of one sweep member.
pub struct SweepEntry {
    pub label: String,
    pub dir: PathBuf,
    pub result: Result<RunReport, RunError>,
}

impl SweepEntry {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(r) => r.exit_code,
            Err(e) => e.exit_code(),
        }
    }
}

/// Runs independent configs, each into its own subdirectory of `root` named
/// after the config (suffixed with its position when names repeat).
pub fn run_sweep(configs: &[ExperimentConfig], root: &Path, execution: Execution) -> Vec<SweepEntry> {
    let labels: Vec<String> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if configs.iter().filter(|o| o.name == c.name).count() > 1 {
                format!("{}-{i}", c.name)
            } else {
                c.name.clone()
            }
        })
        .collect();
    let jobs: Vec<(usize, &ExperimentConfig)> = configs.iter().enumerate().collect();
    execution.map_slice(&jobs, |&(i, cfg)| {
        let dir = root.join(&labels[i]);
        let result = run_to_dir(cfg, &dir).map(|o| o.report);
        SweepEntry {
            label: labels[i].clone(),
            dir,
            result,
        }
    })
}

/// Exit code for a sweep: setup and I/O failures first, then the most severe outcome.
pub fn sweep_exit_code(entries: &[SweepEntry]) -> i32 {
    let codes: Vec<i32> = entries.iter().map(SweepEntry::exit_code).collect();
    for code in [EXIT_IO, EXIT_CONFIG] {
        if codes.contains(&code) {
            return code;
        }
    }
    codes.into_iter().max().unwrap_or(EXIT_COMPLETED)
}
