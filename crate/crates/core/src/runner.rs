//! `simulate` and `verify` orchestration: model construction from a
//! [`RunConfig`], integration, checks and atomic output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ModelName, RunConfig};
use crate::dynamics::{integrate_flow, ConservationDrift, DynamicsError, Trajectory};
use crate::elliptic::classify_dynamics;
use crate::models::{build_a1, build_poeschl_teller, build_zv_gyrostat, ModelError, ModelSpec};
use crate::pencil::{Elimination, PencilCoefficients};
use crate::phase_space::{PhaseKind, PhasePoint};
use crate::verification::{assembled_quartic, verify_model, VerificationReport};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid model setup: {0}")]
    Model(#[from] ModelError),
    #[error("integration failed: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Model(_) => EXIT_CONFIG,
            RunError::Dynamics(DynamicsError::Config(_)) => EXIT_CONFIG,
            RunError::Dynamics(_) | RunError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

/// Builds the configured model (with the corruption hook applied) and its
/// validated starting point.
pub fn build_model(cfg: &RunConfig) -> Result<(ModelSpec, PhasePoint), RunError> {
    let tau = PencilCoefficients::new(cfg.tau).map_err(|e| ConfigError::Field {
        field: "tau".into(),
        message: e.to_string(),
    })?;
    let kind = match cfg.model {
        ModelName::ZvGyrostat => PhaseKind::SU2,
        _ => PhaseKind::Canonical,
    };
    let x0 = PhasePoint::from_coords(kind, &cfg.initial).map_err(|e| ConfigError::Field {
        field: "initial".into(),
        message: e.to_string(),
    })?;
    let mut model = match cfg.model {
        ModelName::PoeschlTeller => build_poeschl_teller(
            cfg.param("beta0"),
            cfg.param("beta1"),
            cfg.param("beta2"),
            tau,
        )?,
        ModelName::ZvGyrostat => build_zv_gyrostat(cfg.param("beta"), tau, x0)?,
        ModelName::A1 => build_a1(
            cfg.param("beta0"),
            cfg.param("beta1"),
            cfg.param("beta2"),
            tau,
        )?,
    };
    model.validate_initial(&x0)?;
    if let Some(delta) = cfg.corrupt_alpha00 {
        let mut phi = model.phi;
        phi.alpha[0][0] += delta;
        model = model.with_phi(phi);
    }
    Ok((model, x0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub x: &'static str,
    pub y: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub model: String,
    pub tau: [f64; 5],
    pub w0: f64,
    pub conservation_drift: ConservationDrift,
    /// Classification of the `X` dynamics; `classification_by_variable` has both.
    pub classification: &'static str,
    pub classification_by_variable: Classification,
    pub rows: usize,
    pub steps: usize,
}

pub fn summarize(model: &ModelSpec, traj: &Trajectory) -> Summary {
    let kx = classify_dynamics(&assembled_quartic(model, traj, Elimination::X))
        .kind
        .as_str();
    let ky = classify_dynamics(&assembled_quartic(model, traj, Elimination::Y))
        .kind
        .as_str();
    Summary {
        model: model.name.clone(),
        tau: model.tau.as_array(),
        w0: traj.initial_energy(),
        conservation_drift: traj.drift,
        classification: kx,
        classification_by_variable: Classification { x: kx, y: ky },
        rows: traj.len(),
        steps: traj.steps,
    }
}

/// CSV with header `t,<coords>,X,Y,Z,W,Q[,S2]`, 17 significant digits, LF endings.
pub fn trajectory_csv(traj: &Trajectory, kind: PhaseKind) -> String {
    let mut cols: Vec<&str> = vec!["X", "Y", "Z", "W", "Q"];
    if kind == PhaseKind::SU2 {
        cols.push("S2");
    }
    let mut out = String::with_capacity(traj.len() * 24 * (cols.len() + 4));
    out.push('t');
    for label in kind.coordinate_labels() {
        out.push(',');
        out.push_str(label);
    }
    for c in &cols {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    let series: Vec<&[f64]> = cols.iter().map(|c| traj.series(c)).collect();
    for (i, (t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        write!(out, "{t:.16e}").unwrap();
        for v in state.coords().as_slice() {
            write!(out, ",{v:.16e}").unwrap();
        }
        for s in &series {
            write!(out, ",{:.16e}", s[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn json(value: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s.into_bytes()
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub summary: Summary,
    pub trajectory_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Integrates the configured flow; writes `trajectory.csv` and `summary.json`.
pub fn run_simulate(cfg: &RunConfig) -> Result<SimulateOutcome, RunError> {
    let (model, x0) = build_model(cfg)?;
    let traj = integrate_flow(&model, &x0, &cfg.integrator)?;
    let summary = summarize(&model, &traj);
    let trajectory_path = cfg.out_dir.join("trajectory.csv");
    let summary_path = cfg.out_dir.join("summary.json");
    write_atomic(
        &trajectory_path,
        trajectory_csv(&traj, model.kind).as_bytes(),
    )?;
    write_atomic(&summary_path, &json(&summary))?;
    Ok(SimulateOutcome {
        summary,
        trajectory_path,
        summary_path,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: VerificationReport,
    pub report_path: PathBuf,
}

impl VerifyOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_passed() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Integrates, runs the configured checks and writes `report.json`.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyOutcome, RunError> {
    let (model, x0) = build_model(cfg)?;
    let traj = integrate_flow(&model, &x0, &cfg.integrator)?;
    let report = verify_model(
        &model,
        &traj,
        cfg.seed,
        cfg.n_points,
        cfg.checks,
        &cfg.tolerances,
    );
    let report_path = cfg.out_dir.join("report.json");
    write_atomic(&report_path, &json(&report))?;
    Ok(VerifyOutcome {
        report,
        report_path,
    })
}
