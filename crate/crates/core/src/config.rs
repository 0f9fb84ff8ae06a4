//! Flat `key=value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! model=zv_gyrostat
//! params.beta=1
//! tau=0,1,0.3,0.2,0.5
//! initial=0.6,0.8,0.3
//! t_end=50
//! dt_out=0.01
//! seed=7
//! checks=all
//! out_dir=out/gyrostat
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::IntegratorConfig;
use crate::verification::{CheckSelection, Tolerances};

/// Environment variable that overrides the `seed` key.
pub const SEED_ENV: &str = "HEUN_PENCIL_SEED";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: expected `key=value`")]
    Syntax { line: usize },
    #[error("invalid `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    PoeschlTeller,
    ZvGyrostat,
    A1,
}

impl ModelName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::PoeschlTeller => "poeschl_teller",
            ModelName::ZvGyrostat => "zv_gyrostat",
            ModelName::A1 => "a1",
        }
    }

    /// Phase-space dimension of the model's `initial` vector.
    pub fn dim(self) -> usize {
        match self {
            ModelName::ZvGyrostat => 3,
            _ => 2,
        }
    }

    fn required_params(self) -> &'static [&'static str] {
        match self {
            ModelName::ZvGyrostat => &["beta"],
            _ => &["beta0", "beta1", "beta2"],
        }
    }
}

impl std::str::FromStr for ModelName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "poeschl_teller" => Ok(ModelName::PoeschlTeller),
            "zv_gyrostat" => Ok(ModelName::ZvGyrostat),
            "a1" => Ok(ModelName::A1),
            other => Err(ConfigError::field(
                "model",
                format!("unknown model `{other}` (expected poeschl_teller, zv_gyrostat or a1)"),
            )),
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelName,
    pub params: BTreeMap<String, f64>,
    pub tau: [f64; 5],
    pub initial: Vec<f64>,
    pub integrator: IntegratorConfig,
    pub seed: u64,
    pub checks: CheckSelection,
    /// Random phase points used by the algebra checks.
    pub n_points: usize,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
    /// Test hook: added to `alpha_00` before the checks run.
    pub corrupt_alpha00: Option<f64>,
}

impl RunConfig {
    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// Reads, parses and applies the seed override from the environment.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        if let Ok(raw) = std::env::var(SEED_ENV) {
            cfg.seed = raw.trim().parse().map_err(|_| {
                ConfigError::field(SEED_ENV, format!("`{raw}` is not a non-negative integer"))
            })?;
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if raw.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(ConfigError::field(k, "given more than once"));
            }
        }
        Self::from_map(raw)
    }

    fn from_map(mut raw: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let model: ModelName = take(&mut raw, "model")?
            .ok_or_else(|| ConfigError::field("model", "missing"))?
            .parse()?;

        let mut params = BTreeMap::new();
        for &name in model.required_params() {
            let key = format!("params.{name}");
            let v = take(&mut raw, &key)?.ok_or_else(|| ConfigError::field(&key, "missing"))?;
            params.insert(name.to_string(), real(&key, &v)?);
        }

        let tau_raw = take(&mut raw, "tau")?.ok_or_else(|| ConfigError::field("tau", "missing"))?;
        let tau_vec = reals("tau", &tau_raw)?;
        let tau: [f64; 5] = tau_vec.as_slice().try_into().map_err(|_| {
            ConfigError::field(
                "tau",
                format!("expected 5 values [tau0..tau4], got {}", tau_vec.len()),
            )
        })?;

        let initial_raw =
            take(&mut raw, "initial")?.ok_or_else(|| ConfigError::field("initial", "missing"))?;
        let initial = reals("initial", &initial_raw)?;
        if initial.len() != model.dim() {
            return Err(ConfigError::field(
                "initial",
                format!(
                    "{} needs {} coordinates, got {}",
                    model.as_str(),
                    model.dim(),
                    initial.len()
                ),
            ));
        }

        let defaults = IntegratorConfig::default();
        let mut real_or = |key: &str, default: f64| -> Result<f64, ConfigError> {
            take(&mut raw, key)?.map_or(Ok(default), |v| real(key, &v))
        };
        let integrator = IntegratorConfig {
            t_end: real_or("t_end", defaults.t_end)?,
            dt_out: real_or("dt_out", defaults.dt_out)?,
            rtol: real_or("rtol", defaults.rtol)?,
            atol: real_or("atol", defaults.atol)?,
            max_steps: defaults.max_steps,
        };
        let td = Tolerances::default();
        let tolerances = Tolerances {
            algebra: real_or("tolerance.algebra", td.algebra)?,
            trajectory: real_or("tolerance.trajectory", td.trajectory)?,
            fit: real_or("tolerance.fit", td.fit)?,
            invariant: real_or("tolerance.invariant", td.invariant)?,
            closed_form: real_or("tolerance.closed_form", td.closed_form)?,
            elementary: real_or("tolerance.elementary", td.elementary)?,
        };
        let corrupt_alpha00 = take(&mut raw, "test.corrupt_alpha00")?
            .map(|v| real("test.corrupt_alpha00", &v))
            .transpose()?;

        if !(integrator.t_end > 0.0) {
            return Err(ConfigError::field("t_end", "must be positive"));
        }
        if !(integrator.dt_out > 0.0) || integrator.dt_out > integrator.t_end {
            return Err(ConfigError::field("dt_out", "must lie in (0, t_end]"));
        }
        for (key, v) in [("rtol", integrator.rtol), ("atol", integrator.atol)] {
            if !(v > 0.0) {
                return Err(ConfigError::field(key, "must be positive"));
            }
        }
        let steps = integrator.t_end / integrator.dt_out;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(ConfigError::field("dt_out", "must divide t_end"));
        }

        let seed = match take(&mut raw, "seed")? {
            Some(v) => v.parse().map_err(|_| {
                ConfigError::field("seed", format!("`{v}` is not a non-negative integer"))
            })?,
            None => 0,
        };
        let n_points = match take(&mut raw, "n_points")? {
            Some(v) => match v.parse::<usize>() {
                Ok(n) if n >= 1 => n,
                _ => {
                    return Err(ConfigError::field(
                        "n_points",
                        "expected a positive integer",
                    ))
                }
            },
            None => 1000,
        };
        let checks = match take(&mut raw, "checks")? {
            Some(v) => parse_checks(&v)?,
            None => CheckSelection::ALL,
        };
        let out_dir =
            PathBuf::from(take(&mut raw, "out_dir")?.unwrap_or_else(|| "out".to_string()));

        if let Some(key) = raw.keys().next() {
            return Err(ConfigError::field(key, "unknown key"));
        }
        Ok(RunConfig {
            model,
            params,
            tau,
            initial,
            integrator,
            seed,
            checks,
            n_points,
            tolerances,
            out_dir,
            corrupt_alpha00,
        })
    }
}

fn take(raw: &mut BTreeMap<String, String>, key: &str) -> Result<Option<String>, ConfigError> {
    match raw.remove(key) {
        Some(v) if v.is_empty() => Err(ConfigError::field(key, "empty value")),
        other => Ok(other),
    }
}

fn real(field: &str, s: &str) -> Result<f64, ConfigError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::field(
            field,
            format!("`{s}` is not a finite number"),
        )),
    }
}

fn reals(field: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',').map(|part| real(field, part)).collect()
}

fn parse_checks(s: &str) -> Result<CheckSelection, ConfigError> {
    if s.trim() == "all" {
        return Ok(CheckSelection::ALL);
    }
    let mut sel = CheckSelection::NONE;
    for name in s.split(',').map(str::trim) {
        match name {
            "algebra" => sel.algebra = true,
            "quartic" => sel.quartic = true,
            "invariants" => sel.invariants = true,
            "elementary" => sel.elementary = true,
            "closed_form" => sel.closed_form = true,
            other => {
                return Err(ConfigError::field(
                    "checks",
                    format!("unknown check `{other}` (algebra, quartic, invariants, elementary, closed_form or all)"),
                ))
            }
        }
    }
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GYRO: &str =
        "model=zv_gyrostat\nparams.beta=1\ntau=0,1,0.3,0.2,0.5\ninitial=0.6,0.8,0.3\n";

    fn field_of(e: ConfigError) -> String {
        match e {
            ConfigError::Field { field, .. } => field,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(GYRO).unwrap();
        assert_eq!(cfg.model, ModelName::ZvGyrostat);
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(cfg.checks, CheckSelection::ALL);
        assert_eq!(cfg.tau, [0.0, 1.0, 0.3, 0.2, 0.5]);
        assert_eq!(cfg.param("beta"), 1.0);
    }

    #[test]
    fn short_tau_names_the_field() {
        let text = GYRO.replace("tau=0,1,0.3,0.2,0.5", "tau=0,1,0.3,0.2");
        assert_eq!(field_of(RunConfig::parse(&text).unwrap_err()), "tau");
    }

    #[test]
    fn rejects_bad_inputs() {
        let cases = [
            (GYRO.replace("zv_gyrostat", "kepler"), "model"),
            (
                GYRO.replace("initial=0.6,0.8,0.3", "initial=0.6,0.8"),
                "initial",
            ),
            (
                GYRO.replace("params.beta=1", "params.beta=x"),
                "params.beta",
            ),
            (format!("{GYRO}t_end=-1\n"), "t_end"),
            (format!("{GYRO}dt_out=0.03\nt_end=1\n"), "dt_out"),
            (format!("{GYRO}checks=algebra,everything\n"), "checks"),
            (format!("{GYRO}colour=blue\n"), "colour"),
            (format!("{GYRO}seed=1\nseed=2\n"), "seed"),
        ];
        for (text, field) in cases {
            assert_eq!(
                field_of(RunConfig::parse(&text).unwrap_err()),
                field,
                "{text}"
            );
        }
        assert_eq!(
            RunConfig::parse("model").unwrap_err(),
            ConfigError::Syntax { line: 1 }
        );
    }

    #[test]
    fn check_list() {
        let cfg = RunConfig::parse(&format!("{GYRO}checks=algebra, closed_form\n")).unwrap();
        assert!(cfg.checks.algebra && cfg.checks.closed_form);
        assert!(!cfg.checks.quartic && !cfg.checks.invariants && !cfg.checks.elementary);
    }
}
