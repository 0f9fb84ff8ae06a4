//! Adaptive Dormand–Prince 5(4) integration of Hamiltonian flows.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::models::{ModelError, ModelSpec};
use crate::phase_space::{
    hamiltonian_vector_field, poisson_bracket, su2_casimir, Observable, PhaseError, PhaseKind,
    PhasePoint,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid integrator config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepLimit { t: f64, max_steps: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("left the model domain at t = {t}: {detail}")]
    Domain { t: f64, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub dt_out: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            t_end: 50.0,
            dt_out: 0.01,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::Config(m.to_string()));
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be positive");
        }
        if !(self.dt_out > 0.0) || self.dt_out > self.t_end {
            return bad("dt_out must lie in (0, t_end]");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }

    /// Number of output intervals; the grid is `0, dt_out, ..., n dt_out`.
    pub fn intervals(&self) -> usize {
        (self.t_end / self.dt_out + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Integrates `xdot = X_H(x)` (or its negative when going backward).
struct Stepper<'a, G> {
    h: &'a Observable,
    sign: f64,
    rtol: f64,
    atol: f64,
    guard: G,
    dim: usize,
    kind: PhaseKind,
    steps: usize,
    max_steps: usize,
    step: f64,
}

impl<G> Stepper<'_, G>
where
    G: Fn(&PhasePoint) -> Result<(), String>,
{
    fn rhs(&self, y: &[f64; 3], t: f64) -> Result<[f64; 3], DynamicsError> {
        let pt = PhasePoint::from_coords(self.kind, &y[..self.dim]).map_err(|_| {
            DynamicsError::Domain {
                t,
                detail: "non-finite state".into(),
            }
        })?;
        let v = hamiltonian_vector_field(self.h, &pt)?;
        let mut out = [0.0; 3];
        for i in 0..self.dim {
            out[i] = self.sign * v[i];
        }
        if out.iter().any(|c| !c.is_finite()) {
            let detail = (self.guard)(&pt)
                .err()
                .unwrap_or_else(|| "non-finite vector field".into());
            return Err(DynamicsError::Domain { t, detail });
        }
        Ok(out)
    }

    /// Advances `y` from `t` by exactly `span` (> 0) with adaptive steps.
    fn advance(&mut self, y: &mut [f64; 3], t: f64, span: f64) -> Result<(), DynamicsError> {
        let t_target = t + span;
        let mut tc = t;
        loop {
            let remaining = t_target - tc;
            if remaining <= 1e-15 * t_target.abs().max(1.0) {
                return Ok(());
            }
            let last = self.step >= remaining;
            let h = if last { remaining } else { self.step };
            if h < 1e-14 * tc.abs().max(1.0) {
                return Err(DynamicsError::StepUnderflow { t: self.sign * tc });
            }
            if self.steps >= self.max_steps {
                return Err(DynamicsError::StepLimit {
                    t: self.sign * tc,
                    max_steps: self.max_steps,
                });
            }
            self.steps += 1;

            let mut k = [[0.0; 3]; 7];
            k[0] = self.rhs(y, self.sign * tc)?;
            let mut stage_ok = true;
            for s in 1..7 {
                let mut ys = *y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    for i in 0..self.dim {
                        ys[i] += h * A[s][j] * kj[i];
                    }
                }
                match self.rhs(&ys, self.sign * (tc + C[s] * h)) {
                    Ok(v) => k[s] = v,
                    Err(DynamicsError::Domain { .. }) => {
                        stage_ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !stage_ok {
                // A trial stage left the domain; retry with a smaller step
                // before declaring a violation.
                self.step = h * MIN_FACTOR;
                if self.step < 1e-12 {
                    let pt = PhasePoint::from_coords(self.kind, &y[..self.dim]).unwrap();
                    let detail = (self.guard)(&pt)
                        .err()
                        .unwrap_or_else(|| "stage left the domain".into());
                    return Err(DynamicsError::Domain {
                        t: self.sign * tc,
                        detail,
                    });
                }
                continue;
            }

            let mut y_new = *y;
            // Error per unit step in the max norm: the local error may not
            // exceed tol * h, so the accumulated drift over a run stays of
            // the order of tol * t_end rather than tol * steps.
            let mut err: f64 = 0.0;
            for i in 0..self.dim {
                let mut hi = 0.0;
                let mut lo = 0.0;
                for s in 0..7 {
                    hi += B[s] * k[s][i];
                    lo += B_LOW[s] * k[s][i];
                }
                y_new[i] = y[i] + h * hi;
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max(((hi - lo) / sc).abs());
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                let pt = PhasePoint::from_coords(self.kind, &y_new[..self.dim]).map_err(|_| {
                    DynamicsError::Domain {
                        t: self.sign * (tc + h),
                        detail: "non-finite state".into(),
                    }
                })?;
                (self.guard)(&pt).map_err(|detail| DynamicsError::Domain {
                    t: self.sign * (tc + h),
                    detail,
                })?;
                *y = y_new;
                tc = if last { t_target } else { tc + h };
                // a step clipped to hit the output time says little about the
                // natural step size
                if !last || factor < 1.0 {
                    self.step = h * factor;
                }
            } else {
                self.step = h * factor.min(1.0);
            }
        }
    }
}

/// Raw output of an integration: grid times and states.
#[derive(Debug, Clone)]
pub struct Flow {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub steps: usize,
}

fn to_array(p: &PhasePoint) -> [f64; 3] {
    let c = p.coords();
    let mut y = [0.0; 3];
    y[..c.len()].copy_from_slice(c.as_slice());
    y
}

/// Integrates the flow of an arbitrary Hamiltonian on the output grid of `cfg`.
/// `guard` is evaluated after every accepted step.
pub fn integrate_hamiltonian<G>(
    h: &Observable,
    x0: &PhasePoint,
    cfg: &IntegratorConfig,
    direction: Direction,
    guard: G,
) -> Result<Flow, DynamicsError>
where
    G: Fn(&PhasePoint) -> Result<(), String>,
{
    cfg.validate()?;
    if x0.kind() != h.kind() {
        return Err(PhaseError::KindMismatch {
            expected: h.kind(),
            found: x0.kind(),
        }
        .into());
    }
    guard(x0).map_err(|detail| DynamicsError::Domain { t: 0.0, detail })?;
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let mut stepper = Stepper {
        h,
        sign,
        rtol: cfg.rtol,
        atol: cfg.atol,
        guard,
        dim: x0.kind().dim(),
        kind: x0.kind(),
        steps: 0,
        max_steps: cfg.max_steps,
        step: cfg.dt_out.min(0.01),
    };
    let n = cfg.intervals();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut y = to_array(x0);
    times.push(0.0);
    states.push(*x0);
    for i in 1..=n {
        let t_prev = (i - 1) as f64 * cfg.dt_out;
        let t_next = i as f64 * cfg.dt_out;
        stepper.advance(&mut y, t_prev, t_next - t_prev)?;
        times.push(sign * t_next);
        states
            .push(PhasePoint::from_coords(stepper.kind, &y[..stepper.dim]).expect("finite state"));
    }
    Ok(Flow {
        times,
        states,
        steps: stepper.steps,
    })
}

/// Flows `x0` for a signed time `duration` under `h`.
pub fn propagate<G>(
    h: &Observable,
    x0: &PhasePoint,
    duration: f64,
    rtol: f64,
    atol: f64,
    guard: G,
) -> Result<PhasePoint, DynamicsError>
where
    G: Fn(&PhasePoint) -> Result<(), String>,
{
    if duration == 0.0 {
        return Ok(*x0);
    }
    let mut stepper = Stepper {
        h,
        sign: duration.signum(),
        rtol,
        atol,
        guard,
        dim: x0.kind().dim(),
        kind: x0.kind(),
        steps: 0,
        max_steps: 1_000_000,
        step: duration.abs().min(0.01),
    };
    let mut y = to_array(x0);
    stepper.advance(&mut y, 0.0, duration.abs())?;
    Ok(PhasePoint::from_coords(stepper.kind, &y[..stepper.dim]).expect("finite state"))
}

/// Largest `|F(t) - F(0)| / max(1, |F(0)|)` over the stored samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationDrift {
    pub w: f64,
    pub q: f64,
    pub s2: Option<f64>,
}

impl ConservationDrift {
    pub fn max(&self) -> f64 {
        self.w.max(self.q).max(self.s2.unwrap_or(0.0))
    }
}

pub fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else {
        return 0.0;
    };
    let scale = first.abs().max(1.0);
    series
        .iter()
        .fold(0.0, |m: f64, v| m.max((v - first).abs() / scale))
}

/// Sampled solution of the flow of a model's pencil.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model: String,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    /// `X, Y, Z, W, Q` and, on su(2), `S2`.
    pub series: BTreeMap<String, Vec<f64>>,
    pub drift: ConservationDrift,
    pub steps: usize,
    pub dt_out: f64,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> &[f64] {
        self.series.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_energy(&self) -> f64 {
        self.series("W")[0]
    }
}

/// Integrates `xdot = {x, W}` for the model's pencil from `x0`.
pub fn integrate_flow(
    model: &ModelSpec,
    x0: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    integrate_flow_directed(model, x0, cfg, Direction::Forward)
}

pub fn integrate_flow_directed(
    model: &ModelSpec,
    x0: &PhasePoint,
    cfg: &IntegratorConfig,
    direction: Direction,
) -> Result<Trajectory, DynamicsError> {
    model.validate_initial(x0)?;
    let flow = integrate_hamiltonian(&model.w, x0, cfg, direction, |p| model.check_domain(p))?;
    Ok(trajectory_from_flow(model, flow, cfg.dt_out))
}

pub(crate) fn trajectory_from_flow(model: &ModelSpec, flow: Flow, dt_out: f64) -> Trajectory {
    let n = flow.states.len();
    let mut cols: [Vec<f64>; 5] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut s2 = Vec::new();
    for p in &flow.states {
        let v = model.observables_at(p);
        cols[0].push(v.x);
        cols[1].push(v.y);
        cols[2].push(v.z);
        cols[3].push(v.w);
        cols[4].push(model.casimir_q(p));
        if let Ok(c) = su2_casimir(p) {
            s2.push(c);
        }
    }
    let [x, y, z, w, q] = cols;
    let drift = ConservationDrift {
        w: relative_drift(&w),
        q: relative_drift(&q),
        s2: (!s2.is_empty()).then(|| relative_drift(&s2)),
    };
    let mut series = BTreeMap::from([
        ("X".to_string(), x),
        ("Y".to_string(), y),
        ("Z".to_string(), z),
        ("W".to_string(), w),
        ("Q".to_string(), q),
    ]);
    if !s2.is_empty() {
        series.insert("S2".to_string(), s2);
    }
    Trajectory {
        model: model.name.clone(),
        times: flow.times,
        states: flow.states,
        series,
        drift,
        steps: flow.steps,
        dt_out,
    }
}

/// `{F, W}` at every stored state: the time derivative of `F` along the flow.
pub fn bracket_series(
    traj: &Trajectory,
    f: &Observable,
    model: &ModelSpec,
) -> Result<Vec<f64>, PhaseError> {
    traj.states
        .iter()
        .map(|p| poisson_bracket(f, &model.w, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_a1, build_poeschl_teller, build_zv_gyrostat};
    use crate::pencil::PencilCoefficients;

    fn tau(t: [f64; 5]) -> PencilCoefficients {
        PencilCoefficients::new(t).unwrap()
    }

    fn cfg(t_end: f64, dt_out: f64) -> IntegratorConfig {
        IntegratorConfig {
            t_end,
            dt_out,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        assert!(IntegratorConfig {
            rtol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(IntegratorConfig {
            dt_out: 60.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(IntegratorConfig {
            t_end: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!(IntegratorConfig::default().intervals(), 5000);
    }

    #[test]
    fn harmonic_oscillator_matches_exact_solution() {
        let h = Observable::canonical("H", |q, p| 0.5 * (q * q + p * p), |q, p| (q, p));
        let c = cfg(10.0, 0.5);
        let flow = integrate_hamiltonian(
            &h,
            &PhasePoint::canonical(1.0, 0.0),
            &c,
            Direction::Forward,
            |_| Ok(()),
        )
        .unwrap();
        assert_eq!(flow.times.len(), 21);
        for (t, s) in flow.times.iter().zip(&flow.states) {
            let PhasePoint::Canonical { q, p } = *s else {
                unreachable!()
            };
            assert!((q - t.cos()).abs() < 1e-9);
            assert!((p + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn output_grid_is_uniform() {
        let m = build_zv_gyrostat(
            0.7,
            tau([0.0, 1.0, 0.0, 0.0, 0.0]),
            PhasePoint::su2(0.6, 0.8, 0.3),
        )
        .unwrap();
        let tr = integrate_flow(&m, &PhasePoint::su2(0.6, 0.8, 0.3), &cfg(1.0, 0.1)).unwrap();
        assert_eq!(tr.len(), 11);
        for (i, t) in tr.times.iter().enumerate() {
            assert_eq!(*t, i as f64 * 0.1);
        }
        for s in tr.series.values() {
            assert_eq!(s.len(), tr.len());
        }
    }

    #[test]
    fn free_euler_top_conserves_energy_and_casimir() {
        let x0 = PhasePoint::su2(0.6, 0.8, 0.3);
        let m = build_zv_gyrostat(0.7, tau([0.0, 1.0, 0.0, 0.0, 0.0]), x0).unwrap();
        let tr = integrate_flow(&m, &x0, &IntegratorConfig::default()).unwrap();
        assert!(tr.drift.w < 1e-9, "{:?}", tr.drift);
        assert!(tr.drift.s2.unwrap() < 1e-9, "{:?}", tr.drift);
        assert!(tr.drift.q < 1e-9, "{:?}", tr.drift);
    }

    #[test]
    fn pure_y_pencil_moves_x_with_z() {
        let x0 = PhasePoint::su2(0.6, 0.8, 0.3);
        let m = build_zv_gyrostat(0.7, tau([0.0, 0.0, 0.0, 0.0, 1.0]), x0).unwrap();
        let tr = integrate_flow(&m, &x0, &cfg(5.0, 0.01)).unwrap();
        let xdot = bracket_series(&tr, &m.x, &m).unwrap();
        for (d, z) in xdot.iter().zip(tr.series("Z")) {
            // {X, Y} = Z
            assert!((d - z).abs() < 1e-12);
        }
        let wdot = bracket_series(&tr, &m.w, &m).unwrap();
        assert!(wdot.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn bracket_series_matches_differencing() {
        let x0 = PhasePoint::canonical(0.8, 0.3);
        let m = build_a1(1.0, 0.5, -0.3, tau([0.2, 1.0, 0.3, 0.4, 0.5])).unwrap();
        let dt = 0.01;
        let tr = integrate_flow(&m, &x0, &cfg(5.0, dt)).unwrap();
        let xdot = bracket_series(&tr, &m.x, &m).unwrap();
        let xs = tr.series("X");
        let scale = xdot.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 1..xs.len() - 1 {
            let fd = (xs[i + 1] - xs[i - 1]) / (2.0 * dt);
            assert!((fd - xdot[i]).abs() < 1e-2 * scale.max(1.0), "i={i}");
        }
    }

    #[test]
    fn self_convergence() {
        let x0 = PhasePoint::su2(0.6, 0.8, 0.3);
        let m = build_zv_gyrostat(0.7, tau([0.0, 1.0, 0.3, 0.2, 0.5]), x0).unwrap();
        let coarse = IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            dt_out: 1.0,
            t_end: 20.0,
            ..Default::default()
        };
        let fine = IntegratorConfig {
            rtol: 0.5e-8,
            atol: 0.5e-10,
            ..coarse
        };
        let a = integrate_flow(&m, &x0, &coarse).unwrap();
        let b = integrate_flow(&m, &x0, &fine).unwrap();
        let (pa, pb) = (
            a.states.last().unwrap().coords(),
            b.states.last().unwrap().coords(),
        );
        for i in 0..3 {
            assert!(
                (pa[i] - pb[i]).abs() < 10.0 * 1e-8 * 20.0,
                "{} vs {}",
                pa[i],
                pb[i]
            );
        }
    }

    #[test]
    fn time_reversal_symmetry() {
        // p = 0 is a turning point of the Poeschl–Teller flow of Y
        let x0 = PhasePoint::canonical(0.7, 0.0);
        let m = build_poeschl_teller(0.0, 0.5, -3.0, tau([0.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        let c = cfg(5.0, 0.05);
        let fwd = integrate_flow_directed(&m, &x0, &c, Direction::Forward).unwrap();
        let bwd = integrate_flow_directed(&m, &x0, &c, Direction::Backward).unwrap();
        assert_eq!(bwd.times[3], -0.15000000000000002);
        for (a, b) in fwd.series("X").iter().zip(bwd.series("X")) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn domain_violation_reports_time() {
        // free relativistic particle drifting right; the guard trips at q = 1.5
        let m = build_a1(1.0, 0.0, 0.0, tau([0.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        let flow = integrate_hamiltonian(
            &m.w,
            &PhasePoint::canonical(1.0, 1.0),
            &cfg(5.0, 0.1),
            Direction::Forward,
            |p| match *p {
                PhasePoint::Canonical { q, .. } if q > 1.5 => Err(format!("q = {q}")),
                _ => Ok(()),
            },
        );
        match flow {
            Err(DynamicsError::Domain { t, .. }) => assert!(t > 0.0 && t < 5.0),
            other => panic!("expected a domain error, got {other:?}"),
        }
    }

    #[test]
    fn step_budget_is_enforced() {
        let x0 = PhasePoint::su2(0.6, 0.8, 0.3);
        let m = build_zv_gyrostat(0.7, tau([0.0, 1.0, 0.0, 0.0, 0.0]), x0).unwrap();
        let c = IntegratorConfig {
            max_steps: 10,
            ..Default::default()
        };
        assert!(matches!(
            integrate_flow(&m, &x0, &c),
            Err(DynamicsError::StepLimit { .. })
        ));
    }

    #[test]
    fn off_sphere_start_rejected() {
        let m = build_zv_gyrostat(
            0.7,
            tau([0.0, 1.0, 0.0, 0.0, 0.0]),
            PhasePoint::su2(1.0, 0.0, 0.0),
        )
        .unwrap();
        let r = integrate_flow(&m, &PhasePoint::su2(2.0, 0.0, 0.0), &cfg(1.0, 0.1));
        assert!(matches!(r, Err(DynamicsError::Model(_))));
    }

    #[test]
    fn propagate_matches_grid() {
        let x0 = PhasePoint::su2(0.6, 0.8, 0.3);
        let m = build_zv_gyrostat(0.7, tau([0.0, 1.0, 0.3, 0.2, 0.5]), x0).unwrap();
        let tr = integrate_flow(&m, &x0, &cfg(2.0, 0.5)).unwrap();
        let p = propagate(&m.w, &x0, 2.0, 1e-10, 1e-12, |_| Ok(())).unwrap();
        let (a, b) = (p.coords(), tr.states.last().unwrap().coords());
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-9);
        }
        let back = propagate(&m.w, &p, -2.0, 1e-10, 1e-12, |_| Ok(())).unwrap();
        for i in 0..3 {
            assert!((back.coords()[i] - x0.coords()[i]).abs() < 1e-9);
        }
    }
}
