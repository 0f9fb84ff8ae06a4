//! The three concrete Leonard-pair models, expressed in pencil form.
//!
//! Each constructor returns a [`ModelSpec`] whose `X, Y, Z, W` observables
//! carry analytic gradients and whose `phi` satisfies `Z^2 = Phi(X, Y)` on the
//! model's leaf. The direct Hamiltonians obtained after a momentum shift are
//! provided separately for equivalence checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::pencil::{heun_value, BiQuadratic, PencilCoefficients};
use crate::phase_space::{su2_casimir, Observable, PhaseKind, PhasePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("initial point outside the model domain: {0}")]
    InitialPoint(String),
    #[error("potential u^2(q) is not positive at q = {offending:?}")]
    Positivity { offending: Vec<f64> },
    #[error("square root of the shifted kinetic coefficient is undefined at q = {q}")]
    SquareRoot { q: f64 },
    #[error("operation requires the {expected} model")]
    WrongModel { expected: &'static str },
}

/// Parameters that identify a model family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelFamily {
    PoeschlTeller { beta0: f64, beta1: f64, beta2: f64 },
    ZvGyrostat { beta: f64, casimir: f64 },
    A1 { beta0: f64, beta1: f64, beta2: f64 },
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::PoeschlTeller { .. } => "poeschl_teller",
            ModelFamily::ZvGyrostat { .. } => "zv_gyrostat",
            ModelFamily::A1 { .. } => "a1",
        }
    }
}

/// Default `q` window for the canonical models; keeps clear of `sinh q = 0`.
pub const DEFAULT_Q_RANGE: (f64, f64) = (0.1, 3.0);
/// Window used when sampling random canonical points.
pub const SAMPLE_Q_RANGE: (f64, f64) = (0.2, 2.0);
pub const SAMPLE_P_RANGE: (f64, f64) = (-2.0, 2.0);

type Guard = dyn Fn(&PhasePoint) -> Result<(), String> + Send + Sync;

/// A phase space, a classical Leonard pair `X, Y` with bracket `Z`, the
/// structure polynomial `phi` and the pencil `W` built from `tau`.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub kind: PhaseKind,
    pub x: Observable,
    pub y: Observable,
    pub z: Observable,
    pub w: Observable,
    pub phi: BiQuadratic,
    pub tau: PencilCoefficients,
    pub params: BTreeMap<String, f64>,
    pub family: ModelFamily,
    pub q_range: (f64, f64),
    guard: Arc<Guard>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("phi", &self.phi)
            .field("tau", &self.tau)
            .field("params", &self.params)
            .finish()
    }
}

/// Values of the four model observables at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyzW {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl ModelSpec {
    pub fn observables_at(&self, p: &PhasePoint) -> XyzW {
        XyzW {
            x: self.x.value(p),
            y: self.y.value(p),
            z: self.z.value(p),
            w: self.w.value(p),
        }
    }

    /// `Z^2 - Phi(X, Y)` at `p`; zero on the model's leaf.
    pub fn casimir_q(&self, p: &PhasePoint) -> f64 {
        let v = self.observables_at(p);
        crate::pencil::casimir_q(&self.phi, v.x, v.y, v.z)
    }

    /// Checked at every accepted integration step.
    pub fn check_domain(&self, p: &PhasePoint) -> Result<(), String> {
        if p.kind() != self.kind {
            return Err(format!("expected a {} point, got {}", self.kind, p.kind()));
        }
        if !p.is_finite() {
            return Err("non-finite coordinates".into());
        }
        (self.guard)(p)
    }

    /// Validates a starting point: domain guard plus, for the gyrostat, the
    /// reference sphere.
    pub fn validate_initial(&self, p: &PhasePoint) -> Result<(), ModelError> {
        self.check_domain(p).map_err(ModelError::InitialPoint)?;
        if let ModelFamily::ZvGyrostat { casimir, .. } = self.family {
            let s2 = su2_casimir(p).expect("kind checked above");
            if (s2 - casimir).abs() > 1e-10 * casimir {
                return Err(ModelError::InitialPoint(format!(
                    "S^2 = {s2} differs from the reference sphere S^2 = {casimir}"
                )));
            }
        }
        if let PhasePoint::Canonical { q, .. } = *p {
            if q.abs() < 1e-12 {
                return Err(ModelError::InitialPoint("q = 0 is singular".into()));
            }
        }
        Ok(())
    }

    /// Uniform random point: `(q, p)` in the sampling window, or uniform on
    /// the reference sphere.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        match self.family {
            ModelFamily::ZvGyrostat { casimir, .. } => {
                let r = casimir.sqrt();
                let c: f64 = rng.gen_range(-1.0..=1.0);
                let phi: f64 = rng.gen_range(0.0..2.0 * PI);
                let s = (1.0 - c * c).max(0.0).sqrt();
                PhasePoint::su2(r * s * phi.cos(), r * s * phi.sin(), r * c)
            }
            _ => PhasePoint::canonical(
                rng.gen_range(SAMPLE_Q_RANGE.0..SAMPLE_Q_RANGE.1),
                rng.gen_range(SAMPLE_P_RANGE.0..SAMPLE_P_RANGE.1),
            ),
        }
    }

    /// Same model with a different structure polynomial. Used to inject a
    /// deliberate inconsistency into the checks.
    pub fn with_phi(&self, phi: BiQuadratic) -> ModelSpec {
        ModelSpec {
            phi,
            ..self.clone()
        }
    }

    /// Rebuilds the model with new pencil coefficients.
    pub fn with_tau(&self, tau: PencilCoefficients) -> Result<ModelSpec, ModelError> {
        let mut m = match self.family {
            ModelFamily::PoeschlTeller {
                beta0,
                beta1,
                beta2,
            } => build_poeschl_teller(beta0, beta1, beta2, tau)?,
            ModelFamily::ZvGyrostat { beta, casimir } => {
                build_zv_gyrostat(beta, tau, PhasePoint::su2(casimir.sqrt(), 0.0, 0.0))?
            }
            ModelFamily::A1 {
                beta0,
                beta1,
                beta2,
            } => build_a1_with_range(beta0, beta1, beta2, tau, self.q_range)?,
        };
        m.q_range = self.q_range;
        Ok(m)
    }

    pub fn with_q_range(mut self, q_range: (f64, f64)) -> Result<ModelSpec, ModelError> {
        if let ModelFamily::A1 {
            beta0,
            beta1,
            beta2,
        } = self.family
        {
            check_a1_positivity(beta0, beta1, beta2, q_range)?;
        }
        self.q_range = q_range;
        Ok(self)
    }
}

/// The pencil `W = tau1 X Y + tau2 Z + tau3 X + tau4 Y + tau0` as an observable.
pub fn pencil_observable(
    tau: &PencilCoefficients,
    x: &Observable,
    y: &Observable,
    z: &Observable,
) -> Observable {
    let [t0, t1, t2, t3, t4] = tau.as_array();
    let kind = x.kind();
    let xy = x.product(y);
    xy.linear_combination(t1, z, t2)
        .linear_combination(1.0, &x.linear_combination(t3, y, t4), 1.0)
        .linear_combination(1.0, &Observable::constant(kind, t0), 1.0)
        .with_label("W")
}

fn finite(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: "must be finite".into(),
        })
    }
}

/// `u(q) = beta1 / sinh^2 q + beta2 / cosh^2 q + beta0` and its derivative.
fn poeschl_teller_potential(beta0: f64, beta1: f64, beta2: f64, q: f64) -> (f64, f64) {
    let (s, c) = (q.sinh(), q.cosh());
    let u = beta1 / (s * s) + beta2 / (c * c) + beta0;
    let du = -2.0 * beta1 * c / (s * s * s) - 2.0 * beta2 * s / (c * c * c);
    (u, du)
}

fn sinh2_observable() -> Observable {
    Observable::canonical("X", |q, _| q.sinh().powi(2), |q, _| ((2.0 * q).sinh(), 0.0))
}

/// `X = sinh^2 q` and `Y = p^2 + u(q)` with the Poeschl–Teller potential,
/// so `Z^2 = U1(X) Y + U0(X)` with `U1 = 16x(1+x)` and
/// `U0 = -16 (beta0 x^2 + (beta0+beta1+beta2) x + beta1)`.
pub fn build_poeschl_teller(
    beta0: f64,
    beta1: f64,
    beta2: f64,
    tau: PencilCoefficients,
) -> Result<ModelSpec, ModelError> {
    finite("beta0", beta0)?;
    finite("beta1", beta1)?;
    finite("beta2", beta2)?;
    if tau.tau1() != 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "tau",
            reason: "tau1 must be zero for the Poeschl-Teller pencil".into(),
        });
    }
    let x = sinh2_observable();
    let y = Observable::canonical(
        "Y",
        move |q, p| p * p + poeschl_teller_potential(beta0, beta1, beta2, q).0,
        move |q, p| (poeschl_teller_potential(beta0, beta1, beta2, q).1, 2.0 * p),
    );
    let z = Observable::canonical(
        "Z",
        |q, p| 2.0 * p * (2.0 * q).sinh(),
        |q, p| (4.0 * p * (2.0 * q).cosh(), 2.0 * (2.0 * q).sinh()),
    );
    let [t0, _, t2, t3, t4] = tau.as_array();
    let w = Observable::canonical(
        "W",
        move |q, p| {
            let (u, _) = poeschl_teller_potential(beta0, beta1, beta2, q);
            t2 * 2.0 * p * (2.0 * q).sinh() + t3 * q.sinh().powi(2) + t4 * (p * p + u) + t0
        },
        move |q, p| {
            let (_, du) = poeschl_teller_potential(beta0, beta1, beta2, q);
            (
                t2 * 4.0 * p * (2.0 * q).cosh() + t3 * (2.0 * q).sinh() + t4 * du,
                t2 * 2.0 * (2.0 * q).sinh() + t4 * 2.0 * p,
            )
        },
    );
    let mut alpha = [[0.0; 3]; 3];
    alpha[1][1] = 16.0;
    alpha[2][1] = 16.0;
    alpha[0][0] = -16.0 * beta1;
    alpha[1][0] = -16.0 * (beta0 + beta1 + beta2);
    alpha[2][0] = -16.0 * beta0;

    let params = BTreeMap::from([
        ("beta0".to_string(), beta0),
        ("beta1".to_string(), beta1),
        ("beta2".to_string(), beta2),
    ]);
    Ok(ModelSpec {
        name: "poeschl_teller".into(),
        kind: PhaseKind::Canonical,
        x,
        y,
        z,
        w,
        phi: BiQuadratic::new(alpha),
        tau,
        params,
        family: ModelFamily::PoeschlTeller {
            beta0,
            beta1,
            beta2,
        },
        q_range: DEFAULT_Q_RANGE,
        guard: Arc::new(|p: &PhasePoint| match *p {
            PhasePoint::Canonical { q, .. } if q.sinh().abs() > 0.0 => Ok(()),
            _ => Err("sinh q = 0".into()),
        }),
    })
}

/// Direct Hamiltonian
/// `p^2 + b1/sinh^2 q + b2/cosh^2 q + b3 sinh^2 q + b4 sinh^2 q cosh^2 q + b0`.
#[derive(Debug, Clone)]
pub struct DirectHamiltonian {
    pub observable: Observable,
    /// `false` when `beta4 > 0`: no real pencil maps onto this Hamiltonian.
    pub has_real_pencil: bool,
}

pub fn pt_direct_hamiltonian(beta: [f64; 5]) -> DirectHamiltonian {
    let [b0, b1, b2, b3, b4] = beta;
    let observable = Observable::canonical(
        "W_direct",
        move |q, p| {
            let (s2, c2) = (q.sinh().powi(2), q.cosh().powi(2));
            p * p + b1 / s2 + b2 / c2 + b3 * s2 + b4 * s2 * c2 + b0
        },
        move |q, p| {
            let (s, c) = (q.sinh(), q.cosh());
            let dq = -2.0 * b1 * c / (s * s * s) - 2.0 * b2 * s / (c * c * c)
                + b3 * 2.0 * s * c
                // d/dq (sinh^2 cosh^2) = d/dq (sinh^2 2q / 4) = sinh 4q / 2
                + b4 * 0.5 * (4.0 * q).sinh();
            (dq, 2.0 * p)
        },
    );
    DirectHamiltonian {
        observable,
        has_real_pencil: b4 <= 0.0,
    }
}

fn pt_pencil_parts(model: &ModelSpec) -> Result<(f64, f64, f64), ModelError> {
    let ModelFamily::PoeschlTeller {
        beta0,
        beta1,
        beta2,
    } = model.family
    else {
        return Err(ModelError::WrongModel {
            expected: "poeschl_teller",
        });
    };
    if model.tau.tau4() != 1.0 {
        return Err(ModelError::InvalidParameter {
            name: "tau",
            reason: "the direct form needs tau4 = 1".into(),
        });
    }
    Ok((beta0, beta1, beta2))
}

/// Coefficients `beta0..beta4` of the direct form equivalent to a
/// Poeschl–Teller pencil with `tau1 = 0, tau4 = 1`.
pub fn pt_equivalent_betas(model: &ModelSpec) -> Result<[f64; 5], ModelError> {
    let (beta0, beta1, beta2) = pt_pencil_parts(model)?;
    let t = model.tau;
    Ok([
        beta0 + t.tau0(),
        beta1,
        beta2,
        t.tau3(),
        -4.0 * t.tau2() * t.tau2(),
    ])
}

/// Maps a pencil point `(q, p)` to the direct-form point `(q, p + tau2 phi'(q))`.
pub fn pt_direct_point(model: &ModelSpec, x: &PhasePoint) -> Result<PhasePoint, ModelError> {
    pt_pencil_parts(model)?;
    match *x {
        PhasePoint::Canonical { q, p } => Ok(PhasePoint::canonical(
            q,
            p + model.tau.tau2() * (2.0 * q).sinh(),
        )),
        _ => Err(ModelError::WrongModel {
            expected: "poeschl_teller",
        }),
    }
}

/// `(u^2, d(u^2)/dq)` for the relativistic potential.
fn a1_u_squared(beta0: f64, beta1: f64, beta2: f64, q: f64) -> (f64, f64) {
    poeschl_teller_potential(beta0, beta1, beta2, q)
}

/// `(u, du/dq)`; `NaN` outside the positivity domain.
fn a1_u(beta0: f64, beta1: f64, beta2: f64, q: f64) -> (f64, f64) {
    let (v, dv) = a1_u_squared(beta0, beta1, beta2, q);
    let u = v.sqrt();
    (u, dv / (2.0 * u))
}

fn check_a1_positivity(
    beta0: f64,
    beta1: f64,
    beta2: f64,
    range: (f64, f64),
) -> Result<(), ModelError> {
    const GRID: usize = 1000;
    let offending: Vec<f64> = (0..=GRID)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / GRID as f64)
        .filter(|&q| {
            let v = a1_u_squared(beta0, beta1, beta2, q).0;
            !(v > 0.0)
        })
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Positivity { offending })
    }
}

/// Relativistic pair `X = sinh^2 q`, `Y = u(q) cosh p` with
/// `u^2 = beta1/sinh^2 q + beta2/cosh^2 q + beta0`, so
/// `Z^2 = U2(X) Y^2 + U0(X)` with `U2 = 4x(1+x)` and
/// `U0 = -4 (beta0 x^2 + (beta0+beta1+beta2) x + beta1)`.
pub fn build_a1(
    beta0: f64,
    beta1: f64,
    beta2: f64,
    tau: PencilCoefficients,
) -> Result<ModelSpec, ModelError> {
    build_a1_with_range(beta0, beta1, beta2, tau, DEFAULT_Q_RANGE)
}

pub fn build_a1_with_range(
    beta0: f64,
    beta1: f64,
    beta2: f64,
    tau: PencilCoefficients,
    q_range: (f64, f64),
) -> Result<ModelSpec, ModelError> {
    finite("beta0", beta0)?;
    finite("beta1", beta1)?;
    finite("beta2", beta2)?;
    check_a1_positivity(beta0, beta1, beta2, q_range)?;

    let x = sinh2_observable();
    let y = Observable::canonical(
        "Y",
        move |q, p| a1_u(beta0, beta1, beta2, q).0 * p.cosh(),
        move |q, p| {
            let (u, du) = a1_u(beta0, beta1, beta2, q);
            (du * p.cosh(), u * p.sinh())
        },
    );
    let z = Observable::canonical(
        "Z",
        move |q, p| a1_u(beta0, beta1, beta2, q).0 * (2.0 * q).sinh() * p.sinh(),
        move |q, p| {
            let (u, du) = a1_u(beta0, beta1, beta2, q);
            let (f1, f2) = ((2.0 * q).sinh(), 2.0 * (2.0 * q).cosh());
            ((du * f1 + u * f2) * p.sinh(), u * f1 * p.cosh())
        },
    );
    let [t0, t1, t2, t3, t4] = tau.as_array();
    let w = Observable::canonical(
        "W",
        move |q, p| {
            let (u, _) = a1_u(beta0, beta1, beta2, q);
            let s2 = q.sinh().powi(2);
            (t1 * s2 + t4) * u * p.cosh() + t2 * u * (2.0 * q).sinh() * p.sinh() + t3 * s2 + t0
        },
        move |q, p| {
            let (u, du) = a1_u(beta0, beta1, beta2, q);
            let s2 = q.sinh().powi(2);
            let (f1, f2) = ((2.0 * q).sinh(), 2.0 * (2.0 * q).cosh());
            let a = t1 * s2 + t4;
            let dq = t1 * f1 * u * p.cosh()
                + a * du * p.cosh()
                + t2 * (du * f1 + u * f2) * p.sinh()
                + t3 * f1;
            let dp = a * u * p.sinh() + t2 * u * f1 * p.cosh();
            (dq, dp)
        },
    );
    let mut alpha = [[0.0; 3]; 3];
    alpha[1][2] = 4.0;
    alpha[2][2] = 4.0;
    alpha[0][0] = -4.0 * beta1;
    alpha[1][0] = -4.0 * (beta0 + beta1 + beta2);
    alpha[2][0] = -4.0 * beta0;

    let params = BTreeMap::from([
        ("beta0".to_string(), beta0),
        ("beta1".to_string(), beta1),
        ("beta2".to_string(), beta2),
    ]);
    Ok(ModelSpec {
        name: "a1".into(),
        kind: PhaseKind::Canonical,
        x,
        y,
        z,
        w,
        phi: BiQuadratic::new(alpha),
        tau,
        params,
        family: ModelFamily::A1 {
            beta0,
            beta1,
            beta2,
        },
        q_range,
        guard: Arc::new(move |p: &PhasePoint| match *p {
            PhasePoint::Canonical { q, .. } => {
                let v = a1_u_squared(beta0, beta1, beta2, q).0;
                if v > 0.0 {
                    Ok(())
                } else {
                    Err(format!("u^2(q) = {v} <= 0 at q = {q}"))
                }
            }
            _ => Err("expected a canonical point".into()),
        }),
    })
}

fn a1_parts(model: &ModelSpec) -> Result<(f64, f64, f64), ModelError> {
    match model.family {
        ModelFamily::A1 {
            beta0,
            beta1,
            beta2,
        } => Ok((beta0, beta1, beta2)),
        _ => Err(ModelError::WrongModel { expected: "a1" }),
    }
}

/// `a = (tau1 sinh^2 q + tau4) u` and `b = tau2 u phi'(q)`, the coefficients of
/// `cosh p` and `sinh p` in the relativistic pencil.
fn a1_kinetic_coefficients(model: &ModelSpec, q: f64) -> Result<(f64, f64), ModelError> {
    let (b0, b1, b2) = a1_parts(model)?;
    let t = model.tau;
    let u = a1_u(b0, b1, b2, q).0;
    Ok((
        (t.tau1() * q.sinh().powi(2) + t.tau4()) * u,
        t.tau2() * u * (2.0 * q).sinh(),
    ))
}

/// `W = Phi1(q) cosh p + Phi0(q)` with `Phi0 = tau3 sinh^2 q + tau0` and
/// `Phi1 = u sqrt((tau1 sinh^2 q + tau4)^2 - tau2^2 sinh^2 2q)`, signed like
/// `tau1 sinh^2 q + tau4`.
///
/// Requires the radicand to be positive on the model's `q` window.
pub fn a1_direct_hamiltonian(model: &ModelSpec) -> Result<Observable, ModelError> {
    let (b0, b1, b2) = a1_parts(model)?;
    let [t0, t1, t2, t3, t4] = model.tau.as_array();
    let radicand = move |q: f64| {
        let a = t1 * q.sinh().powi(2) + t4;
        let f1 = (2.0 * q).sinh();
        a * a - t2 * t2 * f1 * f1
    };
    const GRID: usize = 1000;
    let (lo, hi) = model.q_range;
    for i in 0..=GRID {
        let q = lo + (hi - lo) * i as f64 / GRID as f64;
        if !(radicand(q) > 0.0) {
            return Err(ModelError::SquareRoot { q });
        }
    }
    let sign = move |q: f64| (t1 * q.sinh().powi(2) + t4).signum();
    Ok(Observable::canonical(
        "W_direct",
        move |q, p| {
            let u = a1_u(b0, b1, b2, q).0;
            sign(q) * u * radicand(q).sqrt() * p.cosh() + t3 * q.sinh().powi(2) + t0
        },
        move |q, p| {
            let (u, du) = a1_u(b0, b1, b2, q);
            let a = t1 * q.sinh().powi(2) + t4;
            let (f1, f2) = ((2.0 * q).sinh(), 2.0 * (2.0 * q).cosh());
            let r = radicand(q).sqrt();
            let dr = (2.0 * a * t1 * f1 - 2.0 * t2 * t2 * f1 * f2) / (2.0 * r);
            let phi1 = sign(q) * u * r;
            let dphi1 = sign(q) * (du * r + u * dr);
            (dphi1 * p.cosh() + t3 * f1, phi1 * p.sinh())
        },
    ))
}

/// Maps a pencil point to the direct-form point `(q, p + chi(q))` with
/// `tanh chi = tau2 phi'(q) / (tau1 sinh^2 q + tau4)`.
pub fn a1_direct_point(model: &ModelSpec, x: &PhasePoint) -> Result<PhasePoint, ModelError> {
    let PhasePoint::Canonical { q, p } = *x else {
        return Err(ModelError::WrongModel { expected: "a1" });
    };
    let (a, b) = a1_kinetic_coefficients(model, q)?;
    if !(a.abs() > b.abs()) {
        return Err(ModelError::SquareRoot { q });
    }
    Ok(PhasePoint::canonical(q, p + (b / a).atanh()))
}

/// Zhukovsky–Volterra gyrostat: `X = s1 + beta s2`, `Y = s1 - beta s2`,
/// `Z = -2 beta s3` on the sphere of the reference point, with
/// `Phi = 4 S^2 beta^2 - (beta^2+1)(X^2+Y^2) + 2(1-beta^2) X Y`.
pub fn build_zv_gyrostat(
    beta: f64,
    tau: PencilCoefficients,
    reference: PhasePoint,
) -> Result<ModelSpec, ModelError> {
    finite("beta", beta)?;
    if beta == 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "beta",
            reason: "beta = 0 makes X and Y coincide".into(),
        });
    }
    let casimir = match su2_casimir(&reference) {
        Ok(c) if c > 0.0 && c.is_finite() => c,
        Ok(_) => {
            return Err(ModelError::InvalidParameter {
                name: "reference",
                reason: "S^2 must be positive".into(),
            })
        }
        Err(_) => {
            return Err(ModelError::InvalidParameter {
                name: "reference",
                reason: "the gyrostat lives on su(2)".into(),
            })
        }
    };
    let b = beta;
    let x = Observable::su2("X", move |s| s[0] + b * s[1], move |_| [1.0, b, 0.0]);
    let y = Observable::su2("Y", move |s| s[0] - b * s[1], move |_| [1.0, -b, 0.0]);
    let z = Observable::su2("Z", move |s| -2.0 * b * s[2], move |_| [0.0, 0.0, -2.0 * b]);
    let [t0, t1, t2, t3, t4] = tau.as_array();
    let w = Observable::su2(
        "W",
        move |s| {
            t1 * (s[0] * s[0] - b * b * s[1] * s[1]) - 2.0 * b * t2 * s[2]
                + (t3 + t4) * s[0]
                + b * (t3 - t4) * s[1]
                + t0
        },
        move |s| {
            [
                2.0 * t1 * s[0] + t3 + t4,
                -2.0 * t1 * b * b * s[1] + b * (t3 - t4),
                -2.0 * b * t2,
            ]
        },
    );
    let mut alpha = [[0.0; 3]; 3];
    alpha[0][0] = 4.0 * casimir * b * b;
    alpha[2][0] = -(b * b + 1.0);
    alpha[0][2] = -(b * b + 1.0);
    alpha[1][1] = 2.0 * (1.0 - b * b);

    let params = BTreeMap::from([("beta".to_string(), beta), ("S2".to_string(), casimir)]);
    Ok(ModelSpec {
        name: "zv_gyrostat".into(),
        kind: PhaseKind::SU2,
        x,
        y,
        z,
        w,
        phi: BiQuadratic::new(alpha),
        tau,
        params,
        family: ModelFamily::ZvGyrostat { beta, casimir },
        q_range: DEFAULT_Q_RANGE,
        guard: Arc::new(|_: &PhasePoint| Ok(())),
    })
}

/// Pencil value assembled from the model's `X, Y, Z` at `p`.
pub fn pencil_value_at(model: &ModelSpec, p: &PhasePoint) -> f64 {
    let v = model.observables_at(p);
    heun_value(&model.tau, v.x, v.y, v.z)
}
