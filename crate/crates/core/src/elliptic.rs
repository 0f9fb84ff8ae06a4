//! Binary-quartic invariants, the Weierstrass `P` function on the real axis,
//! and the closed-form solution of `xdot^2 = f(x)` seeded at a turning point.

use serde::Serialize;
use thiserror::Error;

use crate::pencil::QuarticPolynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("argument {z} is within {distance:e} of a lattice point")]
    PoleProximity { z: f64, distance: f64 },
    #[error("seed {x0} is not a root of the quartic (|f(x0)| = {residual:e})")]
    NotARoot { x0: f64, residual: f64 },
    #[error("seed {x0} is a repeated root; the motion is elementary")]
    RepeatedRoot { x0: f64 },
}

/// Invariants `(g2, g3)` of the Weierstrass lattice attached to a quartic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticInvariants {
    pub g2: f64,
    pub g3: f64,
}

impl EllipticInvariants {
    pub const fn new(g2: f64, g3: f64) -> Self {
        EllipticInvariants { g2, g3 }
    }

    /// `g2^3 - 27 g3^2`.
    pub fn discriminant(&self) -> f64 {
        self.g2.powi(3) - 27.0 * self.g3 * self.g3
    }
}

/// Invariants of `f = c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0`, normalised so that
/// `4x^3 - g2 x - g3` returns `(g2, g3)`.
pub fn quartic_invariants(f: &QuarticPolynomial) -> EllipticInvariants {
    let [c0, c1, c2, c3, c4] = f.c;
    let g2 = c4 * c0 - c3 * c1 / 4.0 + c2 * c2 / 12.0;
    let g3 = c4 * c2 * c0 / 6.0 + c3 * c2 * c1 / 48.0
        - c2 * c2 * c2 / 216.0
        - c4 * c1 * c1 / 16.0
        - c3 * c3 * c0 / 16.0;
    EllipticInvariants { g2, g3 }
}

const POLE_DISTANCE: f64 = 1e-8;
const MAX_LAURENT_TERMS: usize = 400;

/// Laurent coefficients `c_k`, k >= 2, of `P(z) = z^-2 + sum c_k z^(2k-2)`.
fn laurent_coefficients(inv: &EllipticInvariants, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n.max(4)];
    c[2] = inv.g2 / 20.0;
    c[3] = inv.g3 / 28.0;
    for k in 4..n {
        let s: f64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
        c[k] = 3.0 / (((2 * k + 1) * (k - 3)) as f64) * s;
    }
    c
}

fn laurent(w: f64, inv: &EllipticInvariants) -> (f64, f64) {
    let coeffs = laurent_coefficients(inv, MAX_LAURENT_TERMS);
    let w2 = w * w;
    let mut p = 1.0 / w2;
    let mut dp = -2.0 / (w2 * w);
    // w^(2k-2) for k = 2 is w^2
    let mut pow = w2;
    // odd-indexed coefficients vanish when g3 = 0, so one small term is not enough
    let mut small_run = 0;
    for (k, &ck) in coeffs.iter().enumerate().skip(2) {
        let term = ck * pow;
        let dterm = (2 * k - 2) as f64 * ck * pow / w;
        p += term;
        dp += dterm;
        if term.abs() < 1e-17 * p.abs() && dterm.abs() < 1e-17 * dp.abs() {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
        pow *= w2;
    }
    (p, dp)
}

/// `(P(z), P'(z))` for real `z` and real invariants.
///
/// The argument is halved until the Laurent series at the origin converges
/// quickly, then the duplication formulas bring the value back to `z`.
pub fn weierstrass_p(z: f64, inv: &EllipticInvariants) -> Result<(f64, f64), EllipticError> {
    let r = z.abs();
    if r < POLE_DISTANCE {
        return Err(EllipticError::PoleProximity { z, distance: r });
    }
    let scale = 1f64
        .max(inv.g2.abs().powf(0.25))
        .max(inv.g3.abs().powf(1.0 / 6.0));
    let mut w = r;
    let mut doublings = 0;
    while w * scale > 0.5 {
        w *= 0.5;
        doublings += 1;
    }
    let (mut p, mut dp) = laurent(w, inv);
    for _ in 0..doublings {
        let ddp = 6.0 * p * p - 0.5 * inv.g2;
        let p2 = -2.0 * p + ddp * ddp / (4.0 * dp * dp);
        let dp2 = -dp + 3.0 * p * ddp / dp - ddp.powi(3) / (4.0 * dp.powi(3));
        p = p2;
        dp = dp2;
    }
    let distance = if p.is_finite() {
        1.0 / p.abs().sqrt()
    } else {
        0.0
    };
    if !p.is_finite() || !dp.is_finite() || (p > 0.0 && distance < POLE_DISTANCE) {
        return Err(EllipticError::PoleProximity { z, distance });
    }
    Ok((p, if z < 0.0 { -dp } else { dp }))
}

/// Magnitude of the terms of `f` at `x`, used to scale root tests.
fn term_scale(f: &QuarticPolynomial, x: f64) -> f64 {
    f.c.iter()
        .enumerate()
        .map(|(k, c)| (c * x.powi(k as i32)).abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE)
}

/// Solution of `xdot^2 = f(x)` with `x(0) = x0`, where `x0` is a simple root:
/// `x(t) = x0 + f'(x0) / (4 P(t) - f''(x0)/6)`.
pub fn closed_form_solution(f: &QuarticPolynomial, x0: f64, t: f64) -> Result<f64, EllipticError> {
    let scale = term_scale(f, x0);
    let fx = f.eval(x0);
    if fx.abs() > 1e-10 * scale {
        return Err(EllipticError::NotARoot {
            x0,
            residual: fx.abs(),
        });
    }
    let d1 = f.eval_derivative(x0);
    let d1_scale =
        f.c.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| (k as f64 * c * x0.powi(k as i32 - 1)).abs())
            .sum::<f64>();
    if d1.abs() <= 1e-8 * d1_scale.max(f64::MIN_POSITIVE) {
        return Err(EllipticError::RepeatedRoot { x0 });
    }
    let d2 = f.eval_second_derivative(x0);
    let inv = quartic_invariants(f);
    match weierstrass_p(t, &inv) {
        Ok((p, _)) => Ok(x0 + d1 / (4.0 * p - d2 / 6.0)),
        // x - x0 ~ f'(x0) (t - t_pole)^2 / 4 there
        Err(EllipticError::PoleProximity { .. }) => Ok(x0),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DynamicsKind {
    /// Second-order elliptic motion.
    Elliptic,
    /// Degree at most two: exponential, trigonometric or polynomial in time.
    Elementary,
    /// Degree three or four but with a repeated root.
    DegeneratePolynomial,
}

impl DynamicsKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsKind::Elliptic => "Elliptic",
            DynamicsKind::Elementary => "Elementary",
            DynamicsKind::DegeneratePolynomial => "DegeneratePolynomial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsClass {
    pub kind: DynamicsKind,
    pub effective_degree: usize,
    pub repeated_root: bool,
    /// `g2^3 - 27 g3^2` of the quartic normalised to unit max coefficient.
    pub normalized_discriminant: f64,
}

/// Coefficients below this fraction of the largest one count as zero.
pub const DEGREE_TOLERANCE: f64 = 1e-12;
/// Normalised discriminants below this count as a repeated root.
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-10;

pub fn classify_dynamics(f: &QuarticPolynomial) -> DynamicsClass {
    let scale = f.max_abs();
    if scale == 0.0 {
        return DynamicsClass {
            kind: DynamicsKind::Elementary,
            effective_degree: 0,
            repeated_root: false,
            normalized_discriminant: 0.0,
        };
    }
    let mut g = f.scale(1.0 / scale);
    for c in g.c.iter_mut() {
        if c.abs() < DEGREE_TOLERANCE {
            *c = 0.0;
        }
    }
    let degree = g.effective_degree(DEGREE_TOLERANCE);
    // Read as a binary quartic, a cubic has a simple root at infinity, so the
    // same discriminant covers degrees three and four.
    let disc = quartic_invariants(&g).discriminant();
    let repeated = match degree {
        0 | 1 => false,
        2 => (g.c[1] * g.c[1] - 4.0 * g.c[2] * g.c[0]).abs() < DISCRIMINANT_TOLERANCE,
        _ => disc.abs() < DISCRIMINANT_TOLERANCE,
    };
    let kind = if degree <= 2 {
        DynamicsKind::Elementary
    } else if repeated {
        DynamicsKind::DegeneratePolynomial
    } else {
        DynamicsKind::Elliptic
    };
    DynamicsClass {
        kind,
        effective_degree: degree,
        repeated_root: repeated,
        normalized_discriminant: disc,
    }
}
